//! Circuits driven by white noise: Wiener paths, Euler-Maruyama
//! integration and ensemble statistics.
//!
//! A noise card `N<name> p n <intensity>` injects the current
//! `intensity * dW/dt` into `p` and draws it from `n`. The intensity is in
//! A·s^(1/2); on a node with capacitance `C` it produces a voltage noise of
//! `intensity / C` V·s^(-1/2).

mod em;
mod ensemble;
mod wiener;

pub use em::{em_transient, forward_euler, EmConfig, EmPath};
pub use ensemble::{ensemble, quantile, EnsembleStats, PeakSummary, DEFAULT_LEVELS};
pub use wiener::{ito_sum, path_rng, wiener_increments, wiener_increments_stream, WienerPath};
