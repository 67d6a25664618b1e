//! Circuit simulation for nanodevices with non-monotonic I-V curves.
//!
//! Nonlinear devices are replaced at every time point by their positive
//! equivalent conductance `I(V)/V`, so each step costs one linear solve and
//! negative differential resistance never reaches the matrix. A naive
//! Newton-Raphson solver is kept alongside as a baseline, and an
//! Euler-Maruyama engine handles decks with white-noise sources.

pub mod devices;
pub mod error;
pub mod flops;
pub mod mna;
pub mod netlist;
pub mod nr;
pub mod stochastic;
pub mod swec;

pub use error::{Error, Result};
pub use flops::FlopCounter;
pub use mna::{Circuit, MnaSystem};

pub use netlist::{parse_netlist, Netlist};
