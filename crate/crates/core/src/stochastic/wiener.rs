use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Sampled Brownian motion on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerPath {
    pub dt: f64,
    /// `W(t_{j+1}) - W(t_j)`, each distributed as `sqrt(dt) * N(0, 1)`.
    pub increments: Vec<f64>,
    pub seed: u64,
}

impl WienerPath {
    /// `W(t_0) ..= W(t_n)`, starting from `W(0) = 0`.
    pub fn values(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.increments.len() + 1);
        let mut acc = 0.0;
        w.push(acc);
        for dw in &self.increments {
            acc += dw;
            w.push(acc);
        }
        w
    }

    pub fn end_value(&self) -> f64 {
        self.increments.iter().sum()
    }
}

/// Generator for stream `stream` of `seed`. Distinct streams of one seed
/// are independent ChaCha8 keystreams.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` Gaussian increments with variance `dt` from stream 0 of `seed`.
pub fn wiener_increments(n: usize, dt: f64, seed: u64) -> Result<WienerPath> {
    wiener_increments_stream(n, dt, seed, 0)
}

pub fn wiener_increments_stream(n: usize, dt: f64, seed: u64, stream: u64) -> Result<WienerPath> {
    if n == 0 {
        return Err(Error::Config("a Wiener path needs at least one increment".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let mut rng = path_rng(seed, stream);
    let scale = dt.sqrt();
    let increments = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();
    Ok(WienerPath { dt, increments, seed })
}

/// Left-endpoint stochastic sum `sum_j h(t_j) (W(t_{j+1}) - W(t_j))`.
pub fn ito_sum(h: &[f64], path: &WienerPath) -> Result<f64> {
    if h.len() != path.increments.len() {
        return Err(Error::LengthMismatch {
            what: "integrand",
            got: h.len(),
            expected: path.increments.len(),
        });
    }
    Ok(h.iter().zip(&path.increments).map(|(h, dw)| h * dw).sum())
}
