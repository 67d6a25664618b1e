use rand_distr::{Distribution, StandardNormal};

use super::wiener::path_rng;
use crate::devices::G_FLOOR;
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::mna::{assemble, Circuit, Drive, LuFactors};

/// Settings for one fixed-step stochastic run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub dt: f64,
    pub t_stop: f64,
    pub seed: u64,
    /// Starting node voltages; only capacitive nodes are taken from it.
    /// All-zero when absent.
    pub initial: Option<Vec<f64>>,
    /// Record every `stride`-th step (the last step is always recorded).
    pub stride: usize,
    /// `[t_a, t_b]` over which each path's peak node voltage is tracked.
    pub window: Option<(f64, f64)>,
}

impl EmConfig {
    pub fn new(dt: f64, t_stop: f64, seed: u64) -> Self {
        EmConfig {
            dt,
            t_stop,
            seed,
            initial: None,
            stride: 1,
            window: None,
        }
    }

    /// Number of steps; `t_stop` is rounded to a whole number of `dt`.
    pub fn steps(&self) -> usize {
        ((self.t_stop / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_stop > 0.0 && self.t_stop.is_finite()) {
            return Err(Error::Config(format!("t_stop must be positive, got {}", self.t_stop)));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        if let Some((a, b)) = self.window {
            if !(0.0 <= a && a < b && b <= self.t_stop) {
                return Err(Error::Config(format!(
                    "window must satisfy 0 <= t_a < t_b <= t_stop, got [{a}, {b}]"
                )));
            }
        }
        Ok(())
    }
}

/// One sample path.
#[derive(Debug, Clone, PartialEq)]
pub struct EmPath {
    pub times: Vec<f64>,
    /// Node voltages at each recorded time.
    pub voltages: Vec<Vec<f64>>,
    /// Per-node maximum over the window; `-inf` without a window.
    pub window_peak: Vec<f64>,
    pub flops: FlopCounter,
    pub warnings: Vec<String>,
}

/// The circuit split into capacitive (state) nodes and everything that is
/// solved algebraically each step.
struct Prepared<'a> {
    ckt: &'a Circuit,
    dim: usize,
    dynamic: Vec<usize>,
    algebraic: Vec<usize>,
    /// `C^-1` restricted to the capacitive nodes, row-major.
    cinv: Vec<f64>,
    /// `C^-1 B` column for every noise source.
    noise: Vec<Vec<f64>>,
    /// Conductance matrix and factored algebraic block, when nothing depends on the state.
    linear: Option<(Vec<f64>, Option<LuFactors>)>,
    warnings: Vec<String>,
}

impl<'a> Prepared<'a> {
    fn new(ckt: &'a Circuit, dt: f64, require_noise: bool) -> Result<Self> {
        let n = ckt.n();
        let dim = ckt.dim();
        let cap = ckt.node_capacitance();
        let dynamic: Vec<usize> = (0..n).filter(|&i| cap[i] > 0.0).collect();
        let algebraic: Vec<usize> = (0..dim).filter(|&i| i >= n || cap[i] == 0.0).collect();
        if dynamic.is_empty() {
            return Err(Error::Circuit("stochastic analysis needs at least one capacitive node".into()));
        }
        if require_noise && ckt.noises.is_empty() {
            return Err(Error::Circuit("stochastic analysis needs at least one noise source".into()));
        }
        for src in &ckt.noises {
            for node in [src.a, src.b].into_iter().flatten() {
                if cap[node] == 0.0 {
                    return Err(Error::Circuit(format!(
                        "noise source `{}` drives node `{}`, which has no capacitance",
                        src.name, ckt.node_names[node]
                    )));
                }
            }
        }

        let d = dynamic.len();
        let c_full = ckt.capacitance_matrix();
        let c_dd: Vec<f64> = dynamic
            .iter()
            .flat_map(|&i| dynamic.iter().map(move |&j| (i, j)))
            .map(|(i, j)| c_full[i * n + j])
            .collect();
        let mut scratch = FlopCounter::ZERO;
        let lu = LuFactors::factor(c_dd, d, &mut scratch)?;
        let mut cinv = vec![0.0; d * d];
        for col in 0..d {
            let mut e = vec![0.0; d];
            e[col] = 1.0;
            let x = lu.solve(&e, &mut scratch);
            for row in 0..d {
                cinv[row * d + col] = x[row];
            }
        }
        let noise = ckt
            .noises
            .iter()
            .map(|src| {
                let mut b = vec![0.0; d];
                for (k, &node) in dynamic.iter().enumerate() {
                    if src.a == Some(node) {
                        b[k] += src.value;
                    }
                    if src.b == Some(node) {
                        b[k] -= src.value;
                    }
                }
                (0..d)
                    .map(|row| (0..d).map(|col| cinv[row * d + col] * b[col]).sum())
                    .collect()
            })
            .collect();

        let mut prepared = Prepared {
            ckt,
            dim,
            dynamic,
            algebraic,
            cinv,
            noise,
            linear: None,
            warnings: Vec::new(),
        };

        // Stability of the explicit drift: compare dt with each node's RC constant.
        let x0 = vec![0.0; dim];
        let (g, _) = prepared.conductance(&x0, 0.0, &mut scratch)?;
        let fastest = prepared
            .dynamic
            .iter()
            .map(|&i| cap[i] / g[i * dim + i])
            .fold(f64::INFINITY, f64::min);
        if dt >= fastest / 2.0 {
            prepared.warnings.push(format!(
                "dt = {dt:e} s is at least half the fastest RC time constant ({fastest:e} s); the explicit drift may be unstable"
            ));
        }
        if ckt.is_linear() {
            let lu = prepared.factor_algebraic(&g, &mut scratch)?;
            prepared.linear = Some((g, lu));
        }
        Ok(prepared)
    }

    /// `G(t)` and `b(t)` with device conductances evaluated at `x`.
    fn conductance(&self, x: &[f64], t: f64, fc: &mut FlopCounter) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut geq = Vec::with_capacity(self.ckt.devices.len());
        for d in &self.ckt.devices {
            geq.push(d.geq(x, fc)?.max(G_FLOOR));
        }
        let sys = assemble(self.ckt, &geq, x, f64::INFINITY, Drive::at(t), fc)?;
        Ok((sys.matrix, sys.rhs))
    }

    fn factor_algebraic(&self, g: &[f64], fc: &mut FlopCounter) -> Result<Option<LuFactors>> {
        let a = self.algebraic.len();
        if a == 0 {
            return Ok(None);
        }
        let block: Vec<f64> = self
            .algebraic
            .iter()
            .flat_map(|&i| self.algebraic.iter().map(move |&j| g[i * self.dim + j]))
            .collect();
        LuFactors::factor(block, a, fc).map(Some)
    }

    /// Source vector at `t` for a linear circuit: only the source rows are non-zero.
    fn linear_rhs(&self, t: f64) -> Vec<f64> {
        let n = self.ckt.n();
        let mut b = vec![0.0; self.dim];
        for k in 0..self.ckt.sources.len() {
            b[n + k] = self.ckt.source_value(k, Drive::at(t));
        }
        b
    }

    /// Solves the algebraic unknowns of `x` at time `t` for the current
    /// capacitive voltages and returns `C^-1 (b - G x)` on the capacitive nodes.
    fn drift(&self, x: &mut [f64], t: f64, fc: &mut FlopCounter) -> Result<Vec<f64>> {
        let dim = self.dim;
        let owned;
        let (g, b, lu) = match &self.linear {
            Some((g, lu)) => (g.as_slice(), self.linear_rhs(t), lu.as_ref()),
            None => {
                let (g, b) = self.conductance(x, t, fc)?;
                let lu = self.factor_algebraic(&g, fc)?;
                owned = (g, lu);
                (owned.0.as_slice(), b, owned.1.as_ref())
            }
        };
        if let Some(lu) = lu {
            let rhs: Vec<f64> = self
                .algebraic
                .iter()
                .map(|&i| {
                    let coupling: f64 = self.dynamic.iter().map(|&j| g[i * dim + j] * x[j]).sum();
                    b[i] - coupling
                })
                .collect();
            let d = self.dynamic.len() as u64;
            fc.mul(d * rhs.len() as u64);
            fc.add(d * rhs.len() as u64);
            let xa = lu.solve(&rhs, fc);
            for (&i, v) in self.algebraic.iter().zip(xa) {
                x[i] = v;
            }
        }
        let f: Vec<f64> = self
            .dynamic
            .iter()
            .map(|&i| {
                let gx: f64 = (0..dim).map(|j| g[i * dim + j] * x[j]).sum();
                b[i] - gx
            })
            .collect();
        let d = self.dynamic.len();
        fc.mul((d * dim) as u64);
        fc.add((d * dim + d) as u64);
        let out = (0..d)
            .map(|row| (0..d).map(|col| self.cinv[row * d + col] * f[col]).sum())
            .collect();
        fc.mul((d * d) as u64);
        fc.add((d * d) as u64);
        Ok(out)
    }

    fn initial_state(&self, cfg: &EmConfig) -> Result<Vec<f64>> {
        let n = self.ckt.n();
        let mut x = vec![0.0; self.dim];
        if let Some(init) = &cfg.initial {
            if init.len() != n {
                return Err(Error::LengthMismatch {
                    what: "initial node voltages",
                    got: init.len(),
                    expected: n,
                });
            }
            for &i in &self.dynamic {
                x[i] = init[i];
            }
        }
        Ok(x)
    }

    /// Integrates one path. `noise` receives the path's generator, or `None`
    /// for the deterministic forward-Euler recurrence.
    fn run(&self, cfg: &EmConfig, mut rng: Option<rand_chacha::ChaCha8Rng>) -> Result<EmPath> {
        cfg.validate()?;
        let n = self.ckt.n();
        let steps = cfg.steps();
        let mut fc = FlopCounter::ZERO;
        let mut x = self.initial_state(cfg)?;
        let mut times = Vec::with_capacity(steps / cfg.stride + 2);
        let mut voltages = Vec::with_capacity(steps / cfg.stride + 2);
        let mut peak = vec![f64::NEG_INFINITY; n];
        let sqrt_dt = cfg.dt.sqrt();
        let mut dw = vec![0.0; self.noise.len()];

        for j in 0..=steps {
            let t = j as f64 * cfg.dt;
            let drift = self.drift(&mut x, t, &mut fc)?;
            if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFiniteVoltage(*bad));
            }
            if j % cfg.stride == 0 || j == steps {
                times.push(t);
                voltages.push(x[..n].to_vec());
            }
            if let Some((ta, tb)) = cfg.window {
                if t >= ta && t <= tb {
                    for (p, v) in peak.iter_mut().zip(&x[..n]) {
                        *p = p.max(*v);
                    }
                }
            }
            if j == steps {
                break;
            }
            if let Some(rng) = rng.as_mut() {
                for w in dw.iter_mut() {
                    let z: f64 = StandardNormal.sample(rng);
                    *w = sqrt_dt * z;
                }
            }
            for (k, &node) in self.dynamic.iter().enumerate() {
                let mut incr = drift[k] * cfg.dt;
                if rng.is_some() {
                    for (col, w) in self.noise.iter().zip(&dw) {
                        incr += col[k] * w;
                    }
                }
                x[node] += incr;
            }
            let d = self.dynamic.len() as u64;
            fc.mul(d * (1 + self.noise.len() as u64));
            fc.add(d * (1 + self.noise.len() as u64));
        }
        Ok(EmPath {
            times,
            voltages,
            window_peak: peak,
            flops: fc,
            warnings: self.warnings.clone(),
        })
    }
}

/// One Euler-Maruyama sample path, using stream `path_index` of `cfg.seed`:
///
/// ```text
/// X_{j+1} = X_j + C^-1 (b(t_j) - G(t_j) X_j) dt + C^-1 B dW_j
/// ```
///
/// on the capacitive nodes, with the remaining node voltages and source
/// currents solved algebraically at every step. Device conductances are
/// evaluated at the previous state.
pub fn em_transient(ckt: &Circuit, cfg: &EmConfig, path_index: u64) -> Result<EmPath> {
    let prepared = Prepared::new(ckt, cfg.dt, true)?;
    prepared.run(cfg, Some(path_rng(cfg.seed, path_index)))
}

/// The same recurrence with the noise term removed.
pub fn forward_euler(ckt: &Circuit, cfg: &EmConfig) -> Result<EmPath> {
    let prepared = Prepared::new(ckt, cfg.dt, false)?;
    prepared.run(cfg, None)
}

pub(super) fn run_paths(
    ckt: &Circuit,
    cfg: &EmConfig,
    paths: std::ops::Range<u64>,
) -> Result<Vec<EmPath>> {
    use rayon::prelude::*;
    let prepared = Prepared::new(ckt, cfg.dt, true)?;
    paths
        .into_par_iter()
        .map(|p| prepared.run(cfg, Some(path_rng(cfg.seed, p))))
        .collect()
}
