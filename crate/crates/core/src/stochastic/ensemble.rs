use super::em::{run_paths, EmConfig, EmPath};
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::mna::Circuit;

pub const DEFAULT_LEVELS: [f64; 3] = [0.05, 0.5, 0.95];

/// Paths integrated in parallel before being folded into the accumulator.
const CHUNK: u64 = 256;

/// Distribution summary of the per-path window maxima of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSummary {
    pub mean: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub node_names: Vec<String>,
    pub times: Vec<f64>,
    /// `mean[time][node]`
    pub mean: Vec<Vec<f64>>,
    /// Unbiased sample variance, `variance[time][node]`.
    pub variance: Vec<Vec<f64>>,
    pub levels: Vec<f64>,
    /// `quantiles[level][time][node]`
    pub quantiles: Vec<Vec<Vec<f64>>>,
    pub window: Option<(f64, f64)>,
    /// `window_peaks[path][node]`, empty without a window.
    pub window_peaks: Vec<Vec<f64>>,
    /// One entry per node, empty without a window.
    pub peak_summary: Vec<PeakSummary>,
    pub paths: usize,
    pub seed: u64,
    pub flops: FlopCounter,
    pub warnings: Vec<String>,
}

impl EnsembleStats {
    pub fn node(&self, name: &str) -> Option<usize> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn std_dev(&self, time: usize, node: usize) -> f64 {
        self.variance[time][node].sqrt()
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (`h = (n - 1) p`). `sorted` must be ascending and non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

struct Accumulator {
    count: usize,
    mean: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
    /// `samples[time][node][path]`
    samples: Vec<Vec<Vec<f64>>>,
    peaks: Vec<Vec<f64>>,
    flops: FlopCounter,
}

impl Accumulator {
    fn new(times: usize, nodes: usize, paths: usize) -> Self {
        Accumulator {
            count: 0,
            mean: vec![vec![0.0; nodes]; times],
            m2: vec![vec![0.0; nodes]; times],
            samples: vec![vec![Vec::with_capacity(paths); nodes]; times],
            peaks: Vec::with_capacity(paths),
            flops: FlopCounter::ZERO,
        }
    }

    fn push(&mut self, path: EmPath, windowed: bool) {
        self.count += 1;
        let k = self.count as f64;
        for (t, v) in path.voltages.iter().enumerate() {
            for (i, &x) in v.iter().enumerate() {
                let delta = x - self.mean[t][i];
                self.mean[t][i] += delta / k;
                self.m2[t][i] += delta * (x - self.mean[t][i]);
                self.samples[t][i].push(x);
            }
        }
        if windowed {
            self.peaks.push(path.window_peak);
        }
        self.flops += path.flops;
    }
}

/// Runs `paths` Euler-Maruyama paths (path `p` on stream `p` of `cfg.seed`)
/// and collects pointwise statistics and window peaks.
///
/// Paths run in parallel but are folded in index order, so the result does
/// not depend on the thread count. Every recorded sample is kept for the
/// quantiles; use `cfg.stride` to bound memory on long runs.
pub fn ensemble(ckt: &Circuit, cfg: &EmConfig, paths: usize, levels: &[f64]) -> Result<EnsembleStats> {
    cfg.validate()?;
    if paths < 2 {
        return Err(Error::Config(format!("an ensemble needs at least 2 paths, got {paths}")));
    }
    if let Some(p) = levels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Config(format!("quantile level {p} outside [0, 1]")));
    }
    let mut levels = levels.to_vec();
    levels.sort_by(f64::total_cmp);

    let n = ckt.n();
    let windowed = cfg.window.is_some();
    let mut acc: Option<Accumulator> = None;
    let mut times = Vec::new();
    let mut warnings = Vec::new();
    let mut start = 0u64;
    while start < paths as u64 {
        let end = (start + CHUNK).min(paths as u64);
        for path in run_paths(ckt, cfg, start..end)? {
            let acc = acc.get_or_insert_with(|| {
                times = path.times.clone();
                warnings = path.warnings.clone();
                Accumulator::new(times.len(), n, paths)
            });
            acc.push(path, windowed);
        }
        start = end;
    }
    let mut acc = acc.expect("at least two paths were run");

    let denom = (acc.count - 1) as f64;
    let variance = acc
        .m2
        .iter()
        .map(|row| row.iter().map(|m2| (m2 / denom).max(0.0)).collect())
        .collect();

    let mut quantiles = vec![vec![vec![0.0; n]; times.len()]; levels.len()];
    for (t, per_node) in acc.samples.iter_mut().enumerate() {
        for (i, sample) in per_node.iter_mut().enumerate() {
            sample.sort_by(f64::total_cmp);
            for (l, &p) in levels.iter().enumerate() {
                quantiles[l][t][i] = quantile(sample, p);
            }
        }
    }

    let peak_summary = if windowed {
        (0..n)
            .map(|i| {
                let mut col: Vec<f64> = acc.peaks.iter().map(|p| p[i]).collect();
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                col.sort_by(f64::total_cmp);
                PeakSummary {
                    mean,
                    q50: quantile(&col, 0.5),
                    q95: quantile(&col, 0.95),
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(EnsembleStats {
        node_names: ckt.node_names.clone(),
        times,
        mean: acc.mean,
        variance,
        levels,
        quantiles,
        window: cfg.window,
        window_peaks: acc.peaks,
        peak_summary,
        paths,
        seed: cfg.seed,
        flops: acc.flops,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    fn compile(src: &str) -> Circuit {
        Circuit::compile(&parse_netlist(src).unwrap()).unwrap()
    }

    #[test]
    fn quantile_interpolates() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&s, 0.0), 1.0);
        assert_eq!(quantile(&s, 1.0), 4.0);
        assert!((quantile(&s, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile(&s, 0.25) - 1.75).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn zero_noise_is_degenerate() {
        let ckt = compile("V1 in 0 1\nR1 in x 1k\nC1 x 0 1p\nN1 x 0 0\n.end\n");
        let cfg = EmConfig {
            window: Some((0.0, 2e-9)),
            ..EmConfig::new(1e-11, 2e-9, 9)
        };
        let stats = ensemble(&ckt, &cfg, 2, &DEFAULT_LEVELS).unwrap();
        let x = stats.node("x").unwrap();
        assert!(stats.variance.iter().all(|row| row.iter().all(|&v| v == 0.0)));
        let last = stats.mean.last().unwrap()[x];
        assert_eq!(stats.peak_summary[x].mean, last);
        assert_eq!(stats.window_peaks[0], stats.window_peaks[1]);
    }

    #[test]
    fn rejects_single_path_and_bad_levels() {
        let ckt = compile("R1 x 0 1k\nC1 x 0 1p\nN1 x 0 1e-12\n.end\n");
        let cfg = EmConfig::new(1e-11, 1e-10, 0);
        assert!(ensemble(&ckt, &cfg, 1, &DEFAULT_LEVELS).is_err());
        assert!(ensemble(&ckt, &cfg, 4, &[1.5]).is_err());
    }

    #[test]
    fn quantiles_ordered() {
        let ckt = compile("R1 x 0 1k\nC1 x 0 1p\nN1 x 0 1e-12\n.end\n");
        let cfg = EmConfig {
            stride: 10,
            ..EmConfig::new(1e-11, 1e-9, 3)
        };
        let stats = ensemble(&ckt, &cfg, 64, &[0.95, 0.05, 0.5]).unwrap();
        assert_eq!(stats.levels, vec![0.05, 0.5, 0.95]);
        for t in 0..stats.times.len() {
            assert!(stats.quantiles[0][t][0] <= stats.quantiles[1][t][0]);
            assert!(stats.quantiles[1][t][0] <= stats.quantiles[2][t][0]);
        }
    }
}
