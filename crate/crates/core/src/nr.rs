//! Newton-Raphson baseline and brute-force load-line oracles.
//!
//! The Newton solver is deliberately plain: differential-conductance
//! linearization, full steps, no damping, no source or Gmin stepping. It is
//! the strawman whose failures on negative differential resistance the
//! equivalent-conductance engine avoids.

use crate::devices::rtd::CURRENT_COST;
use crate::devices::RtdModel;
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::mna::{node_voltage, stamp_static, Circuit, Drive, MnaSystem};
use crate::swec::{self, sweep_grid, SimConfig};

/// Iterate pairs closer than this are treated as revisits.
pub const REVISIT_TOL: f64 = 1e-9;
/// Consecutive iterates farther apart than this, in volts, count as still moving.
pub const MOVING_TOL: f64 = 1e-6;
/// Consecutive revisits needed to flag an oscillation.
pub const OSCILLATION_RUN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NrOptions {
    pub max_iter: usize,
    /// KCL residual tolerance, amperes.
    pub tol: f64,
}

impl Default for NrOptions {
    fn default() -> Self {
        NrOptions {
            max_iter: 100,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NrReport {
    pub converged: bool,
    /// Linear solves performed.
    pub iterations: usize,
    /// Every iterate, starting with the initial guess.
    pub trajectory: Vec<Vec<f64>>,
    pub oscillation_detected: bool,
    pub flops: FlopCounter,
    /// Last iterate: node voltages then voltage-source currents.
    pub solution: Vec<f64>,
    /// Largest KCL residual at `solution`, amperes.
    pub residual: f64,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest node KCL violation in amperes, or infinity if a source constraint is violated.
fn residual(ckt: &Circuit, x: &[f64], drive: Drive, fc: &mut FlopCounter) -> f64 {
    fc.charge(CURRENT_COST * ckt.devices.len() as u64);
    fc.add((2 * (ckt.resistors.len() + ckt.devices.len() + ckt.sources.len())) as u64);
    fc.div(ckt.resistors.len() as u64);
    for (k, s) in ckt.sources.iter().enumerate() {
        let target = ckt.source_value(k, drive);
        let v = node_voltage(x, s.pos) - node_voltage(x, s.neg);
        if (v - target).abs() > 1e-12 * target.abs().max(1.0) {
            return f64::INFINITY;
        }
    }
    ckt.kcl_residual(x).iter().fold(0.0, |m: f64, r| m.max(r.abs()))
}

/// Newton-Raphson on the DC nodal equations with sources driven by `drive`.
pub fn nr_solve(ckt: &Circuit, drive: Drive, guess: &[f64], opts: NrOptions) -> Result<NrReport> {
    if !ckt.noises.is_empty() {
        return Err(Error::Circuit("Newton DC analysis does not accept noise sources".into()));
    }
    let dim = ckt.dim();
    let n = ckt.n();
    if guess.len() != n && guess.len() != dim {
        return Err(Error::LengthMismatch {
            what: "initial guess",
            got: guess.len(),
            expected: n,
        });
    }
    let mut x = guess.to_vec();
    x.resize(dim, 0.0);
    let mut fc = FlopCounter::ZERO;
    let mut trajectory = vec![x.clone()];
    let mut iterations = 0;
    let mut run = 0;
    let mut oscillation_detected = false;
    let mut converged = false;
    let mut res = residual(ckt, &x, drive, &mut fc);

    loop {
        if res <= opts.tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let mut sys = MnaSystem::new(ckt);
        stamp_static(ckt, &mut sys, f64::INFINITY, &mut fc);
        for d in &ckt.devices {
            d.stamp_newton(&x, &mut sys, &mut fc)?;
        }
        for (k, s) in ckt.sources.iter().enumerate() {
            sys.stamp_vsource(k, s.pos, s.neg, ckt.source_value(k, drive));
        }
        iterations += 1;
        let next = match sys.solve(&mut fc) {
            Ok(next) => next,
            // A singular Jacobian ends the attempt unconverged, like any other breakdown.
            Err(Error::Singular { .. }) => break,
            Err(e) => return Err(e),
        };
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        x = next;
        trajectory.push(x.clone());
        let k = trajectory.len() - 1;
        if k >= 2 {
            let back2 = max_abs_diff(&trajectory[k][..n], &trajectory[k - 2][..n]);
            let back1 = max_abs_diff(&trajectory[k][..n], &trajectory[k - 1][..n]);
            if back2 <= REVISIT_TOL && back1 > MOVING_TOL {
                run += 1;
                if run >= OSCILLATION_RUN {
                    oscillation_detected = true;
                }
            } else {
                run = 0;
            }
        }
        res = residual(ckt, &x, drive, &mut fc);
    }
    Ok(NrReport {
        converged,
        iterations,
        trajectory,
        oscillation_detected: oscillation_detected && !converged,
        flops: fc,
        solution: x,
        residual: res,
    })
}

/// Newton-Raphson DC operating point from `guess` (node voltages, optionally
/// followed by source currents).
pub fn nr_dc(ckt: &Circuit, guess: &[f64], max_iter: usize, tol: f64) -> Result<NrReport> {
    nr_solve(ckt, Drive::at(0.0), guess, NrOptions { max_iter, tol })
}

/// An intersection of a resistive load line with an RTD curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadLineRoot {
    /// Voltage across the RTD.
    pub v: f64,
    /// Total small-signal conductance `dJ/dV + 1/r` is positive.
    pub stable: bool,
}

/// Every solution of `(vbias - v)/r = J(v)` on `[0, vbias]`, found by a
/// uniform scan for sign changes refined by bisection to 1e-9 V.
pub fn brute_force_dc(rtd: &RtdModel, r: f64, vbias: f64, grid: usize) -> Vec<LoadLineRoot> {
    assert!(grid >= 2, "grid needs at least two points");
    let f = |v: f64| (vbias - v) / r - rtd.current(v);
    let (lo, hi) = if vbias >= 0.0 { (0.0, vbias) } else { (vbias, 0.0) };
    let at = |i: usize| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
    let mut roots = Vec::new();
    let mut push = |v: f64| {
        let stable = rtd.slope(v) + 1.0 / r > 0.0;
        roots.push(LoadLineRoot { v, stable });
    };
    let mut prev = f(at(0));
    if prev == 0.0 {
        push(at(0));
    }
    for i in 1..grid {
        let (a, b) = (at(i - 1), at(i));
        let fb = f(b);
        if fb == 0.0 {
            push(b);
        } else if prev != 0.0 && prev.signum() != fb.signum() {
            let (mut x0, mut x1, mut f0) = (a, b, prev);
            while x1 - x0 > 1e-9 {
                let mid = 0.5 * (x0 + x1);
                let fm = f(mid);
                if fm == 0.0 {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if fm.signum() == f0.signum() {
                    x0 = mid;
                    f0 = fm;
                } else {
                    x1 = mid;
                }
            }
            push(0.5 * (x0 + x1));
        }
        prev = fb;
    }
    roots
}

/// The analysis whose cost is compared.
#[derive(Debug, Clone, PartialEq)]
pub enum CompareAnalysis {
    Op,
    DcSweep {
        source: String,
        start: f64,
        stop: f64,
        points: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlopComparison {
    pub swec: FlopCounter,
    pub nr: FlopCounter,
    /// `nr.total() / swec.total()`.
    pub speedup: f64,
    /// Points where Newton did not converge (charged at `max_iter` iterations).
    pub nr_failures: usize,
    pub nr_iterations: usize,
    pub swec_solves: usize,
}

/// Newton cost of one point, scaled up to `max_iter` iterations if it failed.
fn charged(report: &NrReport, max_iter: usize) -> FlopCounter {
    if report.converged || report.iterations == 0 {
        return report.flops;
    }
    let per = report.iterations as u64;
    let full = max_iter as u64;
    let f = report.flops;
    FlopCounter::new(
        f.adds * full / per,
        f.muls * full / per,
        f.divs * full / per,
        f.transcendentals * full / per,
    )
}

/// Runs both engines on the same analysis with fresh counters. Newton
/// continues each sweep point from the previous converged solution and
/// starts the first from all-zero voltages.
pub fn flop_compare(ckt: &Circuit, analysis: &CompareAnalysis, cfg: &SimConfig, opts: NrOptions) -> Result<FlopComparison> {
    let zero = vec![0.0; ckt.dim()];
    let (swec_flops, swec_solves, drives) = match analysis {
        CompareAnalysis::Op => {
            let op = swec::operating_point(ckt, cfg)?;
            (op.stats.flops, op.stats.solves, vec![Drive::at(0.0)])
        }
        CompareAnalysis::DcSweep {
            source,
            start,
            stop,
            points,
        } => {
            let sweep = swec::dc_sweep(ckt, source, *start, *stop, *points, cfg)?;
            let k = ckt.source_index(source).expect("sweep checked the source");
            let drives = sweep_grid(*start, *stop, *points)
                .into_iter()
                .map(|bias| Drive {
                    t: 0.0,
                    scale: 1.0,
                    fixed: Some((k, bias)),
                })
                .collect();
            (sweep.stats.flops, sweep.stats.solves, drives)
        }
    };

    let mut nr = FlopCounter::ZERO;
    let mut failures = 0;
    let mut iterations = 0;
    let mut guess = zero;
    for drive in drives {
        let report = nr_solve(ckt, drive, &guess, opts)?;
        nr += charged(&report, opts.max_iter);
        iterations += report.iterations;
        if report.converged {
            guess = report.solution;
        } else {
            failures += 1;
        }
    }
    Ok(FlopComparison {
        swec: swec_flops,
        nr,
        speedup: nr.total() as f64 / swec_flops.total().max(1) as f64,
        nr_failures: failures,
        nr_iterations: iterations,
        swec_solves,
    })
}
