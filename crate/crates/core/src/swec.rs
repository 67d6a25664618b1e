//! Operating point, DC sweep and transient analysis by step-wise equivalent conductance.
//!
//! Each step stamps every nonlinear device as a fixed positive conductance,
//! extrapolated from the last accepted point, and performs exactly one linear
//! solve. DC analyses are pseudo-transient: sources ramp up from zero and the
//! circuit is integrated until it stops moving.

use crate::devices::{self, device_step_bound, predict_from_rate, BoundKind, DeviceState, G_FLOOR, PREDICT_COST};
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::mna::{assemble, node_voltage, Branch, Circuit, Device, DeviceKind, Drive};

/// Below this change in a device voltage the local error test is skipped.
pub const QUIESCENT_DV: f64 = 1e-9;

/// Steps one operating-point relaxation may take before it is declared stuck.
pub const SETTLE_STEP_LIMIT: usize = 50_000;

/// Time constant, as a fraction of `op_ramp`, of the capacitance added to
/// device nodes that have none when a relaxation gets stuck.
const PSEUDO_TAU: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Relative local error budget.
    pub eps: f64,
    pub h_min: f64,
    /// Largest step; `None` means `t_stop / 50`.
    pub h_max: Option<f64>,
    pub t_stop: f64,
    /// Length of the source ramp used to find operating points.
    pub op_ramp: f64,
    /// An operating point has settled once no node moves faster than this, in V/s.
    pub op_settle_tol: f64,
    pub max_steps: usize,
    /// Forces every step to this length, bypassing step control and rejection.
    pub fixed_step: Option<f64>,
    /// Start the transient from the operating point instead of all-zero voltages.
    pub start_from_op: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            eps: 0.01,
            h_min: 1e-15,
            h_max: None,
            t_stop: 1e-9,
            op_ramp: 1e-9,
            op_settle_tol: 1.0,
            max_steps: 1_000_000,
            fixed_step: None,
            start_from_op: false,
        }
    }
}

impl SimConfig {
    pub fn new(t_stop: f64) -> Self {
        SimConfig {
            t_stop,
            ..SimConfig::default()
        }
    }

    pub fn h_max(&self) -> f64 {
        self.h_max.unwrap_or(self.t_stop / 50.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.t_stop > 0.0 && self.t_stop.is_finite()) {
            return bad(format!("t_stop must be positive, got {}", self.t_stop));
        }
        if !(self.h_min > 0.0 && self.h_min < self.h_max()) {
            return bad(format!(
                "need 0 < h_min < h_max, got h_min = {}, h_max = {}",
                self.h_min,
                self.h_max()
            ));
        }
        if !(self.op_ramp > 0.0 && self.op_settle_tol > 0.0) {
            return bad("op_ramp and op_settle_tol must be positive".into());
        }
        if let Some(h) = self.fixed_step {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("fixed step must be positive, got {h}"));
            }
        }
        Ok(())
    }
}

/// Work counters for one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub steps_taken: usize,
    pub steps_rejected: usize,
    /// Linear solves performed; always `steps_taken + steps_rejected`.
    pub solves: usize,
    /// Steps accepted at `h_min` with the error still above budget.
    pub h_min_hits: usize,
    /// Smallest conductance stamped for any nonlinear device.
    pub min_stamped_geq: f64,
    pub flops: FlopCounter,
}

impl Default for RunStats {
    fn default() -> Self {
        RunStats {
            steps_taken: 0,
            steps_rejected: 0,
            solves: 0,
            h_min_hits: 0,
            min_stamped_geq: f64::INFINITY,
            flops: FlopCounter::ZERO,
        }
    }
}

impl RunStats {
    pub fn merge(&mut self, other: &RunStats) {
        self.steps_taken += other.steps_taken;
        self.steps_rejected += other.steps_rejected;
        self.solves += other.solves;
        self.h_min_hits += other.h_min_hits;
        self.min_stamped_geq = self.min_stamped_geq.min(other.min_stamped_geq);
        self.flops += other.flops;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSeries {
    pub node_names: Vec<String>,
    /// Strictly increasing, starting at 0.
    pub times: Vec<f64>,
    /// Node voltages at each time, in `node_names` order.
    pub voltages: Vec<Vec<f64>>,
    pub stats: RunStats,
}

impl WaveformSeries {
    pub fn node(&self, name: &str) -> Option<Vec<f64>> {
        let lower = name.to_ascii_lowercase();
        let i = self.node_names.iter().position(|n| *n == lower)?;
        Some(self.voltages.iter().map(|v| v[i]).collect())
    }
}

/// Next step size: `eps` times the smallest of the node time
/// constants `C_j / sum_k G_jk` and the unscaled device bounds, clamped to
/// `[h_min, h_max]`. Nodes without capacitance or conductance contribute nothing.
pub fn next_step_size(node_terms: &[(f64, f64)], device_bounds: &[f64], eps: f64, h_min: f64, h_max: f64) -> f64 {
    let nodes = node_terms
        .iter()
        .filter(|(c, g)| *c > 0.0 && *g > 0.0)
        .map(|(c, g)| c / g);
    let smallest = nodes.chain(device_bounds.iter().copied()).fold(f64::INFINITY, f64::min);
    (eps * smallest).clamp(h_min, h_max)
}

/// Per-device history plus the gate history a transistor needs.
#[derive(Debug, Clone, Copy)]
struct History {
    state: DeviceState,
    vgs_now: f64,
    vgs_prev: f64,
}

impl History {
    fn vgs_slew(&self) -> f64 {
        if self.state.has_history() {
            (self.vgs_now - self.vgs_prev) / self.state.h_prev
        } else {
            0.0
        }
    }
}

/// Controlling voltages of a device: the channel voltage (oriented `vds` for
/// a transistor) and the gate drive.
fn controls(d: &Device, x: &[f64]) -> (f64, f64) {
    match d.mos_bias(x) {
        Some(b) => (b.vds, b.vgs),
        None => (d.channel_voltage(x), 0.0),
    }
}

fn floored(g: f64) -> f64 {
    g.max(G_FLOOR)
}

/// Integrator state shared by every analysis.
struct Engine<'a> {
    ckt: &'a Circuit,
    cfg: &'a SimConfig,
    x: Vec<f64>,
    hist: Vec<History>,
    stats: RunStats,
    node_cap: Vec<f64>,
    /// Resistor conductance incident on each node.
    node_g: Vec<f64>,
    /// Node has capacitance, so errors made there persist.
    dynamic: Vec<bool>,
}

struct Step {
    x: Vec<f64>,
    geq_actual: Vec<f64>,
    error: f64,
}

impl<'a> Engine<'a> {
    fn new(ckt: &'a Circuit, cfg: &'a SimConfig, x0: Vec<f64>) -> Result<Self> {
        let node_cap = ckt.node_capacitance();
        let mut node_g = vec![0.0; ckt.n()];
        for r in &ckt.resistors {
            for node in [r.a, r.b].into_iter().flatten() {
                node_g[node] += 1.0 / r.value;
            }
        }
        let dynamic = node_cap.iter().map(|&c| c > 0.0).collect();
        let mut engine = Engine {
            ckt,
            cfg,
            x: x0,
            hist: Vec::new(),
            stats: RunStats::default(),
            node_cap,
            node_g,
            dynamic,
        };
        engine.reset_history()?;
        Ok(engine)
    }

    /// Forgets the device history and evaluates every conductance at the current state.
    fn reset_history(&mut self) -> Result<()> {
        let mut hist = Vec::with_capacity(self.ckt.devices.len());
        for d in &self.ckt.devices {
            let g = floored(d.geq(&self.x, &mut self.stats.flops)?);
            let (v, vgs) = controls(d, &self.x);
            hist.push(History {
                state: DeviceState::new(v, g),
                vgs_now: vgs,
                vgs_prev: vgs,
            });
        }
        self.hist = hist;
        Ok(())
    }

    fn proposed_step(&mut self, h_max: f64) -> f64 {
        if let Some(h) = self.cfg.fixed_step {
            return h;
        }
        let fc = &mut self.stats.flops;
        let mut g_sum = self.node_g.clone();
        for (d, h) in self.ckt.devices.iter().zip(&self.hist) {
            let (a, b) = d.channel();
            for node in [a, b].into_iter().flatten() {
                g_sum[node] += h.state.geq_now;
                fc.add(1);
            }
        }
        let node_terms: Vec<(f64, f64)> = self.node_cap.iter().copied().zip(g_sum).collect();
        fc.div(node_terms.len() as u64);
        let bounds: Vec<f64> = self
            .ckt
            .devices
            .iter()
            .zip(&self.hist)
            .map(|(d, h)| {
                fc.charge(FlopCounter::new(2, 1, 2, 0));
                match &d.kind {
                    DeviceKind::Mos { model, .. } => device_step_bound(BoundKind::Transistor {
                        overdrive: h.vgs_now - model.vth,
                        gate_slew: h.vgs_slew(),
                    }),
                    _ => device_step_bound(BoundKind::TwoTerminal {
                        v: h.state.v_now,
                        slew: h.state.slew(),
                    }),
                }
            })
            .collect();
        next_step_size(&node_terms, &bounds, self.cfg.eps, self.cfg.h_min, h_max)
    }

    /// Conductance each device is stamped with for a step of length `h`.
    fn predicted(&mut self, h: f64) -> Vec<f64> {
        let fc = &mut self.stats.flops;
        self.ckt
            .devices
            .iter()
            .zip(&self.hist)
            .map(|(d, hist)| {
                let s = &hist.state;
                if !s.has_history() {
                    return s.geq_now;
                }
                let rate = match &d.kind {
                    DeviceKind::Rtd { model, .. } => {
                        fc.charge(devices::rtd::DGEQ_COST);
                        model.dgeq_dv(s.v_now).map(|dg| dg * s.slew())
                    }
                    DeviceKind::Nanowire { model, .. } => {
                        fc.charge(model.dgeq_cost());
                        Some(model.dgeq_dv(s.v_now) * s.slew())
                    }
                    DeviceKind::Mos { model, .. } => {
                        fc.charge(devices::mos::PARTIALS_COST);
                        let (dg_dvgs, dg_dvds) = model.geq_partials(hist.vgs_now, s.v_now);
                        Some(dg_dvgs * hist.vgs_slew() + dg_dvds * s.slew())
                    }
                };
                match rate {
                    Some(rate) => {
                        fc.charge(PREDICT_COST);
                        predict_from_rate(s.geq_now, rate, h)
                    }
                    // Inside the origin guard band: use the directly evaluated value.
                    None => s.geq_now,
                }
            })
            .collect()
    }

    /// One solve of length `h` ending at `drive.t`, with its local error estimate.
    fn attempt(&mut self, h: f64, drive: Drive) -> Result<(Step, Vec<f64>)> {
        let geq = self.predicted(h);
        let sys = assemble(self.ckt, &geq, &self.x, h, drive, &mut self.stats.flops)?;
        self.stats.solves += 1;
        let x = sys.solve(&mut self.stats.flops)?;
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteVoltage(*bad));
        }

        let mut geq_actual = Vec::with_capacity(geq.len());
        let mut error: f64 = 0.0;
        for (k, d) in self.ckt.devices.iter().enumerate() {
            let g_act = floored(d.geq(&x, &mut self.stats.flops)?);
            geq_actual.push(g_act);
            // Current the device would have carried with its true conductance,
            // pushed through the driving-point resistance of its dynamic
            // terminals, is the voltage the prediction got wrong.
            let (a, b) = d.channel();
            let resistance: f64 = [a, b]
                .into_iter()
                .flatten()
                .filter(|&n| self.dynamic[n])
                .map(|n| 1.0 / sys.at(n, n))
                .sum();
            if resistance == 0.0 {
                continue;
            }
            let v_new = d.channel_voltage(&x);
            let delta_i = (g_act - geq[k]) * v_new;
            let dv_est = v_new - self.hist[k].state.v_now;
            let dv_err = -delta_i * resistance;
            let dv_actual = dv_est + dv_err;
            self.stats.flops.charge(FlopCounter::new(5, 2, 3, 0));
            if dv_actual.abs() < QUIESCENT_DV {
                continue;
            }
            error = error.max(dv_err.abs() / dv_actual.abs());
        }
        Ok((Step { x, geq_actual, error }, geq))
    }

    /// Advances from `t` by at most `h_cap`, rejecting and halving as needed.
    /// Returns the accepted step length.
    fn step(&mut self, t: f64, h_cap: f64, h_max: f64, scale: f64, fixed: Option<(usize, f64)>) -> Result<f64> {
        if self.stats.steps_taken >= self.cfg.max_steps {
            return Err(Error::MaxSteps(self.cfg.max_steps));
        }
        let mut h = self.proposed_step(h_max).min(h_cap);
        loop {
            let drive = Drive {
                t: t + h,
                scale: scale_at(scale, t + h, self.cfg.op_ramp),
                fixed,
            };
            let (step, stamped) = self.attempt(h, drive)?;
            let over = self.cfg.fixed_step.is_none() && step.error > self.cfg.eps;
            if over && h / 2.0 >= self.cfg.h_min {
                self.stats.steps_rejected += 1;
                h /= 2.0;
                continue;
            }
            if over {
                self.stats.h_min_hits += 1;
            }
            self.commit(step, &stamped, h);
            return Ok(h);
        }
    }

    fn commit(&mut self, step: Step, stamped: &[f64], h: f64) {
        for g in stamped {
            self.stats.min_stamped_geq = self.stats.min_stamped_geq.min(*g);
        }
        for ((d, hist), g) in self.ckt.devices.iter().zip(&mut self.hist).zip(&step.geq_actual) {
            let (v, vgs) = controls(d, &step.x);
            hist.state.advance(v, *g, h);
            hist.vgs_prev = hist.vgs_now;
            hist.vgs_now = vgs;
        }
        self.x = step.x;
        self.stats.steps_taken += 1;
    }

    /// Pseudo-transient relaxation to a DC point. With `ramp` the sources
    /// rise from zero over `op_ramp`; otherwise they are applied at once.
    fn settle(&mut self, ramp: bool, fixed: Option<(usize, f64)>) -> Result<()> {
        let cfg = self.cfg;
        let h_max = cfg.op_ramp / 10.0;
        let limit = 100.0 * cfg.op_ramp;
        let ramp_end = if ramp { cfg.op_ramp } else { 0.0 };
        let scale = if ramp { f64::NAN } else { 1.0 };
        let n = self.ckt.n();
        let mut t = 0.0;
        let mut steps = 0;
        loop {
            let before = self.x.clone();
            let h_cap = if t < ramp_end { ramp_end - t } else { f64::INFINITY };
            let h = self.step(t, h_cap, h_max, scale, fixed)?;
            t += h;
            let rate = (0..n)
                .map(|i| (self.x[i] - before[i]).abs() / h)
                .fold(0.0, f64::max);
            if t >= ramp_end * (1.0 - 1e-12) && rate < cfg.op_settle_tol {
                return Ok(());
            }
            steps += 1;
            if t > limit || steps > SETTLE_STEP_LIMIT {
                return Err(Error::SettleFailure {
                    t,
                    rate,
                    last: self.x[..n].to_vec(),
                });
            }
        }
    }
}

/// Source multiplier: `NAN` requests the linear ramp over `ramp`.
fn scale_at(scale: f64, t: f64, ramp: f64) -> f64 {
    if scale.is_nan() {
        (t / ramp).min(1.0)
    } else {
        scale
    }
}

fn check_noise_free(ckt: &Circuit) -> Result<()> {
    if let Some(n) = ckt.noises.first() {
        return Err(Error::Circuit(format!(
            "noise source `{}` needs the stochastic engine",
            n.name
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    /// Full solution: node voltages then voltage-source currents.
    pub x: Vec<f64>,
    pub stats: RunStats,
}

impl OperatingPoint {
    pub fn voltages(&self, n: usize) -> &[f64] {
        &self.x[..n]
    }
}

/// DC operating point by source ramping and pseudo-transient settling.
pub fn operating_point(ckt: &Circuit, cfg: &SimConfig) -> Result<OperatingPoint> {
    let cfg = SimConfig {
        fixed_step: None,
        ..cfg.clone()
    };
    cfg.validate()?;
    let mut engine = Engine::new(ckt, &cfg, vec![0.0; ckt.dim()])?;
    match engine.settle(true, None) {
        Ok(()) => Ok(OperatingPoint {
            x: engine.x,
            stats: engine.stats,
        }),
        Err(e @ Error::SettleFailure { .. }) => {
            let Some(relaxed) = with_pseudo_capacitance(ckt, &cfg) else {
                return Err(e);
            };
            let mut retry = Engine::new(&relaxed, &cfg, vec![0.0; ckt.dim()])?;
            retry.stats = engine.stats;
            retry.settle(true, None)?;
            Ok(OperatingPoint {
                x: retry.x,
                stats: retry.stats,
            })
        }
        Err(e) => Err(e),
    }
}

/// The circuit with a grounded capacitor on every nonlinear-device node that
/// has no capacitance, sized to `PSEUDO_TAU * op_ramp` times the node's
/// resistor conductance. Without it such a node is updated by plain
/// fixed-point iteration, which cycles on steep device curves; the added
/// capacitance turns that into a damped relaxation with the same fixed
/// point. `None` when there is no such node.
fn with_pseudo_capacitance(ckt: &Circuit, cfg: &SimConfig) -> Option<Circuit> {
    let cap = ckt.node_capacitance();
    let mut node_g = vec![0.0; ckt.n()];
    for r in &ckt.resistors {
        for node in [r.a, r.b].into_iter().flatten() {
            node_g[node] += 1.0 / r.value;
        }
    }
    let mut relaxed = ckt.clone();
    for d in &ckt.devices {
        let (a, b) = d.channel();
        for node in [a, b].into_iter().flatten() {
            let added = relaxed.capacitors.iter().any(|c| c.a == Some(node) && c.name.starts_with('~'));
            if cap[node] == 0.0 && !added {
                relaxed.capacitors.push(Branch {
                    name: format!("~C{}", ckt.node_names[node]),
                    a: Some(node),
                    b: None,
                    value: PSEUDO_TAU * cfg.op_ramp * node_g[node].max(1e-6),
                });
            }
        }
    }
    (relaxed.capacitors.len() > ckt.capacitors.len()).then_some(relaxed)
}

/// Adaptive-step transient from `t = 0` to `cfg.t_stop`.
pub fn transient(ckt: &Circuit, cfg: &SimConfig) -> Result<WaveformSeries> {
    cfg.validate()?;
    check_noise_free(ckt)?;
    let mut stats = RunStats::default();
    let x0 = if cfg.start_from_op {
        let op = operating_point(ckt, cfg)?;
        stats.merge(&op.stats);
        op.x
    } else {
        vec![0.0; ckt.dim()]
    };
    let n = ckt.n();
    let mut engine = Engine::new(ckt, cfg, x0)?;
    let mut times = vec![0.0];
    let mut voltages = vec![engine.x[..n].to_vec()];
    let h_max = cfg.h_max();
    let mut t = 0.0;
    let end = cfg.t_stop * (1.0 - 1e-12);
    while t < end {
        let mut h_cap = cfg.t_stop - t;
        if let Some(bp) = ckt.next_breakpoint(t * (1.0 + 1e-12) + 1e-30) {
            if bp > t {
                h_cap = h_cap.min(bp - t);
            }
        }
        let h = engine.step(t, h_cap, h_max, 1.0, None)?;
        t += h;
        times.push(t);
        voltages.push(engine.x[..n].to_vec());
    }
    stats.merge(&engine.stats);
    Ok(WaveformSeries {
        node_names: ckt.node_names.clone(),
        times,
        voltages,
        stats,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcPoint {
    pub bias: f64,
    /// Full solution: node voltages then voltage-source currents.
    pub x: Vec<f64>,
    /// Channel current of every nonlinear device, in circuit order.
    pub device_currents: Vec<f64>,
    pub settled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcSweep {
    pub source: String,
    pub points: Vec<DcPoint>,
    /// `(bias, message)` for points that failed to settle.
    pub failures: Vec<(f64, String)>,
    pub stats: RunStats,
}

/// Uniform grid of `points` values from `start` to `stop` inclusive.
pub fn sweep_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

/// Sweeps one voltage source, continuing each point from the previous solution.
pub fn dc_sweep(ckt: &Circuit, source: &str, start: f64, stop: f64, points: usize, cfg: &SimConfig) -> Result<DcSweep> {
    let cfg = SimConfig {
        fixed_step: None,
        ..cfg.clone()
    };
    cfg.validate()?;
    if points < 2 {
        return Err(Error::Config(format!("a sweep needs at least 2 points, got {points}")));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::Config("sweep bounds must be finite".into()));
    }
    let k = ckt
        .source_index(source)
        .ok_or_else(|| Error::Circuit(format!("`{source}` is not a voltage source")))?;
    let mut engine = Engine::new(ckt, &cfg, vec![0.0; ckt.dim()])?;
    let relaxed = with_pseudo_capacitance(ckt, &cfg);
    let mut out = Vec::with_capacity(points);
    let mut failures = Vec::new();
    for (i, bias) in sweep_grid(start, stop, points).into_iter().enumerate() {
        let mut outcome = engine.settle(i == 0, Some((k, bias)));
        if let (Err(Error::SettleFailure { .. }), Some(relaxed)) = (&outcome, &relaxed) {
            let start = if i == 0 { vec![0.0; ckt.dim()] } else { engine.x.clone() };
            let mut retry = Engine::new(relaxed, &cfg, start)?;
            outcome = retry.settle(i == 0, Some((k, bias)));
            engine.stats.merge(&retry.stats);
            engine.x = retry.x;
            engine.reset_history()?;
        }
        let settled = match outcome {
            Ok(()) => true,
            Err(e @ Error::SettleFailure { .. }) => {
                failures.push((bias, e.to_string()));
                false
            }
            Err(e) => return Err(e),
        };
        out.push(DcPoint {
            bias,
            device_currents: ckt.devices.iter().map(|d| d.current(&engine.x)).collect(),
            x: engine.x.clone(),
            settled,
        });
    }
    Ok(DcSweep {
        source: ckt.sources[k].name.clone(),
        points: out,
        failures,
        stats: engine.stats,
    })
}

/// Node voltage of a named node in a solution vector.
pub fn voltage_of(ckt: &Circuit, x: &[f64], name: &str) -> Option<f64> {
    let i = ckt.node(name)?;
    Some(node_voltage(x, Some(i)))
}
