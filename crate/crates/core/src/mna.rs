//! Nodal system assembly and dense LU with flop accounting.
//!
//! Unknowns are the non-ground node voltages followed by one branch current
//! per voltage source. A voltage-source current is positive when it flows
//! from the positive node through the source to the negative node.

use std::collections::BTreeMap;

use crate::devices::{self, MosModel, NanowireModel, RtdModel};
use crate::error::{Error, Result};
use crate::flops::FlopCounter;
use crate::netlist::{ElementKind, ModelCard, Netlist, Waveform, GROUND};

/// Node reference after compilation; `None` is ground.
pub type Node = Option<usize>;

/// Voltage of `node` in a solution vector.
#[inline]
pub fn node_voltage(x: &[f64], node: Node) -> f64 {
    node.map_or(0.0, |i| x[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub name: String,
    pub a: Node,
    pub b: Node,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub name: String,
    pub pos: Node,
    pub neg: Node,
    pub wave: Waveform,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeviceKind {
    Rtd { a: Node, b: Node, model: RtdModel },
    Nanowire { a: Node, b: Node, model: NanowireModel },
    Mos { d: Node, g: Node, s: Node, model: MosModel },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub name: String,
    pub kind: DeviceKind,
}

/// Operating variables of one MOSFET with the channel oriented so `vds >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosBias {
    pub vgs: f64,
    pub vds: f64,
    pub reversed: bool,
}

impl Device {
    /// The two channel terminals, between which the equivalent conductance is stamped.
    pub fn channel(&self) -> (Node, Node) {
        match self.kind {
            DeviceKind::Rtd { a, b, .. } | DeviceKind::Nanowire { a, b, .. } => (a, b),
            DeviceKind::Mos { d, s, .. } => (d, s),
        }
    }

    /// Voltage across the channel, first terminal minus second.
    pub fn channel_voltage(&self, x: &[f64]) -> f64 {
        let (a, b) = self.channel();
        node_voltage(x, a) - node_voltage(x, b)
    }

    pub fn mos_bias(&self, x: &[f64]) -> Option<MosBias> {
        let DeviceKind::Mos { d, g, s, .. } = self.kind else {
            return None;
        };
        let (vgs, vds, reversed) =
            MosModel::oriented(node_voltage(x, d), node_voltage(x, g), node_voltage(x, s));
        Some(MosBias { vgs, vds, reversed })
    }

    /// Equivalent conductance `I/V` at the bias in `x`, before any floor is applied.
    pub fn geq(&self, x: &[f64], fc: &mut FlopCounter) -> Result<f64> {
        let v = self.channel_voltage(x);
        match &self.kind {
            DeviceKind::Rtd { model, .. } => {
                fc.charge(devices::rtd::GEQ_COST);
                devices::rtd_geq(model, v)
            }
            DeviceKind::Nanowire { model, .. } => {
                finite(v)?;
                fc.charge(model.geq_cost());
                Ok(model.geq(v))
            }
            DeviceKind::Mos { model, .. } => {
                let bias = self.mos_bias(x).expect("MOS device");
                finite(bias.vgs)?;
                finite(bias.vds)?;
                fc.charge(devices::mos::GEQ_COST);
                Ok(model.geq(bias.vgs, bias.vds))
            }
        }
    }

    /// Current through the channel from the first terminal to the second.
    pub fn current(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DeviceKind::Rtd { model, .. } => model.current(self.channel_voltage(x)),
            DeviceKind::Nanowire { model, .. } => model.current(self.channel_voltage(x)),
            DeviceKind::Mos { model, .. } => {
                let bias = self.mos_bias(x).expect("MOS device");
                let i = model.current(bias.vgs, bias.vds);
                if bias.reversed {
                    -i
                } else {
                    i
                }
            }
        }
    }

    /// Stamps the Newton linearization at `x`: the differential conductance
    /// plus the companion current that makes the linear model exact at `x`.
    pub fn stamp_newton(&self, x: &[f64], sys: &mut MnaSystem, fc: &mut FlopCounter) -> Result<()> {
        match &self.kind {
            DeviceKind::Rtd { a, b, model } => {
                let v = self.channel_voltage(x);
                finite(v)?;
                let (i, gd) = model.current_and_slope(v);
                fc.charge(devices::rtd::CURRENT_SLOPE_COST);
                stamp_linearized(sys, *a, *b, i, gd, v, fc);
            }
            DeviceKind::Nanowire { a, b, model } => {
                let v = self.channel_voltage(x);
                finite(v)?;
                let (i, gd) = (model.current(v), model.slope(v));
                fc.charge(model.geq_cost() * 2 + model.dgeq_cost());
                stamp_linearized(sys, *a, *b, i, gd, v, fc);
            }
            DeviceKind::Mos { d, g, s, model } => {
                let bias = self.mos_bias(x).expect("MOS device");
                finite(bias.vgs)?;
                finite(bias.vds)?;
                let (dd, ss) = if bias.reversed { (*s, *d) } else { (*d, *s) };
                let i0 = model.current(bias.vgs, bias.vds);
                let (gm, gds) = model.small_signal(bias.vgs, bias.vds);
                fc.charge(devices::mos::CURRENT_COST + devices::mos::PARTIALS_COST);
                sys.stamp_conductance(dd, ss, gds, fc);
                sys.stamp_vccs(dd, ss, *g, ss, gm, fc);
                let ieq = i0 - gm * bias.vgs - gds * bias.vds;
                fc.mul(2);
                fc.add(2);
                sys.stamp_current(dd, ss, ieq, fc);
            }
        }
        Ok(())
    }
}

fn stamp_linearized(sys: &mut MnaSystem, a: Node, b: Node, i: f64, gd: f64, v: f64, fc: &mut FlopCounter) {
    sys.stamp_conductance(a, b, gd, fc);
    fc.mul(1);
    fc.add(1);
    sys.stamp_current(a, b, i - gd * v, fc);
}

fn finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteVoltage(v))
    }
}

/// A netlist with node names resolved to indices and model cards attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub title: String,
    pub node_names: Vec<String>,
    pub resistors: Vec<Branch>,
    pub capacitors: Vec<Branch>,
    pub sources: Vec<Source>,
    pub devices: Vec<Device>,
    /// Noise injections: `value` is the intensity.
    pub noises: Vec<Branch>,
}

/// How independent sources are driven for one assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drive {
    /// Time at which waveforms are evaluated.
    pub t: f64,
    /// Multiplier applied to every source value (pseudo-transient ramps).
    pub scale: f64,
    /// Replaces one source's value (DC sweeps): `(source index, volts)`.
    pub fixed: Option<(usize, f64)>,
}

impl Drive {
    pub fn at(t: f64) -> Self {
        Drive {
            t,
            scale: 1.0,
            fixed: None,
        }
    }
}

impl Circuit {
    pub fn compile(net: &Netlist) -> Result<Circuit> {
        let index: BTreeMap<&str, usize> = net
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let node = |name: &str| -> Result<Node> {
            if name == GROUND {
                return Ok(None);
            }
            index
                .get(name)
                .copied()
                .map(Some)
                .ok_or_else(|| Error::Circuit(format!("undeclared node `{name}`")))
        };
        let model = |name: &str| -> Result<&ModelCard> {
            net.model(name)
                .ok_or_else(|| Error::Circuit(format!("unknown model `{name}`")))
        };
        let wrong = |elem: &str, name: &str| Error::Circuit(format!("`{elem}` references model `{name}` of the wrong kind"));

        let mut ckt = Circuit {
            title: net.title.clone(),
            node_names: net.nodes.clone(),
            resistors: Vec::new(),
            capacitors: Vec::new(),
            sources: Vec::new(),
            devices: Vec::new(),
            noises: Vec::new(),
        };
        for e in &net.elements {
            let name = e.name.clone();
            match &e.kind {
                ElementKind::Resistor { a, b, ohms } => ckt.resistors.push(Branch {
                    name,
                    a: node(a)?,
                    b: node(b)?,
                    value: *ohms,
                }),
                ElementKind::Capacitor { a, b, farads } => ckt.capacitors.push(Branch {
                    name,
                    a: node(a)?,
                    b: node(b)?,
                    value: *farads,
                }),
                ElementKind::VSource { pos, neg, wave } => ckt.sources.push(Source {
                    name,
                    pos: node(pos)?,
                    neg: node(neg)?,
                    wave: wave.clone(),
                }),
                ElementKind::Noise { pos, neg, intensity } => ckt.noises.push(Branch {
                    name,
                    a: node(pos)?,
                    b: node(neg)?,
                    value: *intensity,
                }),
                ElementKind::Rtd { a, b, model: m } => {
                    let ModelCard::Rtd(card) = model(m)? else {
                        return Err(wrong(&e.name, m));
                    };
                    ckt.devices.push(Device {
                        name,
                        kind: DeviceKind::Rtd {
                            a: node(a)?,
                            b: node(b)?,
                            model: *card,
                        },
                    });
                }
                ElementKind::Nanowire { a, b, model: m } => {
                    let ModelCard::Nanowire(card) = model(m)? else {
                        return Err(wrong(&e.name, m));
                    };
                    ckt.devices.push(Device {
                        name,
                        kind: DeviceKind::Nanowire {
                            a: node(a)?,
                            b: node(b)?,
                            model: *card,
                        },
                    });
                }
                ElementKind::Mosfet {
                    drain,
                    gate,
                    source,
                    model: m,
                    ..
                } => {
                    let ModelCard::Nmos(card) = model(m)? else {
                        return Err(wrong(&e.name, m));
                    };
                    ckt.devices.push(Device {
                        name,
                        kind: DeviceKind::Mos {
                            d: node(drain)?,
                            g: node(gate)?,
                            s: node(source)?,
                            model: *card,
                        },
                    });
                }
            }
        }
        Ok(ckt)
    }

    /// Non-ground node count.
    pub fn n(&self) -> usize {
        self.node_names.len()
    }

    /// Size of the MNA system: nodes plus voltage-source currents.
    pub fn dim(&self) -> usize {
        self.n() + self.sources.len()
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        let lower = name.to_ascii_lowercase();
        self.node_names.iter().position(|n| *n == lower)
    }

    pub fn source_index(&self, name: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn is_linear(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn source_value(&self, k: usize, drive: Drive) -> f64 {
        match drive.fixed {
            Some((j, v)) if j == k => v * drive.scale,
            _ => self.sources[k].wave.eval(drive.t) * drive.scale,
        }
    }

    /// Total capacitance incident on each node.
    pub fn node_capacitance(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n()];
        for cap in &self.capacitors {
            for node in [cap.a, cap.b].into_iter().flatten() {
                c[node] += cap.value;
            }
        }
        c
    }

    /// Dense `n x n` capacitance matrix, row-major.
    pub fn capacitance_matrix(&self) -> Vec<f64> {
        let n = self.n();
        let mut c = vec![0.0; n * n];
        for cap in &self.capacitors {
            stamp_pair(&mut c, n, cap.a, cap.b, cap.value);
        }
        c
    }

    /// Earliest waveform corner of any source strictly after `t`.
    pub fn next_breakpoint(&self, t: f64) -> Option<f64> {
        self.sources
            .iter()
            .filter_map(|s| s.wave.next_breakpoint(t))
            .min_by(f64::total_cmp)
    }

    /// Net current leaving each node through resistors, devices and source
    /// branches, with capacitors open. Zero at an exact DC solution.
    pub fn kcl_residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n()];
        let mut leave = |a: Node, b: Node, i: f64| {
            if let Some(a) = a {
                r[a] += i;
            }
            if let Some(b) = b {
                r[b] -= i;
            }
        };
        for res in &self.resistors {
            let v = node_voltage(x, res.a) - node_voltage(x, res.b);
            leave(res.a, res.b, v / res.value);
        }
        for d in &self.devices {
            let (a, b) = d.channel();
            leave(a, b, d.current(x));
        }
        for (k, s) in self.sources.iter().enumerate() {
            leave(s.pos, s.neg, x[self.n() + k]);
        }
        r
    }

    /// Largest absolute element current in a solution, used to scale residual tolerances.
    pub fn current_scale(&self, x: &[f64]) -> f64 {
        let mut scale: f64 = 0.0;
        for res in &self.resistors {
            let v = node_voltage(x, res.a) - node_voltage(x, res.b);
            scale = scale.max((v / res.value).abs());
        }
        for d in &self.devices {
            scale = scale.max(d.current(x).abs());
        }
        scale
    }
}

fn stamp_pair(m: &mut [f64], dim: usize, a: Node, b: Node, g: f64) {
    if let Some(a) = a {
        m[a * dim + a] += g;
    }
    if let Some(b) = b {
        m[b * dim + b] += g;
    }
    if let (Some(a), Some(b)) = (a, b) {
        m[a * dim + b] -= g;
        m[b * dim + a] -= g;
    }
}

/// The linear system `matrix * x = rhs` for one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MnaSystem {
    pub n: usize,
    pub m: usize,
    /// Row-major `(n + m) x (n + m)`.
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
    pub node_index: BTreeMap<String, usize>,
}

impl MnaSystem {
    pub fn new(ckt: &Circuit) -> Self {
        let dim = ckt.dim();
        MnaSystem {
            n: ckt.n(),
            m: ckt.sources.len(),
            matrix: vec![0.0; dim * dim],
            rhs: vec![0.0; dim],
            node_index: ckt
                .node_names
                .iter()
                .enumerate()
                .map(|(i, n)| (n.clone(), i))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.dim() + col]
    }

    pub fn stamp_conductance(&mut self, a: Node, b: Node, g: f64, fc: &mut FlopCounter) {
        let dim = self.dim();
        stamp_pair(&mut self.matrix, dim, a, b, g);
        fc.add(a.is_some() as u64 + b.is_some() as u64 + 2 * (a.is_some() && b.is_some()) as u64);
    }

    /// A current `i` flowing from `a` to `b` through the element (so it leaves `a`).
    pub fn stamp_current(&mut self, a: Node, b: Node, i: f64, fc: &mut FlopCounter) {
        if let Some(a) = a {
            self.rhs[a] -= i;
            fc.add(1);
        }
        if let Some(b) = b {
            self.rhs[b] += i;
            fc.add(1);
        }
    }

    /// Current `gm * (v(cp) - v(cn))` flowing from `a` to `b`.
    pub fn stamp_vccs(&mut self, a: Node, b: Node, cp: Node, cn: Node, gm: f64, fc: &mut FlopCounter) {
        let dim = self.dim();
        for (row, sign_r) in [(a, 1.0), (b, -1.0)] {
            let Some(row) = row else { continue };
            for (col, sign_c) in [(cp, 1.0), (cn, -1.0)] {
                let Some(col) = col else { continue };
                self.matrix[row * dim + col] += sign_r * sign_c * gm;
                fc.add(1);
            }
        }
    }

    /// Auxiliary row `k` enforcing `v(pos) - v(neg) = volts`.
    pub fn stamp_vsource(&mut self, k: usize, pos: Node, neg: Node, volts: f64) {
        let dim = self.dim();
        let row = self.n + k;
        if let Some(p) = pos {
            self.matrix[p * dim + row] += 1.0;
            self.matrix[row * dim + p] += 1.0;
        }
        if let Some(q) = neg {
            self.matrix[q * dim + row] -= 1.0;
            self.matrix[row * dim + q] -= 1.0;
        }
        self.rhs[row] = volts;
    }

    pub fn solve(&self, fc: &mut FlopCounter) -> Result<Vec<f64>> {
        let lu = LuFactors::factor(self.matrix.clone(), self.dim(), fc)?;
        Ok(lu.solve(&self.rhs, fc))
    }

    /// Largest `|matrix * x - rhs|` entry.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                let row = &self.matrix[i * dim..(i + 1) * dim];
                let ax: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                (ax - self.rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Linear stamps that do not depend on the solution: resistors, source rows,
/// and (for finite `h`) capacitor companion conductances.
pub fn stamp_static(ckt: &Circuit, sys: &mut MnaSystem, h: f64, fc: &mut FlopCounter) {
    for r in &ckt.resistors {
        fc.div(1);
        sys.stamp_conductance(r.a, r.b, 1.0 / r.value, fc);
    }
    if h.is_finite() {
        for c in &ckt.capacitors {
            fc.div(1);
            sys.stamp_conductance(c.a, c.b, c.value / h, fc);
        }
    }
}

/// Assembles the system for one step of length `h` ending at `drive.t`.
///
/// `geq` holds one conductance per device in circuit order, stamped between
/// the device's channel terminals. `x_prev` is the solution at the start of
/// the step and feeds the capacitor companion currents. `h = f64::INFINITY`
/// drops capacitors entirely (resistive DC assembly).
pub fn assemble(
    ckt: &Circuit,
    geq: &[f64],
    x_prev: &[f64],
    h: f64,
    drive: Drive,
    fc: &mut FlopCounter,
) -> Result<MnaSystem> {
    if geq.len() < ckt.devices.len() {
        return Err(Error::MissingConductance(ckt.devices[geq.len()].name.clone()));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let mut sys = MnaSystem::new(ckt);
    stamp_static(ckt, &mut sys, h, fc);
    for (d, &g) in ckt.devices.iter().zip(geq) {
        if !g.is_finite() {
            return Err(Error::MissingConductance(d.name.clone()));
        }
        let (a, b) = d.channel();
        sys.stamp_conductance(a, b, g, fc);
    }
    if h.is_finite() {
        for c in &ckt.capacitors {
            let v = node_voltage(x_prev, c.a) - node_voltage(x_prev, c.b);
            fc.add(1);
            fc.mul(1);
            fc.div(1);
            // The companion source pushes current back into `a`.
            sys.stamp_current(c.a, c.b, -(c.value / h) * v, fc);
        }
    }
    for (k, s) in ckt.sources.iter().enumerate() {
        sys.stamp_vsource(k, s.pos, s.neg, ckt.source_value(k, drive));
    }
    Ok(sys)
}

/// Pivots smaller than this fraction of the original row scale are singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// In-place LU factors of a square matrix with row pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors a row-major `dim x dim` matrix.
    pub fn factor(mut a: Vec<f64>, dim: usize, fc: &mut FlopCounter) -> Result<LuFactors> {
        assert_eq!(a.len(), dim * dim, "matrix shape");
        let mut scale: Vec<f64> = (0..dim)
            .map(|i| a[i * dim..(i + 1) * dim].iter().fold(0.0, |m: f64, v| m.max(v.abs())))
            .collect();
        let mut perm: Vec<usize> = (0..dim).collect();
        for k in 0..dim {
            let p = (k..dim)
                .max_by(|&i, &j| a[i * dim + k].abs().total_cmp(&a[j * dim + k].abs()))
                .expect("non-empty range");
            let pivot = a[p * dim + k];
            let threshold = PIVOT_TOLERANCE * scale[p];
            if !(pivot.abs() > threshold) || scale[p] == 0.0 {
                return Err(Error::Singular {
                    row: perm[p],
                    pivot: pivot.abs(),
                    threshold,
                });
            }
            if p != k {
                for j in 0..dim {
                    a.swap(k * dim + j, p * dim + j);
                }
                perm.swap(k, p);
                scale.swap(k, p);
            }
            for i in k + 1..dim {
                let f = a[i * dim + k] / pivot;
                fc.div(1);
                a[i * dim + k] = f;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..dim {
                    a[i * dim + j] -= f * a[k * dim + j];
                }
                let w = (dim - k - 1) as u64;
                fc.mul(w);
                fc.add(w);
            }
        }
        Ok(LuFactors { dim, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, b: &[f64], fc: &mut FlopCounter) -> Vec<f64> {
        let n = self.dim;
        let a = &self.lu;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= a[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= a[i * n + j] * x[j];
            }
            x[i] = s / a[i * n + i];
        }
        let tri = (n * n.saturating_sub(1)) as u64;
        fc.mul(tri);
        fc.add(tri);
        fc.div(n as u64);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::parse_netlist;

    fn compile(src: &str) -> Circuit {
        Circuit::compile(&parse_netlist(src).unwrap()).unwrap()
    }

    fn dc_solve(ckt: &Circuit) -> Vec<f64> {
        let mut fc = FlopCounter::ZERO;
        let x0 = vec![0.0; ckt.dim()];
        assemble(ckt, &[], &x0, f64::INFINITY, Drive::at(0.0), &mut fc)
            .unwrap()
            .solve(&mut fc)
            .unwrap()
    }

    #[test]
    fn ideal_source_drives_node() {
        let ckt = compile("V1 1 0 DC 5\nR1 1 0 1k\n.end\n");
        let x = dc_solve(&ckt);
        assert!((x[0] - 5.0).abs() < 1e-12);
        // 5 mA leaves the positive terminal into the resistor, so the branch
        // current through the source from + to - is -5 mA.
        assert!((x[1] + 5e-3).abs() < 1e-15);
    }

    #[test]
    fn divider() {
        let ckt = compile("V1 1 0 5\nR1 1 2 1k\nR2 2 0 1k\n.end\n");
        let x = dc_solve(&ckt);
        assert!((x[0] - 5.0).abs() < 1e-12);
        assert!((x[1] - 2.5).abs() < 1e-12);
        assert!(ckt.kcl_residual(&x).iter().all(|r| r.abs() < 1e-15));
    }

    #[test]
    fn capacitor_companion() {
        let ckt = compile("V1 in 0 1\nR1 in 1 1k\nC1 1 0 1p\n.end\n");
        let mut fc = FlopCounter::ZERO;
        let prev = vec![1.0, 1.0, 0.0];
        let sys = assemble(&ckt, &[], &prev, 1e-12, Drive::at(0.0), &mut fc).unwrap();
        let node = ckt.node("1").unwrap();
        // g = C/h = 1 S plus the resistor; companion current C/h * v_prev = 1 A.
        assert!((sys.at(node, node) - (1.0 + 1e-3)).abs() < 1e-15);
        assert!((sys.rhs[node] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_solve() {
        let mut fc = FlopCounter::ZERO;
        let n = 4;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        let lu = LuFactors::factor(a, n, &mut fc).unwrap();
        let x = lu.solve(&[0.0, 0.0, 1.0, 0.0], &mut fc);
        assert_eq!(x, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn singular_detected() {
        let mut fc = FlopCounter::ZERO;
        let err = LuFactors::factor(vec![1.0, 2.0, 2.0, 4.0], 2, &mut fc).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }));
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut fc = FlopCounter::ZERO;
        let lu = LuFactors::factor(vec![0.0, 1.0, 1.0, 0.0], 2, &mut fc).unwrap();
        assert_eq!(lu.solve(&[3.0, 7.0], &mut fc), vec![7.0, 3.0]);
    }

    #[test]
    fn missing_conductance_names_device() {
        let ckt = compile(
            "V1 1 0 1\nR1 1 2 10\nXRTD1 2 0 m\n.model m RTD (A=1e-4 B=2 C=1.5 D=0.3 H=1.43e-8 n1=0.35 n2=0.0172)\n.end\n",
        );
        let mut fc = FlopCounter::ZERO;
        let err = assemble(&ckt, &[], &[0.0; 3], f64::INFINITY, Drive::at(0.0), &mut fc).unwrap_err();
        assert!(matches!(err, Error::MissingConductance(ref n) if n == "XRTD1"));
    }

    #[test]
    fn lu_flops_cubic() {
        let mut fc = FlopCounter::ZERO;
        let n = 10;
        let a: Vec<f64> = (0..n * n)
            .map(|k| if k % (n + 1) == 0 { 10.0 } else { 1.0 })
            .collect();
        LuFactors::factor(a, n, &mut fc).unwrap();
        // sum_k (n-k-1) divs and (n-k-1)^2 mul/add pairs
        let divs: u64 = (0..n as u64).map(|k| n as u64 - k - 1).sum();
        let sq: u64 = (0..n as u64).map(|k| (n as u64 - k - 1).pow(2)).sum();
        assert_eq!(fc, FlopCounter::new(sq, sq, divs, 0));
    }
}
