use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nanosim::netlist::Analysis;
use nanosim::nr::{flop_compare, CompareAnalysis, FlopComparison, NrOptions};
use nanosim::stochastic::{ensemble, EmConfig, DEFAULT_LEVELS};
use nanosim::swec::{dc_sweep, operating_point, transient, SimConfig};
use nanosim::{parse_netlist, Circuit, Error, FlopCounter, Netlist};

use crate::output;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    /// Bad input: unreadable file, parse or validation error, bad flag.
    #[error("{0}")]
    Input(String),
    /// The numerics gave up.
    #[error("{0}")]
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Numerical(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() || matches!(e, Error::NonFiniteVoltage(_)) {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

/// Summary of one command, printed on standard error.
#[derive(Debug, Default)]
pub struct RunReport {
    pub analysis: &'static str,
    pub wall: Duration,
    pub steps: Option<(usize, usize)>,
    pub flops: Vec<(&'static str, FlopCounter)>,
    pub outputs: Vec<PathBuf>,
    pub warnings: Vec<String>,
    /// Failures that still left results behind (unsettled sweep points).
    pub errors: Vec<String>,
}

impl RunReport {
    fn new(analysis: &'static str) -> Self {
        RunReport {
            analysis,
            ..RunReport::default()
        }
    }

    pub fn exit_code(&self) -> u8 {
        if !self.errors.is_empty() {
            2
        } else if !self.warnings.is_empty() {
            3
        } else {
            0
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "analysis: {}", self.analysis)?;
        writeln!(f, "wall time: {:.3} s", self.wall.as_secs_f64())?;
        if let Some((taken, rejected)) = self.steps {
            writeln!(f, "steps: {taken} accepted, {rejected} rejected")?;
        }
        for (engine, flops) in &self.flops {
            writeln!(f, "flops ({engine}): {flops}")?;
        }
        for path in &self.outputs {
            writeln!(f, "wrote: {}", path.display())?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        Ok(())
    }
}

pub struct CommonArgs {
    pub file: PathBuf,
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub eps: Option<f64>,
}

pub struct DcArgs {
    pub source: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub compare_nr: bool,
}

pub struct TranArgs {
    pub tstop: Option<f64>,
    pub resample: Option<usize>,
    pub from_op: bool,
}

pub struct StochArgs {
    pub tstop: Option<f64>,
    pub dt: Option<f64>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub window: Option<(f64, f64)>,
    pub stride: usize,
    pub from_op: bool,
}

fn load(path: &Path) -> Result<(Netlist, Circuit), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let net = parse_netlist(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let ckt = Circuit::compile(&net).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((net, ckt))
}

fn sim_config(common: &CommonArgs, t_stop: f64) -> SimConfig {
    let mut cfg = SimConfig::new(t_stop);
    if let Some(eps) = common.eps {
        cfg.eps = eps;
    }
    cfg
}

fn check_plot(common: &CommonArgs) -> Result<(), Failure> {
    if common.plot && common.out.is_none() {
        return Err(Failure::Input("--plot needs --out".into()));
    }
    Ok(())
}

/// Writes the CSV (and plot script) and records the paths in the report.
fn emit(
    common: &CommonArgs,
    report: &mut RunReport,
    csv: &[u8],
    plot: impl FnOnce(&Path) -> String,
) -> Result<(), Failure> {
    let write = |path: &Path, bytes: &[u8]| {
        std::fs::write(path, bytes).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
    };
    match &common.out {
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(csv)
                .map_err(|e| Failure::Input(format!("cannot write standard output: {e}")))?;
        }
        Some(path) => {
            write(path, csv)?;
            report.outputs.push(path.clone());
            if common.plot {
                let script = path.with_extension("gp");
                write(&script, plot(path).as_bytes())?;
                report.outputs.push(script);
            }
        }
    }
    Ok(())
}

fn speedup_lines(cmp: &FlopComparison) -> String {
    format!(
        "flops: swec = {}, nr = {}, speedup = {:.3}\nnr iterations = {}, nr failures = {}, swec solves = {}\n",
        cmp.swec.total(),
        cmp.nr.total(),
        cmp.speedup,
        cmp.nr_iterations,
        cmp.nr_failures,
        cmp.swec_solves
    )
}

pub fn op(common: &CommonArgs, compare_nr: bool) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let mut report = RunReport::new("op");
    let (_, ckt) = load(&common.file)?;
    let cfg = sim_config(common, SimConfig::default().t_stop);
    cfg.validate()?;
    let op = operating_point(&ckt, &cfg)?;
    let mut text = String::new();
    for (name, v) in ckt.node_names.iter().zip(op.voltages(ckt.n())) {
        text.push_str(&format!("v({name}) = {}\n", output::significant(*v)));
    }
    report.steps = Some((op.stats.steps_taken, op.stats.steps_rejected));
    report.flops.push(("swec", op.stats.flops));
    if compare_nr {
        let cmp = flop_compare(&ckt, &CompareAnalysis::Op, &cfg, NrOptions::default())?;
        text.push_str(&speedup_lines(&cmp));
        report.flops.push(("nr", cmp.nr));
    }
    print!("{text}");
    report.wall = start.elapsed();
    Ok(report)
}

pub fn dc(common: &CommonArgs, args: DcArgs) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let mut report = RunReport::new("dc");
    check_plot(common)?;
    let (net, ckt) = load(&common.file)?;
    let deck = match net.dc_directive() {
        Some(Analysis::Dc {
            source,
            start,
            stop,
            points,
        }) => Some((source.clone(), *start, *stop, *points)),
        _ => None,
    };
    let missing = |what: &str| Failure::Input(format!("no {what}: give --{what} or a .dc card"));
    let source = args
        .source
        .or_else(|| deck.as_ref().map(|d| d.0.clone()))
        .ok_or_else(|| missing("source"))?;
    let from = args.from.or(deck.as_ref().map(|d| d.1)).ok_or_else(|| missing("from"))?;
    let to = args.to.or(deck.as_ref().map(|d| d.2)).ok_or_else(|| missing("to"))?;
    let points = args.points.or(deck.as_ref().map(|d| d.3)).ok_or_else(|| missing("points"))?;
    if points < 2 {
        return Err(Failure::Input(format!("--points must be at least 2, got {points}")));
    }

    let cfg = sim_config(common, SimConfig::default().t_stop);
    let sweep = dc_sweep(&ckt, &source, from, to, points, &cfg)?;
    report.steps = Some((sweep.stats.steps_taken, sweep.stats.steps_rejected));
    report.flops.push(("swec", sweep.stats.flops));
    for (bias, msg) in &sweep.failures {
        report.errors.push(format!("sweep point {bias}: {msg}"));
    }
    if args.compare_nr {
        let analysis = CompareAnalysis::DcSweep {
            source: source.clone(),
            start: from,
            stop: to,
            points,
        };
        let cmp = flop_compare(&ckt, &analysis, &cfg, NrOptions::default())?;
        report.flops.push(("nr", cmp.nr));
        eprint!("{}", speedup_lines(&cmp));
    }
    let csv = output::dc_csv(&ckt, &sweep)?;
    emit(common, &mut report, &csv, |p| output::dc_plot(p, &ckt))?;
    report.wall = start.elapsed();
    Ok(report)
}

pub fn tran(common: &CommonArgs, args: TranArgs) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let mut report = RunReport::new("tran");
    check_plot(common)?;
    let (net, ckt) = load(&common.file)?;
    let (deck_tstop, deck_eps) = match net.tran_directive() {
        Some(Analysis::Tran { tstop, eps }) => (Some(*tstop), *eps),
        _ => (None, None),
    };
    let tstop = args
        .tstop
        .or(deck_tstop)
        .ok_or_else(|| Failure::Input("no stop time: give --tstop or a .tran card".into()))?;
    let mut cfg = sim_config(common, tstop);
    if common.eps.is_none() {
        if let Some(eps) = deck_eps {
            cfg.eps = eps;
        }
    }
    cfg.start_from_op = args.from_op;
    if args.resample == Some(0) || args.resample == Some(1) {
        return Err(Failure::Input("--resample needs at least 2 points".into()));
    }
    let wave = transient(&ckt, &cfg)?;
    report.steps = Some((wave.stats.steps_taken, wave.stats.steps_rejected));
    report.flops.push(("swec", wave.stats.flops));
    if wave.stats.h_min_hits > 0 {
        report.warnings.push(format!(
            "{} steps were accepted at h_min with the error above budget",
            wave.stats.h_min_hits
        ));
    }
    let wave = match args.resample {
        Some(n) => output::resample(&wave, n),
        None => wave,
    };
    let csv = output::tran_csv(&wave)?;
    emit(common, &mut report, &csv, |p| output::tran_plot(p, &wave))?;
    report.wall = start.elapsed();
    Ok(report)
}

pub fn stoch(common: &CommonArgs, args: StochArgs) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let mut report = RunReport::new("stoch");
    check_plot(common)?;
    let (net, ckt) = load(&common.file)?;
    let deck = match net.stoch_directive() {
        Some(Analysis::Stoch {
            tstop,
            dt,
            paths,
            seed,
        }) => Some((*tstop, *dt, *paths, *seed)),
        _ => None,
    };
    let missing = |what: &str| Failure::Input(format!("no {what}: give --{what} or a .stoch card"));
    let tstop = args.tstop.or(deck.map(|d| d.0)).ok_or_else(|| missing("tstop"))?;
    let dt = args.dt.or(deck.map(|d| d.1)).ok_or_else(|| missing("dt"))?;
    let paths = args.paths.or(deck.map(|d| d.2)).ok_or_else(|| missing("paths"))?;
    let seed = args.seed.or(deck.and_then(|d| d.3)).unwrap_or(0);

    let mut cfg = EmConfig::new(dt, tstop, seed);
    cfg.stride = args.stride;
    cfg.window = args.window;
    if args.from_op {
        let sim = sim_config(common, SimConfig::default().t_stop);
        let op = operating_point(&ckt, &sim)?;
        report.flops.push(("swec", op.stats.flops));
        cfg.initial = Some(op.voltages(ckt.n()).to_vec());
    }
    let stats = ensemble(&ckt, &cfg, paths, &DEFAULT_LEVELS)?;
    report.flops.push(("em", stats.flops));
    report.warnings.extend(stats.warnings.iter().cloned());
    let csv = output::stoch_csv(&stats, dt)?;
    emit(common, &mut report, &csv, |p| output::stoch_plot(p, &stats))?;
    report.wall = start.elapsed();
    Ok(report)
}
