//! `nanosim`: run operating-point, DC-sweep, transient and stochastic
//! analyses on netlist files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, RunReport};

#[derive(Debug, Parser)]
#[command(name = "nanosim", version, about = "Step-wise equivalent conductance circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// DC operating point.
    Op {
        #[command(flatten)]
        common: Common,
        /// Also solve with Newton-Raphson and report the flop ratio.
        #[arg(long)]
        compare_nr: bool,
    },
    /// DC sweep of one voltage source.
    Dc {
        #[command(flatten)]
        common: Common,
        /// Voltage source to sweep; defaults to the deck's .dc card.
        #[arg(long)]
        source: Option<String>,
        /// First bias value.
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Last bias value.
        #[arg(long, value_parser = value, allow_hyphen_values = true)]
        to: Option<f64>,
        /// Number of bias points, at least 2.
        #[arg(long)]
        points: Option<usize>,
        /// Also sweep with Newton-Raphson and report the flop ratio.
        #[arg(long)]
        compare_nr: bool,
    },
    /// Adaptive-step transient.
    Tran {
        #[command(flatten)]
        common: Common,
        /// Stop time; defaults to the deck's .tran card.
        #[arg(long, value_parser = value)]
        tstop: Option<f64>,
        /// Write the waveform on a uniform grid of this many points.
        #[arg(long)]
        resample: Option<usize>,
        /// Start from the operating point instead of all-zero voltages.
        #[arg(long)]
        from_op: bool,
    },
    /// Euler-Maruyama ensemble of a circuit with noise sources.
    Stoch {
        #[command(flatten)]
        common: Common,
        /// Stop time; defaults to the deck's .stoch card.
        #[arg(long, value_parser = value)]
        tstop: Option<f64>,
        /// Fixed time step.
        #[arg(long, value_parser = value)]
        dt: Option<f64>,
        /// Number of sample paths, at least 2.
        #[arg(long)]
        paths: Option<usize>,
        /// Random seed; 0 when neither flag nor deck gives one.
        #[arg(long)]
        seed: Option<u64>,
        /// Peak window as `t_a,t_b`.
        #[arg(long, value_parser = window)]
        window: Option<(f64, f64)>,
        /// Keep every n-th time step in the output.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Start every path from the operating point instead of all-zero voltages.
        #[arg(long)]
        from_op: bool,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Netlist file.
    file: PathBuf,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (needs --out).
    #[arg(long)]
    plot: bool,
    /// Relative local error budget of the step control.
    #[arg(long, value_parser = value)]
    eps: Option<f64>,
}

fn value(text: &str) -> Result<f64, String> {
    nanosim::netlist::parse_value(text).ok_or_else(|| format!("`{text}` is not a number"))
}

fn window(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `t_a,t_b`, got `{text}`"))?;
    Ok((value(a.trim())?, value(b.trim())?))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(text) = std::env::var("NANOSIM_THREADS") else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("NANOSIM_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot start {threads} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<RunReport, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Op { common, compare_nr } => commands::op(&common.into(), compare_nr),
        Command::Dc {
            common,
            source,
            from,
            to,
            points,
            compare_nr,
        } => commands::dc(
            &common.into(),
            commands::DcArgs {
                source,
                from,
                to,
                points,
                compare_nr,
            },
        ),
        Command::Tran {
            common,
            tstop,
            resample,
            from_op,
        } => commands::tran(
            &common.into(),
            commands::TranArgs {
                tstop,
                resample,
                from_op,
            },
        ),
        Command::Stoch {
            common,
            tstop,
            dt,
            paths,
            seed,
            window,
            stride,
            from_op,
        } => commands::stoch(
            &common.into(),
            commands::StochArgs {
                tstop,
                dt,
                paths,
                seed,
                window,
                stride,
                from_op,
            },
        ),
    }
}

impl From<Common> for commands::CommonArgs {
    fn from(c: Common) -> Self {
        commands::CommonArgs {
            file: c.file,
            out: c.out,
            plot: c.plot,
            eps: c.eps,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(report) => {
            eprint!("{report}");
            ExitCode::from(report.exit_code())
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
