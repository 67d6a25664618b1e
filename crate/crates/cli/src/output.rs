//! CSV tables and gnuplot scripts.

use std::path::Path;

use nanosim::stochastic::EnsembleStats;
use nanosim::swec::{DcSweep, WaveformSeries};
use nanosim::Circuit;

use crate::commands::Failure;

/// `v` rounded to six significant digits, printed without trailing zeros.
pub fn significant(v: f64) -> String {
    let rounded: f64 = format!("{v:.5e}").parse().unwrap_or(v);
    format!("{rounded}")
}

/// Shortest text that parses back to exactly `v`; exponent form outside
/// `[1e-4, 1e15)` so small times stay readable.
pub fn number(v: f64) -> String {
    let v = v + 0.0;
    let mag = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&mag) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn table(header: Vec<String>, rows: impl IntoIterator<Item = Vec<f64>>, preamble: &str) -> Result<Vec<u8>, Failure> {
    let mut buf = preamble.as_bytes().to_vec();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let fail = |e: csv::Error| Failure::Input(format!("cannot format CSV: {e}"));
        w.write_record(&header).map_err(fail)?;
        for row in rows {
            w.write_record(row.iter().map(|&v| number(v))).map_err(fail)?;
        }
        w.flush().map_err(|e| Failure::Input(format!("cannot format CSV: {e}")))?;
    }
    Ok(buf)
}

/// Columns: bias, current through each nonlinear device, current delivered
/// by the swept source, then every node voltage.
pub fn dc_csv(ckt: &Circuit, sweep: &DcSweep) -> Result<Vec<u8>, Failure> {
    let k = ckt.source_index(&sweep.source).expect("sweep source exists");
    let n = ckt.n();
    let mut header = vec!["bias".to_string()];
    header.extend(ckt.devices.iter().map(|d| format!("i({})", d.name)));
    header.push(format!("i({})", sweep.source));
    header.extend(ckt.node_names.iter().map(|name| format!("v({name})")));
    let rows = sweep.points.iter().map(|p| {
        let mut row = vec![p.bias];
        row.extend(&p.device_currents);
        row.push(-p.x[n + k]);
        row.extend(&p.x[..n]);
        row
    });
    table(header, rows, "")
}

pub fn tran_csv(wave: &WaveformSeries) -> Result<Vec<u8>, Failure> {
    let mut header = vec!["t".to_string()];
    header.extend(wave.node_names.iter().map(|name| format!("v({name})")));
    let rows = wave.times.iter().zip(&wave.voltages).map(|(t, v)| {
        let mut row = vec![*t];
        row.extend(v);
        row
    });
    table(header, rows, "")
}

fn level_name(p: f64) -> String {
    format!("q{:02}", (p * 100.0).round() as u32)
}

/// One row per recorded time with mean, variance and quantiles of every
/// node, preceded by a comment echoing the run parameters and followed by
/// the window-peak summary as comments.
pub fn stoch_csv(stats: &EnsembleStats, dt: f64) -> Result<Vec<u8>, Failure> {
    let preamble = format!("# seed={} paths={} dt={}\n", stats.seed, stats.paths, number(dt));
    let mut header = vec!["t".to_string()];
    for name in &stats.node_names {
        header.push(format!("mean({name})"));
        header.push(format!("var({name})"));
        for &p in &stats.levels {
            header.push(format!("{}({name})", level_name(p)));
        }
    }
    let rows = (0..stats.times.len()).map(|t| {
        let mut row = vec![stats.times[t]];
        for i in 0..stats.node_names.len() {
            row.push(stats.mean[t][i]);
            row.push(stats.variance[t][i]);
            for q in &stats.quantiles {
                row.push(q[t][i]);
            }
        }
        row
    });
    let mut buf = table(header, rows, &preamble)?;
    if let Some((a, b)) = stats.window {
        buf.extend(format!("# window peak over [{}, {}]\n", number(a), number(b)).as_bytes());
        for (name, s) in stats.node_names.iter().zip(&stats.peak_summary) {
            let line = format!(
                "# peak({name}) mean={} q50={} q95={}\n",
                number(s.mean),
                number(s.q50),
                number(s.q95)
            );
            buf.extend(line.as_bytes());
        }
    }
    Ok(buf)
}

/// Linear interpolation of the waveform onto `points` uniformly spaced times.
pub fn resample(wave: &WaveformSeries, points: usize) -> WaveformSeries {
    let t_end = *wave.times.last().expect("waveform has samples");
    let mut times = Vec::with_capacity(points);
    let mut voltages = Vec::with_capacity(points);
    let mut j = 0;
    for i in 0..points {
        let t = t_end * i as f64 / (points - 1) as f64;
        while j + 2 < wave.times.len() && wave.times[j + 1] < t {
            j += 1;
        }
        let (t0, t1) = (wave.times[j], wave.times[(j + 1).min(wave.times.len() - 1)]);
        let w = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        let v0 = &wave.voltages[j];
        let v1 = &wave.voltages[(j + 1).min(wave.times.len() - 1)];
        times.push(t);
        voltages.push(v0.iter().zip(v1).map(|(a, b)| a + w * (b - a)).collect());
    }
    WaveformSeries {
        node_names: wave.node_names.clone(),
        times,
        voltages,
        stats: wave.stats.clone(),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn script_head(data: &Path, xlabel: &str, ylabel: &str) -> String {
    format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset key outside autotitle columnhead\nset grid\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\ndata = '{}'\n",
        file_name(data)
    )
}

fn plot_columns(columns: impl Iterator<Item = usize>, x: usize) -> String {
    let parts: Vec<String> = columns
        .map(|c| format!("data using {x}:{c} with lines"))
        .collect();
    format!("plot {}\n", parts.join(", \\\n     "))
}

/// I-V curves of the nonlinear devices against the sweep bias, or the node
/// voltages when there are none.
pub fn dc_plot(data: &Path, ckt: &Circuit) -> String {
    let devices = ckt.devices.len();
    if devices > 0 {
        script_head(data, "bias (V)", "current (A)") + &plot_columns(2..2 + devices, 1)
    } else {
        script_head(data, "bias (V)", "voltage (V)") + &plot_columns(3..3 + ckt.n(), 1)
    }
}

pub fn tran_plot(data: &Path, wave: &WaveformSeries) -> String {
    script_head(data, "time (s)", "voltage (V)") + &plot_columns(2..2 + wave.node_names.len(), 1)
}

/// Mean and outer quantiles of every node against time.
pub fn stoch_plot(data: &Path, stats: &EnsembleStats) -> String {
    let per_node = 2 + stats.levels.len();
    let mut columns = Vec::new();
    for i in 0..stats.node_names.len() {
        let base = 2 + i * per_node;
        columns.push(base);
        columns.push(base + 2);
        if stats.levels.len() > 1 {
            columns.push(base + 1 + stats.levels.len());
        }
    }
    script_head(data, "time (s)", "voltage (V)") + &plot_columns(columns.into_iter(), 1)
}
