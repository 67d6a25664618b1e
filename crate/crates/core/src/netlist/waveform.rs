//! Independent source waveforms.

use std::fmt;

use super::value::format_value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub v1: f64,
    pub v2: f64,
    pub delay: f64,
    pub rise: f64,
    pub fall: f64,
    pub width: f64,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Dc(f64),
    /// Breakpoints `(time, value)` with strictly increasing times.
    Pwl(Vec<(f64, f64)>),
    Pulse(Pulse),
}

impl Waveform {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Waveform::Dc(v) => {
                if !v.is_finite() {
                    return Err("DC level must be finite".into());
                }
            }
            Waveform::Pwl(points) => {
                if points.is_empty() {
                    return Err("PWL needs at least one breakpoint".into());
                }
                if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return Err("PWL breakpoints must be finite".into());
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err("PWL breakpoint times must be strictly increasing".into());
                }
            }
            Waveform::Pulse(p) => {
                let all = [p.v1, p.v2, p.delay, p.rise, p.fall, p.width, p.period];
                if all.iter().any(|x| !x.is_finite()) {
                    return Err("PULSE parameters must be finite".into());
                }
                if p.rise <= 0.0 || p.fall <= 0.0 {
                    return Err("PULSE rise and fall times must be positive".into());
                }
                if p.delay < 0.0 || p.width < 0.0 {
                    return Err("PULSE delay and width must be non-negative".into());
                }
                if p.period <= p.rise + p.width + p.fall {
                    return Err("PULSE period must exceed rise + width + fall".into());
                }
            }
        }
        Ok(())
    }

    /// Source value at time `t` (seconds).
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Waveform::Dc(v) => *v,
            Waveform::Pwl(points) => eval_pwl(points, t),
            Waveform::Pulse(p) => p.eval(t),
        }
    }

    /// Earliest corner of the waveform strictly after `t`, if any.
    pub fn next_breakpoint(&self, t: f64) -> Option<f64> {
        match self {
            Waveform::Dc(_) => None,
            Waveform::Pwl(points) => points.iter().map(|p| p.0).find(|&bt| bt > t),
            Waveform::Pulse(p) => p.next_breakpoint(t),
        }
    }

    /// Largest |dv/dt| over all segments; zero for flat waveforms.
    pub fn max_slope(&self) -> f64 {
        match self {
            Waveform::Dc(_) => 0.0,
            Waveform::Pwl(points) => points
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
            Waveform::Pulse(p) => {
                let dv = (p.v2 - p.v1).abs();
                (dv / p.rise).max(dv / p.fall)
            }
        }
    }
}

fn eval_pwl(points: &[(f64, f64)], t: f64) -> f64 {
    let (first, last) = (points[0], points[points.len() - 1]);
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    // First breakpoint with time > t; t lies in [points[i-1], points[i]).
    let i = points.partition_point(|p| p.0 <= t);
    let (t0, v0) = points[i - 1];
    let (t1, v1) = points[i];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

impl Pulse {
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.delay {
            return self.v1;
        }
        let tau = (t - self.delay) % self.period;
        if tau < self.rise {
            self.v1 + (self.v2 - self.v1) * tau / self.rise
        } else if tau < self.rise + self.width {
            self.v2
        } else if tau < self.rise + self.width + self.fall {
            self.v2 + (self.v1 - self.v2) * (tau - self.rise - self.width) / self.fall
        } else {
            self.v1
        }
    }

    fn next_breakpoint(&self, t: f64) -> Option<f64> {
        if t < self.delay {
            return Some(self.delay);
        }
        let cycle = ((t - self.delay) / self.period).floor();
        let corners = [
            0.0,
            self.rise,
            self.rise + self.width,
            self.rise + self.width + self.fall,
            self.period,
        ];
        for k in [cycle, cycle + 1.0] {
            let start = self.delay + k * self.period;
            if let Some(bt) = corners.iter().map(|c| start + c).find(|&bt| bt > t) {
                return Some(bt);
            }
        }
        None
    }
}

impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Waveform::Dc(v) => write!(f, "DC {}", format_value(*v)),
            Waveform::Pwl(points) => {
                write!(f, "PWL(")?;
                for (i, (t, v)) in points.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{} {}", format_value(*t), format_value(*v))?;
                }
                write!(f, ")")
            }
            Waveform::Pulse(p) => write!(
                f,
                "PULSE({} {} {} {} {} {} {})",
                format_value(p.v1),
                format_value(p.v2),
                format_value(p.delay),
                format_value(p.rise),
                format_value(p.fall),
                format_value(p.width),
                format_value(p.period)
            ),
        }
    }
}
