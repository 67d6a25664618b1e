//! Quantum wire with a staircase conductance.
//!
//! `G(v) = g0 * sum_{i=1..nsteps} logistic((|v| - i*vstep) / smooth)`: each
//! conduction channel opens as a smoothed unit step, giving the plateaus seen
//! in measured nanotube characteristics. The current is `G(v) * v`.

use crate::flops::FlopCounter;

use super::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NanowireModel {
    /// Conductance added by each opened channel, siemens.
    pub g0: f64,
    /// Spacing between channel thresholds, volts.
    pub vstep: f64,
    pub nsteps: u32,
    /// Width of each transition, volts.
    pub smooth: f64,
}

impl NanowireModel {
    pub fn validate(&self) -> Result<(), String> {
        for (name, value) in [("g0", self.g0), ("vstep", self.vstep), ("smooth", self.smooth)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("NW parameter {name} must be positive, got {value}"));
            }
        }
        if self.nsteps == 0 {
            return Err("NW parameter nsteps must be at least 1".into());
        }
        Ok(())
    }

    pub fn geq(&self, v: f64) -> f64 {
        let mag = v.abs();
        let sum: f64 = (1..=self.nsteps)
            .map(|i| sigmoid((mag - f64::from(i) * self.vstep) / self.smooth))
            .sum();
        self.g0 * sum
    }

    pub fn current(&self, v: f64) -> f64 {
        self.geq(v) * v
    }

    /// dG/dv.
    pub fn dgeq_dv(&self, v: f64) -> f64 {
        let mag = v.abs();
        let sum: f64 = (1..=self.nsteps)
            .map(|i| {
                let s = sigmoid((mag - f64::from(i) * self.vstep) / self.smooth);
                s * (1.0 - s)
            })
            .sum();
        v.signum() * self.g0 / self.smooth * sum
    }

    /// dI/dv = G + v dG/dv.
    pub fn slope(&self, v: f64) -> f64 {
        self.geq(v) + v * self.dgeq_dv(v)
    }

    pub fn geq_cost(&self) -> FlopCounter {
        FlopCounter::new(3, 1, 1, 1) * u64::from(self.nsteps) + FlopCounter::new(0, 1, 0, 0)
    }

    pub fn dgeq_cost(&self) -> FlopCounter {
        FlopCounter::new(4, 2, 1, 1) * u64::from(self.nsteps) + FlopCounter::new(0, 2, 1, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wire() -> NanowireModel {
        NanowireModel {
            g0: 7.75e-5,
            vstep: 0.5,
            nsteps: 4,
            smooth: 0.025,
        }
    }

    #[test]
    fn nearly_closed_at_zero_bias() {
        let m = wire();
        let bound = m.g0 * f64::from(m.nsteps) * sigmoid(-m.vstep / m.smooth);
        assert!(m.geq(0.0) <= bound);
        assert!(m.geq(0.0) < 1e-9 * m.g0 * 4.0 * 100.0);
    }

    #[test]
    fn plateaus_at_integer_multiples() {
        let m = wire();
        for p in 0..=4u32 {
            let v = (f64::from(p) + 0.5) * m.vstep;
            let g = m.geq(v);
            let want = f64::from(p) * m.g0;
            assert!((g - want).abs() <= 0.01 * m.g0, "plateau {p}: {g} vs {want}");
        }
    }

    #[test]
    fn symmetric_in_bias() {
        let m = wire();
        for i in 0..200 {
            let v = -3.0 + 0.03 * f64::from(i);
            assert_eq!(m.geq(v), m.geq(-v));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = wire();
        for v in [-1.02, 0.49, 0.7, 1.5] {
            let h = 1e-7;
            let fd = (m.geq(v + h) - m.geq(v - h)) / (2.0 * h);
            assert!((m.dgeq_dv(v) - fd).abs() <= 1e-6 * fd.abs().max(1e-6));
        }
    }
}
