//! Long-channel square-law NMOS.
//!
//! Evaluation assumes `vds >= 0`; callers with a reversed channel swap the
//! drain and source roles first (see [`MosModel::oriented`]).

use crate::flops::FlopCounter;

use super::V_EPS;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosModel {
    /// Transconductance parameter, A/V^2.
    pub k: f64,
    /// Effective channel width, meters.
    pub w: f64,
    /// Effective channel length, meters.
    pub l: f64,
    /// Threshold voltage, volts.
    pub vth: f64,
}

pub const CURRENT_COST: FlopCounter = FlopCounter::new(3, 5, 2, 0);
pub const GEQ_COST: FlopCounter = FlopCounter::new(2, 4, 3, 0);
pub const PARTIALS_COST: FlopCounter = FlopCounter::new(2, 6, 4, 0);

/// The operating region of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Cutoff,
    Triode,
    Saturation,
}

impl MosModel {
    pub fn validate(&self) -> Result<(), String> {
        for (name, value) in [("k", self.k), ("W", self.w), ("L", self.l)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("NMOS parameter {name} must be positive, got {value}"));
            }
        }
        if !self.vth.is_finite() {
            return Err("NMOS parameter Vth must be finite".into());
        }
        Ok(())
    }

    /// k W / L.
    #[inline]
    pub fn beta(&self) -> f64 {
        self.k * self.w / self.l
    }

    pub fn region(&self, vgs: f64, vds: f64) -> Region {
        let vov = vgs - self.vth;
        if vov <= 0.0 {
            Region::Cutoff
        } else if vds < vov {
            Region::Triode
        } else {
            Region::Saturation
        }
    }

    /// Drain current for `vds >= 0`.
    pub fn current(&self, vgs: f64, vds: f64) -> f64 {
        let vov = vgs - self.vth;
        match self.region(vgs, vds) {
            Region::Cutoff => 0.0,
            Region::Triode => self.beta() * (vov * vds - vds * vds / 2.0),
            Region::Saturation => self.beta() / 2.0 * vov * vov,
        }
    }

    /// Equivalent conductance I_DS / V_DS. Zero in cutoff.
    pub fn geq(&self, vgs: f64, vds: f64) -> f64 {
        let vov = vgs - self.vth;
        match self.region(vgs, vds) {
            Region::Cutoff => 0.0,
            Region::Triode => self.beta() * (vov - vds / 2.0),
            // Saturation with a vanishing vds only happens when vov is itself
            // below V_EPS; use the triode expression, which has the finite limit.
            Region::Saturation if vds < V_EPS => self.beta() * (vov - vds / 2.0),
            Region::Saturation => self.beta() / 2.0 * vov * vov / vds,
        }
    }

    /// Partial derivatives of the equivalent conductance,
    /// `(dG/dVgs, dG/dVds)`.
    pub fn geq_partials(&self, vgs: f64, vds: f64) -> (f64, f64) {
        let vov = vgs - self.vth;
        let beta = self.beta();
        match self.region(vgs, vds) {
            Region::Cutoff => (0.0, 0.0),
            Region::Triode => (beta, -beta / 2.0),
            Region::Saturation if vds < V_EPS => (beta, -beta / 2.0),
            Region::Saturation => (beta * vov / vds, -beta / 2.0 * vov * vov / (vds * vds)),
        }
    }

    /// Small-signal `(gm, gds)` = `(dI/dVgs, dI/dVds)` for Newton linearization.
    pub fn small_signal(&self, vgs: f64, vds: f64) -> (f64, f64) {
        let vov = vgs - self.vth;
        let beta = self.beta();
        match self.region(vgs, vds) {
            Region::Cutoff => (0.0, 0.0),
            Region::Triode => (beta * vds, beta * (vov - vds)),
            Region::Saturation => (beta * vov, 0.0),
        }
    }

    /// Orders the channel terminals so that the effective `vds` is
    /// non-negative. Returns `(vgs, vds, reversed)` where `reversed` means the
    /// physical source acts as the drain.
    pub fn oriented(vd: f64, vg: f64, vs: f64) -> (f64, f64, bool) {
        if vd >= vs {
            (vg - vs, vd - vs, false)
        } else {
            (vg - vd, vs - vd, true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const M: MosModel = MosModel {
        k: 1e-4,
        w: 2e-6,
        l: 1e-6,
        vth: 1.0,
    };

    #[test]
    fn cutoff_at_threshold() {
        assert_eq!(M.current(1.0, 2.0), 0.0);
        assert_eq!(M.geq(0.5, 2.0), 0.0);
    }

    #[test]
    fn triode_hand_value() {
        // (kW/L)((Vgs - Vth) Vds - Vds^2/2) = 2e-4 * (2 - 0.5)
        let i = M.current(3.0, 1.0);
        assert!((i - 3e-4).abs() < 1e-18);
        assert!((M.geq(3.0, 1.0) - 3e-4).abs() < 1e-18);
    }

    #[test]
    fn continuous_at_saturation_boundary() {
        for vgs in [1.5, 2.0, 3.0, 4.7] {
            let vds = vgs - M.vth;
            let triode = M.beta() * ((vgs - M.vth) * vds - vds * vds / 2.0);
            let sat = M.beta() / 2.0 * (vgs - M.vth).powi(2);
            assert!((triode - sat).abs() <= 1e-12 * sat);
            let below = M.current(vgs, vds * (1.0 - 1e-12));
            assert!((below - M.current(vgs, vds)).abs() <= 1e-12 * sat);
            let g_below = M.geq(vgs, vds * (1.0 - 1e-12));
            assert!((g_below - M.geq(vgs, vds)).abs() <= 1e-11 * M.geq(vgs, vds));
        }
    }

    #[test]
    fn small_vds_limit() {
        assert!((M.geq(3.0, 0.0) - 4e-4).abs() < 1e-18);
        assert!((M.geq(3.0, 1e-12) - 4e-4).abs() < 1e-15);
    }

    #[test]
    fn orientation_swaps_reversed_channel() {
        assert_eq!(MosModel::oriented(1.0, 3.0, 0.0), (3.0, 1.0, false));
        assert_eq!(MosModel::oriented(0.0, 3.0, 1.0), (3.0, 1.0, true));
    }

    #[test]
    fn partials_match_finite_differences() {
        for (vgs, vds) in [(3.0, 0.5), (3.0, 4.0), (2.0, 1.2)] {
            let h = 1e-7;
            let (dg, dd) = M.geq_partials(vgs, vds);
            let fg = (M.geq(vgs + h, vds) - M.geq(vgs - h, vds)) / (2.0 * h);
            let fd = (M.geq(vgs, vds + h) - M.geq(vgs, vds - h)) / (2.0 * h);
            assert!((dg - fg).abs() < 1e-9, "{dg} {fg}");
            assert!((dd - fd).abs() < 1e-9, "{dd} {fd}");
        }
    }
}
