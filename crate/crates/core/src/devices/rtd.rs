//! Resonant tunneling diode: a physics-based current-voltage relation.
//!
//! ```text
//! J1(V) = A ln[(1 + e^((B - C + n1 V)/Vt)) / (1 + e^((B - C - n1 V)/Vt))]
//!           * [pi/2 + atan((C - n1 V)/D)]
//! J2(V) = H (e^(n2 V/Vt) - 1)
//! J(V)  = area * (J1 + J2),          Vt = k T / q
//! ```
//!
//! The current is odd-signed in `V` (J(V) has the sign of V), so the
//! step-wise equivalent conductance `J(V)/V` is strictly positive even across
//! the negative differential resistance region, where `dJ/dV < 0`.

use super::{softplus, sigmoid, BOLTZMANN, ELEMENTARY_CHARGE, V_EPS};
use crate::flops::FlopCounter;

/// Default device temperature when a model card omits `T`.
pub const DEFAULT_TEMPERATURE: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtdModel {
    /// Tunneling current prefactor, amperes.
    pub a: f64,
    /// Volts.
    pub b: f64,
    /// Resonance voltage, volts (the `C` of the usual formula, renamed so it
    /// does not read like a capacitance).
    pub cp: f64,
    /// Resonance width, volts.
    pub d: f64,
    /// Thermionic prefactor, amperes.
    pub h: f64,
    pub n1: f64,
    pub n2: f64,
    /// Kelvin.
    pub temp: f64,
    /// Dimensionless multiplier on the whole current.
    pub area: f64,
}

/// Cost of one [`RtdModel::current`] evaluation.
pub const CURRENT_COST: FlopCounter = FlopCounter::new(8, 7, 5, 6);
/// Cost of one [`RtdModel::geq`] evaluation away from the origin.
pub const GEQ_COST: FlopCounter = FlopCounter::new(8, 7, 6, 6);
/// Cost of one [`RtdModel::dgeq_dv`] evaluation.
pub const DGEQ_COST: FlopCounter = FlopCounter::new(19, 20, 11, 11);
/// Cost of one [`RtdModel::current_and_slope`] evaluation.
pub const CURRENT_SLOPE_COST: FlopCounter = FlopCounter::new(16, 18, 8, 9);

impl RtdModel {
    /// The parameter set used for the FET-RTD inverter experiments:
    /// A = 1e-4, B = 2, C = 1.5, D = 0.3, n1 = 0.35, n2 = 0.0172, H = 1.43e-8.
    pub const REFERENCE: RtdModel = RtdModel {
        a: 1e-4,
        b: 2.0,
        cp: 1.5,
        d: 0.3,
        h: 1.43e-8,
        n1: 0.35,
        n2: 0.0172,
        temp: DEFAULT_TEMPERATURE,
        area: 1.0,
    };

    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.a, self.b, self.cp, self.d, self.h, self.n1, self.n2, self.temp, self.area,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err("RTD parameters must be finite".into());
        }
        for (name, value) in [
            ("A", self.a),
            ("D", self.d),
            ("H", self.h),
            ("n1", self.n1),
            ("n2", self.n2),
            ("T", self.temp),
            ("area", self.area),
        ] {
            if value <= 0.0 {
                return Err(format!("RTD parameter {name} must be positive, got {value}"));
            }
        }
        Ok(())
    }

    /// kT/q in volts.
    #[inline]
    pub fn thermal_voltage(&self) -> f64 {
        BOLTZMANN * self.temp / ELEMENTARY_CHARGE
    }

    /// Terminal current J(V) in amperes.
    pub fn current(&self, v: f64) -> f64 {
        let vt = self.thermal_voltage();
        let x = self.n1 * v;
        let bc = self.b - self.cp;
        let alpha_arg = (bc - x) / vt;
        let beta_arg = (bc + x) / vt;
        let log_ratio = softplus(beta_arg) - softplus(alpha_arg);
        let j1 = self.a * log_ratio * half_pi_plus_atan((self.cp - x) / self.d);
        let j2 = self.h * (self.n2 * v / vt).exp_m1();
        self.area * (j1 + j2)
    }

    /// Differential conductance dJ/dV in siemens. Negative inside the NDR region.
    pub fn slope(&self, v: f64) -> f64 {
        self.current_and_slope(v).1
    }

    /// J(V) and dJ/dV from one shared evaluation of the exponentials.
    pub fn current_and_slope(&self, v: f64) -> (f64, f64) {
        let vt = self.thermal_voltage();
        let x = self.n1 * v;
        let bc = self.b - self.cp;
        let alpha_arg = (bc - x) / vt;
        let beta_arg = (bc + x) / vt;
        let log_ratio = softplus(beta_arg) - softplus(alpha_arg);
        let u = self.cp - x;
        let angle = half_pi_plus_atan(u / self.d);
        let growth = (self.n2 * v / vt).exp();

        let j1 = self.a * log_ratio * angle;
        let j2 = self.h * (growth - 1.0);
        let dj1 = self.a
            * ((self.n1 / vt) * (sigmoid(beta_arg) + sigmoid(alpha_arg)) * angle
                - log_ratio * self.n1 * self.d / (self.d * self.d + u * u));
        let dj2 = self.h * self.n2 / vt * growth;
        (self.area * (j1 + j2), self.area * (dj1 + dj2))
    }

    /// Step-wise equivalent conductance J(V)/V.
    ///
    /// Within `V_EPS` of the origin the ratio is replaced by its limit, the
    /// small-signal slope at zero bias, taken by central difference.
    pub fn geq(&self, v: f64) -> f64 {
        if v.abs() < V_EPS {
            self.zero_bias_conductance()
        } else {
            self.current(v) / v
        }
    }

    pub fn zero_bias_conductance(&self) -> f64 {
        const STEP: f64 = 1e-6;
        (self.current(STEP) - self.current(-STEP)) / (2.0 * STEP)
    }

    /// dG_eq/dV in closed form:
    ///
    /// ```text
    /// dG/dV = (1/V) A [ (n1/Vt)(beta/(1+beta) + alpha/(1+alpha)) (pi/2 + atan((C - n1 V)/D))
    ///                   - ln((1+beta)/(1+alpha)) D n1 / (D^2 + (C - n1 V)^2) ]
    ///       + (1/V) (H n2/Vt) e^(n2 V/Vt)
    ///       - J(V)/V^2
    /// ```
    ///
    /// Returns `None` within `V_EPS` of the origin, where the caller should
    /// evaluate the conductance directly instead of extrapolating it.
    pub fn dgeq_dv(&self, v: f64) -> Option<f64> {
        if v.abs() < V_EPS {
            return None;
        }
        let vt = self.thermal_voltage();
        let x = self.n1 * v;
        let bc = self.b - self.cp;
        let alpha_arg = (bc - x) / vt;
        let beta_arg = (bc + x) / vt;
        let log_ratio = softplus(beta_arg) - softplus(alpha_arg);
        let u = self.cp - x;
        let angle = half_pi_plus_atan(u / self.d);
        let growth = (self.n2 * v / vt).exp();

        let tunnel_slope =
            self.n1 * self.a / vt * (sigmoid(beta_arg) + sigmoid(alpha_arg)) * angle;
        let resonance_slope = self.a * log_ratio * (-self.d * self.n1) / (self.d * self.d + u * u);
        let thermionic_slope = self.h * self.n2 / vt * growth;
        let current = self.a * log_ratio * angle + self.h * (growth - 1.0);

        let dg = (tunnel_slope + resonance_slope + thermionic_slope) / v - current / (v * v);
        Some(self.area * dg)
    }
}

/// pi/2 + atan(x), evaluated as atan2(1, -x) so the sum does not cancel to
/// zero for large negative `x`.
#[inline]
fn half_pi_plus_atan(x: f64) -> f64 {
    1f64.atan2(-x)
}
