//! Device models and the step-wise equivalent conductance machinery.
//!
//! Every nonlinear device is represented at each time point by a single
//! positive conductance, held constant across the step. Between time points
//! that conductance is extrapolated from its value and time derivative at
//! the last accepted point.

pub mod mos;
pub mod nanowire;
pub mod rtd;

pub use mos::MosModel;
pub use nanowire::NanowireModel;
pub use rtd::RtdModel;

use crate::error::{Error, Result};
use crate::flops::FlopCounter;

pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Below this terminal voltage `I/V` is replaced by its limit at the origin.
pub const V_EPS: f64 = 1e-9;

/// Smallest conductance ever stamped for a nonlinear device.
pub const G_FLOOR: f64 = 1e-12;

/// Argument above which `ln(1 + e^x)` is rewritten as `x + ln(1 + e^-x)`.
const SOFTPLUS_SWITCH: f64 = 30.0;

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > SOFTPLUS_SWITCH {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `e^x / (1 + e^x)`, evaluated on the side that cannot overflow.
#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// History a nonlinear device carries between time points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeviceState {
    /// Controlling voltage at the latest accepted point.
    pub v_now: f64,
    /// Controlling voltage one accepted point earlier.
    pub v_prev: f64,
    /// Length of the step between them; zero until a step has been taken.
    pub h_prev: f64,
    /// Equivalent conductance evaluated at `v_now`.
    pub geq_now: f64,
}

impl DeviceState {
    pub fn new(v: f64, geq: f64) -> Self {
        DeviceState {
            v_now: v,
            v_prev: v,
            h_prev: 0.0,
            geq_now: geq,
        }
    }

    pub fn has_history(&self) -> bool {
        self.h_prev > 0.0
    }

    /// Backward-difference slew `(v_now - v_prev) / h_prev`; zero without history.
    pub fn slew(&self) -> f64 {
        if self.has_history() {
            (self.v_now - self.v_prev) / self.h_prev
        } else {
            0.0
        }
    }

    /// Shifts the history forward by one accepted step.
    pub fn advance(&mut self, v: f64, geq: f64, h: f64) {
        self.v_prev = self.v_now;
        self.v_now = v;
        self.h_prev = h;
        self.geq_now = geq;
    }
}

/// Extrapolates a conductance half a step along its time derivative,
/// `G(n+1) = G(n) + (h/2) G'(n)`, and clamps it to [`G_FLOOR`].
#[inline]
pub fn predict_from_rate(geq_now: f64, dgeq_dt: f64, h: f64) -> f64 {
    (geq_now + 0.5 * h * dgeq_dt).max(G_FLOOR)
}

pub const PREDICT_COST: FlopCounter = FlopCounter::new(2, 3, 1, 0);

/// Predicted conductance for the step of length `h` that follows `state`.
///
/// The time derivative of the conductance is the chain rule
/// `dG/dV * dV/dt` with `dV/dt` the backward difference over the last step.
pub fn geq_predict(state: &DeviceState, dgeq_dv: f64, h: f64) -> Result<f64> {
    if !state.has_history() {
        return Err(Error::Config(
            "conductance prediction needs one accepted step of history".into(),
        ));
    }
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    Ok(predict_from_rate(state.geq_now, dgeq_dv * state.slew(), h))
}

/// Kinds of nonlinear device that contribute a slew-rate step bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    /// A transistor: `overdrive` is `V_GS - V_t` at the latest point and
    /// `gate_slew` is `dV_GS/dt`.
    Transistor { overdrive: f64, gate_slew: f64 },
    /// A two-terminal device bounded by its own terminal voltage and slew.
    TwoTerminal { v: f64, slew: f64 },
}

/// Unscaled per-device step limit; the engine multiplies the minimum over
/// all devices and nodes by the error budget.
///
/// Transistors that are off, and devices whose controlling voltage is not
/// moving, impose no limit.
pub fn device_step_bound(kind: BoundKind) -> f64 {
    match kind {
        BoundKind::Transistor {
            overdrive,
            gate_slew,
        } => {
            if overdrive <= 0.0 || gate_slew == 0.0 {
                f64::INFINITY
            } else {
                2.0 * overdrive.abs() / gate_slew.abs()
            }
        }
        BoundKind::TwoTerminal { v, slew } => {
            if slew == 0.0 {
                f64::INFINITY
            } else {
                2.0 * v.abs() / slew.abs()
            }
        }
    }
}

/// Checked J(V) for an RTD.
pub fn rtd_current(m: &RtdModel, v: f64) -> Result<f64> {
    finite(v)?;
    Ok(m.current(v))
}

/// Checked step-wise equivalent conductance for an RTD.
pub fn rtd_geq(m: &RtdModel, v: f64) -> Result<f64> {
    finite(v)?;
    Ok(m.geq(v))
}

/// Checked closed-form dG_eq/dV; `None` inside the origin guard band.
pub fn rtd_dgeq_dv(m: &RtdModel, v: f64) -> Result<Option<f64>> {
    finite(v)?;
    Ok(m.dgeq_dv(v))
}

fn finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteVoltage(v))
    }
}
