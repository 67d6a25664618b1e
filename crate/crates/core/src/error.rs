use thiserror::Error;

use crate::netlist::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between reading a deck and producing a waveform.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid circuit: {0}")]
    Circuit(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("device evaluation at non-finite voltage {0}")]
    NonFiniteVoltage(f64),

    #[error("singular matrix: pivot {pivot:e} at row {row} below threshold {threshold:e}")]
    Singular { row: usize, pivot: f64, threshold: f64 },

    #[error("no conductance supplied for nonlinear element `{0}`")]
    MissingConductance(String),

    #[error("transient exceeded {0} steps")]
    MaxSteps(usize),

    #[error("operating point did not settle by t = {t:e} s (max |dv/dt| = {rate:e} V/s)")]
    SettleFailure { t: f64, rate: f64, last: Vec<f64> },

    #[error("length mismatch: {what} has {got} samples, expected {expected}")]
    LengthMismatch { what: &'static str, got: usize, expected: usize },
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::MaxSteps(_) | Error::SettleFailure { .. }
        )
    }
}
