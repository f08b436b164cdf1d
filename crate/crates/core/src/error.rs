use alloc::string::String;

/// Errors raised by the simulator core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dense realization needs {requested} qubits, cap is {cap}")]
    Resource { requested: usize, cap: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("internal consistency violated: {0}")]
    Consistency(String),
    #[error("denominator indistinguishable from zero: |D| = {magnitude:.3e}, stderr = {stderr:.3e}")]
    DenominatorVanishes { magnitude: f64, stderr: f64 },
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
