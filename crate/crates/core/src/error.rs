use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not unitary: max |U U^dagger - 1| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("energy {energy} is not a flat-band energy of this model")]
    EnergyNotInSpectrum { energy: f64 },

    #[error(
        "cage reaches cell {cell}, within {margin} cells of the chain end; rerun with more cells (currently {n_cells})"
    )]
    BoundaryContamination { cell: i64, margin: i64, n_cells: usize },

    #[error("unsupported link structure for tone synthesis: {0}")]
    UnsupportedLink(String),

    #[error("transition frequencies collide on the {pair} link: {freq} (2pi GHz)")]
    DegenerateTransitions { pair: &'static str, freq: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailure,

    #[error("linear system is singular")]
    Singular,

    #[error("step size underflow at t = {t} (step {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
