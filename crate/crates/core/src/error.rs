use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not symmetric (deviation {deviation:e})")]
    NotSymmetric { deviation: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("isometry needs rows >= cols, got {rows}x{cols}")]
    IsometryShape { rows: usize, cols: usize },

    #[error("ensemble size {m} is smaller than the rank {rank}")]
    EnsembleTooSmall { m: usize, rank: usize },

    #[error("three-tangle vanishes; the tangle phase is undefined")]
    ZeroTangle,

    #[error("negative radicand {0:e} in the linear-response formula")]
    NegativeRadicand(f64),

    #[error("no sign change of {0} on the search interval")]
    NoRoot(&'static str),

    #[error("root inversion failed: {0}")]
    Inversion(String),
}

pub type Result<T> = std::result::Result<T, Error>;
