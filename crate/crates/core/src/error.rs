use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid register shape: {0}")]
    InvalidShape(String),

    #[error("invalid gate placement: {0}")]
    InvalidPlacement(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not diagonal (off-diagonal magnitude {0:e})")]
    NotDiagonal(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported inner circuit: {0}")]
    UnsupportedInner(String),

    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("photon cutoff exceeded: {found} > {cutoff}")]
    CutoffOverflow { found: usize, cutoff: usize },

    #[error("herald probability is zero for input {0}")]
    ZeroHerald(usize),

    #[error("attenuation balancing failed: residual {residual:e}, best success {success}")]
    BalanceFailed { residual: f64, success: f64 },

    #[error("missing measurement settings: {0}")]
    MissingSettings(String),

    #[error("no counts recorded")]
    NoCounts,

    #[error("singular preparation set")]
    SingularPreparations,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
