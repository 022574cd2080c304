use thiserror::Error;

/// Failures reported by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no change of shooting class between amplitudes {lo} and {hi}")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("threshold bracket [{lo}, {hi}] does not straddle the detection tolerance")]
    NoStraddle { lo: f64, hi: f64 },

    #[error("degenerate angular basis at degree {ell}: Gram condition number {condition:.3e}")]
    DegenerateBasis { ell: usize, condition: f64 },

    #[error("eigensolver failed on matrix {fingerprint}")]
    EigenFailure { fingerprint: String },

    #[error("Newton polish of the discrete profile stalled at residual {residual:.3e}")]
    PolishFailure { residual: f64 },

    #[error("I/O failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
