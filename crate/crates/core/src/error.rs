use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid code configuration: {0}")]
    InvalidCode(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observation length mismatch: expected {expected} channel symbols, got {got}")]
    ObservationLength { expected: usize, got: usize },

    #[error("enumeration exceeded the cap of {cap} error events (lower dtilde or raise the cap)")]
    CandidateCap { cap: usize },

    #[error("no candidate CRC produced a codeword of weight <= {dtilde}; increase dtilde")]
    DtildeTooSmall { dtilde: u32 },

    #[error("non-finite value at rho = {rho} (sample {sample})")]
    NonFinite { rho: f64, sample: usize },

    #[error("effective sample size {ess:.1} is below 1% of {samples} samples; use more samples")]
    LowEffectiveSampleSize { ess: f64, samples: usize },

    #[error("failed to bracket rho_hat: {0}")]
    Bracket(String),

    #[error("curves do not overlap: {0}")]
    NoOverlap(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
