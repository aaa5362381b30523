use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown factor label `{0}`")]
    UnknownFactor(String),

    #[error("duplicate factor label `{0}`")]
    DuplicateFactor(String),

    #[error("factor dimensions must be positive (factor `{0}`)")]
    EmptyFactor(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different spaces: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("operator is not Hermitian (max |M - M^dag| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("ladder operators need dimension >= 2, got {0}")]
    LadderTooSmall(usize),

    #[error("unknown photonic mode label `{0}`")]
    UnknownMode(String),

    #[error(
        "coherent amplitude |alpha|^2 = {alpha_sq} exceeds the truncation guard \
         n_max/4 = {limit} (or leaves residual {residual:e})"
    )]
    TruncationGuard { alpha_sq: f64, limit: f64, residual: f64 },

    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("closed forms have a pole at 2 xi = omega_m (|2 xi - omega_m| = {gap:e})")]
    ResonancePole { gap: f64 },

    #[error("pre- and post-selected states are orthogonal (|<f|i>| = {overlap:e})")]
    OrthogonalSelection { overlap: f64 },

    #[error("post-selection probability {probability:e} is below the representable floor")]
    PostSelectionFailed { probability: f64 },

    #[error("delta must be nonzero for {0}")]
    ZeroDelta(&'static str),

    #[error("degenerate post-selection: P = delta^2 + phi^2/4 = 0")]
    DegenerateProbability,

    #[error("first-order expansion needs phi <= 0.1, got {0}")]
    ExpansionGuard(f64),

    #[error("grid does not cover the state's support: {0}")]
    GridGuard(String),

    #[error("grid needs at least 2 points per axis and increasing ranges")]
    BadGrid,

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
}
