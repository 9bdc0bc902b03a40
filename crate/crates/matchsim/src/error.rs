use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not unitary (max residual {residual:e})")]
    NotUnitary { residual: f64 },
    #[error("det(a) != det(b) (residual {residual:e})")]
    DeterminantMismatch { residual: f64 },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("validation failed [{invariant}]: {detail}")]
    Validation { invariant: &'static str, detail: String },
    #[error("guard references unassigned record `{0}`")]
    UnresolvedGuard(String),
    #[error("rotation entry has imaginary part {residual:e}")]
    NonRealResidual { residual: f64 },
    #[error("entangled block of width {width} exceeds cap {cap}")]
    BlockTooLarge { width: usize, cap: usize },
    #[error("probability has imaginary or negative residual {value:e}")]
    ImaginaryResidual { value: f64 },
    #[error("estimated {terms:e} summands exceed budget {budget:e}")]
    BudgetExceeded { terms: f64, budget: f64 },
    #[error("sampled prefix has probability {0:e}")]
    ZeroProbabilityPrefix(f64),
    #[error("matrix is not skew-symmetric (residual {residual:e})")]
    NotSkew { residual: f64 },
    #[error("inconsistent contraction slots: {0}")]
    InconsistentSlots(String),
    #[error("decomposition failed: {0}")]
    DecompositionFailure(String),
    #[error("no unconsumed magic block available")]
    NoMagicAvailable,
    #[error("no success after {attempts} attempts (success bound {bound})")]
    MaxAttemptsExceeded { attempts: usize, bound: f64 },
    #[error("unsupported input layout: {0}")]
    UnsupportedLayout(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("conditioned mass {0:e} too small")]
    ZeroConditionMass(f64),
    #[error("backend inapplicable: {0}")]
    BackendInapplicable(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Validation { invariant, detail: detail.into() }
    }
}
