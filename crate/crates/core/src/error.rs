use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Each variant maps to a stable machine-readable code (see [`Error::code`]),
/// which the CLI prints and the C interface mirrors as an integer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("tuple arity must be at least 2, got {0}")]
    ArityTooSmall(usize),
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("sample budget exceeded: {requested} points requested, budget is {budget}")]
    SampleBudgetExceeded { requested: u128, budget: usize },
    #[error("tuple does not commute (residual {residual:.3e} > {tol:.3e})")]
    NonCommuting { residual: f64, tol: f64 },
    #[error("simultaneous triangularization failed after {0} attempts")]
    TriangularizationFailed(usize),
    #[error("operator is not a contraction (norm {0})")]
    NotAContraction(f64),
    #[error("operator is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("joint spectrum leaves the closed symmetrized polydisc at {point:?}")]
    SpectrumOutsideDomain { point: Vec<Complex64> },
    #[error("fundamental equation residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("commutativity condition fails (residual {0:.3e})")]
    CommutativityFailed(f64),
    #[error("not an isometry: {0}")]
    NotAnIsometry(String),
    #[error("truncation horizon too small: {0}")]
    TruncationHorizonTooSmall(String),
    #[error("power iteration did not converge within {iterations} steps (last step {last_step:.3e})")]
    IterationDivergence { iterations: usize, last_step: f64 },
    #[error("quotient map is ill-defined (residual {0:.3e})")]
    IllDefinedQuotient(f64),
    #[error("truncation tail {tail:.3e} exceeds budget {budget:.3e}")]
    TruncationInsufficient { tail: f64, budget: f64 },
    #[error("resolvent is singular at z = {z}")]
    EvaluationSingular { z: Complex64 },
    #[error("last operator is not completely non-unitary (unitary part of rank {0})")]
    NotCnu(usize),
    #[error("grid of {grid} nodes is inadequate for degree {degree} (need at least {need})")]
    GridInadequate { grid: usize, degree: usize, need: usize },
    #[error("minimal model orbit does not fill its space (gap {0:.3e})")]
    NotMinimal(f64),
    #[error("generator Gram matrix is ill-conditioned")]
    IllConditionedGram,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable identifier used by the CLI and the C interface.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite => "non_finite",
            Error::ArityTooSmall(_) => "arity_too_small",
            Error::ArityMismatch { .. } => "arity_mismatch",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::SampleBudgetExceeded { .. } => "sample_budget_exceeded",
            Error::NonCommuting { .. } => "non_commuting",
            Error::TriangularizationFailed(_) => "triangularization_failed",
            Error::NotAContraction(_) => "not_a_contraction",
            Error::NotUnitary(_) => "not_unitary",
            Error::SpectrumOutsideDomain { .. } => "spectrum_outside_domain",
            Error::ResidualTooLarge { .. } => "residual_too_large",
            Error::CommutativityFailed(_) => "commutativity_failed",
            Error::NotAnIsometry(_) => "not_an_isometry",
            Error::TruncationHorizonTooSmall(_) => "truncation_horizon_too_small",
            Error::IterationDivergence { .. } => "iteration_divergence",
            Error::IllDefinedQuotient(_) => "ill_defined_quotient",
            Error::TruncationInsufficient { .. } => "truncation_insufficient",
            Error::EvaluationSingular { .. } => "evaluation_singular",
            Error::NotCnu(_) => "not_cnu",
            Error::GridInadequate { .. } => "grid_inadequate",
            Error::NotMinimal(_) => "not_minimal",
            Error::IllConditionedGram => "ill_conditioned_gram",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }

    /// Numeric code, stable across releases. Zero is reserved for success.
    pub fn numeric_code(&self) -> i32 {
        match self {
            Error::NonFinite => 1,
            Error::ArityTooSmall(_) => 2,
            Error::ArityMismatch { .. } => 3,
            Error::DimensionMismatch(_) => 4,
            Error::InvalidParameter(_) => 5,
            Error::SampleBudgetExceeded { .. } => 6,
            Error::NonCommuting { .. } => 7,
            Error::TriangularizationFailed(_) => 8,
            Error::NotAContraction(_) => 9,
            Error::NotUnitary(_) => 10,
            Error::SpectrumOutsideDomain { .. } => 11,
            Error::ResidualTooLarge { .. } => 12,
            Error::CommutativityFailed(_) => 13,
            Error::NotAnIsometry(_) => 14,
            Error::TruncationHorizonTooSmall(_) => 15,
            Error::IterationDivergence { .. } => 16,
            Error::IllDefinedQuotient(_) => 17,
            Error::TruncationInsufficient { .. } => 18,
            Error::EvaluationSingular { .. } => 19,
            Error::NotCnu(_) => 20,
            Error::GridInadequate { .. } => 21,
            Error::NotMinimal(_) => 22,
            Error::IllConditionedGram => 23,
            Error::Parse(_) => 24,
            Error::Io(_) => 25,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
