use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto a fixed
/// process exit code (see [`crate::cli::exit_code`]).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("linear part is not invertible (smallest singular value {sigma_min:e})")]
    NotAnAutomorphismGerm { sigma_min: f64 },

    #[error("generators do not commute: defect {defect:e} exceeds {tol:e} (pair {i},{j})")]
    NotAbelian {
        i: usize,
        j: usize,
        defect: f64,
        tol: f64,
    },

    #[error("eigenvalue clusters of generator {generator} are separated by {gap:e}, inside the ambiguity band")]
    IllConditionedSpectrum { generator: usize, gap: f64 },

    #[error("normal form residual {residual:e} for generator {generator} exceeds the pattern tolerance")]
    NormalFormResidual { generator: usize, residual: f64 },

    #[error("target vector is not in the orbit span: residual {residual:e}")]
    NotInOrbitSpan { residual: f64 },

    #[error("no common fixed point; per-generator residuals {residuals:?}")]
    NoCommonFixedPoint { residuals: Vec<f64> },

    #[error("word budget would produce {words} words (limit {limit})")]
    BudgetExceeded { words: usize, limit: usize },

    #[error("group is not dominant at the base point: {reason}")]
    NotDominantAtPoint { reason: String },

    #[error("linearization is ill defined: word {word:?} has residual {residual:e} > {tol:e}")]
    IllDefinedLinearization {
        word: Vec<i32>,
        residual: f64,
        tol: f64,
    },

    #[error("no sample points inside the requested region")]
    EmptyRegion,

    #[error("experiment is inconclusive: {0}")]
    InconclusiveExperiment(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Scenario(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
