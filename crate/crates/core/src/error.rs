use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MrError>;

/// A cell that could not be read as a valid number or identifier.
#[derive(Debug, Error)]
#[error("{path}: row {row} ({snp_id}), column `{column}`: {message} (value {value:?})")]
pub struct ParseError {
    pub path: PathBuf,
    pub row: usize,
    pub snp_id: String,
    pub column: String,
    pub value: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum MrError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: column `{column}` not found in header")]
    Schema { path: PathBuf, column: String },

    #[error(transparent)]
    Parse(Box<ParseError>),

    #[error("{path}: malformed delimited text: {message}")]
    Malformed { path: PathBuf, message: String },

    #[error("{path}: duplicate snp_id `{snp_id}`")]
    DuplicateSnp { path: PathBuf, snp_id: String },

    #[error("no SNPs are shared by all input files")]
    EmptyJoin,

    #[error("dataset must contain at least one SNP")]
    EmptyDataset,

    #[error("duplicate snp_id `{0}` in dataset")]
    DuplicateRecord(String),

    #[error("selection mask has {mask} entries but dataset has {dataset} SNPs")]
    MaskLength { mask: usize, dataset: usize },

    #[error("no SNPs pass the selection threshold")]
    EmptySelection,

    #[error("lambda > 0 requires selection-dataset columns (gamma_star, se_gamma_star)")]
    MissingSelectionData,

    #[error("invalid selection threshold {0}")]
    InvalidLambda(f64),

    #[error("degenerate denominator: {quantity} = {value}")]
    DegenerateDenominator { quantity: &'static str, value: f64 },

    #[error("weak-instrument degeneracy: theta2 = {theta2} (psi_hat = {psi_hat})")]
    WeakInstrument { theta2: f64, psi_hat: f64 },

    #[error("theta1 = 0, modification factor undefined")]
    ZeroNumerator,

    #[error("variance estimate is not positive (delta_hat = {delta})")]
    VarianceDegenerate { delta: f64 },

    #[error("{method} needs at least {needed} instruments, got {got}")]
    InsufficientInstruments {
        method: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("singular design: exposure coefficients are collinear with the intercept")]
    SingularDesign,

    #[error("Wald ratio undefined for SNP `{0}` (gamma_hat = 0)")]
    UndefinedRatio(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("method {method} failed in all {reps} replications")]
    MethodFailure { method: String, reps: usize },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MrError {
    /// Short stable code used in report tables.
    pub fn code(&self) -> &'static str {
        match self {
            MrError::Io { .. } => "io",
            MrError::Schema { .. } => "schema",
            MrError::Parse(_) => "parse",
            MrError::Malformed { .. } => "malformed",
            MrError::DuplicateSnp { .. } | MrError::DuplicateRecord(_) => "duplicate-snp",
            MrError::EmptyJoin => "empty-join",
            MrError::EmptyDataset => "empty-dataset",
            MrError::MaskLength { .. } => "mask-length",
            MrError::EmptySelection => "empty-selection",
            MrError::MissingSelectionData => "missing-selection-data",
            MrError::InvalidLambda(_) => "invalid-lambda",
            MrError::DegenerateDenominator { .. } => "degenerate-denominator",
            MrError::WeakInstrument { .. } => "weak-instrument",
            MrError::ZeroNumerator => "zero-numerator",
            MrError::VarianceDegenerate { .. } => "variance-degenerate",
            MrError::InsufficientInstruments { .. } => "insufficient-instruments",
            MrError::SingularDesign => "singular-design",
            MrError::UndefinedRatio(_) => "undefined-ratio",
            MrError::Config(_) => "config",
            MrError::MethodFailure { .. } => "method-failure",
            MrError::UnknownMethod(_) => "unknown-method",
            MrError::Csv(_) => "csv",
            MrError::Json(_) => "json",
        }
    }
}
