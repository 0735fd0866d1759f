use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error class, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Invalid data or a violated precondition.
    Data,
    /// Filesystem failure.
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate (zero-variance) vector: {what}")]
    DegenerateVector { what: String },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("duplicate task name `{0}`")]
    DuplicateTask(String),

    #[error("condition lists differ between `{left}` and `{right}`")]
    ConditionMismatch { left: String, right: String },

    #[error("task sets differ: {0}")]
    TaskMismatch(String),

    #[error("invalid similarity matrix: {0}")]
    InvalidSimilarity(String),

    #[error("invalid cluster count k={k} for {n} tasks")]
    InvalidK { k: usize, n: usize },

    #[error("bad magic at byte 0: expected \"RSAF\"")]
    BadMagic,

    #[error("unsupported format version {0}")]
    VersionUnsupported(u16),

    #[error("truncated input at byte {offset}: need {needed} more bytes")]
    TruncatedPayload { offset: usize, needed: usize },

    #[error("{extra} trailing bytes after payload at byte {offset}")]
    TrailingBytes { offset: usize, extra: usize },

    #[error("invalid UTF-8 string at byte {offset}")]
    BadUtf8 { offset: usize },

    #[error("duplicate condition id `{id}` at row {row}")]
    DuplicateConditionId { id: String, row: usize },

    #[error("affinity table is missing its orientation row")]
    MissingOrientation,

    #[error("duplicate source task `{0}`")]
    DuplicateSource(String),

    #[error("non-finite score for `{0}`")]
    NonFiniteScore(String),

    #[error("asymmetric beyond tolerance at ({row}, {col})")]
    AsymmetricBeyondTolerance { row: usize, col: usize },

    #[error("bad diagonal entry at row {row}")]
    BadDiagonal { row: usize },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) => ErrorClass::Io,
            _ => ErrorClass::Data,
        }
    }

    /// Stable snake_case identifier for machine-readable reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::DegenerateVector { .. } => "degenerate_vector",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidInput(_) => "invalid_input",
            Error::DuplicateTask(_) => "duplicate_task",
            Error::ConditionMismatch { .. } => "condition_mismatch",
            Error::TaskMismatch(_) => "task_mismatch",
            Error::InvalidSimilarity(_) => "invalid_similarity",
            Error::InvalidK { .. } => "invalid_k",
            Error::BadMagic => "bad_magic",
            Error::VersionUnsupported(_) => "version_unsupported",
            Error::TruncatedPayload { .. } => "truncated_payload",
            Error::TrailingBytes { .. } => "trailing_bytes",
            Error::BadUtf8 { .. } => "bad_utf8",
            Error::DuplicateConditionId { .. } => "duplicate_condition_id",
            Error::MissingOrientation => "missing_orientation",
            Error::DuplicateSource(_) => "duplicate_source",
            Error::NonFiniteScore(_) => "non_finite_score",
            Error::AsymmetricBeyondTolerance { .. } => "asymmetric_beyond_tolerance",
            Error::BadDiagonal { .. } => "bad_diagonal",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
