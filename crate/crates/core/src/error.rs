use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty review")]
    EmptyReview,

    #[error("unknown aspect {0:?}")]
    UnknownAspect(String),

    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("missing weight for metric {0}")]
    MissingWeight(&'static str),

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("{malformed} of {total} lines malformed (limit 1%); first: {first}")]
    TooManyMalformed { malformed: usize, total: usize, first: String },

    #[error("no decisive matches")]
    NoDecisiveMatches,

    #[error("no matches")]
    NoMatches,

    #[error("degenerate design: every covariate difference is zero")]
    DegenerateDesign,

    #[error("degenerate min-max: all weight components equal")]
    DegenerateMinMax,

    #[error("infeasible; rerun with soft mode ({conflicts} irreducible conflicts)")]
    Infeasible { conflicts: usize },

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("too few records: need at least {needed}, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
