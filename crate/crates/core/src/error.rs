use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("table has no data")]
    EmptyTable,
    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),
    #[error("no predicate separates a strict subset of the column")]
    NoPredicates,
    #[error("annotation carries no formatted examples")]
    NoExamples,
    #[error("cluster has no members")]
    EmptyCluster,
    #[error("rule of type {rule} cannot run on a {column} column")]
    TypeMismatch { rule: String, column: String },
    #[error("every conjunction of the rule is contradictory")]
    Unsatisfiable,
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("labels contain a single class")]
    Degenerate,
    #[error("no decision tree within the node budget fits the examples")]
    TreeFailed,
    #[error("tree has no positive leaf")]
    NoPositiveLeaf,
    #[error("no candidate rule fits the examples")]
    NoCandidates,
    #[error("predicate pool too large for exhaustive search ({0} distinct masks)")]
    PoolTooLarge(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable code, used by the service and CLI diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedInput(_) => "MalformedInput",
            Error::EmptyTable => "EmptyTable",
            Error::InvalidAnnotation(_) => "InvalidAnnotation",
            Error::NoPredicates => "NoPredicates",
            Error::NoExamples => "NoExamples",
            Error::EmptyCluster => "EmptyCluster",
            Error::TypeMismatch { .. } => "TypeMismatch",
            Error::Unsatisfiable => "Unsatisfiable",
            Error::Schema { .. } => "SchemaError",
            Error::Degenerate => "Degenerate",
            Error::TreeFailed => "TreeFailed",
            Error::NoPositiveLeaf => "NoPositiveLeaf",
            Error::NoCandidates => "NoCandidates",
            Error::PoolTooLarge(_) => "PoolTooLarge",
            Error::Config(_) => "ConfigError",
        }
    }

    /// True for the outcomes a user fixes by giving more examples.
    pub fn needs_more_examples(&self) -> bool {
        matches!(self, Error::NoPredicates | Error::NoCandidates)
    }
}
