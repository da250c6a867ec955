use thiserror::Error;

/// Errors raised while reading benchmark or normalized instance files.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("input is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: vertex {id} has an inverted time window [{open}, {close}]")]
    InvertedWindow {
        line: usize,
        id: usize,
        open: f64,
        close: f64,
    },
    #[error("line {line}: missing `{column}` column")]
    MissingColumn { line: usize, column: &'static str },
    #[error("header declares {declared} customers but the body has {found}")]
    CountMismatch { declared: usize, found: usize },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("unsupported format header `{0}`")]
    Version(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl ParseError {
    pub(crate) fn malformed(line: usize, message: impl Into<String>) -> Self {
        ParseError::Malformed {
            line,
            message: message.into(),
        }
    }
}

/// Argument errors for instance transformations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("customer count {requested} out of range 1..={available}")]
    TruncateRange { requested: usize, available: usize },
    #[error("maximum requirement must be at least 1")]
    ZeroRequirement,
    #[error("team size must be at least 1")]
    ZeroTeam,
    #[error("velocity must be finite and positive, got {0}")]
    Velocity(f64),
    #[error("requirement vector has {found} entries, expected {expected}")]
    RequirementLength { expected: usize, found: usize },
    #[error("depot must have requirement 0")]
    DepotRequirement,
}

/// Errors raised while reading a serialized solution.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("member {0} is listed twice")]
    DuplicateMember(usize),
    #[error("members must be numbered 1..={expected}, missing member {missing}")]
    MissingMember { expected: usize, missing: usize },
}
