use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("cannot parse scheme '{0}' (expected e.g. 7MR, 3-of-6, NMR:7, DMMR:3:6)")]
    SchemeSyntax(String),

    #[error("module index {index} out of range for a {n_modules}-module scheme")]
    InvalidPattern { index: usize, n_modules: usize },

    #[error("{n_modules} modules exceeds the enumeration limit of {limit}")]
    UnsupportedSize { n_modules: usize, limit: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no metrics available for scheme {0}")]
    MissingMetrics(String),

    #[error("malformed input: {0}")]
    Format(String),
}
