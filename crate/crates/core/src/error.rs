use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its invariant. `field` is the dotted path.
    #[error("{field}: {message}")]
    Config { field: String, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no root: target {target} outside attainable range [{lo}, {hi}]")]
    NoRoot { target: f64, lo: f64, hi: f64 },

    #[error("expected request count {expected:.0} exceeds cap {cap:.0}")]
    ResourceCap { expected: f64, cap: f64 },

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("run failed at {point}: {source}")]
    Run {
        point: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{} run(s) failed: {}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Sweep(Vec<Error>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}
