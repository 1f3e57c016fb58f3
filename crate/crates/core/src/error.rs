use thiserror::Error;

/// Errors produced by topology construction, instance generation, program
/// building and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("topology error: {0}")]
    Topology(String),

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("radio link is singular: {0}")]
    SingularLink(String),

    #[error("rate {0} bps is not in the rate table")]
    UnknownRate(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("plan is incomplete: {0}")]
    IncompletePlan(String),

    #[error("linear program error: {0}")]
    Program(String),

    #[error("enumeration cap exceeded: {0} variables (limit {1})")]
    EnumerationCap(usize, usize),

    #[error("baseline assignment failed: {0}")]
    Baseline(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
