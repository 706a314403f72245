use thiserror::Error;

/// Errors shared across the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected; smallest component: {component:?}")]
    Disconnected { component: Vec<usize> },

    #[error("vertex cap exceeded: requested {requested} vertices, cap is {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("ball B({center}, {radius}) is empty")]
    EmptyBall { center: usize, radius: f64 },

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown curve: {0}")]
    UnknownCurve(String),

    #[error("domain monotonicity violated: entry ({x},{y}) decreased by {violation:e} between R={r_small} and R={r_large}")]
    MonotonicityViolation {
        x: usize,
        y: usize,
        violation: f64,
        r_small: f64,
        r_large: f64,
    },

    #[error("positivity breach: defect {value:e} at vertex {vertex}")]
    PositivityBreach { vertex: usize, value: f64 },

    #[error("stage '{stage}' failed (inputs {inputs_hash}): {source}")]
    Stage {
        stage: String,
        inputs_hash: String,
        #[source]
        source: Box<Error>,
    },

    #[error("verification mismatch: {0}")]
    VerifyMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
