use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid functions do not share grid metadata")]
    GridMismatch,

    #[error("deformation is not strictly increasing at node {index}")]
    NonMonotoneDeformation { index: usize },

    #[error("jacobian is not positive at node {index} (value {value})")]
    NonAdmissible { index: usize, value: f64 },

    #[error("query {query} outside the deformed range [{lo}, {hi}]")]
    OutOfRange { query: f64, lo: f64, hi: f64 },

    #[error("picard iteration failed to contract at sweep {sweep} (ratio {ratio})")]
    NoContraction { sweep: usize, ratio: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
