use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("ground set of size {n} exceeds the limit of {limit} for {what}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative input component x[{index}] = {value}")]
    NegativeInput { index: usize, value: f64 },

    #[error("set function is not normalized: f(empty) = {0}")]
    NotNormalized(f64),

    #[error("set function is not monotone: f({a:#b}) = {fa} > f({b:#b}) = {fb}")]
    NotMonotone { a: u64, b: u64, fa: f64, fb: f64 },

    #[error(
        "set function is not submodular at A = {a:#b}, B = {b:#b}, v = {v}: gain {gain_a} < {gain_b}"
    )]
    NotSubmodular {
        a: u64,
        b: u64,
        v: usize,
        gain_a: f64,
        gain_b: f64,
    },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("greedy vertex {x:?} lies outside the polymatroid")]
    OutsidePolymatroid { x: Vec<f64> },

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("construction is inexact: max abs error {0}")]
    Inexact(f64),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
