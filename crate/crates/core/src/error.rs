use thiserror::Error;

use crate::lang::{ParseError, Violation};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("program is not valid for this backend: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("input space of {size} tuples exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },
    #[error("{source} (input {input})")]
    AtInput { input: String, source: Box<Error> },
    #[error("cannot split: {0}")]
    Split(String),
    #[error("bad domain: {0}")]
    Domain(String),
    #[error("bad circuit: {0}")]
    Circuit(String),
    #[error("bad target: {0}")]
    Target(String),
    #[error("{0}")]
    Config(String),
    #[error("register budget of {0} qubits exceeded")]
    Budget(usize),
    #[error("support of {0} basis states exceeds the simulation cap")]
    Support(usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
