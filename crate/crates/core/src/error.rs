use thiserror::Error;

use crate::binary::BinaryString;

/// A parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),

    #[error("variable index of length {found} is shorter than level {required}")]
    Level { found: usize, required: usize },

    #[error("variable indices must all have length {expected}, found x[{index}]")]
    MixedLevel { expected: usize, index: BinaryString },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("function `{name}` takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },

    #[error("no value assigned to x[{0}]")]
    MissingVariable(BinaryString),

    #[error("enumeration needs {needed} steps, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("invalid binary string: {0}")]
    InvalidBits(String),

    #[error("invalid function definition: {0}")]
    FunctionDef(String),

    #[error("condition has no realizations")]
    EmptyCondition,

    #[error("no bit separates x[{target}] from {function}({}) on any realization", join_labels(.args))]
    DisagreementImpossible {
        target: BinaryString,
        function: String,
        args: Vec<BinaryString>,
    },

    #[error("target {target} equals the majority profile of {function}({})", join_labels(.args))]
    AvoidanceImpossible {
        target: BinaryString,
        function: String,
        args: Vec<BinaryString>,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("depth error: {0}")]
    Depth(String),

    #[error("tree has no node at level {0}")]
    NoPath(usize),

    #[error("pattern error: {0}")]
    Pattern(String),

    #[error("unknown {kind} `{name}`")]
    UnknownStrategy { kind: &'static str, name: String },

    #[error("realizability check failed: {0}")]
    Realizability(String),
}

fn join_labels(args: &[BinaryString]) -> String {
    args.iter()
        .map(|s| format!("x[{s}]"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
