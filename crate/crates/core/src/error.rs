use thiserror::Error;

/// Errors raised anywhere in the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operand: {0}")]
    InvalidOperand(String),

    #[error("integer of {required} bits exceeds the bit budget of {budget}")]
    BitBudget { required: u64, budget: u64 },

    #[error("scheduler enumeration needs {required} schedulers, budget is {budget}")]
    SchedulerBudget { required: u128, budget: u128 },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no scheduler reaches the target almost surely from the initial state")]
    NoAdmissibleScheduler,

    #[error("unreliable estimate: {truncated} of {episodes} episodes hit the horizon")]
    UnreliableEstimate { truncated: u64, episodes: u64 },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable kebab-case identifier of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidOperand(_) => "invalid-operand",
            Error::BitBudget { .. } => "bit-budget",
            Error::SchedulerBudget { .. } => "scheduler-budget",
            Error::Syntax { .. } => "syntax",
            Error::InvalidModel(_) => "invalid-model",
            Error::InvalidInput(_) => "invalid-input",
            Error::Dimension(_) => "dimension",
            Error::Unbounded => "unbounded",
            Error::Precondition(_) => "precondition",
            Error::NoAdmissibleScheduler => "no-admissible-scheduler",
            Error::UnreliableEstimate { .. } => "unreliable-estimate",
            Error::Internal(_) => "internal",
        }
    }
}
