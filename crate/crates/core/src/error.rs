use thiserror::Error;

/// Errors raised by instance construction, the query oracle and the algorithms
/// built on top of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("query budget exhausted: {used} of {budget} distinct queries already charged")]
    BudgetExhausted { budget: u64, used: u64 },

    #[error(
        "clique below detectability hypothesis: k = {k} must exceed 2*log2(n) = {bound:.4} (n = {n})"
    )]
    BelowDetectability { n: u64, k: u64, bound: f64 },

    #[error(
        "exact enumeration infeasible: C({n},{k}) exceeds the cap {cap} and {queries} queries exceed the \
         inclusion-exclusion limit {ie_limit}; use lower_bound_prob_all_false instead"
    )]
    EnumerationInfeasible {
        n: u64,
        k: u64,
        queries: usize,
        cap: u64,
        ie_limit: usize,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExhausted { .. } => 3,
            Error::Parameter(_)
            | Error::BelowDetectability { .. }
            | Error::EnumerationInfeasible { .. } => 2,
        }
    }

    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, Error::BudgetExhausted { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
