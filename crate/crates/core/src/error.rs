use thiserror::Error;

use crate::theorem::CertFailure;

/// Unified error type for the kernel.
///
/// Verdicts that a check *failed* are report content, not errors; errors are
/// reserved for violated preconditions, unrepresentable requests, and
/// exhausted search budgets. The one exception is [`Error::CertificationFailed`],
/// which is the negative-test path of the sigma-additivity certifier and
/// carries the exact failing truncation so the failure itself is re-checkable.
#[derive(Debug, Error)]
pub enum Error {
    #[error("universe mismatch: {0}")]
    UniverseMismatch(String),

    #[error("not in measure domain: {0}")]
    NotInDomain(String),

    #[error("no disjoint decomposition within the family: {0}")]
    NoDecomposition(String),

    #[error("pieces do not cover the target: {0}")]
    NotACover(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("certification failed: {0}")]
    CertificationFailed(Box<CertFailure>),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: certification failures
    /// are verified negative findings (1), everything else is a usage or
    /// precondition problem (2).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CertificationFailed(_) => 1,
            _ => 2,
        }
    }
}
