use std::fmt;

use thiserror::Error;

use crate::structure::Structure;

/// Everything that can go wrong inside the workbench.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("structure invariant violated: {0}")]
    InvalidStructure(String),
    #[error("constant `{0}` is interpreted inconsistently in the two structures")]
    ConstantDisagreement(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: Position, msg: String },
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("arity clash for `{name}`: declared {declared}, used with {used}")]
    ArityClash {
        name: String,
        declared: usize,
        used: usize,
    },
    #[error("unsafe rule `{rule}`: head variable `{var}` does not occur in the body")]
    UnsafeRule { rule: String, var: String },
    #[error("constants in rule bodies are not supported by the evaluator (rule `{0}`)")]
    ConstantInRule(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("budget exceeded for {what}: needs at least {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u64,
    },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("formula has free variables: {0:?}")]
    FreeVariables(Vec<String>),
    #[error("input is not a strict linear order on the domain: {0}")]
    NotLinearOrder(String),
    #[error("precondition violated: {reason}")]
    Precondition {
        reason: String,
        counterexample: Option<Box<Structure>>,
    },
    #[error("no template survives validation")]
    EmptyMenu,
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }

    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos: Position { line, col },
            msg: msg.into(),
        }
    }
}

/// 1-based line and column of a parse error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Upper bound on the amount of work an operation may perform. What is
/// counted depends on the operation (candidate maps, structures, branches).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Budget(pub u64);

impl Budget {
    pub const UNLIMITED: Budget = Budget(u64::MAX);

    pub(crate) fn check(self, what: &'static str, needed: u128) -> Result<()> {
        if needed > self.0 as u128 {
            Err(Error::BudgetExceeded {
                what,
                needed,
                limit: self.0,
            })
        } else {
            Ok(())
        }
    }
}
