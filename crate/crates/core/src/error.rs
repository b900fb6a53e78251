use thiserror::Error;

use crate::theory::ComponentId;

/// Errors shared across the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("cyclic dependency through proposition `{0}`")]
    CyclicDependency(String),

    #[error("primitive proposition `{0}` used as a clause head")]
    PrimitiveHead(String),

    #[error("missing root declaration")]
    MissingRoot,

    #[error("root proposition `{0}` may not be primitive")]
    PrimitiveRoot(String),

    #[error("duplicate root declaration")]
    DuplicateRoot,

    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),

    #[error("component `{0}` does not resolve in this theory")]
    Unresolvable(ComponentId),

    #[error("component `{0}` addresses a primitive proposition")]
    PrimitiveComponent(ComponentId),

    #[error("example lists `{0}`, which is not a declared primitive")]
    UnknownPrimitive(String),

    #[error("disabling map key `{0}` is not an open component")]
    KeyNotOpen(ComponentId),

    #[error("literal component `{0}` only admits ALL or NONE disabling sets")]
    LitDisablingSet(ComponentId),

    #[error("not parity-definite; open components with undefined parity: {}",
            format_ids(.0))]
    NotParityDefinite(Vec<ComponentId>),

    #[error("enumeration budget exceeded: {needed} choices, budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("operation requires the {required} revision policy")]
    WrongPolicy { required: &'static str },

    #[error("input theory already uses the reserved name `{0}`")]
    FreshNameCollision(String),

    #[error("revision targets `{0}`, which is not an open component")]
    ClosedComponent(ComponentId),

    #[error("revision disabling set references example index {0}, out of range")]
    ExampleIndexOutOfRange(usize),

    #[error("CNF is not monotone: clause {0} mixes positive and negative literals")]
    NonMonotoneCnf(usize),

    #[error("CNF literal references variable index {0}, out of range")]
    CnfVariableOutOfRange(usize),

    #[error("predicate `{name}` used with arities {first} and {second}")]
    ArityMismatch { name: String, first: usize, second: usize },

    #[error("fact predicate `{0}` heads a clause with a non-empty body")]
    FactPredicateHead(String),

    #[error("theory is not quasi-propositional; offending literals: {}", .0.join(", "))]
    NotQuasiPropositional(Vec<String>),

    #[error("theory has non-ground facts; offending facts: {}", .0.join(", "))]
    NonGroundFacts(Vec<String>),

    #[error("example arity {got} does not match root arity {expected}")]
    ExampleArity { expected: usize, got: usize },
}

fn format_ids(ids: &[ComponentId]) -> String {
    ids.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
