use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BetaError {
    /// The isolating interval contains zero, no root, or more than one root.
    #[error("root not isolated: {0}")]
    RootNotIsolated(String),

    /// The base must satisfy β > 1.
    #[error("base is not greater than one: {0}")]
    NotGreaterThanOne(String),

    /// The refinement budget was hit while an enclosure still straddles a
    /// decision boundary and no exactness certificate applies.
    #[error("precision exhausted after {bits} bits: {context}")]
    PrecisionExhausted { bits: u32, context: String },

    /// An enumeration or generation cap was exceeded.
    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    /// The digit word is not admissible for the given base.
    #[error("word not admissible: {0}")]
    NotAdmissible(String),

    /// The truncated expansion equation has no root greater than one.
    #[error("degenerate equation: {0}")]
    DegenerateEquation(String),

    /// No full extension was found within the search budget.
    #[error("no full extension within budget: {0}")]
    NotFoundWithinBudget(String),

    /// Too few selected runs to estimate exponents.
    #[error("insufficient runs: {0}")]
    InsufficientRuns(String),

    /// Invalid parameters for a witness stream.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Target exponents violate the feasibility inequality v ≥ v̂/(1−v̂).
    #[error("infeasible targets: {0}")]
    InfeasibleTargets(String),

    /// The schedule is too short or degenerate for the requested levels.
    #[error("degenerate schedule: {0}")]
    DegenerateSchedule(String),

    /// The word does not follow the construction template.
    #[error("not a template word: {0}")]
    NotTemplateWord(String),

    /// Too few scales for a regression.
    #[error("insufficient scales: {0}")]
    InsufficientScales(String),

    /// A formula argument is outside its stated range.
    #[error("domain error: {0}")]
    DomainError(String),

    /// The exponent quadruple matched no classifier case. Reaching this is
    /// a bug: the case table is total.
    #[error("unmatched classifier case: {0}")]
    UnmatchedCase(String),

    /// Malformed textual input (β spec, speed function, word).
    #[error("parse error: {0}")]
    Parse(String),
}
