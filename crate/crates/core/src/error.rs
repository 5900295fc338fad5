use thiserror::Error;

use crate::model::Bundle;

/// Violations of the structural invariants of markets, preferences and allocations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a market needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("a market needs at least 1 object type")]
    NoTypes,
    #[error("shape n={n}, m={m} is too large to materialize its bundle space")]
    ShapeTooLarge { n: usize, m: usize },
    #[error("bundle {bundle:?} does not fit a market with n={n}, m={m}")]
    InvalidBundle { bundle: Vec<usize>, n: usize, m: usize },
    #[error("bundle {0} appears more than once in a ranking")]
    DuplicateBundle(Bundle),
    #[error("ranking lists {got} bundles, expected {expected}")]
    IncompleteRanking { got: usize, expected: usize },
    #[error("type-{ty} ranking is not a permutation of the {n} owners: {ranking:?}")]
    InvalidMarginal { ty: usize, ranking: Vec<usize>, n: usize },
    #[error("expected {expected} marginal rankings, got {got}")]
    MarginalCount { got: usize, expected: usize },
    #[error("importance order {0:?} is not a permutation of the types")]
    InvalidImportance(Vec<usize>),
    #[error("allocation is infeasible: type {ty} column {column:?} is not a permutation")]
    InfeasibleAllocation { ty: usize, column: Vec<usize> },
    #[error("allocation has {got} rows, expected {expected}")]
    AllocationRows { got: usize, expected: usize },
    #[error("profile has {got} preferences, expected {expected}")]
    ProfileLength { got: usize, expected: usize },
    #[error("preference of agent {agent} belongs to a different market shape")]
    ShapeMismatch { agent: usize },
    #[error("preference of agent {agent} is not admissible in the {domain} domain")]
    DomainMismatch { agent: usize, domain: String },
    #[error("lex-common domain requires a shared importance order; agent {agent} differs")]
    ImportanceMismatch { agent: usize },
    #[error(transparent)]
    NotSeparable(#[from] SeparabilityViolation),
    #[error("declared marginals for type {ty} disagree with the ranking")]
    MarginalMismatch { ty: usize },
}

/// Two bundles where `dominating` is weakly better in every type yet ranked below `dominated`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not separable: {dominating} dominates {dominated} type by type but is ranked below it")]
pub struct SeparabilityViolation {
    pub dominating: Bundle,
    pub dominated: Bundle,
}

/// A refusal to materialize a space larger than the configured bound.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("refusing to {what}: requires {required}, limit is {limit} (raise the bound with --guard-override)")]
pub struct GuardError {
    pub what: String,
    pub required: String,
    pub limit: String,
}

impl GuardError {
    pub fn new(what: impl Into<String>, required: impl ToString, limit: impl ToString) -> Self {
        Self {
            what: what.into(),
            required: required.to_string(),
            limit: limit.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanismError {
    #[error("{mechanism} is not defined here: {reason}")]
    NotApplicable { mechanism: String, reason: String },
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl MechanismError {
    pub(crate) fn not_applicable(mechanism: &str, reason: impl Into<String>) -> Self {
        Self::NotApplicable {
            mechanism: mechanism.to_string(),
            reason: reason.into(),
        }
    }
}

/// Top-level error for verification and I/O entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Parse(#[from] crate::io::ParseError),
    #[error("{0}")]
    Invalid(String),
}
