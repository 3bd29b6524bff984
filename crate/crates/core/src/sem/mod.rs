//! Recursive probabilistic structural equation models over finite domains.
//!
//! Distributions are computed exactly by enumerating exogenous assignments
//! and pushing each one through the stochastic equations in topological
//! order. Interventions replace an equation with a constant and never
//! condition on anything, so they are defined even for values that have
//! probability zero in the unmodified model.

mod dist;
mod infer;
mod model;

use thiserror::Error;

pub use dist::{mixed_radix_index, product_assignments, Assignment, Dist};
pub use infer::Event;
pub use model::{
    EquationSpec, FiniteDomain, KernelTable, ProbabilisticSem, Sem, VarKind, Variable,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemError {
    #[error("model is not recursive: {0} depends on itself")]
    CyclicModel(String),
    #[error("endogenous variable {0} has no equation")]
    MissingEquation(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("duplicate variable {0}")]
    DuplicateVariable(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("value {value} is not in the domain of {variable}")]
    ValueOutOfDomain { variable: String, value: String },
    #[error(
        "cannot intervene on exogenous variable {0}; replace the exogenous distribution instead"
    )]
    ExogenousTarget(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityEvent,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
}
