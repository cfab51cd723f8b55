//! Stratified models of varieties, constructible sets and functions, and
//! morphism models with pushforward, pullback and base change.

mod function;
mod model;
mod morphism;

use thiserror::Error;

use crate::rings::RingError;

pub use function::{
    chi_of_fn, fn_add, fn_mul, fn_scale, gamma_of_fn, integrate_chi, integrate_gamma,
    ConstructibleFunction,
};
pub use model::{chi_of_set, gamma_of_set, ConstructibleSet, Stratum, VarietyModel};
pub use morphism::{
    compose, cross_fn, cross_fn_on, cross_model, fiber_product, project_first, project_second,
    pullback, pushforward, FiberSquare, MorphismModel, SquareDefect,
};

pub(crate) use model::same_model;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("operands live on different models")]
    ParentMismatch,
    #[error("expected {expected} stratum values, got {got}")]
    NotTotal { expected: usize, got: usize },
    #[error("integrand undefined at value {0}")]
    UndefinedIntegrand(i64),
    #[error("stratum {0} has class zero")]
    ZeroClass(String),
    #[error("duplicate stratum {0}")]
    DuplicateStratum(String),
    #[error("model {model} has no stratum {id}")]
    UnknownStratum { model: String, id: String },
    #[error("stratum {0} is not mapped")]
    MapNotTotal(String),
    #[error("strictness fails at stratum {0}")]
    StrictnessViolated(String),
    #[error("morphism endpoints do not match")]
    EndpointMismatch,
    #[error("base change requires a strict morphism")]
    NotStrict,
    #[error("fiber classes differ over strata {first} and {second}")]
    NonUniformFiber { first: String, second: String },
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[cfg(test)]
mod tests;
