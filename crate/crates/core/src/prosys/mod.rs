//! Towers of variety models and their inductive limits: proconstructible
//! functions, cylinder sets, χ^pro and Γ^pro, stability, integration over
//! the limit, and pro-morphisms.
//!
//! Only ℕ-indexed towers are handled. Towers are based at level 1, except
//! arc towers, which start at level 0. The "denominator changing" map
//! between limits of different towers is not well defined in general and is
//! not provided; naturality is checked for fiber-square pro-morphisms only.

mod measure;
mod profn;
mod promorphism;
mod tower;

use thiserror::Error;

use crate::bivariant::BivError;
use crate::geom::GeomError;
use crate::rings::RingError;

pub use measure::{
    chi_pro, chi_pro_partial_sums, chi_pro_sys, gamma_pro, integrate_chi_pro, integrate_gamma_pro,
    is_chi_stable, is_gamma_stable, stable_chi_pro, stable_gamma_pro, step_chi, step_class,
    sys_lift, Stability, StepData,
};
pub use profn::{
    cyl_complement, cyl_difference, cyl_eq, cyl_intersect, cyl_symmdiff, cyl_union, eval,
    level_sets, lift, lift_cyl, pro_add, pro_eq, pro_sub, procharacteristic, CylinderSet,
    ProEquality, ProFunction, ProPoint, SeriesProFunction,
};
pub use promorphism::{
    check_naturality, mutate_map_fiber, mutate_step_fiber, pro_pushforward, ProMorphism, Reindex,
};
pub use tower::{Generator, Tower};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProError {
    #[error("a tower needs at least one step")]
    EmptyTower,
    #[error("a projective system needs at least one value")]
    EmptySystem,
    #[error("step {step} does not start where the previous one ends")]
    BrokenChain { step: u32 },
    #[error("fiber of step {step} is empty or has a zero piece")]
    EmptyFiber { step: u32 },
    #[error("tower {tower} has no level {level}")]
    LevelUnavailable { tower: String, level: u32 },
    #[error("cannot lift from level {level} down to {requested}")]
    BelowLevel { level: u32, requested: u32 },
    #[error("operands live on different towers")]
    TowerMismatch,
    #[error("fiber Euler number of step {step} is zero")]
    ZeroWeight { step: u32 },
    #[error("fiber weight of step {step} differs over strata {first} and {second}")]
    NonConstantWeight { step: u32, first: String, second: String },
    #[error("step {step} is not strict")]
    NotStrict { step: u32 },
    #[error("step {step} has different fiber classes over {first} and {second}")]
    NonUniformFiber { step: u32, first: String, second: String },
    #[error("a shifted normalization needs one constant step weight; step {step} differs")]
    VaryingWeights { step: u32 },
    #[error("not stable: the scaling law fails at level {level}")]
    Unstable { level: u32 },
    #[error("point is not compatible with the structure map into level {level}")]
    IncompatiblePoint { level: u32 },
    #[error("point is not realized up to level {level}")]
    PointTooShort { level: u32 },
    #[error("no map given at level {0}")]
    MapUnavailable(u32),
    #[error("arc dimension must be positive, got {0}")]
    BadDimension(i64),
    #[error("arc towers need a smooth base; {0} is declared singular")]
    SingularBase(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Biv(#[from] BivError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[cfg(test)]
mod tests;
