//! Exact arithmetic: the polynomial model of the Grothendieck ring, its
//! localizations, rationals, and inductive limits of `ℤ` under
//! multiplication maps.

mod atoms;
mod gclass;
mod limit;
mod loc;
mod rat;

use thiserror::Error;

pub use atoms::{AtomTable, POINT, TATE};
pub use gclass::{chi_hom, gclass_add, gclass_eq, gclass_mul, GClass, Monomial};
pub use limit::{phi_w, psi_limit, LimitTermSeq, Multipliers};
pub use loc::{loc_add, loc_eq, loc_mul, LocClass, MultSet};
pub use rat::Rat;

pub(crate) use gclass::{add_i64, mul_i64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("operands belong to different atom tables")]
    TableMismatch,
    #[error("unknown atom symbol `{0}`")]
    UnknownSymbol(String),
    #[error("atom `{0}` declared twice")]
    DuplicateAtom(String),
    #[error("`{0}` is not a valid atom symbol")]
    BadSymbol(String),
    #[error("denominator generator `{0}` is not in the declared multiplicative set")]
    UndeclaredDenominator(String),
    #[error("the zero class cannot be a denominator generator")]
    ZeroGenerator,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("multiplier p_{step} is zero; the inductive limit collapses to 0")]
    ZeroMultiplier { step: u32 },
    #[error("no multiplier given for step {step}")]
    MissingMultiplier { step: u32 },
    #[error("Φ_w needs a single constant multiplier")]
    NotConstant,
    #[error("levels start at 1, got {0}")]
    BadLevel(u32),
    #[error("malformed literal `{0}`")]
    BadLiteral(String),
}
