//! Bivariant constructible functions: product, pushforward and pullback,
//! fiber weights, and projective systems of bivariant classes on towers.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::geom::{
    compose, same_model, ConstructibleFunction, FiberSquare, GeomError, MorphismModel,
};
use crate::rings::{add_i64, mul_i64};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BivError {
    #[error("morphism endpoints do not compose")]
    EndpointMismatch,
    #[error("class does not live over the expected morphism")]
    ShapeMismatch,
    #[error("invalid fiber square at {stratum:?}: {reason}")]
    InvalidSquare { stratum: String, reason: String },
    #[error("fiber weight differs over strata {first} ({w1}) and {second} ({w2})")]
    NonConstantWeight {
        first: String,
        w1: i64,
        second: String,
        w2: i64,
    },
    #[error("level pair ({0}, {1}) is not increasing from the base")]
    BadLevels(u32, u32),
    #[error("tower step unavailable: {0}")]
    StepUnavailable(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A constructible function on the source of a morphism, read as a class in
/// the bivariant group of that morphism.
#[derive(Clone, Debug)]
pub struct BivariantFn {
    over: MorphismModel,
    values: ConstructibleFunction,
    weight: OnceLock<Result<i64, BivError>>,
}

impl BivariantFn {
    pub fn new(over: MorphismModel, values: ConstructibleFunction) -> Result<Self, BivError> {
        if !same_model(values.parent(), over.source()) {
            return Err(BivError::ShapeMismatch);
        }
        Ok(BivariantFn {
            over,
            values,
            weight: OnceLock::new(),
        })
    }

    /// The class `1_f`.
    pub fn unit(over: MorphismModel) -> Self {
        let values = ConstructibleFunction::one(over.source());
        BivariantFn {
            over,
            values,
            weight: OnceLock::new(),
        }
    }

    pub fn over(&self) -> &MorphismModel {
        &self.over
    }

    pub fn values(&self) -> &ConstructibleFunction {
        &self.values
    }

    /// `w(t) = Σ_{s ↦ t} α(s)·χ(F_s)` for every target stratum.
    pub fn weights(&self) -> Vec<i64> {
        self.over
            .pushforward(&self.values)
            .expect("class lives over its morphism")
            .values()
            .to_vec()
    }

    pub fn has_constant_weight(&self) -> bool {
        self.constant_weight().is_ok()
    }

    fn constant_weight(&self) -> &Result<i64, BivError> {
        self.weight.get_or_init(|| {
            let w = self.weights();
            let target = self.over.target();
            match w.iter().position(|&v| v != w[0]) {
                None => Ok(w.first().copied().unwrap_or(0)),
                Some(j) => Err(BivError::NonConstantWeight {
                    first: target.id(0).to_string(),
                    w1: w[0],
                    second: target.id(j).to_string(),
                    w2: w[j],
                }),
            }
        })
    }
}

impl PartialEq for BivariantFn {
    fn eq(&self, other: &Self) -> bool {
        same_model(self.over.target(), other.over.target())
            && self.over.stratum_map() == other.over.stratum_map()
            && self.values == other.values
    }
}

/// A morphism together with a chosen bivariant class over it.
#[derive(Clone, Debug)]
pub struct EquippedMorphism {
    cls: BivariantFn,
}

impl EquippedMorphism {
    pub fn new(cls: BivariantFn) -> Self {
        EquippedMorphism { cls }
    }

    /// Equips with `1_f`.
    pub fn with_unit(morphism: MorphismModel) -> Self {
        EquippedMorphism {
            cls: BivariantFn::unit(morphism),
        }
    }

    pub fn morphism(&self) -> &MorphismModel {
        self.cls.over()
    }

    pub fn class(&self) -> &BivariantFn {
        &self.cls
    }

    pub fn chi_f(&self) -> Result<i64, BivError> {
        chi_f(&self.cls)
    }
}

/// `α • β = α·f^*β` over `g ∘ f`, for `α` over `f: X → Y`, `β` over `g: Y → Z`.
pub fn biv_product(alpha: &BivariantFn, beta: &BivariantFn) -> Result<BivariantFn, BivError> {
    let f = alpha.over();
    let g = beta.over();
    if !same_model(f.target(), g.source()) {
        return Err(BivError::EndpointMismatch);
    }
    let gf = compose(g, f)?;
    let values = alpha.values.try_mul(&f.pullback(&beta.values)?)?;
    BivariantFn::new(gf, values)
}

/// `f_★α` over `g`, for `α` over `g ∘ f`.
pub fn biv_pushforward(
    f: &MorphismModel,
    alpha: &BivariantFn,
    g: &MorphismModel,
) -> Result<BivariantFn, BivError> {
    let h = alpha.over();
    if !same_model(f.target(), g.source())
        || !same_model(h.source(), f.source())
        || !same_model(h.target(), g.target())
    {
        return Err(BivError::ShapeMismatch);
    }
    let composite_map = f.stratum_map().iter().map(|&j| g.image_of(j));
    if !composite_map.eq(h.stratum_map().iter().copied()) {
        return Err(BivError::ShapeMismatch);
    }
    BivariantFn::new(g.clone(), f.pushforward(&alpha.values)?)
}

/// `g^★α` over `f'`: the class `α∘π'` on the top corner of the square.
pub fn biv_pullback(square: &FiberSquare, alpha: &BivariantFn) -> Result<BivariantFn, BivError> {
    square.validate().map_err(|d| BivError::InvalidSquare {
        stratum: d.stratum,
        reason: d.reason.to_string(),
    })?;
    let f = alpha.over();
    if !same_model(f.source(), square.f.source())
        || !same_model(f.target(), square.f.target())
        || f.stratum_map() != square.f.stratum_map()
    {
        return Err(BivError::ShapeMismatch);
    }
    let values = square.pi_prime.pullback(&alpha.values)?;
    BivariantFn::new(square.f_prime.clone(), values)
}

/// The common fiber weight of `α`, defined when every target stratum sees
/// the same weight.
pub fn chi_f(alpha: &BivariantFn) -> Result<i64, BivError> {
    alpha.constant_weight().clone()
}

/// Outcome of a checker: pass, or fail with a located witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub cases: usize,
    pub witness: Option<String>,
}

impl CheckReport {
    pub fn pass(cases: usize) -> Self {
        CheckReport {
            cases,
            witness: None,
        }
    }

    pub fn fail(cases: usize, witness: impl Into<String>) -> Self {
        CheckReport {
            cases,
            witness: Some(witness.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    /// Keeps the first failure; counts cases from both.
    pub fn merge(self, other: CheckReport) -> CheckReport {
        CheckReport {
            cases: self.cases + other.cases,
            witness: self.witness.or(other.witness),
        }
    }
}

/// Checks `α·π^*(f_*β) = f'_*((f'^*α)·π'^*β)` on `X'`, with `α` a function
/// on `X'` and `β` a function on `Y`.
pub fn check_projection_formula(
    square: &FiberSquare,
    alpha: &ConstructibleFunction,
    beta: &ConstructibleFunction,
) -> Result<CheckReport, BivError> {
    if let Err(d) = square.validate() {
        return Ok(CheckReport::fail(
            1,
            format!("square: {} at {:?}", d.reason, d.stratum),
        ));
    }
    let lhs = alpha.try_mul(&square.pi.pullback(&square.f.pushforward(beta)?)?)?;
    let pulled = square.f_prime.pullback(alpha)?;
    let rhs = square
        .f_prime
        .pushforward(&pulled.try_mul(&square.pi_prime.pullback(beta)?)?)?;
    let xp = square.pi.source();
    Ok(
        match (0..xp.len()).find(|&t| lhs.value(t) != rhs.value(t)) {
            None => CheckReport::pass(1),
            Some(t) => CheckReport::fail(
                1,
                format!(
                    "stratum {}: {} vs {}",
                    xp.id(t),
                    lhs.value(t),
                    rhs.value(t)
                ),
            ),
        },
    )
}

/// Structure morphisms of an ℕ-indexed tower, level `n+1 → n`.
pub trait StepSource: Send + Sync + std::fmt::Debug {
    fn base_level(&self) -> u32;
    fn step(&self, n: u32) -> Result<MorphismModel, BivError>;
}

/// How classes between non-adjacent levels are obtained when not given
/// explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Implied {
    /// Products of the adjacent step classes.
    Composite,
    /// The unit class of the composite morphism.
    Unit,
}

/// A projective system of bivariant classes `α_{λμ}` over a tower.
#[derive(Clone, Debug)]
pub struct BivClassSystem {
    tower: Arc<dyn StepSource>,
    steps: BTreeMap<u32, Vec<i64>>,
    overrides: BTreeMap<(u32, u32), Vec<i64>>,
    implied: Implied,
}

impl BivClassSystem {
    /// Every step carries `1_π` and longer classes are composites.
    pub fn unit(tower: Arc<dyn StepSource>) -> Self {
        BivClassSystem {
            tower,
            steps: BTreeMap::new(),
            overrides: BTreeMap::new(),
            implied: Implied::Composite,
        }
    }

    pub fn with_implied(mut self, implied: Implied) -> Self {
        self.implied = implied;
        self
    }

    /// Sets `α_{n(n+1)}` as values on the level `n+1` strata.
    pub fn with_step(mut self, n: u32, values: Vec<i64>) -> Self {
        self.steps.insert(n, values);
        self
    }

    /// Sets `α_{λν}` directly, as values on the level `ν` strata.
    pub fn with_override(mut self, lambda: u32, nu: u32, values: Vec<i64>) -> Self {
        self.overrides.insert((lambda, nu), values);
        self
    }

    pub fn tower(&self) -> &Arc<dyn StepSource> {
        &self.tower
    }

    /// The structure morphism `X_ν → X_λ`.
    pub fn structure_map(&self, lambda: u32, nu: u32) -> Result<MorphismModel, BivError> {
        if lambda < self.tower.base_level() || nu <= lambda {
            return Err(BivError::BadLevels(lambda, nu));
        }
        let mut acc = self.tower.step(nu - 1)?;
        for k in (lambda..nu - 1).rev() {
            acc = compose(&self.tower.step(k)?, &acc)?;
        }
        Ok(acc)
    }

    fn explicit(&self, over: MorphismModel, values: &[i64]) -> Result<BivariantFn, BivError> {
        let f = ConstructibleFunction::from_values(over.source(), values.to_vec())?;
        BivariantFn::new(over, f)
    }

    /// `α_{n(n+1)}`.
    pub fn step_class(&self, n: u32) -> Result<BivariantFn, BivError> {
        if n < self.tower.base_level() {
            return Err(BivError::BadLevels(n, n + 1));
        }
        let over = self.tower.step(n)?;
        match self.steps.get(&n) {
            Some(v) => self.explicit(over, v),
            None => Ok(BivariantFn::unit(over)),
        }
    }

    /// `α_{λν}` for `λ < ν`.
    pub fn class(&self, lambda: u32, nu: u32) -> Result<BivariantFn, BivError> {
        if lambda < self.tower.base_level() || nu <= lambda {
            return Err(BivError::BadLevels(lambda, nu));
        }
        if let Some(v) = self.overrides.get(&(lambda, nu)) {
            return self.explicit(self.structure_map(lambda, nu)?, v);
        }
        if nu == lambda + 1 {
            return self.step_class(lambda);
        }
        match self.implied {
            Implied::Unit => Ok(BivariantFn::unit(self.structure_map(lambda, nu)?)),
            Implied::Composite => {
                let mut acc = self.step_class(nu - 1)?;
                for k in (lambda..nu - 1).rev() {
                    acc = biv_product(&acc, &self.step_class(k)?)?;
                }
                Ok(acc)
            }
        }
    }

    /// Fiber weight `χ_f(α_{n(n+1)})`.
    pub fn step_weight(&self, n: u32) -> Result<i64, BivError> {
        chi_f(&self.step_class(n)?)
    }
}

/// Checks `α_{μν} • α_{λμ} = α_{λν}` for all `base ≤ λ < μ < ν ≤ base + depth`.
pub fn check_system(sys: &BivClassSystem, depth: u32) -> Result<CheckReport, BivError> {
    let b = sys.tower.base_level();
    let top = b + depth;
    let mut cases = 0;
    for lambda in b..=top {
        for mu in lambda + 1..=top {
            for nu in mu + 1..=top {
                cases += 1;
                let lhs = biv_product(&sys.class(mu, nu)?, &sys.class(lambda, mu)?)?;
                let rhs = sys.class(lambda, nu)?;
                if lhs.values() != rhs.values() {
                    let x = rhs.values().parent();
                    let i = (0..x.len())
                        .find(|&i| lhs.values().value(i) != rhs.values().value(i))
                        .unwrap_or(0);
                    return Ok(CheckReport::fail(
                        cases,
                        format!("levels ({lambda}, {mu}, {nu}) at stratum {}", x.id(i)),
                    ));
                }
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// `Σ_t w(t)·χ(β restricted to t)`, the Euler number of `α • β` computed
/// through fiber weights.
pub fn chi_of_product_by_weights(
    alpha: &BivariantFn,
    beta: &ConstructibleFunction,
) -> Result<i64, BivError> {
    if !same_model(beta.parent(), alpha.over().target()) {
        return Err(BivError::ShapeMismatch);
    }
    let w = alpha.weights();
    let y = beta.parent();
    Ok((0..y.len()).fold(0, |acc, t| {
        add_i64(acc, mul_i64(w[t], mul_i64(beta.value(t), y.stratum_chi(t))))
    }))
}
