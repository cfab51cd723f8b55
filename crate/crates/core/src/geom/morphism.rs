use std::collections::HashMap;
use std::sync::Arc;

use crate::rings::{add_i64, mul_i64, GClass};

use super::function::ConstructibleFunction;
use super::model::{same_model, VarietyModel};
use super::GeomError;

/// A morphism of stratified models. Each source stratum maps into one target
/// stratum and carries the class of its piece of the fiber over any point of
/// that target stratum.
///
/// In strict mode every stratum satisfies `[s] = [f(s)]·F_s`, the
/// stratum-wise form of a Zariski locally trivial fibration.
#[derive(Clone, Debug)]
pub struct MorphismModel {
    source: Arc<VarietyModel>,
    target: Arc<VarietyModel>,
    map: Vec<usize>,
    fiber: Vec<GClass>,
    strict: bool,
}

impl MorphismModel {
    /// Builds a morphism from `(source id, target id, fiber class)` entries,
    /// one per source stratum.
    pub fn new<'a, I>(
        source: &Arc<VarietyModel>,
        target: &Arc<VarietyModel>,
        entries: I,
        strict: bool,
    ) -> Result<MorphismModel, GeomError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, GClass)>,
    {
        let mut map = vec![None; source.len()];
        let mut fiber: Vec<Option<GClass>> = vec![None; source.len()];
        for (s, t, f) in entries {
            let i = source.index_of(s)?;
            let j = target.index_of(t)?;
            if map[i].is_some() {
                return Err(GeomError::DuplicateStratum(s.to_string()));
            }
            map[i] = Some(j);
            fiber[i] = Some(f);
        }
        if let Some(i) = map.iter().position(Option::is_none) {
            return Err(GeomError::MapNotTotal(source.id(i).to_string()));
        }
        Self::from_parts(
            source,
            target,
            map.into_iter().map(Option::unwrap).collect(),
            fiber.into_iter().map(Option::unwrap).collect(),
            strict,
        )
    }

    pub fn from_parts(
        source: &Arc<VarietyModel>,
        target: &Arc<VarietyModel>,
        map: Vec<usize>,
        fiber: Vec<GClass>,
        strict: bool,
    ) -> Result<MorphismModel, GeomError> {
        if map.len() != source.len() || fiber.len() != source.len() {
            return Err(GeomError::NotTotal {
                expected: source.len(),
                got: map.len().min(fiber.len()),
            });
        }
        for (i, (&j, f)) in map.iter().zip(&fiber).enumerate() {
            if j >= target.len() {
                return Err(GeomError::MapNotTotal(source.id(i).to_string()));
            }
            if f.is_zero() {
                return Err(GeomError::ZeroClass(source.id(i).to_string()));
            }
        }
        let out = MorphismModel {
            source: Arc::clone(source),
            target: Arc::clone(target),
            map,
            fiber,
            strict,
        };
        if strict {
            if let Some(i) = out.strict_violation() {
                return Err(GeomError::StrictnessViolated(source.id(i).to_string()));
            }
        }
        Ok(out)
    }

    pub fn identity(x: &Arc<VarietyModel>) -> MorphismModel {
        let one = GClass::one(x.table());
        MorphismModel {
            source: Arc::clone(x),
            target: Arc::clone(x),
            map: (0..x.len()).collect(),
            fiber: vec![one; x.len()],
            strict: true,
        }
    }

    /// The map to a point; each stratum is its own fiber piece.
    pub fn collapse(x: &Arc<VarietyModel>) -> MorphismModel {
        MorphismModel {
            source: Arc::clone(x),
            target: VarietyModel::point(x.table()),
            map: vec![0; x.len()],
            fiber: x.strata().iter().map(|s| s.class.clone()).collect(),
            strict: true,
        }
    }

    pub fn source(&self) -> &Arc<VarietyModel> {
        &self.source
    }

    pub fn target(&self) -> &Arc<VarietyModel> {
        &self.target
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn image_of(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn stratum_map(&self) -> &[usize] {
        &self.map
    }

    pub fn fiber(&self, i: usize) -> &GClass {
        &self.fiber[i]
    }

    pub fn fibers(&self) -> &[GClass] {
        &self.fiber
    }

    /// First source stratum where `[s] ≠ [f(s)]·F_s`.
    pub fn strict_violation(&self) -> Option<usize> {
        (0..self.source.len()).find(|&i| {
            let expect = self
                .target
                .class(self.map[i])
                .try_mul(&self.fiber[i])
                .expect("shared table");
            *self.source.class(i) != expect
        })
    }

    /// Returns a copy with one fiber datum replaced and no validation; meant
    /// for exercising checkers.
    pub fn corrupt_fiber(&self, i: usize, class: GClass) -> MorphismModel {
        let mut out = self.clone();
        out.fiber[i] = class;
        out
    }

    /// Returns a copy with one stratum redirected and no validation.
    pub fn corrupt_map(&self, i: usize, j: usize) -> MorphismModel {
        let mut out = self.clone();
        out.map[i] = j;
        out
    }

    /// Fiber Euler number over target stratum `t`: `Σ_{s ↦ t} χ(F_s)`.
    pub fn fiber_chi(&self, t: usize) -> i64 {
        (0..self.source.len())
            .filter(|&i| self.map[i] == t)
            .fold(0, |acc, i| add_i64(acc, self.fiber[i].euler()))
    }

    /// Fiber class over target stratum `t`: `Σ_{s ↦ t} F_s`.
    pub fn fiber_class(&self, t: usize) -> GClass {
        (0..self.source.len())
            .filter(|&i| self.map[i] == t)
            .fold(GClass::zero(self.source.table()), |acc, i| {
                acc.try_add(&self.fiber[i]).expect("shared table")
            })
    }

    pub fn is_stratum_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.len()];
        for &j in &self.map {
            hit[j] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// The fiber class shared by every target stratum, or the first two
    /// target strata that disagree.
    pub fn uniform_fiber_class(&self) -> Result<GClass, GeomError> {
        let classes: Vec<GClass> = (0..self.target.len()).map(|t| self.fiber_class(t)).collect();
        for t in 1..classes.len() {
            if classes[t] != classes[0] {
                return Err(GeomError::NonUniformFiber {
                    first: self.target.id(0).to_string(),
                    second: self.target.id(t).to_string(),
                });
            }
        }
        Ok(classes
            .into_iter()
            .next()
            .unwrap_or_else(|| GClass::one(self.source.table())))
    }

    /// `(f_*α)(t) = Σ_{s ↦ t} α(s)·χ(F_s)`.
    pub fn pushforward(&self, alpha: &ConstructibleFunction) -> Result<ConstructibleFunction, GeomError> {
        if !same_model(alpha.parent(), &self.source) {
            return Err(GeomError::ParentMismatch);
        }
        let mut out = vec![0i64; self.target.len()];
        for (i, &v) in alpha.values().iter().enumerate() {
            if v != 0 {
                let j = self.map[i];
                out[j] = add_i64(out[j], mul_i64(v, self.fiber[i].euler()));
            }
        }
        ConstructibleFunction::from_values(&self.target, out)
    }

    /// `(f^*β)(s) = β(f(s))`.
    pub fn pullback(&self, beta: &ConstructibleFunction) -> Result<ConstructibleFunction, GeomError> {
        if !same_model(beta.parent(), &self.target) {
            return Err(GeomError::ParentMismatch);
        }
        let values = self.map.iter().map(|&j| beta.value(j)).collect();
        ConstructibleFunction::from_values(&self.source, values)
    }

    /// `g ∘ self`.
    pub fn then(&self, g: &MorphismModel) -> Result<MorphismModel, GeomError> {
        compose(g, self)
    }
}

/// `g ∘ f`; composite fiber pieces multiply.
pub fn compose(g: &MorphismModel, f: &MorphismModel) -> Result<MorphismModel, GeomError> {
    if !same_model(&f.target, &g.source) {
        return Err(GeomError::EndpointMismatch);
    }
    let map = f.map.iter().map(|&j| g.map[j]).collect();
    let fiber = f
        .fiber
        .iter()
        .zip(&f.map)
        .map(|(ff, &j)| ff.try_mul(&g.fiber[j]))
        .collect::<Result<Vec<_>, _>>()?;
    let strict = f.strict && g.strict;
    MorphismModel::from_parts(&f.source, &g.target, map, fiber, strict)
}

pub fn pushforward(f: &MorphismModel, alpha: &ConstructibleFunction) -> Result<ConstructibleFunction, GeomError> {
    f.pushforward(alpha)
}

pub fn pullback(f: &MorphismModel, beta: &ConstructibleFunction) -> Result<ConstructibleFunction, GeomError> {
    f.pullback(beta)
}

/// `X × Y` with strata `s.t` and product classes.
pub fn cross_model(x: &Arc<VarietyModel>, y: &Arc<VarietyModel>) -> Result<Arc<VarietyModel>, GeomError> {
    if !Arc::ptr_eq(x.table(), y.table()) && **x.table() != **y.table() {
        return Err(GeomError::Ring(crate::rings::RingError::TableMismatch));
    }
    let mut strata = Vec::with_capacity(x.len() * y.len());
    for a in x.strata() {
        for b in y.strata() {
            strata.push((format!("{}.{}", a.id, b.id), a.class.try_mul(&b.class)?));
        }
    }
    VarietyModel::new(format!("{}x{}", x.name(), y.name()), x.table(), strata)
}

/// `(α × β)(s, t) = α(s)·β(t)` on `cross_model(α.parent, β.parent)`.
pub fn cross_fn(
    alpha: &ConstructibleFunction,
    beta: &ConstructibleFunction,
) -> Result<ConstructibleFunction, GeomError> {
    let m = cross_model(alpha.parent(), beta.parent())?;
    cross_fn_on(&m, alpha, beta)
}

/// Like [`cross_fn`] but onto an already built product model.
pub fn cross_fn_on(
    product: &Arc<VarietyModel>,
    alpha: &ConstructibleFunction,
    beta: &ConstructibleFunction,
) -> Result<ConstructibleFunction, GeomError> {
    let n = beta.parent().len();
    if product.len() != alpha.parent().len() * n {
        return Err(GeomError::ParentMismatch);
    }
    let mut values = Vec::with_capacity(product.len());
    for &a in alpha.values() {
        for &b in beta.values() {
            values.push(mul_i64(a, b));
        }
    }
    ConstructibleFunction::from_values(product, values)
}

/// Projection `X × Y → X` onto the first factor of `cross_model(x, y)`.
pub fn project_first(
    product: &Arc<VarietyModel>,
    x: &Arc<VarietyModel>,
    y: &Arc<VarietyModel>,
) -> Result<MorphismModel, GeomError> {
    let n = y.len();
    let map = (0..product.len()).map(|i| i / n).collect();
    let fiber = (0..product.len()).map(|i| y.class(i % n).clone()).collect();
    MorphismModel::from_parts(product, x, map, fiber, true)
}

/// Projection `X × Y → Y` onto the second factor of `cross_model(x, y)`.
pub fn project_second(
    product: &Arc<VarietyModel>,
    x: &Arc<VarietyModel>,
    y: &Arc<VarietyModel>,
) -> Result<MorphismModel, GeomError> {
    let n = y.len();
    let map = (0..product.len()).map(|i| i % n).collect();
    let fiber = (0..product.len()).map(|i| x.class(i / n).clone()).collect();
    MorphismModel::from_parts(product, y, map, fiber, true)
}

/// A fiber square
///
/// ```text
///   Y' --f'--> X'
///   |          |
///   π'         π
///   v          v
///   Y  --f-->  X
/// ```
#[derive(Clone, Debug)]
pub struct FiberSquare {
    pub f: MorphismModel,
    pub pi: MorphismModel,
    pub top: Arc<VarietyModel>,
    pub pi_prime: MorphismModel,
    pub f_prime: MorphismModel,
}

/// Where a square fails to be the fiber product of its bottom and right edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareDefect {
    pub stratum: String,
    pub reason: &'static str,
}

/// Base change of `f: Y → X` along a strict `π: X' → X`.
pub fn fiber_product(f: &MorphismModel, pi: &MorphismModel) -> Result<FiberSquare, GeomError> {
    if !same_model(&f.target, &pi.target) {
        return Err(GeomError::EndpointMismatch);
    }
    if !pi.strict {
        return Err(GeomError::NotStrict);
    }
    if let Some(i) = pi.strict_violation() {
        return Err(GeomError::StrictnessViolated(pi.source.id(i).to_string()));
    }
    let y = &f.source;
    let xp = &pi.source;
    let mut by_base: HashMap<usize, Vec<usize>> = HashMap::new();
    for t in 0..xp.len() {
        by_base.entry(pi.map[t]).or_default().push(t);
    }
    let mut strata = Vec::new();
    let mut pairs = Vec::new();
    for s in 0..y.len() {
        if let Some(ts) = by_base.get(&f.map[s]) {
            for &t in ts {
                strata.push((
                    format!("{}.{}", y.id(s), xp.id(t)),
                    y.class(s).try_mul(&pi.fiber[t])?,
                ));
                pairs.push((s, t));
            }
        }
    }
    let top = VarietyModel::new(format!("{}x{}", y.name(), xp.name()), y.table(), strata)?;
    let pi_prime = MorphismModel::from_parts(
        &top,
        y,
        pairs.iter().map(|&(s, _)| s).collect(),
        pairs.iter().map(|&(_, t)| pi.fiber[t].clone()).collect(),
        true,
    )?;
    let f_prime = MorphismModel::from_parts(
        &top,
        xp,
        pairs.iter().map(|&(_, t)| t).collect(),
        pairs.iter().map(|&(s, _)| f.fiber[s].clone()).collect(),
        f.strict,
    )?;
    Ok(FiberSquare {
        f: f.clone(),
        pi: pi.clone(),
        top,
        pi_prime,
        f_prime,
    })
}

impl FiberSquare {
    /// Checks that the square commutes and that its top corner is the fiber
    /// product of `f` and `π`, with inherited classes and fiber data.
    pub fn validate(&self) -> Result<(), SquareDefect> {
        let defect = |i: usize, reason| SquareDefect {
            stratum: self.top.id(i).to_string(),
            reason,
        };
        if !same_model(&self.pi_prime.source, &self.top)
            || !same_model(&self.f_prime.source, &self.top)
            || !same_model(&self.pi_prime.target, &self.f.source)
            || !same_model(&self.f_prime.target, &self.pi.source)
            || !same_model(&self.f.target, &self.pi.target)
        {
            return Err(SquareDefect {
                stratum: String::new(),
                reason: "edges do not share corners",
            });
        }
        let mut seen = HashMap::new();
        for i in 0..self.top.len() {
            let s = self.pi_prime.map[i];
            let t = self.f_prime.map[i];
            if self.f.map[s] != self.pi.map[t] {
                return Err(defect(i, "square does not commute"));
            }
            if seen.insert((s, t), i).is_some() {
                return Err(defect(i, "two strata over one fiber-product pair"));
            }
            let expect = self
                .f
                .source
                .class(s)
                .try_mul(&self.pi.fiber[t])
                .expect("shared table");
            if *self.top.class(i) != expect {
                return Err(defect(i, "stratum class differs from the fiber product"));
            }
            if self.pi_prime.fiber[i] != self.pi.fiber[t] {
                return Err(defect(i, "fiber of π' differs from the fiber of π"));
            }
            if self.f_prime.fiber[i] != self.f.fiber[s] {
                return Err(defect(i, "fiber of f' differs from the fiber of f"));
            }
        }
        let expected_pairs: usize = (0..self.f.source.len())
            .map(|s| {
                (0..self.pi.source.len())
                    .filter(|&t| self.pi.map[t] == self.f.map[s])
                    .count()
            })
            .sum();
        if expected_pairs != seen.len() {
            return Err(SquareDefect {
                stratum: String::new(),
                reason: "fiber-product pairs missing from the top corner",
            });
        }
        Ok(())
    }

    /// `π^* f_* β` against `f'_* π'^* β`; returns the first disagreeing
    /// stratum of `X'`.
    pub fn base_change_defect(&self, beta: &ConstructibleFunction) -> Result<Option<usize>, GeomError> {
        let lhs = self.pi.pullback(&self.f.pushforward(beta)?)?;
        let rhs = self.f_prime.pushforward(&self.pi_prime.pullback(beta)?)?;
        Ok((0..lhs.values().len()).find(|&t| lhs.value(t) != rhs.value(t)))
    }
}
