use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::bivariant::{chi_f, biv_product, BivClassSystem, BivError, BivariantFn};
use crate::geom::{chi_of_fn, gamma_of_fn, GeomError};
use crate::rings::{GClass, LocClass, MultSet, Rat};

use super::profn::{level_sets, ProFunction, SeriesProFunction};
use super::tower::{Generator, Tower};
use super::ProError;

/// Per-step data `p_k` (for the step from level `k` to `k + 1`) of a
/// projective system of integers or classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepData<T> {
    /// The tower's own fiber Euler numbers or fiber classes.
    Tower,
    Constant(T),
    /// `values[i]` belongs to the step leaving level `base + i`. The list
    /// cycles when `periodic`; otherwise its last entry repeats.
    Listed { values: Vec<T>, periodic: bool },
}

impl<T: Clone> StepData<T> {
    fn at(&self, base: u32, k: u32) -> Option<T> {
        match self {
            StepData::Tower => None,
            StepData::Constant(v) => Some(v.clone()),
            StepData::Listed { values, periodic } => {
                let i = (k - base) as usize;
                let i = if *periodic {
                    i % values.len()
                } else {
                    i.min(values.len() - 1)
                };
                values.get(i).cloned()
            }
        }
    }

    fn periodicity(&self, base: u32) -> Option<(u32, u32)> {
        match self {
            StepData::Tower => Some((base, 1)),
            StepData::Constant(_) => Some((base, 1)),
            StepData::Listed { values, periodic } => Some(if *periodic {
                (base, values.len() as u32)
            } else {
                (base + values.len() as u32 - 1, 1)
            }),
        }
    }

    fn is_empty_list(&self) -> bool {
        matches!(self, StepData::Listed { values, .. } if values.is_empty())
    }
}

fn map_biv(step: u32, e: BivError) -> ProError {
    match e {
        BivError::NonConstantWeight { first, second, .. } => ProError::NonConstantWeight { step, first, second },
        other => ProError::Biv(other),
    }
}

/// `χ_k`: the common fiber Euler number of step `k` under the unit class.
pub fn step_chi(tower: &Tower, k: u32) -> Result<i64, ProError> {
    let w = chi_f(&BivariantFn::unit(tower.step(k)?)).map_err(|e| map_biv(k, e))?;
    if w == 0 {
        return Err(ProError::ZeroWeight { step: k });
    }
    Ok(w)
}

/// `[F_k]`: the single fiber class of the strict step `k`.
pub fn step_class(tower: &Tower, k: u32) -> Result<GClass, ProError> {
    let s = tower.step(k)?;
    if !s.is_strict() {
        return Err(ProError::NotStrict { step: k });
    }
    s.uniform_fiber_class().map_err(|e| match e {
        GeomError::NonUniformFiber { first, second } => ProError::NonUniformFiber { step: k, first, second },
        other => ProError::Geom(other),
    })
}

fn constant_over<T: PartialEq + Clone>(
    tower: &Tower,
    upto: u32,
    get: impl Fn(u32) -> Result<T, ProError>,
) -> Result<T, ProError> {
    let base = tower.base();
    let c = get(base)?;
    for k in base + 1..=upto.max(base) {
        if get(k)? != c {
            return Err(ProError::VaryingWeights { step: k });
        }
    }
    Ok(c)
}

/// `χ(α_n) / (χ_base ⋯ χ_{n-1})`, further divided by `χ^w` when the step
/// weights are a single constant `χ`.
pub fn chi_pro(pf: &ProFunction, w: i32) -> Result<Rat, ProError> {
    let t = pf.tower();
    let mut den = BigInt::from(1);
    for k in t.base()..pf.level() {
        den *= step_chi(t, k)?;
    }
    let v = Rat::from_big(BigInt::from(chi_of_fn(pf.function())), den)?;
    if w == 0 {
        return Ok(v);
    }
    let c = constant_over(t, pf.level(), |k| step_chi(t, k))?;
    Ok(v.checked_div(&Rat::from_int(c).pow(w)?)?)
}

/// `Γ(α_n) / ([F_base] ⋯ [F_{n-1}])` in the localization at the fiber
/// classes, further divided by `[W]^w` when all fiber classes equal `[W]`.
pub fn gamma_pro(pf: &ProFunction, w: i32) -> Result<LocClass, ProError> {
    let t = pf.tower();
    let den = (t.base()..pf.level())
        .map(|k| step_class(t, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut num = gamma_of_fn(pf.function());
    let mut den: Vec<(GClass, u32)> = den.into_iter().map(|g| (g, 1)).collect();
    if w != 0 {
        let c = constant_over(t, pf.level(), |k| step_class(t, k))?;
        if w > 0 {
            den.push((c, w as u32));
        } else {
            num = num.try_mul(&c.pow((-w) as u32))?;
            den.push((c, 0));
        }
    }
    let set = Arc::new(MultSet::new(den.iter().map(|(g, _)| g.clone()))?);
    Ok(LocClass::new(num, den, &set)?)
}

/// Result of a stability check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    /// The scaling law held at every level checked. `definitive` means the
    /// tower and the system are periodic enough for the check to cover all
    /// levels.
    Stable { definitive: bool, checked_to: u32 },
    /// The first level where the scaling law fails.
    Unstable { level: u32 },
}

impl Stability {
    pub fn is_stable(&self) -> bool {
        matches!(self, Stability::Stable { .. })
    }
}

fn gcd_lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Whether every step has globally constant fiber weight (or a single strict
/// fiber class, for `gamma`) by construction, and the first level from which
/// the step descriptions repeat.
fn uniform_periodicity(tower: &Tower, gamma: bool) -> Result<Option<(u32, u32)>, ProError> {
    let Some((start, period)) = tower.periodicity() else {
        return Ok(None);
    };
    if let Generator::Explicit(_) = tower.generator() {
        for k in tower.base()..start + period {
            let ok = if gamma {
                step_class(tower, k).is_ok()
            } else {
                step_chi(tower, k).is_ok()
            };
            if !ok {
                return Ok(None);
            }
        }
    }
    Ok(Some((start, period)))
}

/// Checking range: `(last level, definitive)`.
fn check_range<T: Clone>(
    pf: &ProFunction,
    sys: &StepData<T>,
    horizon: u32,
    gamma: bool,
) -> Result<(u32, bool), ProError> {
    let t = pf.tower();
    let n = pf.level();
    if let Some(top) = t.top_level() {
        return Ok((top, true));
    }
    let tp = uniform_periodicity(t, gamma)?;
    let sp = sys.periodicity(t.base());
    Ok(match (tp, sp) {
        (Some((ts, tl)), Some((ss, sl))) => {
            let d = n.max(ts).max(ss) + gcd_lcm(tl, sl);
            (horizon.max(d), true)
        }
        _ => (horizon.max(n), false),
    })
}

/// Checks `χ(π_{nm}^* α) = p_{nm}·χ(α)` for the levels `m` above `pf`.
pub fn is_chi_stable(pf: &ProFunction, p: &StepData<i64>, horizon: u32) -> Result<Stability, ProError> {
    if p.is_empty_list() {
        return Err(ProError::EmptySystem);
    }
    let t = pf.tower();
    let (last, definitive) = check_range(pf, p, horizon, false)?;
    let c0 = BigInt::from(chi_of_fn(pf.function()));
    let mut scale = BigInt::from(1);
    let mut cur = pf.clone();
    for m in pf.level() + 1..=last {
        let k = m - 1;
        let pk = match p.at(t.base(), k) {
            Some(v) => v,
            None => step_chi(t, k)?,
        };
        if pk == 0 {
            return Err(ProError::ZeroWeight { step: k });
        }
        scale *= pk;
        cur = super::lift(&cur, m)?;
        if BigInt::from(chi_of_fn(cur.function())) != &scale * &c0 {
            return Ok(Stability::Unstable { level: m });
        }
    }
    Ok(Stability::Stable {
        definitive,
        checked_to: last,
    })
}

/// Checks `Γ(π_{nm}^* α) = [F_{nm}]·Γ(α)` for the levels `m` above `pf`.
pub fn is_gamma_stable(pf: &ProFunction, f: &StepData<GClass>, horizon: u32) -> Result<Stability, ProError> {
    if f.is_empty_list() {
        return Err(ProError::EmptySystem);
    }
    let t = pf.tower();
    let (last, definitive) = check_range(pf, f, horizon, true)?;
    let g0 = gamma_of_fn(pf.function());
    let mut scale = GClass::one(t.table());
    let mut cur = pf.clone();
    for m in pf.level() + 1..=last {
        let k = m - 1;
        let fk = match f.at(t.base(), k) {
            Some(v) => v,
            None => step_class(t, k)?,
        };
        if fk.is_zero() {
            return Err(ProError::ZeroWeight { step: k });
        }
        scale = scale.try_mul(&fk)?;
        cur = super::lift(&cur, m)?;
        if gamma_of_fn(cur.function()) != scale.try_mul(&g0)? {
            return Ok(Stability::Unstable { level: m });
        }
    }
    Ok(Stability::Stable {
        definitive,
        checked_to: last,
    })
}

fn require_stable(v: Stability) -> Result<(), ProError> {
    match v {
        Stability::Stable { .. } => Ok(()),
        Stability::Unstable { level } => Err(ProError::Unstable { level }),
    }
}

/// `χ(α_n) / (p_base ⋯ p_{n-1})` for a stable `pf`.
pub fn stable_chi_pro(pf: &ProFunction, p: &StepData<i64>, horizon: u32) -> Result<Rat, ProError> {
    require_stable(is_chi_stable(pf, p, horizon)?)?;
    let t = pf.tower();
    let mut den = BigInt::from(1);
    for k in t.base()..pf.level() {
        den *= match p.at(t.base(), k) {
            Some(v) => v,
            None => step_chi(t, k)?,
        };
    }
    Ok(Rat::from_big(BigInt::from(chi_of_fn(pf.function())), den)?)
}

/// `Γ(α_n) / ([F_base] ⋯ [F_{n-1}])` for a stable `pf`.
pub fn stable_gamma_pro(pf: &ProFunction, f: &StepData<GClass>, horizon: u32) -> Result<LocClass, ProError> {
    require_stable(is_gamma_stable(pf, f, horizon)?)?;
    let t = pf.tower();
    let den = (t.base()..pf.level())
        .map(|k| match f.at(t.base(), k) {
            Some(v) => Ok((v, 1)),
            None => step_class(t, k).map(|g| (g, 1)),
        })
        .collect::<Result<Vec<_>, ProError>>()?;
    let set = Arc::new(MultSet::new(den.iter().map(|(g, _)| g.clone()))?);
    Ok(LocClass::new(gamma_of_fn(pf.function()), den, &set)?)
}

/// `Σ_{k ≠ 0} f(k)·χ^{st.pro}(α^{-1}(k))`.
pub fn integrate_chi_pro<F>(pf: &ProFunction, p: &StepData<i64>, horizon: u32, f: F) -> Result<Rat, ProError>
where
    F: Fn(i64) -> Option<Rat>,
{
    require_stable(is_chi_stable(pf, p, horizon)?)?;
    let mut total = Rat::zero();
    for (k, c) in level_sets(pf) {
        let fk = f(k).ok_or(ProError::Geom(GeomError::UndefinedIntegrand(k)))?;
        let m = stable_chi_pro(&ProFunction::indicator(&c), p, horizon)?;
        total = total + fk * m;
    }
    Ok(total)
}

/// `Σ_{k ≠ 0} f(k)·Γ^{st.pro}(α^{-1}(k))`.
pub fn integrate_gamma_pro<F>(
    pf: &ProFunction,
    fib: &StepData<GClass>,
    horizon: u32,
    f: F,
) -> Result<LocClass, ProError>
where
    F: Fn(i64) -> Option<LocClass>,
{
    require_stable(is_gamma_stable(pf, fib, horizon)?)?;
    let mut total = LocClass::from_class(GClass::zero(pf.tower().table()));
    for (k, c) in level_sets(pf) {
        let fk = f(k).ok_or(ProError::Geom(GeomError::UndefinedIntegrand(k)))?;
        let m = stable_gamma_pro(&ProFunction::indicator(&c), fib, horizon)?;
        total = total.try_add(&fk.try_mul(&m)?)?;
    }
    Ok(total)
}

/// The first `n` partial sums `S_1, …, S_n` of `Σ χ^pro([α_j])`.
pub fn chi_pro_partial_sums(s: &SeriesProFunction, n: usize) -> Result<Vec<Rat>, ProError> {
    let mut out = Vec::with_capacity(n);
    let mut acc = Rat::zero();
    for j in 0..n {
        if let Some(t) = s.terms().get(j) {
            acc = acc + chi_pro(t, 0)?;
        }
        out.push(acc.clone());
    }
    Ok(out)
}

fn same_steps(sys: &BivClassSystem, t: &Arc<Tower>) -> bool {
    std::ptr::eq(
        Arc::as_ptr(sys.tower()) as *const u8,
        Arc::as_ptr(t) as *const u8,
    )
}

/// Lifts along `β ↦ α_{k(k+1)} • β`, the bonding maps of the limit taken
/// with respect to a system of bivariant classes.
pub fn sys_lift(sys: &BivClassSystem, pf: &ProFunction, m: u32) -> Result<ProFunction, ProError> {
    if !same_steps(sys, pf.tower()) {
        return Err(ProError::TowerMismatch);
    }
    if m < pf.level() {
        return Err(ProError::BelowLevel {
            level: pf.level(),
            requested: m,
        });
    }
    let mut f = pf.function().clone();
    for k in pf.level()..m {
        let a = sys.step_class(k)?;
        let beta = BivariantFn::new(crate::geom::MorphismModel::identity(f.parent()), f)?;
        f = biv_product(&a, &beta)?.values().clone();
    }
    ProFunction::new(pf.tower(), m, f)
}

/// `χ(α_n) / (χ_f(α_{base(base+1)}) ⋯ χ_f(α_{(n-1)n}))`.
pub fn chi_pro_sys(sys: &BivClassSystem, pf: &ProFunction) -> Result<Rat, ProError> {
    if !same_steps(sys, pf.tower()) {
        return Err(ProError::TowerMismatch);
    }
    let mut den = BigInt::from(1);
    for k in pf.tower().base()..pf.level() {
        let w = sys.step_weight(k).map_err(|e| map_biv(k, e))?;
        if w == 0 {
            return Err(ProError::ZeroWeight { step: k });
        }
        den *= w;
    }
    Ok(Rat::from_big(BigInt::from(chi_of_fn(pf.function())), den)?)
}
