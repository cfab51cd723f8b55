use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geom::{ConstructibleFunction, ConstructibleSet};

use super::tower::{same_tower, Tower};
use super::ProError;

/// The class `[α_n]` of a constructible function on level `n` in the
/// inductive limit under pullback.
#[derive(Clone, Debug)]
pub struct ProFunction {
    tower: Arc<Tower>,
    level: u32,
    f: ConstructibleFunction,
}

impl ProFunction {
    pub fn new(tower: &Arc<Tower>, level: u32, f: ConstructibleFunction) -> Result<Self, ProError> {
        if !crate::geom::same_model(f.parent(), &tower.level(level)?) {
            return Err(ProError::Geom(crate::geom::GeomError::ParentMismatch));
        }
        Ok(ProFunction {
            tower: Arc::clone(tower),
            level,
            f,
        })
    }

    /// Unlisted strata take the value 0.
    pub fn from_pairs<'a, I>(tower: &Arc<Tower>, level: u32, pairs: I) -> Result<Self, ProError>
    where
        I: IntoIterator<Item = (&'a str, i64)>,
    {
        let x = tower.level(level)?;
        Self::new(tower, level, ConstructibleFunction::from_pairs(&x, pairs)?)
    }

    pub fn zero(tower: &Arc<Tower>) -> Result<Self, ProError> {
        let x = tower.level(tower.base())?;
        Self::new(tower, tower.base(), ConstructibleFunction::zero(&x))
    }

    pub fn indicator(c: &CylinderSet) -> Self {
        ProFunction {
            tower: Arc::clone(&c.tower),
            level: c.level,
            f: ConstructibleFunction::indicator(&c.set),
        }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn function(&self) -> &ConstructibleFunction {
        &self.f
    }

    pub fn scale(&self, k: i64) -> Self {
        ProFunction {
            tower: Arc::clone(&self.tower),
            level: self.level,
            f: self.f.scale(k),
        }
    }
}

/// The procharacteristic function `1_{X_∞}`: the class of `1` at the base.
pub fn procharacteristic(tower: &Arc<Tower>) -> Result<ProFunction, ProError> {
    let x = tower.level(tower.base())?;
    ProFunction::new(tower, tower.base(), ConstructibleFunction::one(&x))
}

/// The representative at level `m` obtained by pulling back along the
/// structure morphisms.
pub fn lift(pf: &ProFunction, m: u32) -> Result<ProFunction, ProError> {
    if m < pf.level {
        return Err(ProError::BelowLevel {
            level: pf.level,
            requested: m,
        });
    }
    let mut f = pf.f.clone();
    for k in pf.level..m {
        f = pf.tower.step(k)?.pullback(&f)?;
    }
    Ok(ProFunction {
        tower: Arc::clone(&pf.tower),
        level: m,
        f,
    })
}

fn check_tower(a: &Arc<Tower>, b: &Arc<Tower>) -> Result<(), ProError> {
    if same_tower(a, b) {
        Ok(())
    } else {
        Err(ProError::TowerMismatch)
    }
}

/// Sum at the higher of the two levels.
pub fn pro_add(a: &ProFunction, b: &ProFunction) -> Result<ProFunction, ProError> {
    check_tower(&a.tower, &b.tower)?;
    let m = a.level.max(b.level);
    let (la, lb) = (lift(a, m)?, lift(b, m)?);
    Ok(ProFunction {
        tower: Arc::clone(&a.tower),
        level: m,
        f: la.f.try_add(&lb.f)?,
    })
}

pub fn pro_sub(a: &ProFunction, b: &ProFunction) -> Result<ProFunction, ProError> {
    pro_add(a, &b.scale(-1))
}

/// Verdict of comparing two limit classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProEquality {
    /// The representatives agree once lifted to this level.
    Equal { at_level: u32 },
    /// The difference is nonzero at a level from which every pullback is
    /// injective, so the classes differ in the limit.
    Distinct,
    /// Still different at the horizon, with injectivity not established.
    DistinctToHorizon { horizon: u32 },
}

/// Compares `[a]` and `[b]`, lifting up to `horizon` when the tower is not
/// known to be stratum-surjective.
pub fn pro_eq(a: &ProFunction, b: &ProFunction, horizon: u32) -> Result<ProEquality, ProError> {
    let d = pro_sub(a, b)?;
    let top = d.tower.top_level();
    let mut m = d.level;
    let mut cur = d;
    loop {
        if cur.f.is_zero() {
            return Ok(ProEquality::Equal { at_level: m });
        }
        if cur.tower.surjective_from(m)? == Some(true) {
            return Ok(ProEquality::Distinct);
        }
        if m >= horizon || top.is_some_and(|t| m >= t) {
            return Ok(ProEquality::DistinctToHorizon { horizon: m });
        }
        m += 1;
        cur = lift(&cur, m)?;
    }
}

/// A compatible sequence of strata `(x_n)`, one per realized level.
#[derive(Clone, Debug)]
pub struct ProPoint {
    tower: Arc<Tower>,
    strata: Vec<usize>,
}

impl ProPoint {
    /// `ids[i]` is the stratum at level `base + i`.
    pub fn new<'a, I>(tower: &Arc<Tower>, ids: I) -> Result<Self, ProError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut strata = Vec::new();
        for (i, id) in ids.into_iter().enumerate() {
            let n = tower.base() + i as u32;
            let x = tower.level(n)?;
            let j = x.index_of(id)?;
            if i > 0 && tower.step(n - 1)?.image_of(j) != strata[i - 1] {
                return Err(ProError::IncompatiblePoint { level: n });
            }
            strata.push(j);
        }
        Ok(ProPoint {
            tower: Arc::clone(tower),
            strata,
        })
    }

    pub fn realized_to(&self) -> Option<u32> {
        (!self.strata.is_empty()).then(|| self.tower.base() + self.strata.len() as u32 - 1)
    }

    pub fn stratum_at(&self, n: u32) -> Option<usize> {
        n.checked_sub(self.tower.base())
            .and_then(|i| self.strata.get(i as usize).copied())
    }
}

/// `Ψ([α_n])((x_λ)) = α_n(x_n)`.
pub fn eval(pf: &ProFunction, x: &ProPoint) -> Result<i64, ProError> {
    check_tower(&pf.tower, &x.tower)?;
    let s = x
        .stratum_at(pf.level)
        .ok_or(ProError::PointTooShort { level: pf.level })?;
    Ok(pf.f.value(s))
}

/// The cylinder `π_n^{-1}(W)` over a constructible set `W` of level `n`.
#[derive(Clone, Debug)]
pub struct CylinderSet {
    tower: Arc<Tower>,
    level: u32,
    set: ConstructibleSet,
}

impl CylinderSet {
    pub fn new(tower: &Arc<Tower>, level: u32, set: ConstructibleSet) -> Result<Self, ProError> {
        if !crate::geom::same_model(set.parent(), &tower.level(level)?) {
            return Err(ProError::Geom(crate::geom::GeomError::ParentMismatch));
        }
        Ok(CylinderSet {
            tower: Arc::clone(tower),
            level,
            set,
        })
    }

    pub fn from_ids<'a, I>(tower: &Arc<Tower>, level: u32, ids: I) -> Result<Self, ProError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let x = tower.level(level)?;
        Self::new(tower, level, ConstructibleSet::from_ids(&x, ids)?)
    }

    pub fn whole(tower: &Arc<Tower>, level: u32) -> Result<Self, ProError> {
        let x = tower.level(level)?;
        Self::new(tower, level, ConstructibleSet::whole(&x))
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn set(&self) -> &ConstructibleSet {
        &self.set
    }
}

/// `π_{nm}^{-1}(W)` at level `m`.
pub fn lift_cyl(c: &CylinderSet, m: u32) -> Result<CylinderSet, ProError> {
    let pf = lift(&ProFunction::indicator(c), m)?;
    let set = ConstructibleSet::from_indices(
        pf.f.parent(),
        (0..pf.f.values().len()).filter(|&i| pf.f.value(i) != 0),
    );
    Ok(CylinderSet {
        tower: Arc::clone(&c.tower),
        level: m,
        set,
    })
}

fn common(a: &CylinderSet, b: &CylinderSet) -> Result<(CylinderSet, CylinderSet), ProError> {
    check_tower(&a.tower, &b.tower)?;
    let m = a.level.max(b.level);
    Ok((lift_cyl(a, m)?, lift_cyl(b, m)?))
}

/// Equality after lifting to the common level.
pub fn cyl_eq(a: &CylinderSet, b: &CylinderSet) -> Result<bool, ProError> {
    let (a, b) = common(a, b)?;
    Ok(a.set == b.set)
}

macro_rules! cyl_op {
    ($name:ident, $op:ident) => {
        pub fn $name(a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet, ProError> {
            let (a, b) = common(a, b)?;
            Ok(CylinderSet {
                set: a.set.$op(&b.set)?,
                ..a
            })
        }
    };
}

cyl_op!(cyl_union, union);
cyl_op!(cyl_intersect, intersection);
cyl_op!(cyl_difference, difference);
cyl_op!(cyl_symmdiff, symmetric_difference);

pub fn cyl_complement(a: &CylinderSet) -> CylinderSet {
    CylinderSet {
        set: a.set.complement(),
        ..a.clone()
    }
}

/// Level sets of the representative for nonzero values, as cylinders at the
/// representative's level.
pub fn level_sets(pf: &ProFunction) -> BTreeMap<i64, CylinderSet> {
    pf.f
        .level_sets()
        .into_iter()
        .map(|(n, set)| {
            (
                n,
                CylinderSet {
                    tower: Arc::clone(&pf.tower),
                    level: pf.level,
                    set,
                },
            )
        })
        .collect()
}

/// A formal sum `Σ [α_n]` of finitely many listed terms.
#[derive(Clone, Debug)]
pub struct SeriesProFunction {
    terms: Vec<ProFunction>,
}

impl SeriesProFunction {
    pub fn new(terms: Vec<ProFunction>) -> Result<Self, ProError> {
        if let Some(first) = terms.first() {
            for t in &terms[1..] {
                check_tower(&first.tower, &t.tower)?;
            }
        }
        Ok(SeriesProFunction { terms })
    }

    /// Terms `rule(0), rule(1), …, rule(n - 1)`.
    pub fn from_rule<F>(n: usize, rule: F) -> Result<Self, ProError>
    where
        F: Fn(usize) -> Result<ProFunction, ProError>,
    {
        Self::new((0..n).map(rule).collect::<Result<_, _>>()?)
    }

    pub fn terms(&self) -> &[ProFunction] {
        &self.terms
    }

    /// The sum of the first `n` terms as one class.
    pub fn partial(&self, n: usize) -> Result<Option<ProFunction>, ProError> {
        let mut it = self.terms.iter().take(n);
        let Some(first) = it.next() else {
            return Ok(None);
        };
        it.try_fold(first.clone(), |acc, t| pro_add(&acc, t)).map(Some)
    }
}
