use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::rings::{add_i64, mul_i64, GClass, LocClass, Rat};

use super::model::{same_model, ConstructibleSet, VarietyModel};
use super::GeomError;

/// An integer-valued function constant on the strata of a model.
#[derive(Clone, Debug)]
pub struct ConstructibleFunction {
    parent: Arc<VarietyModel>,
    values: Vec<i64>,
}

impl ConstructibleFunction {
    pub fn zero(parent: &Arc<VarietyModel>) -> Self {
        Self::constant(parent, 0)
    }

    /// The characteristic function `1_X`.
    pub fn one(parent: &Arc<VarietyModel>) -> Self {
        Self::constant(parent, 1)
    }

    pub fn constant(parent: &Arc<VarietyModel>, c: i64) -> Self {
        ConstructibleFunction {
            parent: Arc::clone(parent),
            values: vec![c; parent.len()],
        }
    }

    pub fn indicator(set: &ConstructibleSet) -> Self {
        ConstructibleFunction {
            parent: Arc::clone(set.parent()),
            values: set.mask().iter().map(|&m| m as i64).collect(),
        }
    }

    pub fn from_values(parent: &Arc<VarietyModel>, values: Vec<i64>) -> Result<Self, GeomError> {
        if values.len() != parent.len() {
            return Err(GeomError::NotTotal {
                expected: parent.len(),
                got: values.len(),
            });
        }
        Ok(ConstructibleFunction {
            parent: Arc::clone(parent),
            values,
        })
    }

    /// Strata not listed take the value 0.
    pub fn from_pairs<'a, I>(parent: &Arc<VarietyModel>, pairs: I) -> Result<Self, GeomError>
    where
        I: IntoIterator<Item = (&'a str, i64)>,
    {
        let mut out = Self::zero(parent);
        for (id, v) in pairs {
            out.values[parent.index_of(id)?] = v;
        }
        Ok(out)
    }

    pub fn parent(&self) -> &Arc<VarietyModel> {
        &self.parent
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> i64 {
        self.values[i]
    }

    pub fn value_at(&self, id: &str) -> Result<i64, GeomError> {
        Ok(self.values[self.parent.index_of(id)?])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Level sets `α^{-1}(n)` for every realized value, including 0.
    pub fn fibers(&self) -> BTreeMap<i64, ConstructibleSet> {
        let mut masks: BTreeMap<i64, Vec<bool>> = BTreeMap::new();
        for (i, &v) in self.values.iter().enumerate() {
            masks.entry(v).or_insert_with(|| vec![false; self.values.len()])[i] = true;
        }
        masks
            .into_iter()
            .map(|(v, m)| (v, ConstructibleSet::from_mask(&self.parent, m)))
            .collect()
    }

    /// Level sets for nonzero values only.
    pub fn level_sets(&self) -> BTreeMap<i64, ConstructibleSet> {
        let mut f = self.fibers();
        f.remove(&0);
        f
    }

    /// `Σ_s α(s)·χ(s)`.
    pub fn chi_pointwise(&self) -> i64 {
        self.values
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &v)| add_i64(acc, mul_i64(v, self.parent.stratum_chi(i))))
    }

    /// `Σ_s α(s)·[s]`.
    pub fn gamma_pointwise(&self) -> GClass {
        let t = self.parent.table();
        self.values
            .iter()
            .enumerate()
            .fold(GClass::zero(t), |acc, (i, &v)| {
                acc.try_add(&self.parent.class(i).scale(v)).expect("shared table")
            })
    }

    fn check_parent(&self, other: &Self) -> Result<(), GeomError> {
        if same_model(&self.parent, &other.parent) {
            Ok(())
        } else {
            Err(GeomError::ParentMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, GeomError> {
        self.check_parent(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| add_i64(a, b))
            .collect();
        Ok(ConstructibleFunction {
            parent: Arc::clone(&self.parent),
            values,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, GeomError> {
        self.check_parent(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| mul_i64(a, b))
            .collect();
        Ok(ConstructibleFunction {
            parent: Arc::clone(&self.parent),
            values,
        })
    }

    pub fn scale(&self, k: i64) -> Self {
        ConstructibleFunction {
            parent: Arc::clone(&self.parent),
            values: self.values.iter().map(|&v| mul_i64(v, k)).collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(i64) -> i64) -> Self {
        ConstructibleFunction {
            parent: Arc::clone(&self.parent),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl PartialEq for ConstructibleFunction {
    fn eq(&self, other: &Self) -> bool {
        same_model(&self.parent, &other.parent) && self.values == other.values
    }
}

impl fmt::Display for ConstructibleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (i, &v) in self.values.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let sep = if first { " " } else { ", " };
            write!(f, "{sep}{}: {v}", self.parent.id(i))?;
            first = false;
        }
        f.write_str(if first { "}" } else { " }" })
    }
}

/// `χ(α) = Σ_n n·χ(α^{-1}(n))`, summed over nonzero values.
pub fn chi_of_fn(alpha: &ConstructibleFunction) -> i64 {
    alpha
        .level_sets()
        .iter()
        .fold(0, |acc, (&n, w)| add_i64(acc, mul_i64(n, w.chi())))
}

/// `Γ(α) = Σ_n n·[α^{-1}(n)]`.
pub fn gamma_of_fn(alpha: &ConstructibleFunction) -> GClass {
    alpha
        .level_sets()
        .iter()
        .fold(GClass::zero(alpha.parent().table()), |acc, (&n, w)| {
            acc.try_add(&w.gamma().scale(n)).expect("shared table")
        })
}

/// `∫ f(α) dχ = Σ_n f(n)·χ(α^{-1}(n))` over every realized value.
pub fn integrate_chi<F>(alpha: &ConstructibleFunction, f: F) -> Result<Rat, GeomError>
where
    F: Fn(i64) -> Option<Rat>,
{
    let mut total = Rat::zero();
    for (n, w) in alpha.fibers() {
        let fv = f(n).ok_or(GeomError::UndefinedIntegrand(n))?;
        total = total + fv * Rat::from_int(w.chi());
    }
    Ok(total)
}

/// `∫ f(α) dΓ = Σ_n f(n)·[α^{-1}(n)]` over every realized value.
pub fn integrate_gamma<F>(alpha: &ConstructibleFunction, f: F) -> Result<LocClass, GeomError>
where
    F: Fn(i64) -> Option<LocClass>,
{
    let mut total = LocClass::from_class(GClass::zero(alpha.parent().table()));
    for (n, w) in alpha.fibers() {
        let fv = f(n).ok_or(GeomError::UndefinedIntegrand(n))?;
        total = total.try_add(&fv.try_mul(&LocClass::from_class(w.gamma()))?)?;
    }
    Ok(total)
}

pub fn fn_add(a: &ConstructibleFunction, b: &ConstructibleFunction) -> Result<ConstructibleFunction, GeomError> {
    a.try_add(b)
}

pub fn fn_mul(a: &ConstructibleFunction, b: &ConstructibleFunction) -> Result<ConstructibleFunction, GeomError> {
    a.try_mul(b)
}

pub fn fn_scale(a: &ConstructibleFunction, k: i64) -> ConstructibleFunction {
    a.scale(k)
}
