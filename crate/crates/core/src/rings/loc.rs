//! Localization of the model ring at a finitely generated multiplicative set.
//!
//! Denominators are monomials in declared generator classes. Because the
//! polynomial model is an integral domain, two fractions are equal exactly
//! when they cross-multiply to the same polynomial. Operands over different
//! generator sets are compared and combined in the localization at the union
//! of the two sets.

use std::fmt;
use std::sync::Arc;

use super::{GClass, RingError};

/// The multiplicative set of all finite products of its generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultSet {
    generators: Vec<GClass>,
}

impl MultSet {
    /// Unit generators are dropped; the zero class is rejected.
    pub fn new<I: IntoIterator<Item = GClass>>(generators: I) -> Result<Self, RingError> {
        let mut gens = Vec::new();
        for g in generators {
            if g.is_zero() {
                return Err(RingError::ZeroGenerator);
            }
            if !g.is_one() {
                gens.push(g);
            }
        }
        gens.sort();
        gens.dedup();
        Ok(MultSet { generators: gens })
    }

    pub fn trivial() -> Self {
        MultSet { generators: Vec::new() }
    }

    pub fn generators(&self) -> &[GClass] {
        &self.generators
    }

    pub fn contains_generator(&self, g: &GClass) -> bool {
        g.is_one() || self.generators.binary_search(g).is_ok()
    }

    pub fn union(&self, other: &MultSet) -> MultSet {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        gens.sort();
        gens.dedup();
        MultSet { generators: gens }
    }
}

/// A fraction `numerator / (g_1^e_1 ⋯ g_k^e_k)` with every `g_i` drawn from
/// a declared [`MultSet`].
#[derive(Clone, Debug)]
pub struct LocClass {
    num: GClass,
    den: Vec<(GClass, u32)>,
    set: Arc<MultSet>,
}

impl LocClass {
    pub fn new(
        num: GClass,
        den: impl IntoIterator<Item = (GClass, u32)>,
        set: &Arc<MultSet>,
    ) -> Result<LocClass, RingError> {
        let mut merged: Vec<(GClass, u32)> = Vec::new();
        for (g, e) in den {
            if g.is_zero() {
                return Err(RingError::ZeroGenerator);
            }
            if !set.contains_generator(&g) {
                return Err(RingError::UndeclaredDenominator(g.to_string()));
            }
            if !num.same_table(&g) {
                return Err(RingError::TableMismatch);
            }
            if g.is_one() || e == 0 {
                continue;
            }
            match merged.iter_mut().find(|(h, _)| *h == g) {
                Some(slot) => slot.1 += e,
                None => merged.push((g, e)),
            }
        }
        merged.sort();
        let mut out = LocClass {
            num,
            den: merged,
            set: Arc::clone(set),
        };
        out.reduce();
        Ok(out)
    }

    pub fn from_class(num: GClass) -> LocClass {
        LocClass {
            num,
            den: Vec::new(),
            set: Arc::new(MultSet::trivial()),
        }
    }

    pub fn numerator(&self) -> &GClass {
        &self.num
    }

    pub fn denominator(&self) -> &[(GClass, u32)] {
        &self.den
    }

    pub fn mult_set(&self) -> &Arc<MultSet> {
        &self.set
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Expanded denominator polynomial.
    pub fn denominator_class(&self) -> GClass {
        let mut acc = GClass::one(self.num.table());
        for (g, e) in &self.den {
            acc = acc.try_mul(&g.pow(*e)).expect("denominator shares the table");
        }
        acc
    }

    /// Cancels generator factors that divide the numerator exactly.
    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        for (g, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(g) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
    }

    fn joined_set(&self, other: &LocClass) -> Arc<MultSet> {
        if self.set == other.set {
            Arc::clone(&self.set)
        } else {
            Arc::new(self.set.union(&other.set))
        }
    }

    fn exponent_of(&self, g: &GClass) -> u32 {
        self.den.iter().find(|(h, _)| h == g).map_or(0, |&(_, e)| e)
    }

    pub fn try_add(&self, other: &LocClass) -> Result<LocClass, RingError> {
        if !self.num.same_table(&other.num) {
            return Err(RingError::TableMismatch);
        }
        let set = self.joined_set(other);
        let mut gens: Vec<GClass> = self
            .den
            .iter()
            .chain(other.den.iter())
            .map(|(g, _)| g.clone())
            .collect();
        gens.sort();
        gens.dedup();
        let common: Vec<(GClass, u32)> = gens
            .into_iter()
            .map(|g| {
                let e = self.exponent_of(&g).max(other.exponent_of(&g));
                (g, e)
            })
            .collect();
        let lift = |x: &LocClass| -> GClass {
            let mut acc = x.num.clone();
            for (g, e) in &common {
                let extra = e - x.exponent_of(g);
                acc = acc.try_mul(&g.pow(extra)).expect("shared table");
            }
            acc
        };
        let num = lift(self).try_add(&lift(other))?;
        LocClass::new(num, common, &set)
    }

    pub fn try_sub(&self, other: &LocClass) -> Result<LocClass, RingError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &LocClass) -> Result<LocClass, RingError> {
        let num = self.num.try_mul(&other.num)?;
        let set = self.joined_set(other);
        LocClass::new(
            num,
            self.den.iter().chain(other.den.iter()).cloned(),
            &set,
        )
    }

    pub fn neg(&self) -> LocClass {
        LocClass {
            num: self.num.neg(),
            den: self.den.clone(),
            set: Arc::clone(&self.set),
        }
    }

    pub fn scale(&self, k: i64) -> LocClass {
        let mut out = LocClass {
            num: self.num.scale(k),
            den: self.den.clone(),
            set: Arc::clone(&self.set),
        };
        out.reduce();
        out
    }

    /// Cross-multiplication equality.
    pub fn try_eq(&self, other: &LocClass) -> Result<bool, RingError> {
        if !self.num.same_table(&other.num) {
            return Err(RingError::TableMismatch);
        }
        let lhs = self.num.try_mul(&other.denominator_class())?;
        let rhs = other.num.try_mul(&self.denominator_class())?;
        Ok(lhs == rhs)
    }

    /// Numerator and denominator pushed through the Euler ring morphism.
    pub fn chi_shadow(&self) -> Result<super::Rat, RingError> {
        let n = self.num.euler();
        let d = self.denominator_class().euler();
        super::Rat::new(n, d)
    }
}

impl PartialEq for LocClass {
    fn eq(&self, other: &Self) -> bool {
        self.try_eq(other).unwrap_or(false)
    }
}

impl fmt::Display for LocClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/(", self.num)?;
        if self.den.is_empty() {
            f.write_str("1")?;
        }
        for (i, (g, e)) in self.den.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            let atomic = g.num_terms() == 1
                && g.terms().all(|(m, c)| c == 1 && m.factors().len() == 1 && m.factors()[0].1 == 1);
            match (atomic, *e) {
                (true, 1) => write!(f, "{g}")?,
                (true, e) => write!(f, "{g}^{e}")?,
                (false, 1) => write!(f, "({g})")?,
                (false, e) => write!(f, "({g})^{e}")?,
            }
        }
        f.write_str(")")
    }
}

pub fn loc_add(a: &LocClass, b: &LocClass) -> Result<LocClass, RingError> {
    a.try_add(b)
}

pub fn loc_mul(a: &LocClass, b: &LocClass) -> Result<LocClass, RingError> {
    a.try_mul(b)
}

pub fn loc_eq(a: &LocClass, b: &LocClass) -> Result<bool, RingError> {
    a.try_eq(b)
}
