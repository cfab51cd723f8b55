use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::atoms::{AtomTable, POINT};
use super::RingError;

pub(crate) fn add_i64(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("integer overflow in exact arithmetic")
}

pub(crate) fn mul_i64(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("integer overflow in exact arithmetic")
}

/// A product of atom powers, factors sorted by symbol name. The empty
/// monomial is the point class `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(symbol: &str) -> Self {
        Monomial(vec![(symbol.to_string(), 1)])
    }

    pub fn from_factors<I, S>(factors: I) -> Self
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut m: BTreeMap<String, u32> = BTreeMap::new();
        for (s, e) in factors {
            if e > 0 {
                *m.entry(s.into()).or_insert(0) += e;
            }
        }
        Monomial(m.into_iter().collect())
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, symbol: &str) -> u32 {
        self.0
            .iter()
            .find(|(s, _)| s == symbol)
            .map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::new();
        for (s, e) in &self.0 {
            let d = other.exponent(s);
            if d > *e {
                return None;
            }
            if e - d > 0 {
                out.push((s.clone(), e - d));
            }
        }
        if other.0.iter().any(|(s, _)| self.exponent(s) == 0) {
            return None;
        }
        Some(Monomial(out))
    }

    /// Degree-then-lexicographic comparison; a monomial order, used only for
    /// division.
    fn deglex_cmp(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            let mut names: Vec<&str> = self
                .0
                .iter()
                .chain(other.0.iter())
                .map(|(s, _)| s.as_str())
                .collect();
            names.sort_unstable();
            names.dedup();
            for n in names {
                match self.exponent(n).cmp(&other.exponent(n)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(POINT);
        }
        for (i, (s, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Element of the modeled Grothendieck ring: an integer polynomial in the
/// atoms of one [`AtomTable`].
#[derive(Clone, Debug)]
pub struct GClass {
    table: Arc<AtomTable>,
    terms: BTreeMap<Monomial, i64>,
}

impl GClass {
    pub fn zero(table: &Arc<AtomTable>) -> Self {
        GClass {
            table: Arc::clone(table),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(table: &Arc<AtomTable>) -> Self {
        Self::constant(table, 1)
    }

    pub fn constant(table: &Arc<AtomTable>, c: i64) -> Self {
        Self::from_terms(table, [(Monomial::one(), c)]).expect("constant has no symbols")
    }

    pub fn tate(table: &Arc<AtomTable>) -> Self {
        Self::atom(table, super::atoms::TATE).expect("L is always declared")
    }

    pub fn atom(table: &Arc<AtomTable>, symbol: &str) -> Result<Self, RingError> {
        if symbol == POINT {
            return Ok(Self::one(table));
        }
        Self::from_terms(table, [(Monomial::var(symbol), 1)])
    }

    pub fn from_terms<I>(table: &Arc<AtomTable>, terms: I) -> Result<Self, RingError>
    where
        I: IntoIterator<Item = (Monomial, i64)>,
    {
        let mut out = Self::zero(table);
        for (m, c) in terms {
            for (s, _) in m.factors() {
                if s == POINT || !table.contains(s) {
                    return Err(RingError::UnknownSymbol(s.clone()));
                }
            }
            out.add_term(m, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let v = add_i64(*o.get(), c);
                if v == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
        }
    }

    pub fn table(&self) -> &Arc<AtomTable> {
        &self.table
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()) == Some(&1)
    }

    pub fn same_table(&self, other: &GClass) -> bool {
        Arc::ptr_eq(&self.table, &other.table) || *self.table == *other.table
    }

    fn check_table(&self, other: &GClass) -> Result<(), RingError> {
        if self.same_table(other) {
            Ok(())
        } else {
            Err(RingError::TableMismatch)
        }
    }

    pub fn try_add(&self, other: &GClass) -> Result<GClass, RingError> {
        self.check_table(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &GClass) -> Result<GClass, RingError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &GClass) -> Result<GClass, RingError> {
        self.check_table(other)?;
        let mut out = Self::zero(&self.table);
        for (a, &x) in &self.terms {
            for (b, &y) in &other.terms {
                out.add_term(a.mul(b), mul_i64(x, y));
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> GClass {
        self.scale(-1)
    }

    pub fn scale(&self, k: i64) -> GClass {
        let mut out = Self::zero(&self.table);
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), mul_i64(c, k));
        }
        out
    }

    pub fn pow(&self, e: u32) -> GClass {
        let mut acc = Self::one(&self.table);
        for _ in 0..e {
            acc = acc.try_mul(self).expect("same table");
        }
        acc
    }

    /// Image under the ring morphism sending each atom to its declared Euler
    /// number, evaluated against `table`.
    pub fn chi_hom(&self, table: &AtomTable) -> Result<i64, RingError> {
        let mut total = 0i64;
        for (m, &c) in &self.terms {
            let mut v = c;
            for (s, e) in m.factors() {
                let x = table
                    .euler(s)
                    .ok_or_else(|| RingError::UnknownSymbol(s.clone()))?;
                for _ in 0..*e {
                    v = mul_i64(v, x);
                }
            }
            total = add_i64(total, v);
        }
        Ok(total)
    }

    /// Euler characteristic using the class's own atom table.
    pub fn euler(&self) -> i64 {
        self.chi_hom(&self.table)
            .expect("classes only hold symbols of their own table")
    }

    fn leading(&self) -> Option<(&Monomial, i64)> {
        self.terms
            .iter()
            .max_by(|a, b| a.0.deglex_cmp(b.0))
            .map(|(m, &c)| (m, c))
    }

    /// Exact quotient `self / divisor` in the integer polynomial ring, or
    /// `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &GClass) -> Option<GClass> {
        let (dm, dc) = divisor.leading()?;
        let (dm, dc) = (dm.clone(), dc);
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.table);
        while let Some((rm, rc)) = rem.leading() {
            let tm = rm.checked_div(&dm)?;
            if rc % dc != 0 {
                return None;
            }
            let t = Self::from_terms(&self.table, [(tm, rc / dc)]).ok()?;
            rem = rem.try_sub(&t.try_mul(divisor).ok()?).ok()?;
            quot = quot.try_add(&t).ok()?;
        }
        Some(quot)
    }
}

impl PartialEq for GClass {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for GClass {}

impl PartialOrd for GClass {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GClass {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms.cmp(&other.terms)
    }
}

impl std::hash::Hash for GClass {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl fmt::Display for GClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, &c)) in self.terms.iter().enumerate() {
            let mag = c.unsigned_abs();
            if i == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else if c < 0 {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

pub fn gclass_add(a: &GClass, b: &GClass) -> Result<GClass, RingError> {
    a.try_add(b)
}

pub fn gclass_mul(a: &GClass, b: &GClass) -> Result<GClass, RingError> {
    a.try_mul(b)
}

pub fn gclass_eq(a: &GClass, b: &GClass) -> Result<bool, RingError> {
    a.check_table(b)?;
    Ok(a == b)
}

pub fn chi_hom(a: &GClass, table: &AtomTable) -> Result<i64, RingError> {
    a.chi_hom(table)
}
