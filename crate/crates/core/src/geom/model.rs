use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::rings::{AtomTable, GClass};

use super::GeomError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratum {
    pub id: String,
    pub class: GClass,
}

/// A variety presented as a finite list of strata with declared classes.
#[derive(Clone, Debug)]
pub struct VarietyModel {
    name: String,
    table: Arc<AtomTable>,
    strata: Vec<Stratum>,
    index: HashMap<String, usize>,
    singular: bool,
}

impl VarietyModel {
    pub fn new<I, S>(
        name: impl Into<String>,
        table: &Arc<AtomTable>,
        strata: I,
    ) -> Result<Arc<VarietyModel>, GeomError>
    where
        I: IntoIterator<Item = (S, GClass)>,
        S: Into<String>,
    {
        Self::build(name.into(), table, strata, false)
    }

    /// Same as [`VarietyModel::new`] but flags the model as singular, which
    /// arc-space constructions refuse.
    pub fn new_singular<I, S>(
        name: impl Into<String>,
        table: &Arc<AtomTable>,
        strata: I,
    ) -> Result<Arc<VarietyModel>, GeomError>
    where
        I: IntoIterator<Item = (S, GClass)>,
        S: Into<String>,
    {
        Self::build(name.into(), table, strata, true)
    }

    fn build<I, S>(
        name: String,
        table: &Arc<AtomTable>,
        strata: I,
        singular: bool,
    ) -> Result<Arc<VarietyModel>, GeomError>
    where
        I: IntoIterator<Item = (S, GClass)>,
        S: Into<String>,
    {
        let mut out = VarietyModel {
            name,
            table: Arc::clone(table),
            strata: Vec::new(),
            index: HashMap::new(),
            singular,
        };
        for (id, class) in strata {
            let id = id.into();
            if class.is_zero() {
                return Err(GeomError::ZeroClass(id));
            }
            if !Arc::ptr_eq(class.table(), table) && **class.table() != **table {
                return Err(GeomError::Ring(crate::rings::RingError::TableMismatch));
            }
            if out.index.insert(id.clone(), out.strata.len()).is_some() {
                return Err(GeomError::DuplicateStratum(id));
            }
            out.strata.push(Stratum { id, class });
        }
        Ok(Arc::new(out))
    }

    /// The one-stratum model of a point.
    pub fn point(table: &Arc<AtomTable>) -> Arc<VarietyModel> {
        Self::new("pt", table, [("pt", GClass::one(table))]).expect("valid point model")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn table(&self) -> &Arc<AtomTable> {
        &self.table
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn index_of(&self, id: &str) -> Result<usize, GeomError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GeomError::UnknownStratum {
                model: self.name.clone(),
                id: id.to_string(),
            })
    }

    pub fn id(&self, i: usize) -> &str {
        &self.strata[i].id
    }

    pub fn class(&self, i: usize) -> &GClass {
        &self.strata[i].class
    }

    pub fn stratum_chi(&self, i: usize) -> i64 {
        self.strata[i].class.euler()
    }

    pub fn chi(&self) -> i64 {
        (0..self.len()).map(|i| self.stratum_chi(i)).sum()
    }

    pub fn gamma(&self) -> GClass {
        self.strata
            .iter()
            .fold(GClass::zero(&self.table), |acc, s| {
                acc.try_add(&s.class).expect("strata share the table")
            })
    }

    /// Same strata with the same classes, in the same order.
    pub fn same_shape(&self, other: &VarietyModel) -> bool {
        self.strata == other.strata
    }
}

impl PartialEq for VarietyModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.strata == other.strata && self.singular == other.singular
    }
}

impl Eq for VarietyModel {}

pub(crate) fn same_model(a: &Arc<VarietyModel>, b: &Arc<VarietyModel>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl fmt::Display for VarietyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{", self.name)?;
        for (i, s) in self.strata.iter().enumerate() {
            let sep = if i == 0 { " " } else { "; " };
            write!(f, "{sep}{}: {}", s.id, s.class)?;
        }
        f.write_str(" }")
    }
}

/// A union of strata of one model.
#[derive(Clone, Debug)]
pub struct ConstructibleSet {
    parent: Arc<VarietyModel>,
    members: Vec<bool>,
}

impl ConstructibleSet {
    pub fn empty(parent: &Arc<VarietyModel>) -> Self {
        ConstructibleSet {
            parent: Arc::clone(parent),
            members: vec![false; parent.len()],
        }
    }

    pub fn whole(parent: &Arc<VarietyModel>) -> Self {
        ConstructibleSet {
            parent: Arc::clone(parent),
            members: vec![true; parent.len()],
        }
    }

    pub fn from_ids<'a, I>(parent: &Arc<VarietyModel>, ids: I) -> Result<Self, GeomError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = Self::empty(parent);
        for id in ids {
            out.members[parent.index_of(id)?] = true;
        }
        Ok(out)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(parent: &Arc<VarietyModel>, idx: I) -> Self {
        let mut out = Self::empty(parent);
        for i in idx {
            out.members[i] = true;
        }
        out
    }

    pub(crate) fn from_mask(parent: &Arc<VarietyModel>, members: Vec<bool>) -> Self {
        debug_assert_eq!(members.len(), parent.len());
        ConstructibleSet {
            parent: Arc::clone(parent),
            members,
        }
    }

    pub fn parent(&self) -> &Arc<VarietyModel> {
        &self.parent
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i)
    }

    pub fn ids(&self) -> Vec<&str> {
        self.indices().map(|i| self.parent.id(i)).collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self, GeomError> {
        if !same_model(&self.parent, &other.parent) {
            return Err(GeomError::ParentMismatch);
        }
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Self::from_mask(&self.parent, members))
    }

    pub fn union(&self, other: &Self) -> Result<Self, GeomError> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, GeomError> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &Self) -> Result<Self, GeomError> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Result<Self, GeomError> {
        self.zip_with(other, |a, b| a != b)
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(&self.parent, self.members.iter().map(|&m| !m).collect())
    }

    pub fn chi(&self) -> i64 {
        self.indices().map(|i| self.parent.stratum_chi(i)).sum()
    }

    pub fn gamma(&self) -> GClass {
        self.indices()
            .fold(GClass::zero(self.parent.table()), |acc, i| {
                acc.try_add(self.parent.class(i)).expect("shared table")
            })
    }
}

impl PartialEq for ConstructibleSet {
    fn eq(&self, other: &Self) -> bool {
        same_model(&self.parent, &other.parent) && self.members == other.members
    }
}

pub fn chi_of_set(w: &ConstructibleSet) -> i64 {
    w.chi()
}

pub fn gamma_of_set(w: &ConstructibleSet) -> GClass {
    w.gamma()
}
