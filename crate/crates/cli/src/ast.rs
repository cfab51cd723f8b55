use std::collections::BTreeMap;

use crate::diag::Pos;

/// A monomial as sorted `(atom, exponent)` factors; empty for the unit.
pub type Mono = Vec<(String, u32)>;

/// An integer polynomial in atom names, kept expanded with nonzero
/// coefficients so that equal expressions compare equal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassExpr {
    pub terms: BTreeMap<Mono, i64>,
}

impl ClassExpr {
    pub fn constant(c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(Vec::new(), c);
        }
        ClassExpr { terms }
    }

    pub fn atom(name: &str) -> Self {
        ClassExpr {
            terms: BTreeMap::from([(vec![(name.to_string(), 1)], 1)]),
        }
    }

    pub fn add(&self, other: &ClassExpr) -> Option<ClassExpr> {
        let mut terms = self.terms.clone();
        for (m, &c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert(0);
            *e = e.checked_add(c)?;
            if *e == 0 {
                terms.remove(m);
            }
        }
        Some(ClassExpr { terms })
    }

    pub fn neg(&self) -> Option<ClassExpr> {
        let terms = self
            .terms
            .iter()
            .map(|(m, &c)| c.checked_neg().map(|c| (m.clone(), c)))
            .collect::<Option<_>>()?;
        Some(ClassExpr { terms })
    }

    pub fn mul(&self, other: &ClassExpr) -> Option<ClassExpr> {
        let mut out = ClassExpr::default();
        for (a, &x) in &self.terms {
            for (b, &y) in &other.terms {
                let term = ClassExpr {
                    terms: BTreeMap::from([(mono_mul(a, b)?, x.checked_mul(y)?)]),
                };
                out = out.add(&term)?;
            }
        }
        Some(out)
    }

    pub fn pow(&self, e: u32) -> Option<ClassExpr> {
        let mut out = ClassExpr::constant(1);
        for _ in 0..e {
            out = out.mul(self)?;
        }
        Some(out)
    }

    /// Atom names in first-use order.
    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().flatten().map(|(s, _)| s.as_str())
    }
}

fn mono_mul(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut m: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (s, e) in b {
        let x = m.entry(s.clone()).or_insert(0);
        *x = x.checked_add(*e)?;
    }
    Some(m.into_iter().collect())
}

/// Stratum selection of a cylinder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    All,
    Ids(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapEntry {
    pub from: String,
    pub to: String,
    pub fiber: ClassExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TowerDef {
    Product(String),
    /// Each fiber is a list of pieces; a piece list of length one is an
    /// unsplit fiber.
    Bundle {
        base: String,
        fibers: Vec<Vec<ClassExpr>>,
        periodic: bool,
    },
    Arcs {
        base: String,
        dim: i64,
    },
    Steps(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImpliedKw {
    Composite,
    Unit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemEntry {
    /// The class on the step leaving level `level`, valued on level
    /// `level + 1`.
    Step {
        level: u32,
        values: Vec<(String, i64)>,
    },
    /// An explicit class from level `upper` down to level `lower`.
    Between {
        lower: u32,
        upper: u32,
        values: Vec<(String, i64)>,
    },
}

/// Expressions denoting proconstructible functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PfExpr {
    /// A declared profn or cylinder, or a variety in `chi`/`gamma`.
    Name(String),
    One(String),
    Zero(String),
    Cyl {
        tower: String,
        level: u32,
        sel: Selection,
    },
    Lift(Box<PfExpr>, u32),
    Sum(Vec<PfExpr>),
    Scale(i64, Box<PfExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    Identity,
    One,
    Square,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Chi(PfExpr),
    Gamma(PfExpr),
    ChiPro { pf: PfExpr, w: i32 },
    GammaPro { pf: PfExpr, w: i32 },
    Measure(PfExpr),
    Integrate { gamma: bool, pf: PfExpr, f: Weight },
    Eq(PfExpr, PfExpr),
    Eval { pf: PfExpr, point: Vec<String> },
    Stable { pf: PfExpr, p: Option<i64> },
    Class { tower: String, level: u32 },
    LevelSets(PfExpr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckKind {
    ProjectionFormula,
    Naturality { tower: String, via: Option<String> },
    System(String),
    Diagrams(String),
    Stability { pf: PfExpr, p: Option<i64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub kind: CheckKind,
    pub depth: Option<u32>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Atom {
        name: String,
        euler: i64,
    },
    Variety {
        name: String,
        singular: bool,
        strata: Vec<(String, ClassExpr)>,
    },
    Morphism {
        name: String,
        source: String,
        target: String,
        maps: Vec<MapEntry>,
        strict: bool,
    },
    Tower {
        name: String,
        def: TowerDef,
    },
    Profn {
        name: String,
        tower: String,
        level: u32,
        values: Vec<(String, i64)>,
    },
    Cyl {
        name: String,
        tower: String,
        level: u32,
        sel: Selection,
    },
    System {
        name: String,
        tower: String,
        implied: Option<ImpliedKw>,
        entries: Vec<SystemEntry>,
    },
    Query(Query),
    Check(Check),
}

impl StmtKind {
    /// The declared name, for declarations.
    pub fn name(&self) -> Option<&str> {
        match self {
            StmtKind::Atom { name, .. }
            | StmtKind::Variety { name, .. }
            | StmtKind::Morphism { name, .. }
            | StmtKind::Tower { name, .. }
            | StmtKind::Profn { name, .. }
            | StmtKind::Cyl { name, .. }
            | StmtKind::System { name, .. } => Some(name),
            StmtKind::Query(_) | StmtKind::Check(_) => None,
        }
    }
}

/// A statement with its source position. Equality ignores the position.
#[derive(Clone, Debug)]
pub struct Stmt {
    pub pos: Pos,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Stmt {}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Document {
    pub stmts: Vec<Stmt>,
}

impl Document {
    pub fn queries(&self) -> impl Iterator<Item = (&Stmt, &Query)> {
        self.stmts.iter().filter_map(|s| match &s.kind {
            StmtKind::Query(q) => Some((s, q)),
            _ => None,
        })
    }

    pub fn checks(&self) -> impl Iterator<Item = (&Stmt, &Check)> {
        self.stmts.iter().filter_map(|s| match &s.kind {
            StmtKind::Check(c) => Some((s, c)),
            _ => None,
        })
    }
}
