use std::collections::{HashMap, HashSet};
use std::fmt::Display;
use std::sync::Arc;
use std::time::Instant;

use prochern_core::arcspace::motivic_measure;
use prochern_core::bivariant::{BivClassSystem, Implied, StepSource};
use prochern_core::geom::{chi_of_fn, gamma_of_fn, MorphismModel, VarietyModel};
use prochern_core::prosys::{
    chi_pro, eval, gamma_pro, integrate_chi_pro, integrate_gamma_pro, is_chi_stable, level_sets,
    lift, lift_cyl, pro_add, pro_eq, procharacteristic, CylinderSet, ProEquality, ProFunction,
    ProPoint, Stability, StepData, Tower,
};
use prochern_core::rings::{AtomTable, GClass, LocClass, Monomial, Rat};

use crate::ast::*;
use crate::checks::run_check;
use crate::diag::{Diagnostic, Pos};
use crate::report::{CheckResult, QueryResult, Report, Status};

/// Evaluation settings; per-check `depth`/`seed` override these.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub seed: u64,
    pub depth: u32,
    pub horizon: u32,
    pub queries: bool,
    pub checks: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            seed: 0,
            depth: 4,
            horizon: 8,
            queries: true,
            checks: true,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Entry {
    Atom,
    Variety(Arc<VarietyModel>),
    Morphism(MorphismModel),
    Tower(Arc<Tower>),
    Profn(ProFunction),
    Cyl(CylinderSet),
    System(BivClassSystem),
}

impl Entry {
    fn kind(&self) -> &'static str {
        match self {
            Entry::Atom => "an atom",
            Entry::Variety(_) => "a variety",
            Entry::Morphism(_) => "a morphism",
            Entry::Tower(_) => "a tower",
            Entry::Profn(_) => "a profn",
            Entry::Cyl(_) => "a cylinder",
            Entry::System(_) => "a system",
        }
    }
}

/// Resolved declarations.
#[derive(Debug)]
pub struct Env {
    pub table: Arc<AtomTable>,
    entries: HashMap<String, Entry>,
    /// Morphism names in declaration order.
    pub morphisms: Vec<String>,
}

/// Builds a located error mentioning the statement being processed.
pub fn located(pos: Pos, what: &str, e: impl Display) -> Diagnostic {
    Diagnostic::new(pos, format!("in {what}: {e}"))
}

impl Env {
    /// Resolves every declaration in order.
    pub fn build(doc: &Document) -> Result<Env, Diagnostic> {
        let mut table = AtomTable::new();
        for s in &doc.stmts {
            if let StmtKind::Atom { name, euler } = &s.kind {
                table
                    .declare(name, *euler)
                    .map_err(|e| located(s.pos, &format!("atom `{name}`"), e))?;
            }
        }
        let mut env = Env {
            table: Arc::new(table),
            entries: HashMap::new(),
            morphisms: Vec::new(),
        };
        let mut atoms_seen: HashSet<String> = HashSet::from(["L".to_string()]);
        for s in &doc.stmts {
            if let Some(name) = s.kind.name() {
                let what = format!("`{name}`");
                if env.entries.contains_key(name) && !matches!(s.kind, StmtKind::Atom { .. } if name == "L") {
                    return Err(located(s.pos, &what, "name already declared"));
                }
                let entry = env
                    .declare(&s.kind, &mut atoms_seen)
                    .map_err(|m| located(s.pos, &what, m))?;
                if matches!(entry, Entry::Morphism(_)) {
                    env.morphisms.push(name.to_string());
                }
                env.entries.insert(name.to_string(), entry);
            }
        }
        Ok(env)
    }

    pub fn get(&self, name: &str) -> Result<&Entry, String> {
        self.entries.get(name).ok_or_else(|| format!("`{name}` is not declared"))
    }

    fn wrong(&self, name: &str, want: &str) -> String {
        match self.entries.get(name) {
            Some(e) => format!("`{name}` is {}, not {want}", e.kind()),
            None => format!("`{name}` is not declared"),
        }
    }

    pub fn variety(&self, name: &str) -> Result<Arc<VarietyModel>, String> {
        match self.entries.get(name) {
            Some(Entry::Variety(v)) => Ok(Arc::clone(v)),
            _ => Err(self.wrong(name, "a variety")),
        }
    }

    pub fn morphism(&self, name: &str) -> Result<MorphismModel, String> {
        match self.entries.get(name) {
            Some(Entry::Morphism(m)) => Ok(m.clone()),
            _ => Err(self.wrong(name, "a morphism")),
        }
    }

    pub fn tower(&self, name: &str) -> Result<Arc<Tower>, String> {
        match self.entries.get(name) {
            Some(Entry::Tower(t)) => Ok(Arc::clone(t)),
            _ => Err(self.wrong(name, "a tower")),
        }
    }

    pub fn system(&self, name: &str) -> Result<BivClassSystem, String> {
        match self.entries.get(name) {
            Some(Entry::System(s)) => Ok(s.clone()),
            _ => Err(self.wrong(name, "a system")),
        }
    }

    fn class(&self, e: &ClassExpr, seen: &HashSet<String>) -> Result<GClass, String> {
        for a in e.atoms() {
            if !seen.contains(a) {
                return Err(if self.table.contains(a) {
                    format!("atom `{a}` is used before its declaration")
                } else {
                    format!("unknown atom `{a}`")
                });
            }
        }
        let terms = e
            .terms
            .iter()
            .map(|(m, &c)| (Monomial::from_factors(m.iter().cloned()), c));
        GClass::from_terms(&self.table, terms).map_err(|e| e.to_string())
    }

    /// Values on the strata of `x`, keyed by id, with `default` elsewhere.
    fn values_on(x: &VarietyModel, vs: &[(String, i64)], default: i64) -> Result<Vec<i64>, String> {
        let mut out = vec![default; x.len()];
        for (id, v) in vs {
            out[x.index_of(id).map_err(|e| e.to_string())?] = *v;
        }
        Ok(out)
    }

    fn declare(&self, kind: &StmtKind, seen: &mut HashSet<String>) -> Result<Entry, String> {
        let s = |e: &dyn Display| e.to_string();
        Ok(match kind {
            StmtKind::Atom { name, .. } => {
                seen.insert(name.clone());
                Entry::Atom
            }
            StmtKind::Variety {
                name,
                singular,
                strata,
            } => {
                let strata = strata
                    .iter()
                    .map(|(id, c)| Ok((id.clone(), self.class(c, seen)?)))
                    .collect::<Result<Vec<_>, String>>()?;
                let v = if *singular {
                    VarietyModel::new_singular(name.as_str(), &self.table, strata)
                } else {
                    VarietyModel::new(name.as_str(), &self.table, strata)
                };
                Entry::Variety(v.map_err(|e| s(&e))?)
            }
            StmtKind::Morphism {
                source,
                target,
                maps,
                strict,
                ..
            } => {
                let (x, y) = (self.variety(source)?, self.variety(target)?);
                let entries = maps
                    .iter()
                    .map(|m| Ok((m.from.as_str(), m.to.as_str(), self.class(&m.fiber, seen)?)))
                    .collect::<Result<Vec<_>, String>>()?;
                Entry::Morphism(MorphismModel::new(&x, &y, entries, *strict).map_err(|e| s(&e))?)
            }
            StmtKind::Tower { name, def } => Entry::Tower(match def {
                TowerDef::Product(x) => Tower::product(name.as_str(), &self.variety(x)?),
                TowerDef::Bundle {
                    base,
                    fibers,
                    periodic,
                } => {
                    let fibers = fibers
                        .iter()
                        .map(|ps| ps.iter().map(|c| self.class(c, seen)).collect())
                        .collect::<Result<Vec<Vec<_>>, String>>()?;
                    Tower::bundle(name.as_str(), &self.variety(base)?, fibers, *periodic).map_err(|e| s(&e))?
                }
                TowerDef::Arcs { base, dim } => {
                    Tower::arcs(name.as_str(), &self.variety(base)?, *dim).map_err(|e| s(&e))?
                }
                TowerDef::Steps(ms) => {
                    let steps = ms.iter().map(|m| self.morphism(m)).collect::<Result<_, _>>()?;
                    Tower::explicit(name.as_str(), steps).map_err(|e| s(&e))?
                }
            }),
            StmtKind::Profn {
                tower,
                level,
                values,
                ..
            } => {
                let t = self.tower(tower)?;
                let pairs = values.iter().map(|(id, v)| (id.as_str(), *v));
                Entry::Profn(ProFunction::from_pairs(&t, *level, pairs).map_err(|e| s(&e))?)
            }
            StmtKind::Cyl {
                tower, level, sel, ..
            } => Entry::Cyl(self.cylinder(tower, *level, sel)?),
            StmtKind::System {
                tower,
                implied,
                entries,
                ..
            } => {
                let t = self.tower(tower)?;
                let mut sys = BivClassSystem::unit(Arc::clone(&t) as Arc<dyn StepSource>);
                if let Some(i) = implied {
                    sys = sys.with_implied(match i {
                        ImpliedKw::Composite => Implied::Composite,
                        ImpliedKw::Unit => Implied::Unit,
                    });
                }
                for e in entries {
                    sys = match e {
                        SystemEntry::Step { level, values } => {
                            let x = t.level(level + 1).map_err(|e| s(&e))?;
                            sys.with_step(*level, Self::values_on(&x, values, 1)?)
                        }
                        SystemEntry::Between {
                            lower,
                            upper,
                            values,
                        } => {
                            if upper <= lower || *lower < t.base() {
                                return Err(format!("bad level pair ({lower}, {upper})"));
                            }
                            let x = t.level(*upper).map_err(|e| s(&e))?;
                            sys.with_override(*lower, *upper, Self::values_on(&x, values, 1)?)
                        }
                    };
                }
                Entry::System(sys)
            }
            StmtKind::Query(_) | StmtKind::Check(_) => unreachable!("not a declaration"),
        })
    }

    fn cylinder(&self, tower: &str, level: u32, sel: &Selection) -> Result<CylinderSet, String> {
        let t = self.tower(tower)?;
        match sel {
            Selection::All => CylinderSet::whole(&t, level),
            Selection::Ids(ids) => CylinderSet::from_ids(&t, level, ids.iter().map(String::as_str)),
        }
        .map_err(|e| e.to_string())
    }

    pub fn pf(&self, e: &PfExpr) -> Result<ProFunction, String> {
        let s = |e: prochern_core::prosys::ProError| e.to_string();
        match e {
            PfExpr::Name(n) => match self.entries.get(n) {
                Some(Entry::Profn(p)) => Ok(p.clone()),
                Some(Entry::Cyl(c)) => Ok(ProFunction::indicator(c)),
                _ => Err(self.wrong(n, "a profn or cylinder")),
            },
            PfExpr::One(t) => procharacteristic(&self.tower(t)?).map_err(s),
            PfExpr::Zero(t) => ProFunction::zero(&self.tower(t)?).map_err(s),
            PfExpr::Cyl { tower, level, sel } => Ok(ProFunction::indicator(&self.cylinder(tower, *level, sel)?)),
            PfExpr::Lift(p, m) => lift(&self.pf(p)?, *m).map_err(s),
            PfExpr::Sum(ts) => {
                let mut acc = self.pf(&ts[0])?;
                for t in &ts[1..] {
                    acc = pro_add(&acc, &self.pf(t)?).map_err(s)?;
                }
                Ok(acc)
            }
            PfExpr::Scale(k, p) => Ok(self.pf(p)?.scale(*k)),
        }
    }

    pub fn cyl(&self, e: &PfExpr) -> Result<CylinderSet, String> {
        match e {
            PfExpr::Name(n) => match self.entries.get(n) {
                Some(Entry::Cyl(c)) => Ok(c.clone()),
                _ => Err(self.wrong(n, "a cylinder")),
            },
            PfExpr::Cyl { tower, level, sel } => self.cylinder(tower, *level, sel),
            PfExpr::Lift(c, m) => lift_cyl(&self.cyl(c)?, *m).map_err(|e| e.to_string()),
            other => Err(format!("`{other}` is not a cylinder")),
        }
    }
}

fn weight(f: Weight, k: i64) -> Option<i64> {
    match f {
        Weight::Identity => Some(k),
        Weight::One => Some(1),
        Weight::Square => k.checked_mul(k),
    }
}

pub fn render_stability(s: &Stability) -> String {
    match s {
        Stability::Stable {
            definitive: true,
            checked_to,
        } => format!("stable (periodic, checked to level {checked_to})"),
        Stability::Stable {
            definitive: false,
            checked_to,
        } => format!("stable up to level {checked_to}"),
        Stability::Unstable { level } => format!("unstable at level {level}"),
    }
}

fn step_data(p: Option<i64>) -> StepData<i64> {
    match p {
        Some(p) => StepData::Constant(p),
        None => StepData::Tower,
    }
}

/// Evaluates one query to its rendered value.
pub fn run_query(env: &Env, q: &Query, opts: &Options) -> Result<String, String> {
    let s = |e: &dyn Display| e.to_string();
    Ok(match q {
        Query::Chi(PfExpr::Name(n)) if matches!(env.get(n), Ok(Entry::Variety(_))) => {
            env.variety(n)?.chi().to_string()
        }
        Query::Gamma(PfExpr::Name(n)) if matches!(env.get(n), Ok(Entry::Variety(_))) => {
            env.variety(n)?.gamma().to_string()
        }
        Query::Chi(p) => chi_of_fn(env.pf(p)?.function()).to_string(),
        Query::Gamma(p) => gamma_of_fn(env.pf(p)?.function()).to_string(),
        Query::ChiPro { pf, w } => chi_pro(&env.pf(pf)?, *w).map_err(|e| s(&e))?.to_string(),
        Query::GammaPro { pf, w } => gamma_pro(&env.pf(pf)?, *w).map_err(|e| s(&e))?.to_string(),
        Query::Measure(c) => motivic_measure(&env.cyl(c)?).map_err(|e| s(&e))?.to_string(),
        Query::Integrate { gamma: false, pf, f } => {
            let pf = env.pf(pf)?;
            integrate_chi_pro(&pf, &StepData::Tower, opts.horizon, |k| weight(*f, k).map(Rat::from_int))
                .map_err(|e| s(&e))?
                .to_string()
        }
        Query::Integrate { gamma: true, pf, f } => {
            let pf = env.pf(pf)?;
            let t = Arc::clone(&env.table);
            integrate_gamma_pro(&pf, &StepData::Tower, opts.horizon, |k| {
                weight(*f, k).map(|c| LocClass::from_class(GClass::constant(&t, c)))
            })
            .map_err(|e| s(&e))?
            .to_string()
        }
        Query::Eq(a, b) => match pro_eq(&env.pf(a)?, &env.pf(b)?, opts.horizon).map_err(|e| s(&e))? {
            ProEquality::Equal { at_level } => format!("equal (from level {at_level})"),
            ProEquality::Distinct => "distinct".to_string(),
            ProEquality::DistinctToHorizon { horizon } => format!("distinct up to level {horizon}"),
        },
        Query::Eval { pf, point } => {
            let pf = env.pf(pf)?;
            let x = ProPoint::new(pf.tower(), point.iter().map(String::as_str)).map_err(|e| s(&e))?;
            eval(&pf, &x).map_err(|e| s(&e))?.to_string()
        }
        Query::Stable { pf, p } => {
            let st = is_chi_stable(&env.pf(pf)?, &step_data(*p), opts.horizon).map_err(|e| s(&e))?;
            render_stability(&st)
        }
        Query::Class { tower, level } => env
            .tower(tower)?
            .level(*level)
            .map_err(|e| s(&e))?
            .gamma()
            .to_string(),
        Query::LevelSets(p) => {
            let pf = env.pf(p)?;
            let sets = level_sets(&pf);
            if sets.is_empty() {
                format!("none (level {})", pf.level())
            } else {
                let parts: Vec<String> = sets
                    .iter()
                    .map(|(k, c)| format!("{k}: {{{}}}", c.set().ids().join(", ")))
                    .collect();
                format!("{} (level {})", parts.join("; "), pf.level())
            }
        }
    })
}

/// Resolves the document, evaluates its queries in order and runs its
/// checks. Checks run concurrently; results keep declaration order.
pub fn evaluate(doc: &Document, opts: &Options) -> Result<Report, Diagnostic> {
    let env = Env::build(doc)?;
    let mut report = Report::new(opts.seed);
    if opts.queries {
        for (stmt, q) in doc.queries() {
            let value = run_query(&env, q, opts).map_err(|e| located(stmt.pos, &format!("query `{q}`"), e))?;
            report.queries.push(QueryResult {
                name: q.to_string(),
                value,
            });
        }
    }
    if opts.checks {
        let checks: Vec<_> = doc.checks().collect();
        let results: Vec<Result<CheckResult, Diagnostic>> = std::thread::scope(|scope| {
            let handles: Vec<_> = checks
                .iter()
                .map(|(stmt, c)| {
                    let env = &env;
                    scope.spawn(move || {
                        let start = Instant::now();
                        let out = run_check(env, c, opts).map_err(|e| located(stmt.pos, &format!("check `{c}`"), e))?;
                        Ok(CheckResult {
                            name: c.to_string(),
                            status: if out.passed() { Status::Pass } else { Status::Fail },
                            witness: out.witness,
                            cases: out.cases,
                            elapsed: start.elapsed(),
                        })
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                .collect()
        });
        for r in results {
            report.checks.push(r?);
        }
    }
    Ok(report)
}
