use std::sync::{Arc, RwLock};

use crate::bivariant::{BivError, StepSource};
use crate::geom::{fiber_product, same_model, GeomError, MorphismModel, VarietyModel};
use crate::rings::{AtomTable, GClass};

use super::ProError;

/// How the levels of a tower are produced.
#[derive(Clone, Debug)]
pub enum Generator {
    /// `steps[k]` maps level `base + k + 1` onto level `base + k`. A last step
    /// whose source and target coincide repeats forever; otherwise the tower
    /// stops at level `base + steps.len()`.
    Explicit(Vec<MorphismModel>),
    /// `X, X², X³, …` with projections forgetting the last factor.
    Product(Arc<VarietyModel>),
    /// Level `k + 1` is a strict bundle over level `k` whose fiber is split
    /// into the listed pieces. The list cycles when `periodic`; otherwise its
    /// last entry repeats.
    Bundle {
        base: Arc<VarietyModel>,
        fibers: Vec<Vec<GClass>>,
        periodic: bool,
    },
    /// Arc tower of a smooth `d`-dimensional model, based at level 0.
    Arcs { base: Arc<VarietyModel>, dim: u32 },
    /// The base change of `along` by `map`, based at `along`'s base level
    /// shifted by `shift`: level `n + shift` is the fiber product of the
    /// previous level with `along`'s level `n`.
    PulledBack {
        along: Arc<Tower>,
        map: MorphismModel,
        shift: u32,
    },
}

#[derive(Debug, Default)]
struct Cache {
    levels: Vec<Arc<VarietyModel>>,
    steps: Vec<MorphismModel>,
    /// Only for pulled-back towers: maps from each level to `along`.
    maps: Vec<MorphismModel>,
}

/// An ℕ-indexed projective system `⋯ → X_{n+1} → X_n → ⋯ → X_base`.
///
/// Levels are realized on demand and cached; each level is computed once.
#[derive(Debug)]
pub struct Tower {
    name: String,
    table: Arc<AtomTable>,
    base: u32,
    generator: Generator,
    cache: RwLock<Cache>,
}

impl Tower {
    pub fn explicit(name: impl Into<String>, steps: Vec<MorphismModel>) -> Result<Arc<Tower>, ProError> {
        let first = steps.first().ok_or(ProError::EmptyTower)?;
        for (k, w) in steps.windows(2).enumerate() {
            if !same_model(w[1].target(), w[0].source()) {
                return Err(ProError::BrokenChain { step: k as u32 + 2 });
            }
        }
        let base = Arc::clone(first.target());
        let table = Arc::clone(base.table());
        Ok(Self::build(name.into(), &table, 1, Generator::Explicit(steps), base))
    }

    pub fn product(name: impl Into<String>, x: &Arc<VarietyModel>) -> Arc<Tower> {
        let name = name.into();
        let level1 = renamed(x, &format!("{name}[1]"));
        Self::build(name, x.table(), 1, Generator::Product(Arc::clone(x)), level1)
    }

    pub fn bundle(
        name: impl Into<String>,
        base: &Arc<VarietyModel>,
        fibers: Vec<Vec<GClass>>,
        periodic: bool,
    ) -> Result<Arc<Tower>, ProError> {
        if fibers.is_empty() {
            return Err(ProError::EmptyTower);
        }
        for (k, pieces) in fibers.iter().enumerate() {
            if pieces.is_empty() || pieces.iter().any(GClass::is_zero) {
                return Err(ProError::EmptyFiber { step: k as u32 + 1 });
            }
        }
        let name = name.into();
        let level1 = renamed(base, &format!("{name}[1]"));
        let generator = Generator::Bundle {
            base: Arc::clone(base),
            fibers,
            periodic,
        };
        Ok(Self::build(name, base.table(), 1, generator, level1))
    }

    /// The arc tower generator; see `arcspace::arc_tower` for the checked
    /// entry point.
    pub fn arcs(name: impl Into<String>, base: &Arc<VarietyModel>, dim: i64) -> Result<Arc<Tower>, ProError> {
        if dim <= 0 {
            return Err(ProError::BadDimension(dim));
        }
        if base.is_singular() {
            return Err(ProError::SingularBase(base.name().to_string()));
        }
        let name = name.into();
        let level0 = renamed(base, &format!("{name}[0]"));
        let generator = Generator::Arcs {
            base: Arc::clone(base),
            dim: dim as u32,
        };
        Ok(Self::build(name, base.table(), 0, generator, level0))
    }

    /// Base change of `along` by a map `Y → X_{along.base}`; the result is
    /// based at `along.base + shift`.
    pub fn pulled_back(
        name: impl Into<String>,
        along: &Arc<Tower>,
        map: MorphismModel,
        shift: u32,
    ) -> Result<Arc<Tower>, ProError> {
        if !same_model(map.target(), &along.level(along.base)?) {
            return Err(ProError::Geom(GeomError::EndpointMismatch));
        }
        let base_model = Arc::clone(map.source());
        let table = Arc::clone(base_model.table());
        let tower = Self::build(
            name.into(),
            &table,
            along.base + shift,
            Generator::PulledBack {
                along: Arc::clone(along),
                map: map.clone(),
                shift,
            },
            base_model,
        );
        tower.cache.write().expect("cache lock").maps.push(map);
        Ok(tower)
    }

    fn build(
        name: String,
        table: &Arc<AtomTable>,
        base: u32,
        generator: Generator,
        level0: Arc<VarietyModel>,
    ) -> Arc<Tower> {
        Arc::new(Tower {
            name,
            table: Arc::clone(table),
            base,
            generator,
            cache: RwLock::new(Cache {
                levels: vec![level0],
                ..Cache::default()
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn table(&self) -> &Arc<AtomTable> {
        &self.table
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// The last level of a finite tower.
    pub fn top_level(&self) -> Option<u32> {
        match &self.generator {
            Generator::Explicit(steps) => {
                let last = steps.last().expect("nonempty");
                if same_model(last.source(), last.target()) {
                    None
                } else {
                    Some(self.base + steps.len() as u32)
                }
            }
            Generator::PulledBack { along, shift, .. } => along.top_level().map(|t| t + shift),
            _ => None,
        }
    }

    /// `(start, period)`: step `k` and step `k + period` are built from the
    /// same description for every `k ≥ start`.
    pub fn periodicity(&self) -> Option<(u32, u32)> {
        match &self.generator {
            Generator::Explicit(steps) => {
                self.top_level().is_none().then(|| (self.base + steps.len() as u32 - 1, 1))
            }
            Generator::Product(_) | Generator::Arcs { .. } => Some((self.base, 1)),
            Generator::Bundle { fibers, periodic, .. } => Some(if *periodic {
                (self.base, fibers.len() as u32)
            } else {
                (self.base + fibers.len() as u32 - 1, 1)
            }),
            Generator::PulledBack { .. } => None,
        }
    }

    fn check_level(&self, n: u32) -> Result<(), ProError> {
        if n < self.base || self.top_level().is_some_and(|t| n > t) {
            return Err(ProError::LevelUnavailable {
                tower: self.name.clone(),
                level: n,
            });
        }
        Ok(())
    }

    /// The model at level `n`.
    pub fn level(&self, n: u32) -> Result<Arc<VarietyModel>, ProError> {
        self.check_level(n)?;
        let i = (n - self.base) as usize;
        self.realize(i)?;
        Ok(Arc::clone(&self.cache.read().expect("cache lock").levels[i]))
    }

    /// The structure morphism from level `n + 1` onto level `n`.
    pub fn step(&self, n: u32) -> Result<MorphismModel, ProError> {
        self.check_level(n)?;
        self.check_level(n + 1)?;
        let i = (n - self.base) as usize;
        self.realize(i + 1)?;
        Ok(self.cache.read().expect("cache lock").steps[i].clone())
    }

    /// For pulled-back towers: the map from level `n` to `along`'s level
    /// `n - shift`.
    pub fn map_down(&self, n: u32) -> Result<MorphismModel, ProError> {
        if !matches!(self.generator, Generator::PulledBack { .. }) {
            return Err(ProError::TowerMismatch);
        }
        self.check_level(n)?;
        let i = (n - self.base) as usize;
        self.realize(i)?;
        Ok(self.cache.read().expect("cache lock").maps[i].clone())
    }

    /// The composite structure morphism `X_m → X_n` for `m > n`.
    pub fn structure_map(&self, n: u32, m: u32) -> Result<MorphismModel, ProError> {
        if m <= n {
            return Err(ProError::BelowLevel { level: n, requested: m });
        }
        let mut acc = self.step(m - 1)?;
        for k in (n..m - 1).rev() {
            acc = crate::geom::compose(&self.step(k)?, &acc)?;
        }
        Ok(acc)
    }

    /// Whether every step from level `n` on is stratum-surjective, decided
    /// from the generator's periodicity.
    pub fn surjective_from(&self, n: u32) -> Result<Option<bool>, ProError> {
        match &self.generator {
            Generator::Product(_) | Generator::Bundle { .. } | Generator::Arcs { .. } => Ok(Some(true)),
            Generator::Explicit(_) => {
                let last = match self.top_level() {
                    Some(t) => t,
                    None => {
                        let (start, period) = self.periodicity().expect("repeating tower");
                        n.max(start) + period
                    }
                };
                for k in n..last {
                    if !self.step(k)?.is_stratum_surjective() {
                        return Ok(Some(false));
                    }
                }
                Ok(Some(true))
            }
            Generator::PulledBack { .. } => Ok(None),
        }
    }

    fn realize(&self, i: usize) -> Result<(), ProError> {
        if self.cache.read().expect("cache lock").levels.len() > i {
            return Ok(());
        }
        let mut cache = self.cache.write().expect("cache lock");
        while cache.levels.len() <= i {
            let k = cache.levels.len() - 1;
            let n = self.base + k as u32;
            let below = Arc::clone(&cache.levels[k]);
            let (level, step, map) = self.next_level(n, &below, cache.maps.get(k))?;
            cache.levels.push(level);
            cache.steps.push(step);
            if let Some(m) = map {
                cache.maps.push(m);
            }
        }
        Ok(())
    }

    /// Builds level `n + 1` over `below` (level `n`).
    fn next_level(
        &self,
        n: u32,
        below: &Arc<VarietyModel>,
        map_below: Option<&MorphismModel>,
    ) -> Result<(Arc<VarietyModel>, MorphismModel, Option<MorphismModel>), ProError> {
        let label = format!("{}[{}]", self.name, n + 1);
        match &self.generator {
            Generator::Explicit(steps) => {
                let k = ((n - self.base) as usize).min(steps.len() - 1);
                let s = steps[k].clone();
                Ok((Arc::clone(s.source()), s, None))
            }
            Generator::Product(x) => {
                let pieces: Vec<GClass> = x.strata().iter().map(|s| s.class.clone()).collect();
                let ids: Vec<String> = x.strata().iter().map(|s| s.id.clone()).collect();
                let (level, step) = split_bundle(&label, below, &ids, &pieces)?;
                Ok((level, step, None))
            }
            Generator::Bundle { fibers, periodic, .. } => {
                let k = (n - self.base) as usize;
                let idx = if *periodic { k % fibers.len() } else { k.min(fibers.len() - 1) };
                let ids: Vec<String> = (0..fibers[idx].len()).map(|j| j.to_string()).collect();
                let (level, step) = split_bundle(&label, below, &ids, &fibers[idx])?;
                Ok((level, step, None))
            }
            Generator::Arcs { base, dim } => {
                let ld = GClass::tate(base.table()).pow(*dim);
                let strata = below
                    .strata()
                    .iter()
                    .map(|s| Ok((s.id.clone(), s.class.try_mul(&ld)?)))
                    .collect::<Result<Vec<_>, GeomError>>()?;
                let level = VarietyModel::new(label, base.table(), strata)?;
                let step = MorphismModel::from_parts(
                    &level,
                    below,
                    (0..below.len()).collect(),
                    vec![ld; below.len()],
                    true,
                )?;
                Ok((level, step, None))
            }
            Generator::PulledBack { along, shift, .. } => {
                let f = map_below.expect("maps realized alongside levels");
                let pi = along.step(n - shift)?;
                let sq = fiber_product(f, &pi)?;
                let level = renamed(&sq.top, &label);
                let relabel = |m: &MorphismModel| {
                    MorphismModel::from_parts(
                        &level,
                        m.target(),
                        m.stratum_map().to_vec(),
                        m.fibers().to_vec(),
                        m.is_strict(),
                    )
                };
                let step = relabel(&sq.pi_prime)?;
                let map = relabel(&sq.f_prime)?;
                Ok((level, step, Some(map)))
            }
        }
    }
}

/// Level `n + 1` whose strata are `s.j` over each stratum `s` of `below`,
/// one per fiber piece `j`.
fn split_bundle(
    label: &str,
    below: &Arc<VarietyModel>,
    ids: &[String],
    pieces: &[GClass],
) -> Result<(Arc<VarietyModel>, MorphismModel), ProError> {
    let mut strata = Vec::with_capacity(below.len() * pieces.len());
    let mut map = Vec::with_capacity(strata.capacity());
    let mut fib = Vec::with_capacity(strata.capacity());
    for (i, s) in below.strata().iter().enumerate() {
        for (id, f) in ids.iter().zip(pieces) {
            strata.push((format!("{}.{}", s.id, id), s.class.try_mul(f)?));
            map.push(i);
            fib.push(f.clone());
        }
    }
    let level = VarietyModel::new(label, below.table(), strata)?;
    let step = MorphismModel::from_parts(&level, below, map, fib, true)?;
    Ok((level, step))
}

fn renamed(x: &Arc<VarietyModel>, name: &str) -> Arc<VarietyModel> {
    let strata = x.strata().iter().map(|s| (s.id.clone(), s.class.clone()));
    let out = if x.is_singular() {
        VarietyModel::new_singular(name, x.table(), strata)
    } else {
        VarietyModel::new(name, x.table(), strata)
    };
    out.expect("renaming keeps a valid model")
}

impl StepSource for Tower {
    fn base_level(&self) -> u32 {
        self.base
    }

    fn step(&self, n: u32) -> Result<MorphismModel, BivError> {
        Tower::step(self, n).map_err(|e| match e {
            ProError::Geom(g) => BivError::Geom(g),
            other => BivError::StepUnavailable(other.to_string()),
        })
    }
}

pub(crate) fn same_tower(a: &Arc<Tower>, b: &Arc<Tower>) -> bool {
    Arc::ptr_eq(a, b)
}
