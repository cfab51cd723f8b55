use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bivariant::{biv_pullback, BivariantFn, CheckReport};
use crate::geom::{chi_of_fn, ConstructibleFunction, FiberSquare, MorphismModel};
use crate::rings::GClass;

use super::profn::{lift, ProFunction};
use super::tower::{same_tower, Tower};
use super::ProError;

/// Order-preserving level map `ξ` from target levels to source levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reindex {
    Identity,
    Shift(u32),
}

impl Reindex {
    pub fn apply(&self, n: u32) -> u32 {
        match self {
            Reindex::Identity => n,
            Reindex::Shift(c) => n + c,
        }
    }
}

#[derive(Clone, Debug)]
enum Maps {
    Identity,
    PulledBack,
    Listed(Vec<MorphismModel>),
}

/// A level-preserving morphism of towers `{f_n : S_{ξ(n)} → T_n}`.
#[derive(Clone, Debug)]
pub struct ProMorphism {
    source: Arc<Tower>,
    target: Arc<Tower>,
    xi: Reindex,
    fiber_square: bool,
    maps: Maps,
    map_overrides: BTreeMap<u32, MorphismModel>,
    step_overrides: BTreeMap<u32, MorphismModel>,
}

impl ProMorphism {
    pub fn identity(tower: &Arc<Tower>) -> Self {
        ProMorphism {
            source: Arc::clone(tower),
            target: Arc::clone(tower),
            xi: Reindex::Identity,
            fiber_square: true,
            maps: Maps::Identity,
            map_overrides: BTreeMap::new(),
            step_overrides: BTreeMap::new(),
        }
    }

    /// The pro-morphism induced by `f: Y → T_base` through fiber squares:
    /// the source tower is `T` pulled back along `f`, based at
    /// `T.base + shift`.
    pub fn fiber_square(
        name: impl Into<String>,
        target: &Arc<Tower>,
        f: MorphismModel,
        shift: u32,
    ) -> Result<Self, ProError> {
        let source = Tower::pulled_back(name, target, f, shift)?;
        Ok(ProMorphism {
            source,
            target: Arc::clone(target),
            xi: if shift == 0 {
                Reindex::Identity
            } else {
                Reindex::Shift(shift)
            },
            fiber_square: true,
            maps: Maps::PulledBack,
            map_overrides: BTreeMap::new(),
            step_overrides: BTreeMap::new(),
        })
    }

    /// Explicit maps, `maps[i]` going from source level `ξ(base + i)` to
    /// target level `base + i`.
    pub fn from_maps(
        source: &Arc<Tower>,
        target: &Arc<Tower>,
        xi: Reindex,
        maps: Vec<MorphismModel>,
        fiber_square: bool,
    ) -> Result<Self, ProError> {
        let tb = target.base();
        for (i, m) in maps.iter().enumerate() {
            let n = tb + i as u32;
            if !crate::geom::same_model(m.source(), &source.level(xi.apply(n))?)
                || !crate::geom::same_model(m.target(), &target.level(n)?)
            {
                return Err(ProError::Geom(crate::geom::GeomError::EndpointMismatch));
            }
        }
        Ok(ProMorphism {
            source: Arc::clone(source),
            target: Arc::clone(target),
            xi,
            fiber_square,
            maps: Maps::Listed(maps),
            map_overrides: BTreeMap::new(),
            step_overrides: BTreeMap::new(),
        })
    }

    pub fn source(&self) -> &Arc<Tower> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Tower> {
        &self.target
    }

    pub fn reindex(&self) -> Reindex {
        self.xi
    }

    pub fn is_fiber_square(&self) -> bool {
        self.fiber_square
    }

    /// `f_n : S_{ξ(n)} → T_n`.
    pub fn map(&self, n: u32) -> Result<MorphismModel, ProError> {
        if let Some(m) = self.map_overrides.get(&n) {
            return Ok(m.clone());
        }
        match &self.maps {
            Maps::Identity => Ok(MorphismModel::identity(&self.target.level(n)?)),
            Maps::PulledBack => self.source.map_down(self.xi.apply(n)),
            Maps::Listed(v) => v
                .get(n.checked_sub(self.target.base()).ok_or(ProError::MapUnavailable(n))? as usize)
                .cloned()
                .ok_or(ProError::MapUnavailable(n)),
        }
    }

    /// Structure morphism of the source tower leaving level `l`.
    pub fn source_step(&self, l: u32) -> Result<MorphismModel, ProError> {
        match self.step_overrides.get(&l) {
            Some(s) => Ok(s.clone()),
            None => self.source.step(l),
        }
    }

    /// Replaces `f_n`; meant for exercising the checker.
    pub fn with_map(mut self, n: u32, m: MorphismModel) -> Self {
        self.map_overrides.insert(n, m);
        self
    }

    /// Replaces the source step leaving level `l`; meant for exercising the
    /// checker.
    pub fn with_source_step(mut self, l: u32, s: MorphismModel) -> Self {
        self.step_overrides.insert(l, s);
        self
    }
}

/// `f_{∞*}`: lifts to the first source level in the image of `ξ` and pushes
/// forward there.
pub fn pro_pushforward(phi: &ProMorphism, pf: &ProFunction) -> Result<ProFunction, ProError> {
    if !same_tower(pf.tower(), &phi.source) {
        return Err(ProError::TowerMismatch);
    }
    let tb = phi.target.base();
    let mut n = tb;
    while phi.xi.apply(n) < pf.level() {
        n += 1;
    }
    let lifted = lift(pf, phi.xi.apply(n))?;
    let pushed = phi.map(n)?.pushforward(lifted.function())?;
    ProFunction::new(&phi.target, n, pushed)
}

fn fiber_weight_product(steps: impl Iterator<Item = MorphismModel>) -> Option<i64> {
    let mut acc: i64 = 1;
    for s in steps {
        let w = crate::bivariant::chi_f(&BivariantFn::unit(s)).ok()?;
        if w == 0 {
            return None;
        }
        acc = acc.checked_mul(w)?;
    }
    Some(acc)
}

/// For target levels `base ≤ n < base + depth`, checks that each square
///
/// ```text
///   S_{ξ(n+1)} --f_{n+1}--> T_{n+1}
///       |                     |
///   S_{ξ(n)}  ----f_n---->  T_n
/// ```
///
/// commutes (and is a fiber square when flagged), that pushforward commutes
/// with lifting on random functions, that `χ^pro` is preserved, and that the
/// bivariant pullback of the target step class is the source step class.
pub fn check_naturality(phi: &ProMorphism, depth: u32, seed: u64) -> Result<CheckReport, ProError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tb = phi.target.base();
    let sb = phi.source.base();
    let mut cases = 0;
    for n in tb..tb + depth {
        let l = phi.xi.apply(n);
        let f_n = phi.map(n)?;
        let f_up = phi.map(n + 1)?;
        let pi = phi.target.step(n)?;
        let pi_src = phi.source_step(l)?;
        cases += 1;
        let fail = |what: String| Ok(CheckReport::fail(cases, format!("level {n}: {what}")));

        let commutes = (0..pi_src.source().len())
            .all(|i| f_n.image_of(pi_src.image_of(i)) == pi.image_of(f_up.image_of(i)));
        if !commutes {
            return fail("square does not commute".into());
        }
        let square = FiberSquare {
            f: f_n.clone(),
            pi: pi.clone(),
            top: Arc::clone(pi_src.source()),
            pi_prime: pi_src.clone(),
            f_prime: f_up.clone(),
        };
        if phi.fiber_square {
            if let Err(d) = square.validate() {
                return fail(format!("{} at stratum {:?}", d.reason, d.stratum));
            }
        }

        let y = pi_src.target();
        for _ in 0..3 {
            let vals = (0..y.len()).map(|_| rng.gen_range(-3..=3)).collect();
            let beta = ConstructibleFunction::from_values(y, vals)?;
            if let Some(t) = square.base_change_defect(&beta)? {
                return fail(format!(
                    "push then lift differs from lift then push at stratum {}",
                    pi.source().id(t)
                ));
            }
            if f_n.is_strict() {
                let src_w = fiber_weight_product((sb..l).map(|k| phi.source_step(k)).collect::<Result<Vec<_>, _>>()?.into_iter());
                let tgt_w = fiber_weight_product((tb..n).map(|k| phi.target.step(k)).collect::<Result<Vec<_>, _>>()?.into_iter());
                if let (Some(a), Some(b)) = (src_w, tgt_w) {
                    let lhs = crate::rings::Rat::new(chi_of_fn(&beta), a)?;
                    let rhs = crate::rings::Rat::new(chi_of_fn(&f_n.pushforward(&beta)?), b)?;
                    if lhs != rhs {
                        return fail(format!("χ^pro changes under pushforward: {lhs} vs {rhs}"));
                    }
                }
            }
        }

        if phi.fiber_square && f_n.is_strict() {
            let transposed = FiberSquare {
                f: pi.clone(),
                pi: f_n.clone(),
                top: Arc::clone(pi_src.source()),
                pi_prime: f_up.clone(),
                f_prime: pi_src.clone(),
            };
            match biv_pullback(&transposed, &BivariantFn::unit(pi.clone())) {
                Ok(b) if b.values().values().iter().all(|&v| v == 1) => {}
                Ok(_) => return fail("pulled-back step class differs from the source class".into()),
                Err(e) => return fail(format!("step class does not pull back: {e}")),
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// Replaces the fiber datum of stratum `i` of `f_n` by `class`.
pub fn mutate_map_fiber(phi: &ProMorphism, n: u32, i: usize, class: GClass) -> Result<ProMorphism, ProError> {
    let m = phi.map(n)?.corrupt_fiber(i, class);
    Ok(phi.clone().with_map(n, m))
}

/// Replaces the fiber datum of stratum `i` of the source step leaving `l`.
pub fn mutate_step_fiber(phi: &ProMorphism, l: u32, i: usize, class: GClass) -> Result<ProMorphism, ProError> {
    let s = phi.source_step(l)?.corrupt_fiber(i, class);
    Ok(phi.clone().with_source_step(l, s))
}
