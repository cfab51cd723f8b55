//! Arc towers of smooth variety models and the motivic measure of cylinder
//! sets.
//!
//! Level `n` of the arc tower of a `d`-dimensional model `X` has the strata
//! of `X`, each with class multiplied by `L^{nd}`; every truncation step is a
//! strict bundle with fiber `L^d`. Singular bases are refused.

use std::sync::Arc;

use crate::geom::VarietyModel;
use crate::prosys::{lift_cyl, CylinderSet, Generator, ProError, Tower};
use crate::rings::{GClass, LocClass, MultSet};

/// The tower `⋯ → 𝓛_2(X) → 𝓛_1(X) → 𝓛_0(X) = X`.
#[derive(Clone, Debug)]
pub struct ArcTower {
    tower: Arc<Tower>,
    base: Arc<VarietyModel>,
    dim: u32,
}

impl ArcTower {
    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn base(&self) -> &Arc<VarietyModel> {
        &self.base
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `[𝓛_n(X)] = [X]·L^{nd}`.
    pub fn level_class(&self, n: u32) -> Result<GClass, ProError> {
        Ok(self.tower.level(n)?.gamma())
    }

    /// The cylinder over every stratum of level `n`.
    pub fn whole(&self, n: u32) -> Result<CylinderSet, ProError> {
        CylinderSet::whole(&self.tower, n)
    }
}

/// Arc tower of `x`, asserted smooth of dimension `d ≥ 1`.
pub fn arc_tower(x: &Arc<VarietyModel>, d: i64) -> Result<ArcTower, ProError> {
    arc_tower_named(format!("L({})", x.name()), x, d)
}

pub fn arc_tower_named(name: impl Into<String>, x: &Arc<VarietyModel>, d: i64) -> Result<ArcTower, ProError> {
    let tower = Tower::arcs(name, x, d)?;
    Ok(ArcTower {
        tower,
        base: Arc::clone(x),
        dim: d as u32,
    })
}

/// Recovers the arc data of a tower built by [`arc_tower`] or
/// [`Tower::arcs`].
pub fn as_arc_tower(tower: &Arc<Tower>) -> Option<ArcTower> {
    match tower.generator() {
        Generator::Arcs { base, dim } => Some(ArcTower {
            tower: Arc::clone(tower),
            base: Arc::clone(base),
            dim: *dim,
        }),
        _ => None,
    }
}

/// `μ(π_n^{-1}(C)) = Γ(C)/L^{nd}`, localized at `L`.
pub fn motivic_measure(c: &CylinderSet) -> Result<LocClass, ProError> {
    let arcs = as_arc_tower(c.tower()).ok_or(ProError::TowerMismatch)?;
    let l = GClass::tate(arcs.base.table());
    let set = Arc::new(MultSet::new([l.clone()])?);
    Ok(LocClass::new(c.set().gamma(), [(l, c.level() * arcs.dim)], &set)?)
}

/// Every cylinder of a smooth arc tower is stable: the truncation steps are
/// locally trivial by construction.
pub fn is_stable_set(c: &CylinderSet) -> bool {
    as_arc_tower(c.tower()).is_some()
}

/// The measure after lifting to level `m`; equal to [`motivic_measure`].
pub fn motivic_measure_at(c: &CylinderSet, m: u32) -> Result<LocClass, ProError> {
    motivic_measure(&lift_cyl(c, m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConstructibleSet;
    use crate::prosys::{cyl_intersect, cyl_union, gamma_pro, procharacteristic, chi_pro, ProFunction};
    use crate::rings::{AtomTable, Rat};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table() -> Arc<AtomTable> {
        Arc::new(AtomTable::new().with("C", 0).unwrap().with("E", -1).unwrap())
    }

    fn p1(t: &Arc<AtomTable>) -> Arc<VarietyModel> {
        VarietyModel::new("P1", t, [("a", GClass::one(t)), ("b", GClass::tate(t))]).unwrap()
    }

    #[test]
    fn level_classes() {
        let t = table();
        let pt = VarietyModel::point(&t);
        let a = arc_tower(&pt, 1).unwrap();
        let l = GClass::tate(&t);
        for n in 0..5 {
            assert_eq!(a.level_class(n).unwrap(), l.pow(n));
        }
        let b = arc_tower(&p1(&t), 1).unwrap();
        let expect = GClass::one(&t).try_add(&l).unwrap().try_mul(&l.pow(2)).unwrap();
        assert_eq!(b.level_class(2).unwrap(), expect);
        assert_eq!(*b.tower().level(0).unwrap().strata(), *p1(&t).strata());
        for k in 0..4 {
            assert_eq!(crate::prosys::step_chi(b.tower(), k).unwrap(), 1);
            assert!(b.tower().step(k).unwrap().is_strict());
        }
    }

    #[test]
    fn bad_inputs() {
        let t = table();
        assert!(matches!(arc_tower(&p1(&t), 0), Err(ProError::BadDimension(0))));
        assert!(matches!(arc_tower(&p1(&t), -2), Err(ProError::BadDimension(-2))));
        let sing = VarietyModel::new_singular("Cusp", &t, [("o", GClass::one(&t))]).unwrap();
        assert!(matches!(arc_tower(&sing, 1), Err(ProError::SingularBase(_))));
    }

    #[test]
    fn measure_examples() {
        let t = table();
        let x = p1(&t);
        let a = arc_tower(&x, 2).unwrap();
        let whole = a.whole(0).unwrap();
        let mu = motivic_measure(&whole).unwrap();
        assert_eq!(mu, LocClass::from_class(x.gamma()));
        assert_eq!(motivic_measure_at(&whole, 3).unwrap(), mu);
        assert_eq!(motivic_measure(&a.whole(3).unwrap()).unwrap(), mu);
        let empty = CylinderSet::new(a.tower(), 2, ConstructibleSet::empty(&a.tower().level(2).unwrap())).unwrap();
        assert!(motivic_measure(&empty).unwrap().is_zero());
        let b = CylinderSet::from_ids(a.tower(), 1, ["b"]).unwrap();
        assert_eq!(motivic_measure(&b).unwrap().to_string(), "(L)/(1)");
        assert!(is_stable_set(&whole) && is_stable_set(&b));
        assert!(motivic_measure(&CylinderSet::whole(&Tower::product("P", &x), 1).unwrap()).is_err());
    }

    #[test]
    fn measure_agrees_with_gamma_pro() {
        let t = table();
        let a = arc_tower(&p1(&t), 1).unwrap();
        let one = procharacteristic(a.tower()).unwrap();
        assert_eq!(gamma_pro(&one, 0).unwrap(), motivic_measure(&a.whole(0).unwrap()).unwrap());
    }

    fn rand_arcs(seed: u64) -> (ArcTower, ChaCha8Rng) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let atoms = ["L", "C", "E"];
        let strata: Vec<_> = (0..rng.gen_range(1..=4))
            .map(|i| {
                let mut c = GClass::constant(&t, rng.gen_range(1..=3));
                for _ in 0..rng.gen_range(0..=2) {
                    c = c.try_mul(&GClass::atom(&t, atoms[rng.gen_range(0..3)]).unwrap()).unwrap();
                }
                (format!("s{i}"), c)
            })
            .collect();
        let x = VarietyModel::new("X", &t, strata).unwrap();
        (arc_tower(&x, rng.gen_range(1..=3)).unwrap(), rng)
    }

    fn rand_cyl(a: &ArcTower, rng: &mut ChaCha8Rng) -> CylinderSet {
        let n = rng.gen_range(0..=3);
        let x = a.tower().level(n).unwrap();
        let idx: Vec<usize> = (0..x.len()).filter(|_| rng.gen_bool(0.5)).collect();
        CylinderSet::new(a.tower(), n, ConstructibleSet::from_indices(&x, idx)).unwrap()
    }

    proptest! {
        #[test]
        fn lift_invariance(seed in any::<u64>(), up in 0u32..4) {
            let (a, mut rng) = rand_arcs(seed);
            let c = rand_cyl(&a, &mut rng);
            let mu = motivic_measure(&c).unwrap();
            prop_assert!(motivic_measure_at(&c, c.level() + up).unwrap().try_eq(&mu).unwrap());
        }

        #[test]
        fn finite_additivity(seed in any::<u64>()) {
            let (a, mut rng) = rand_arcs(seed);
            let c = rand_cyl(&a, &mut rng);
            let d = rand_cyl(&a, &mut rng);
            let d = crate::prosys::cyl_difference(&d, &c).unwrap();
            prop_assert!(cyl_intersect(&c, &d).unwrap().set().is_empty());
            let lhs = motivic_measure(&cyl_union(&c, &d).unwrap()).unwrap();
            let rhs = motivic_measure(&c).unwrap().try_add(&motivic_measure(&d).unwrap()).unwrap();
            prop_assert!(lhs.try_eq(&rhs).unwrap());
        }

        #[test]
        fn chi_shadow(seed in any::<u64>()) {
            let (a, mut rng) = rand_arcs(seed);
            let c = rand_cyl(&a, &mut rng);
            let shadow: Rat = motivic_measure(&c).unwrap().chi_shadow().unwrap();
            prop_assert_eq!(shadow, chi_pro(&ProFunction::indicator(&c), 0).unwrap());
        }
    }
}
