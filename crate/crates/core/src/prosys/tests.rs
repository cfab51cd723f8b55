use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bivariant::{BivClassSystem, StepSource};
use crate::geom::{ConstructibleFunction, MorphismModel, VarietyModel};
use crate::rings::{AtomTable, GClass, LocClass, Rat};

fn table() -> Arc<AtomTable> {
    Arc::new(AtomTable::new().with("X", 2).unwrap().with("E", 3).unwrap())
}

fn p1(t: &Arc<AtomTable>) -> Arc<VarietyModel> {
    VarietyModel::new("P1", t, [("pt", GClass::one(t)), ("cell", GClass::tate(t))]).unwrap()
}

/// `1 + L + ⋯ + L^k` split as `1 | L + ⋯ + L^k`.
fn pk_pieces(t: &Arc<AtomTable>, k: u32) -> Vec<GClass> {
    let l = GClass::tate(t);
    let mut rest = GClass::zero(t);
    for e in 1..=k {
        rest = rest.try_add(&l.pow(e)).unwrap();
    }
    vec![GClass::one(t), rest]
}

/// Base point, step `k` fibered in `ℙ^k`, so `χ_k = k + 1`.
fn pn_tower(t: &Arc<AtomTable>, levels: u32) -> Arc<Tower> {
    let pt = VarietyModel::point(t);
    Tower::bundle("Pn", &pt, (1..=levels).map(|k| pk_pieces(t, k)).collect(), false).unwrap()
}

fn two_point(t: &Arc<AtomTable>) -> Arc<Tower> {
    let one = GClass::one(t);
    let x1 = VarietyModel::new("X1", t, [("a", one.clone()), ("b", one.clone())]).unwrap();
    let x2 = VarietyModel::new("Xa", t, [("a", one.clone())]).unwrap();
    let s1 = MorphismModel::new(&x2, &x1, [("a", "a", one.clone())], true).unwrap();
    let s2 = MorphismModel::identity(&x2);
    Tower::explicit("Two", vec![s1, s2]).unwrap()
}

fn rand_class(t: &Arc<AtomTable>, rng: &mut ChaCha8Rng) -> GClass {
    let mut c = GClass::constant(t, rng.gen_range(1..=2));
    for _ in 0..rng.gen_range(0..=2) {
        let a = ["L", "X", "E"][rng.gen_range(0..3)];
        c = c.try_mul(&GClass::atom(t, a).unwrap()).unwrap();
    }
    c
}

fn rand_model(t: &Arc<AtomTable>, name: &str, rng: &mut ChaCha8Rng) -> Arc<VarietyModel> {
    let n = rng.gen_range(1..=3);
    let strata: Vec<_> = (0..n).map(|i| (format!("s{i}"), rand_class(t, rng))).collect();
    VarietyModel::new(name, t, strata).unwrap()
}

fn rand_pf(tower: &Arc<Tower>, level: u32, rng: &mut ChaCha8Rng) -> ProFunction {
    let x = tower.level(level).unwrap();
    let v = (0..x.len()).map(|_| rng.gen_range(-3..=3)).collect();
    ProFunction::new(tower, level, ConstructibleFunction::from_values(&x, v).unwrap()).unwrap()
}

fn rand_bundle(t: &Arc<AtomTable>, rng: &mut ChaCha8Rng) -> Arc<Tower> {
    let base = rand_model(t, "B", rng);
    let fibers = (0..rng.gen_range(1..=2))
        .map(|_| (0..rng.gen_range(1..=2)).map(|_| rand_class(t, rng)).collect())
        .collect();
    Tower::bundle("R", &base, fibers, rng.gen_bool(0.5)).unwrap()
}

#[test]
fn levels_are_cached_and_deterministic() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let a = tw.level(3).unwrap();
    let b = tw.level(3).unwrap();
    assert!(Arc::ptr_eq(&a, &b));
    assert_eq!(a.len(), 8);
    assert_eq!(a.id(5), "cell.pt.cell");
    let other = Tower::product("XN", &p1(&t));
    assert_eq!(*other.level(3).unwrap(), *a);
    assert!(tw.level(0).is_err());
}

#[test]
fn levels_realize_under_concurrent_readers() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let models: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4).map(|_| s.spawn(|| tw.level(5).unwrap())).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for m in &models {
        assert!(Arc::ptr_eq(m, &models[0]));
    }
}

#[test]
fn lift_examples() {
    let t = table();
    let x = p1(&t);
    let tw = Tower::product("XN", &x);
    let one = procharacteristic(&tw).unwrap();
    let same = lift(&one, 1).unwrap();
    assert_eq!(same.function(), one.function());
    let up = lift(&one, 2).unwrap();
    assert!(up.function().values().iter().all(|&v| v == 1));
    assert_eq!(up.function().values().len(), 4);
    assert!(matches!(lift(&up, 1), Err(ProError::BelowLevel { .. })));

    let arcs = Tower::arcs("A", &x, 1).unwrap();
    let c = CylinderSet::from_ids(&arcs, 1, ["cell"]).unwrap();
    let c2 = lift_cyl(&c, 2).unwrap();
    let l = GClass::tate(&t);
    assert_eq!(c2.set().gamma(), c.set().gamma().try_mul(&l).unwrap());
}

#[test]
fn inductive_limit_identifications() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let a = ProFunction::from_pairs(&tw, 1, [("pt", 2), ("cell", -1)]).unwrap();
    let z = ProFunction::zero(&tw).unwrap();
    assert_eq!(pro_eq(&pro_add(&a, &z).unwrap(), &a, 5).unwrap(), ProEquality::Equal { at_level: 1 });
    let up = lift(&a, 3).unwrap();
    assert_eq!(pro_eq(&a, &up, 5).unwrap(), ProEquality::Equal { at_level: 3 });
    assert_eq!(pro_eq(&a, &z, 5).unwrap(), ProEquality::Distinct);
}

#[test]
fn two_point_tower_kills_the_b_function() {
    let t = table();
    let tw = two_point(&t);
    let p = 5;
    let alpha = ProFunction::from_pairs(&tw, 1, [("b", p)]).unwrap();
    assert!(!alpha.function().is_zero());
    let zero = ProFunction::zero(&tw).unwrap();
    assert_eq!(pro_eq(&alpha, &zero, 4).unwrap(), ProEquality::Equal { at_level: 2 });
    let x = ProPoint::new(&tw, ["a", "a", "a"]).unwrap();
    assert_eq!(eval(&alpha, &x).unwrap(), 0);
    assert!(matches!(
        ProPoint::new(&tw, ["b", "a"]),
        Err(ProError::IncompatiblePoint { level: 2 })
    ));
    // A function on level 1 that survives to the limit is distinct there.
    let on_a = ProFunction::from_pairs(&tw, 1, [("a", 1)]).unwrap();
    assert_eq!(pro_eq(&on_a, &zero, 4).unwrap(), ProEquality::Distinct);
}

#[test]
fn eval_examples() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let x = ProPoint::new(&tw, ["cell", "cell.pt", "cell.pt.pt"]).unwrap();
    let one = procharacteristic(&tw).unwrap();
    assert_eq!(eval(&one, &x).unwrap(), 1);
    let a = ProFunction::from_pairs(&tw, 1, [("cell", 7)]).unwrap();
    assert_eq!(eval(&a, &x).unwrap(), 7);
    assert_eq!(eval(&lift(&a, 3).unwrap(), &x).unwrap(), 7);
    assert!(matches!(
        eval(&lift(&a, 3).unwrap(), &ProPoint::new(&tw, ["cell"]).unwrap()),
        Err(ProError::PointTooShort { level: 3 })
    ));
}

#[test]
fn chi_pro_examples() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let one3 = lift(&procharacteristic(&tw).unwrap(), 3).unwrap();
    assert_eq!(chi_pro(&one3, 0).unwrap(), Rat::from_int(2));
    assert_eq!(chi_pro(&procharacteristic(&tw).unwrap(), 0).unwrap(), Rat::from_int(2));
    let z = ProFunction::zero(&tw).unwrap();
    assert_eq!(chi_pro(&z, 0).unwrap(), Rat::zero());

    let pn = pn_tower(&t, 10);
    for n in 1..=8u32 {
        // a stratum with χ = 1 at level n: the all-"0" stratum
        let id = std::iter::once("pt".to_string())
            .chain((1..n).map(|_| "0".to_string()))
            .collect::<Vec<_>>()
            .join(".");
        let pf = ProFunction::from_pairs(&pn, n, [(id.as_str(), 1)]).unwrap();
        let oracle: i64 = (1..n as i64).map(|k| k + 1).product();
        assert_eq!(chi_pro(&pf, 0).unwrap(), Rat::new(1, oracle).unwrap());
        let fact: i64 = (1..=n as i64).product();
        assert_eq!(oracle, fact);
    }
}

#[test]
fn chi_pro_rejects_zero_and_lumpy_weights() {
    let t = table();
    let e = GClass::atom(&t, "E").unwrap();
    // χ(L - 1) = 0
    let zero_chi = GClass::tate(&t).try_sub(&GClass::one(&t)).unwrap();
    let tw = Tower::bundle("Z", &p1(&t), vec![vec![zero_chi]], false).unwrap();
    let pf = lift(&procharacteristic(&tw).unwrap(), 2).unwrap();
    assert!(matches!(chi_pro(&pf, 0), Err(ProError::ZeroWeight { step: 1 })));

    let x = p1(&t);
    let y = VarietyModel::new(
        "Y",
        &t,
        [("a", GClass::one(&t)), ("b", GClass::tate(&t).try_mul(&e).unwrap())],
    )
    .unwrap();
    let s = MorphismModel::new(&y, &x, [("a", "pt", GClass::one(&t)), ("b", "cell", e)], true).unwrap();
    let tw = Tower::explicit("Lumpy", vec![s]).unwrap();
    let pf = ProFunction::from_pairs(&tw, 2, [("a", 1)]).unwrap();
    assert!(matches!(chi_pro(&pf, 0), Err(ProError::NonConstantWeight { step: 1, .. })));
    assert!(matches!(tw.level(3), Err(ProError::LevelUnavailable { .. })));
}

#[test]
fn gamma_pro_examples() {
    let t = table();
    let x = p1(&t);
    let w = GClass::atom(&t, "X").unwrap().try_add(&GClass::tate(&t)).unwrap();
    let tw = Tower::bundle("B", &x, vec![vec![w.clone()]], false).unwrap();
    for k in 1..=4 {
        let pf = lift(&procharacteristic(&tw).unwrap(), k).unwrap();
        let g = gamma_pro(&pf, 0).unwrap();
        assert_eq!(g, LocClass::from_class(x.gamma()));
        assert_eq!(g.to_string(), "(1 + L)/(1)");
    }
    assert!(gamma_pro(&ProFunction::zero(&tw).unwrap(), 0).unwrap().is_zero());

    let arcs = Tower::arcs("A", &x, 2).unwrap();
    let pf = ProFunction::from_pairs(&arcs, 3, [("cell", 1)]).unwrap();
    let g = gamma_pro(&pf, 0).unwrap();
    let l = GClass::tate(&t);
    let expect_num = l.pow(7);
    let set = Arc::new(crate::rings::MultSet::new([l.pow(2)]).unwrap());
    let expect = LocClass::new(expect_num, [(l.pow(2), 3)], &set).unwrap();
    assert_eq!(g, expect);
}

#[test]
fn gamma_pro_needs_strict_uniform_steps() {
    let t = table();
    let x = p1(&t);
    let pt = VarietyModel::point(&t);
    let loose = MorphismModel::new(
        &x,
        &pt,
        [("pt", "pt", GClass::one(&t)), ("cell", "pt", GClass::one(&t))],
        false,
    )
    .unwrap();
    let tw = Tower::explicit("Loose", vec![loose]).unwrap();
    let pf = procharacteristic(&tw).unwrap();
    let up = lift(&pf, 2).unwrap();
    assert!(matches!(gamma_pro(&up, 0), Err(ProError::NotStrict { step: 1 })));
    assert_eq!(chi_pro(&up, 0).unwrap(), Rat::one());
}

#[test]
fn stability_examples() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let a = ProFunction::from_pairs(&tw, 2, [("cell.pt", 3)]).unwrap();
    let v = is_chi_stable(&a, &StepData::Constant(2), 4).unwrap();
    assert_eq!(v, Stability::Stable { definitive: true, checked_to: 4 });
    assert!(is_chi_stable(&a, &StepData::Tower, 4).unwrap().is_stable());
    assert_eq!(is_chi_stable(&a, &StepData::Constant(3), 4).unwrap(), Stability::Unstable { level: 3 });
    let z = ProFunction::zero(&tw).unwrap();
    assert!(is_chi_stable(&z, &StepData::Constant(7), 4).unwrap().is_stable());
    assert!(is_gamma_stable(&z, &StepData::Constant(GClass::tate(&t)), 4).unwrap().is_stable());

    // A lumpy explicit step: weight 1 over `pt`, 2 over `cell`.
    let x = p1(&t);
    let y = VarietyModel::new(
        "Y",
        &t,
        [
            ("a", GClass::one(&t)),
            ("b", GClass::tate(&t)),
            ("c", GClass::tate(&t)),
        ],
    )
    .unwrap();
    let one = GClass::one(&t);
    let s = MorphismModel::new(
        &y,
        &x,
        [("a", "pt", one.clone()), ("b", "cell", one.clone()), ("c", "cell", one)],
        true,
    )
    .unwrap();
    let lumpy = Tower::explicit("L", vec![s]).unwrap();
    let on_cell = ProFunction::from_pairs(&lumpy, 1, [("cell", 1)]).unwrap();
    assert_eq!(is_chi_stable(&on_cell, &StepData::Constant(1), 5).unwrap(), Stability::Unstable { level: 2 });
    assert_eq!(
        chi_of_level(&lift(&on_cell, 2).unwrap()),
        2 * chi_of_level(&on_cell)
    );
    assert!(is_chi_stable(&on_cell, &StepData::Constant(2), 5).unwrap().is_stable());
}

fn chi_of_level(pf: &ProFunction) -> i64 {
    crate::geom::chi_of_fn(pf.function())
}

#[test]
fn gamma_stability_detects_corrupt_fiber() {
    let t = table();
    let w = GClass::atom(&t, "X").unwrap();
    let tw = Tower::bundle("B", &p1(&t), vec![vec![w.clone()]], false).unwrap();
    let pf = ProFunction::from_pairs(&tw, 1, [("cell", 1)]).unwrap();
    assert_eq!(
        is_gamma_stable(&pf, &StepData::Constant(w.clone()), 3).unwrap(),
        Stability::Stable { definitive: true, checked_to: 3 }
    );
    let wrong = StepData::Listed {
        values: vec![w.clone(), GClass::tate(&t)],
        periodic: false,
    };
    assert_eq!(is_gamma_stable(&pf, &wrong, 4).unwrap(), Stability::Unstable { level: 3 });
    assert!(matches!(
        stable_gamma_pro(&pf, &wrong, 4),
        Err(ProError::Unstable { level: 3 })
    ));
    assert_eq!(
        stable_gamma_pro(&pf, &StepData::Tower, 3).unwrap(),
        gamma_pro(&pf, 0).unwrap()
    );
}

#[test]
fn cylinder_algebra_and_section_six_example() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let w1 = CylinderSet::from_ids(&tw, 1, ["cell"]).unwrap();
    let w2 = CylinderSet::from_ids(&tw, 2, ["pt.cell", "cell.cell"]).unwrap();
    assert!(cyl_symmdiff(&w1, &w1).unwrap().set().is_empty());

    let alpha = pro_add(&ProFunction::indicator(&w1), &ProFunction::indicator(&w2)).unwrap();
    let ls = level_sets(&alpha);
    let ones = cyl_symmdiff(&w1, &w2).unwrap();
    let twos = cyl_intersect(&w1, &w2).unwrap();
    assert!(cyl_eq(&ls[&1], &ones).unwrap());
    assert!(cyl_eq(&ls[&2], &twos).unwrap());
    assert_eq!(ls.len(), 2);
    assert_eq!(twos.set().ids(), vec!["cell.cell"]);

    let one = procharacteristic(&tw).unwrap();
    let l1 = level_sets(&one);
    assert!(cyl_eq(&l1[&1], &CylinderSet::whole(&tw, 1).unwrap()).unwrap());
    assert!(level_sets(&ProFunction::zero(&tw).unwrap()).is_empty());

    // Lifting the operands first gives the same cylinder.
    let a3 = lift_cyl(&w1, 3).unwrap();
    let b4 = lift_cyl(&w2, 4).unwrap();
    let lifted = cyl_symmdiff(&a3, &b4).unwrap();
    assert!(cyl_eq(&lifted, &ones).unwrap());
    assert!(cyl_eq(&cyl_union(&w1, &cyl_complement(&w1)).unwrap(), &CylinderSet::whole(&tw, 1).unwrap()).unwrap());
    assert!(cyl_difference(&w1, &w1).unwrap().set().is_empty());
}

#[test]
fn integration_examples() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let w1 = CylinderSet::from_ids(&tw, 1, ["cell"]).unwrap();
    let w2 = CylinderSet::from_ids(&tw, 2, ["pt.cell", "cell.cell"]).unwrap();
    let alpha = pro_add(&ProFunction::indicator(&w1), &ProFunction::indicator(&w2)).unwrap();
    let p = StepData::Tower;
    let id = integrate_chi_pro(&alpha, &p, 4, |k| Some(Rat::from_int(k))).unwrap();
    assert_eq!(id, stable_chi_pro(&alpha, &p, 4).unwrap());
    let zero = integrate_chi_pro(&alpha, &p, 4, |_| Some(Rat::zero())).unwrap();
    assert!(zero.is_zero());

    let arcs = Tower::arcs("A", &p1(&t), 1).unwrap();
    let c = CylinderSet::from_ids(&arcs, 1, ["cell"]).unwrap();
    let ind = ProFunction::indicator(&c);
    let one = LocClass::from_class(GClass::one(&t));
    let g = integrate_gamma_pro(&ind, &StepData::Tower, 4, |_| Some(one.clone())).unwrap();
    assert_eq!(g, stable_gamma_pro(&ind, &StepData::Tower, 4).unwrap());
    assert_eq!(g, LocClass::from_class(GClass::tate(&t)));
}

#[test]
fn partial_sums() {
    let t = table();
    let pn = pn_tower(&t, 10);
    let z = ProFunction::zero(&pn).unwrap();
    let zs = SeriesProFunction::new(vec![z.clone(), z]).unwrap();
    assert!(chi_pro_partial_sums(&zs, 3).unwrap().iter().all(Rat::is_zero));
    let one = SeriesProFunction::new(vec![procharacteristic(&pn).unwrap()]).unwrap();
    assert_eq!(chi_pro_partial_sums(&one, 1).unwrap(), vec![Rat::one()]);
}

#[test]
fn bivariant_system_limit() {
    let t = table();
    let tw = Tower::product("XN", &p1(&t));
    let steps: Arc<dyn StepSource> = tw.clone();
    let sys = BivClassSystem::unit(steps);
    let a = ProFunction::from_pairs(&tw, 1, [("cell", 3)]).unwrap();
    let up = sys_lift(&sys, &a, 3).unwrap();
    assert_eq!(up.function(), lift(&a, 3).unwrap().function());
    assert_eq!(chi_pro_sys(&sys, &up).unwrap(), chi_pro(&a, 0).unwrap());

    // Doubling every step class doubles the bonding maps and the weights.
    let n2 = tw.level(2).unwrap().len();
    let sys2 = BivClassSystem::unit(tw.clone() as Arc<dyn StepSource>).with_step(1, vec![2; n2]);
    let up2 = sys_lift(&sys2, &a, 2).unwrap();
    assert_eq!(chi_pro_sys(&sys2, &up2).unwrap(), chi_pro_sys(&sys2, &a).unwrap());
}

#[test]
fn naturality_examples() {
    let t = table();
    let x = p1(&t);
    let tw = Tower::product("XN", &x);
    let id = ProMorphism::identity(&tw);
    assert!(check_naturality(&id, 4, 1).unwrap().passed());

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let y = {
        let strata: Vec<_> = (0..3)
            .map(|i| {
                let j = i % 2;
                (format!("y{i}"), x.class(j).try_mul(&rand_class(&t, &mut rng)).unwrap())
            })
            .collect();
        VarietyModel::new("Y", &t, strata).unwrap()
    };
    let fib: Vec<GClass> = (0..3)
        .map(|i| y.class(i).div_exact(x.class(i % 2)).unwrap())
        .collect();
    let f = MorphismModel::from_parts(&y, &tw.level(1).unwrap(), vec![0, 1, 0], fib, true).unwrap();
    let phi = ProMorphism::fiber_square("YN", &tw, f, 0).unwrap();
    assert!(check_naturality(&phi, 4, 7).unwrap().passed());

    let bad = mutate_map_fiber(&phi, 2, 0, GClass::constant(&t, 5)).unwrap();
    let r = check_naturality(&bad, 4, 7).unwrap();
    assert!(r.witness.as_deref().unwrap().starts_with("level 1"), "{r:?}");
    let bad = mutate_step_fiber(&phi, 3, 1, GClass::constant(&t, 5)).unwrap();
    let r = check_naturality(&bad, 4, 7).unwrap();
    assert!(r.witness.as_deref().unwrap().starts_with("level 3"), "{r:?}");

    // Pushforward of the procharacteristic function keeps χ^pro.
    let one = procharacteristic(phi.source()).unwrap();
    let pushed = pro_pushforward(&phi, &one).unwrap();
    assert_eq!(chi_pro(&pushed, 0).unwrap(), chi_pro(&one, 0).unwrap());

    let shifted = ProMorphism::fiber_square(
        "YS",
        &tw,
        MorphismModel::identity(&tw.level(1).unwrap()),
        2,
    )
    .unwrap();
    assert_eq!(shifted.source().base(), 3);
    assert!(check_naturality(&shifted, 3, 2).unwrap().passed());
}

proptest! {
    #[test]
    fn lift_invariance(seed in any::<u64>(), up in 0u32..3) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tw = rand_bundle(&t, &mut rng);
        let n = rng.gen_range(1..=2);
        let pf = rand_pf(&tw, n, &mut rng);
        let m = n + up;
        let lifted = lift(&pf, m).unwrap();
        if let Ok(c) = chi_pro(&pf, 0) {
            prop_assert_eq!(chi_pro(&lifted, 0).unwrap(), c);
        }
        prop_assert_eq!(gamma_pro(&lifted, 0).unwrap(), gamma_pro(&pf, 0).unwrap());
        let x = {
            let top = tw.level(m).unwrap();
            let i = rng.gen_range(0..top.len());
            let mut ids = vec![top.id(i).to_string()];
            let mut j = i;
            for k in (1..m).rev() {
                j = tw.step(k).unwrap().image_of(j);
                ids.push(tw.level(k).unwrap().id(j).to_string());
            }
            ids.reverse();
            ProPoint::new(&tw, ids.iter().map(String::as_str)).unwrap()
        };
        prop_assert_eq!(eval(&lifted, &x).unwrap(), eval(&pf, &x).unwrap());
    }

    #[test]
    fn measures_are_additive(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tw = rand_bundle(&t, &mut rng);
        let a = rand_pf(&tw, rng.gen_range(1..=2), &mut rng);
        let b = rand_pf(&tw, rng.gen_range(1..=3), &mut rng);
        let s = pro_add(&a, &b).unwrap();
        let ga = gamma_pro(&a, 0).unwrap();
        let gb = gamma_pro(&b, 0).unwrap();
        prop_assert_eq!(gamma_pro(&s, 0).unwrap(), ga.try_add(&gb).unwrap());
        if let (Ok(ca), Ok(cb)) = (chi_pro(&a, 0), chi_pro(&b, 0)) {
            prop_assert_eq!(chi_pro(&s, 0).unwrap(), ca + cb);
        }
    }

    #[test]
    fn shift_laws(seed in any::<u64>(), w in -2i32..3) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let tw = Tower::product("XN", &x);
        let pf = rand_pf(&tw, rng.gen_range(1..=3), &mut rng);
        let c = x.chi();
        if c != 0 {
            let expect = chi_pro(&pf, 0).unwrap().checked_div(&Rat::from_int(c).pow(w).unwrap()).unwrap();
            prop_assert_eq!(chi_pro(&pf, w).unwrap(), expect);
        }
        let g = gamma_pro(&pf, w).unwrap();
        let wg = x.gamma();
        let set = Arc::new(crate::rings::MultSet::new([wg.clone()]).unwrap());
        let scaled = if w >= 0 {
            gamma_pro(&pf, 0).unwrap().try_mul(&LocClass::new(GClass::one(&t), [(wg, w as u32)], &set).unwrap()).unwrap()
        } else {
            gamma_pro(&pf, 0).unwrap().try_mul(&LocClass::from_class(wg.pow((-w) as u32))).unwrap()
        };
        prop_assert_eq!(g, scaled);
    }

    #[test]
    fn cyl_eq_matches_brute_force(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tw = rand_bundle(&t, &mut rng);
        let la = rng.gen_range(1..=2);
        let lb = rng.gen_range(1..=3);
        let pick = |l: u32, rng: &mut ChaCha8Rng| {
            let x = tw.level(l).unwrap();
            let idx: Vec<usize> = (0..x.len()).filter(|_| rng.gen_bool(0.5)).collect();
            CylinderSet::new(&tw, l, crate::geom::ConstructibleSet::from_indices(&x, idx)).unwrap()
        };
        let a = pick(la, &mut rng);
        let b = if rng.gen_bool(0.3) { lift_cyl(&a, lb.max(la)).unwrap() } else { pick(lb, &mut rng) };
        // Oracle: compare the lifted indicator functions at a higher level.
        let top = la.max(lb) + 1;
        let fa = lift(&ProFunction::indicator(&a), top).unwrap();
        let fb = lift(&ProFunction::indicator(&b), top).unwrap();
        prop_assert_eq!(cyl_eq(&a, &b).unwrap(), fa.function().values() == fb.function().values());
    }
}
