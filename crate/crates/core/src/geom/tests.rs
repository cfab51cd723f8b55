use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rings::{AtomTable, GClass, Rat};

fn table() -> Arc<AtomTable> {
    Arc::new(AtomTable::new().with("X", 2).unwrap().with("E", -1).unwrap())
}

fn p1(t: &Arc<AtomTable>) -> Arc<VarietyModel> {
    VarietyModel::new("P1", t, [("pt", GClass::one(t)), ("cell", GClass::tate(t))]).unwrap()
}

fn rand_class(t: &Arc<AtomTable>, rng: &mut ChaCha8Rng) -> GClass {
    let atoms = ["L", "X", "E"];
    let mut c = GClass::zero(t);
    for _ in 0..rng.gen_range(1..=2) {
        let mut m = GClass::constant(t, rng.gen_range(1..=2));
        for _ in 0..rng.gen_range(0..=2) {
            let a = GClass::atom(t, atoms[rng.gen_range(0..3)]).unwrap();
            m = m.try_mul(&a).unwrap();
        }
        c = c.try_add(&m).unwrap();
    }
    c
}

fn rand_model(t: &Arc<AtomTable>, name: &str, rng: &mut ChaCha8Rng) -> Arc<VarietyModel> {
    let n = rng.gen_range(1..=4);
    let strata: Vec<_> = (0..n).map(|i| (format!("{name}{i}"), rand_class(t, rng))).collect();
    VarietyModel::new(name, t, strata).unwrap()
}

fn rand_fn(x: &Arc<VarietyModel>, rng: &mut ChaCha8Rng) -> ConstructibleFunction {
    let vals = (0..x.len()).map(|_| rng.gen_range(-3..=3)).collect();
    ConstructibleFunction::from_values(x, vals).unwrap()
}

/// A strict morphism into `target` whose source strata are built from
/// random fiber pieces over random target strata.
fn rand_strict(
    t: &Arc<AtomTable>,
    target: &Arc<VarietyModel>,
    name: &str,
    rng: &mut ChaCha8Rng,
) -> MorphismModel {
    let n = rng.gen_range(1..=5);
    let mut strata = Vec::new();
    let mut map = Vec::new();
    let mut fib = Vec::new();
    for i in 0..n {
        let j = rng.gen_range(0..target.len());
        let f = rand_class(t, rng);
        strata.push((format!("{name}{i}"), target.class(j).try_mul(&f).unwrap()));
        map.push(j);
        fib.push(f);
    }
    let src = VarietyModel::new(name, t, strata).unwrap();
    MorphismModel::from_parts(&src, target, map, fib, true).unwrap()
}

#[test]
fn set_measures() {
    let t = table();
    let x = p1(&t);
    let all = ConstructibleSet::whole(&x);
    assert_eq!(chi_of_set(&all), 2);
    assert_eq!(gamma_of_set(&all).to_string(), "1 + L");
    let none = ConstructibleSet::empty(&x);
    assert_eq!(chi_of_set(&none), 0);
    assert!(gamma_of_set(&none).is_zero());
    let cell = ConstructibleSet::from_ids(&x, ["cell"]).unwrap();
    assert_eq!(chi_of_set(&cell), 1);
    assert_eq!(gamma_of_set(&cell).to_string(), "L");
    assert_eq!(cell.union(&cell.complement()).unwrap(), all);
    assert!(cell.intersection(&cell.complement()).unwrap().is_empty());
}

#[test]
fn function_measures() {
    let t = table();
    let x = p1(&t);
    assert_eq!(chi_of_fn(&ConstructibleFunction::one(&x)), 2);
    assert_eq!(chi_of_fn(&ConstructibleFunction::zero(&x)), 0);
    let a = ConstructibleFunction::from_pairs(&x, [("pt", 3), ("cell", -1)]).unwrap();
    assert_eq!(chi_of_fn(&a), 2);
    assert_eq!(gamma_of_fn(&ConstructibleFunction::one(&x)).to_string(), "1 + L");
    let b = ConstructibleFunction::from_pairs(&x, [("cell", 2)]).unwrap();
    assert_eq!(gamma_of_fn(&b).to_string(), "2*L");
}

#[test]
fn integrals() {
    let t = table();
    let x = p1(&t);
    let a = ConstructibleFunction::from_pairs(&x, [("pt", 3), ("cell", -1)]).unwrap();
    let sq = integrate_chi(&a, |n| Some(Rat::from_int(n * n))).unwrap();
    assert_eq!(sq, Rat::from_int(10));
    let id = integrate_chi(&a, |n| Some(Rat::from_int(n))).unwrap();
    assert_eq!(id, Rat::from_int(chi_of_fn(&a)));
    let one = integrate_chi(&a, |_| Some(Rat::one())).unwrap();
    assert_eq!(one, Rat::from_int(x.chi()));
    assert!(matches!(
        integrate_chi(&a, |n| (n > 0).then(Rat::one)),
        Err(GeomError::UndefinedIntegrand(-1))
    ));
}

#[test]
fn push_and_pull_examples() {
    let t = table();
    let x = p1(&t);
    let a = ConstructibleFunction::from_pairs(&x, [("pt", 3), ("cell", -1)]).unwrap();
    let id = MorphismModel::identity(&x);
    assert_eq!(id.pushforward(&a).unwrap(), a);
    let c = MorphismModel::collapse(&x);
    let pushed = c.pushforward(&ConstructibleFunction::one(&x)).unwrap();
    assert_eq!(pushed.values(), &[2]);
    let one_pt = ConstructibleFunction::one(c.target());
    assert_eq!(c.pullback(&one_pt).unwrap(), ConstructibleFunction::one(&x));
    let seven = ConstructibleFunction::constant(c.target(), 7);
    assert_eq!(c.pullback(&seven).unwrap(), ConstructibleFunction::constant(&x, 7));
}

#[test]
fn products() {
    let t = table();
    let x = p1(&t);
    let xx = cross_model(&x, &x).unwrap();
    assert_eq!(xx.len(), 4);
    let expect = GClass::one(&t).try_add(&GClass::tate(&t)).unwrap().pow(2);
    assert_eq!(xx.gamma(), expect);
    let pt = VarietyModel::point(&t);
    assert!(cross_model(&x, &pt).unwrap().gamma() == x.gamma());

    // Pullback along the first projection is β × 1_X.
    let pr = project_first(&xx, &x, &x).unwrap();
    let beta = ConstructibleFunction::from_pairs(&x, [("pt", 5), ("cell", -2)]).unwrap();
    let lhs = pr.pullback(&beta).unwrap();
    let rhs = cross_fn_on(&xx, &beta, &ConstructibleFunction::one(&x)).unwrap();
    assert_eq!(lhs, rhs);

    // Pushing 1 along the projection gives χ of the other factor.
    let pushed = pr.pushforward(&ConstructibleFunction::one(&xx)).unwrap();
    assert_eq!(pushed.values(), &[2, 2]);
}

#[test]
fn composite_projection_fibers() {
    let t = table();
    let x = p1(&t);
    let x2 = cross_model(&x, &x).unwrap();
    let x3 = cross_model(&x2, &x).unwrap();
    let p32 = project_first(&x3, &x2, &x).unwrap();
    let p21 = project_first(&x2, &x, &x).unwrap();
    let p31 = compose(&p21, &p32).unwrap();
    assert!(p31.is_strict());
    for i in 0..x3.len() {
        // stratum a.b.c lies over a with fiber [b]·[c]
        let b = (i / 2) % 2;
        let c = i % 2;
        assert_eq!(p31.image_of(i), i / 4);
        assert_eq!(*p31.fiber(i), x.class(b).try_mul(x.class(c)).unwrap());
    }
    let id = MorphismModel::identity(&x3);
    let same = compose(&p32, &id).unwrap();
    assert_eq!(same.stratum_map(), p32.stratum_map());
    assert_eq!(same.fibers(), p32.fibers());
}

#[test]
fn strictness_is_enforced() {
    let t = table();
    let x = p1(&t);
    let pt = VarietyModel::point(&t);
    let bad = MorphismModel::new(
        &x,
        &pt,
        [("pt", "pt", GClass::one(&t)), ("cell", "pt", GClass::one(&t))],
        true,
    );
    assert!(matches!(bad, Err(GeomError::StrictnessViolated(s)) if s == "cell"));
    let loose = MorphismModel::new(
        &x,
        &pt,
        [("pt", "pt", GClass::one(&t)), ("cell", "pt", GClass::one(&t))],
        false,
    )
    .unwrap();
    assert_eq!(loose.fiber_chi(0), 2);
    assert!(matches!(
        MorphismModel::new(&x, &pt, [("pt", "pt", GClass::one(&t))], false),
        Err(GeomError::MapNotTotal(_))
    ));
    let f = MorphismModel::collapse(&x);
    assert!(matches!(fiber_product(&f, &loose), Err(GeomError::NotStrict)));
}

#[test]
fn fiber_product_special_cases() {
    let t = table();
    let x = p1(&t);
    let f = MorphismModel::collapse(&x);
    let id = MorphismModel::identity(f.target());
    let sq = fiber_product(&f, &id).unwrap();
    sq.validate().unwrap();
    assert!(sq.top.same_shape(&x) || sq.top.gamma() == x.gamma());
    assert_eq!(sq.top.len(), x.len());

    // Y = point over the point stratum of P1 recovers the fiber of π.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pi = rand_strict(&t, &x, "Z", &mut rng);
    let pt = VarietyModel::point(&t);
    let g = MorphismModel::from_parts(&pt, &x, vec![0], vec![GClass::one(&t)], true).unwrap();
    let sq = fiber_product(&g, &pi).unwrap();
    sq.validate().unwrap();
    let over_pt: Vec<_> = (0..pi.source().len()).filter(|&i| pi.image_of(i) == 0).collect();
    assert_eq!(sq.top.len(), over_pt.len());
    for (k, &i) in over_pt.iter().enumerate() {
        assert_eq!(sq.top.class(k), pi.fiber(i));
    }
}

#[test]
fn corrupted_square_is_located() {
    let t = table();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = rand_model(&t, "X", &mut rng);
    let f = rand_strict(&t, &x, "Y", &mut rng);
    let pi = rand_strict(&t, &x, "W", &mut rng);
    let mut sq = fiber_product(&f, &pi).unwrap();
    if sq.top.is_empty() {
        return;
    }
    let bumped = sq.f_prime.fiber(0).try_add(&GClass::one(&t)).unwrap();
    sq.f_prime = sq.f_prime.corrupt_fiber(0, bumped);
    let err = sq.validate().unwrap_err();
    assert_eq!(err.stratum, sq.top.id(0));
}

proptest! {
    #[test]
    fn level_sets_agree_with_pointwise(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let a = rand_fn(&x, &mut rng);
        prop_assert_eq!(chi_of_fn(&a), a.chi_pointwise());
        prop_assert_eq!(gamma_of_fn(&a), a.gamma_pointwise());
        let direct: Rat = (0..x.len())
            .map(|i| Rat::from_int(a.value(i) * a.value(i) * x.stratum_chi(i)))
            .sum();
        prop_assert_eq!(integrate_chi(&a, |n| Some(Rat::from_int(n * n))).unwrap(), direct);
    }

    #[test]
    fn strict_push_preserves_chi(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let f = rand_strict(&t, &x, "Y", &mut rng);
        let b = rand_fn(f.source(), &mut rng);
        prop_assert_eq!(chi_of_fn(&f.pushforward(&b).unwrap()), chi_of_fn(&b));
    }

    #[test]
    fn function_projection_formula(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let f = rand_strict(&t, &x, "Y", &mut rng);
        let a = rand_fn(f.source(), &mut rng);
        let b = rand_fn(&x, &mut rng);
        let lhs = f.pushforward(&fn_mul(&a, &f.pullback(&b).unwrap()).unwrap()).unwrap();
        let rhs = fn_mul(&f.pushforward(&a).unwrap(), &b).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pullback_is_ring_map_and_push_additive(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let f = rand_strict(&t, &x, "Y", &mut rng);
        let b1 = rand_fn(&x, &mut rng);
        let b2 = rand_fn(&x, &mut rng);
        prop_assert_eq!(
            f.pullback(&ConstructibleFunction::one(&x)).unwrap(),
            ConstructibleFunction::one(f.source())
        );
        prop_assert_eq!(
            f.pullback(&fn_mul(&b1, &b2).unwrap()).unwrap(),
            fn_mul(&f.pullback(&b1).unwrap(), &f.pullback(&b2).unwrap()).unwrap()
        );
        prop_assert_eq!(
            f.pullback(&fn_add(&b1, &b2).unwrap()).unwrap(),
            fn_add(&f.pullback(&b1).unwrap(), &f.pullback(&b2).unwrap()).unwrap()
        );
        let a1 = rand_fn(f.source(), &mut rng);
        let a2 = rand_fn(f.source(), &mut rng);
        prop_assert_eq!(
            f.pushforward(&fn_add(&a1, &a2).unwrap()).unwrap(),
            fn_add(&f.pushforward(&a1).unwrap(), &f.pushforward(&a2).unwrap()).unwrap()
        );
    }

    #[test]
    fn functoriality(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = rand_model(&t, "Z", &mut rng);
        let g = rand_strict(&t, &z, "Y", &mut rng);
        let f = rand_strict(&t, g.source(), "X", &mut rng);
        let gf = compose(&g, &f).unwrap();
        prop_assert!(gf.strict_violation().is_none());
        let a = rand_fn(f.source(), &mut rng);
        prop_assert_eq!(
            gf.pushforward(&a).unwrap(),
            g.pushforward(&f.pushforward(&a).unwrap()).unwrap()
        );
        let c = rand_fn(&z, &mut rng);
        prop_assert_eq!(
            gf.pullback(&c).unwrap(),
            f.pullback(&g.pullback(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn base_change_on_fiber_products(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let f = rand_strict(&t, &x, "Y", &mut rng);
        let pi = rand_strict(&t, &x, "W", &mut rng);
        let sq = fiber_product(&f, &pi).unwrap();
        prop_assert!(sq.validate().is_ok());
        let b = rand_fn(f.source(), &mut rng);
        prop_assert_eq!(sq.base_change_defect(&b).unwrap(), None);
    }

    #[test]
    fn cross_products_multiply(seed in any::<u64>()) {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let y = rand_model(&t, "Y", &mut rng);
        let a = rand_fn(&x, &mut rng);
        let b = rand_fn(&y, &mut rng);
        let ab = cross_fn(&a, &b).unwrap();
        prop_assert_eq!(chi_of_fn(&ab), chi_of_fn(&a) * chi_of_fn(&b));
        prop_assert_eq!(gamma_of_fn(&ab), gamma_of_fn(&a).try_mul(&gamma_of_fn(&b)).unwrap());
        let mut double = 0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                double += x.stratum_chi(i) * y.stratum_chi(j);
            }
        }
        prop_assert_eq!(chi_of_fn(&ConstructibleFunction::one(ab.parent())), double);
    }

    #[test]
    fn uniform_fiber_gamma_pullback(seed in any::<u64>()) {
        // Every target stratum gets the same single fiber piece F.
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rand_model(&t, "X", &mut rng);
        let fib = rand_class(&t, &mut rng);
        let strata: Vec<_> = (0..x.len())
            .map(|j| (format!("e{j}"), x.class(j).try_mul(&fib).unwrap()))
            .collect();
        let e = VarietyModel::new("E", &t, strata).unwrap();
        let pi = MorphismModel::from_parts(&e, &x, (0..x.len()).collect(), vec![fib.clone(); x.len()], true).unwrap();
        prop_assert_eq!(pi.uniform_fiber_class().unwrap(), fib.clone());
        let b = rand_fn(&x, &mut rng);
        prop_assert_eq!(
            gamma_of_fn(&pi.pullback(&b).unwrap()),
            gamma_of_fn(&b).try_mul(&fib).unwrap()
        );
    }
}
