use std::sync::Arc;

use prochern_core::bivariant::{check_projection_formula, check_system, CheckReport};
use prochern_core::geom::{
    chi_of_fn, fiber_product, gamma_of_fn, ConstructibleFunction, FiberSquare, GeomError,
    MorphismModel, VarietyModel,
};
use prochern_core::prosys::{
    check_naturality, chi_pro, is_chi_stable, lift, step_chi, step_class, ProFunction,
    ProMorphism, StepData,
};
use prochern_core::rings::{AtomTable, GClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Check, CheckKind};
use crate::eval::{render_stability, Env, Options};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// A class `c·a_1⋯a_k` with `c ∈ {1, 2}` and up to two declared atoms.
pub fn random_class(table: &Arc<AtomTable>, rng: &mut impl Rng) -> GClass {
    let atoms: Vec<&str> = table.variables().map(|(s, _)| s).collect();
    let mut c = GClass::constant(table, rng.gen_range(1..=2));
    for _ in 0..rng.gen_range(0..=2) {
        let a = GClass::atom(table, atoms[rng.gen_range(0..atoms.len())]).expect("declared atom");
        c = c.try_mul(&a).expect("same table");
    }
    c
}

pub fn random_model(table: &Arc<AtomTable>, name: &str, max_strata: usize, rng: &mut impl Rng) -> Arc<VarietyModel> {
    let strata: Vec<_> = (0..rng.gen_range(1..=max_strata))
        .map(|i| (format!("{name}{i}"), random_class(table, rng)))
        .collect();
    VarietyModel::new(name, table, strata).expect("distinct ids")
}

/// A morphism into `y` from a fresh model; strict ones get source classes
/// `cls(t)·F`.
pub fn random_morphism_into(
    y: &Arc<VarietyModel>,
    name: &str,
    max_strata: usize,
    strict: bool,
    rng: &mut impl Rng,
) -> MorphismModel {
    let table = y.table();
    let n = rng.gen_range(1..=max_strata);
    let map: Vec<usize> = (0..n).map(|_| rng.gen_range(0..y.len())).collect();
    let fibers: Vec<GClass> = (0..n).map(|_| random_class(table, rng)).collect();
    let strata: Vec<_> = (0..n)
        .map(|i| {
            let cls = if strict {
                y.class(map[i]).try_mul(&fibers[i]).expect("same table")
            } else {
                random_class(table, rng)
            };
            (format!("{name}{i}"), cls)
        })
        .collect();
    let x = VarietyModel::new(name, table, strata).expect("distinct ids");
    MorphismModel::from_parts(&x, y, map, fibers, strict).expect("consistent morphism")
}

pub fn random_function(x: &Arc<VarietyModel>, rng: &mut impl Rng) -> ConstructibleFunction {
    let v = (0..x.len()).map(|_| rng.gen_range(-3..=3)).collect();
    ConstructibleFunction::from_values(x, v).expect("right length")
}

fn projection_squares(square: &FiberSquare, label: &str, depth: u32, rng: &mut ChaCha8Rng) -> Result<CheckReport, String> {
    let mut report = CheckReport::pass(0);
    for _ in 0..depth.max(1) {
        let alpha = random_function(square.pi.source(), rng);
        let beta = random_function(square.f.source(), rng);
        let r = check_projection_formula(square, &alpha, &beta).map_err(err)?;
        if let Some(w) = &r.witness {
            return Ok(CheckReport::fail(report.cases + r.cases, format!("{label}: {w}")));
        }
        report = report.merge(r);
    }
    Ok(report)
}

fn projection_formula(env: &Env, depth: u32, rng: &mut ChaCha8Rng) -> Result<CheckReport, String> {
    let mut report = CheckReport::pass(0);
    for f in &env.morphisms {
        for pi in &env.morphisms {
            let (fm, pm) = (env.morphism(f)?, env.morphism(pi)?);
            let square = match fiber_product(&fm, &pm) {
                Ok(sq) => sq,
                Err(GeomError::EndpointMismatch | GeomError::NotStrict) => continue,
                Err(e) => return Err(format!("square ({f}, {pi}): {e}")),
            };
            let r = projection_squares(&square, &format!("square ({f}, {pi})"), depth, rng)?;
            if !r.passed() {
                return Ok(r);
            }
            report = report.merge(r);
        }
    }
    for i in 0..depth {
        let y = random_model(&env.table, "y", 4, rng);
        let strict = rng.gen_bool(0.5);
        let f = random_morphism_into(&y, "a", 4, strict, rng);
        let pi = random_morphism_into(&y, "b", 4, true, rng);
        let square = fiber_product(&f, &pi).map_err(err)?;
        let r = projection_squares(&square, &format!("random square {i}"), depth, rng)?;
        if !r.passed() {
            return Ok(r);
        }
        report = report.merge(r);
    }
    Ok(report)
}

fn naturality(env: &Env, tower: &str, via: Option<&str>, depth: u32, seed: u64) -> Result<CheckReport, String> {
    let t = env.tower(tower)?;
    let phi = match via {
        None => ProMorphism::identity(&t),
        Some(m) => {
            let f = env.morphism(m)?;
            let base = t.level(t.base()).map_err(err)?;
            if !f.target().same_shape(&base) {
                return Err(format!("`{m}` does not map into the base level of `{tower}`"));
            }
            let f = MorphismModel::from_parts(
                f.source(),
                &base,
                f.stratum_map().to_vec(),
                f.fibers().to_vec(),
                f.is_strict(),
            )
            .map_err(err)?;
            ProMorphism::fiber_square(format!("{tower}x{m}"), &t, f, 0).map_err(err)?
        }
    };
    check_naturality(&phi, depth, seed).map_err(err)
}

/// For each level `n`: `χ(π^*α) = χ_n·χ(α)`, `Γ(π^*α) = [F_n]·Γ(α)` for
/// strict uniform steps, and `χ^pro` unchanged by lifting.
fn diagrams(env: &Env, tower: &str, depth: u32, rng: &mut ChaCha8Rng) -> Result<CheckReport, String> {
    let t = env.tower(tower)?;
    let mut cases = 0;
    for n in t.base()..t.base() + depth {
        if t.top_level().is_some_and(|top| n >= top) {
            break;
        }
        cases += 1;
        let x = t.level(n).map_err(err)?;
        let alpha = random_function(&x, rng);
        let step = t.step(n).map_err(err)?;
        let up = step.pullback(&alpha).map_err(err)?;
        let c = match step_chi(&t, n) {
            Ok(c) => c,
            Err(e) => return Ok(CheckReport::fail(cases, format!("level {n}: {e}"))),
        };
        let (lhs, rhs) = (chi_of_fn(&up), c * chi_of_fn(&alpha));
        if lhs != rhs {
            return Ok(CheckReport::fail(cases, format!("level {n}: χ(π^*α) = {lhs}, χ_n·χ(α) = {rhs}")));
        }
        if let Ok(fib) = step_class(&t, n) {
            let (lhs, rhs) = (gamma_of_fn(&up), fib.try_mul(&gamma_of_fn(&alpha)).map_err(err)?);
            if lhs != rhs {
                return Ok(CheckReport::fail(cases, format!("level {n}: Γ(π^*α) = {lhs}, [F_n]·Γ(α) = {rhs}")));
            }
        }
        let pf = ProFunction::new(&t, n, alpha).map_err(err)?;
        if let Ok(v) = chi_pro(&pf, 0) {
            let w = chi_pro(&lift(&pf, n + 1).map_err(err)?, 0).map_err(err)?;
            if v != w {
                return Ok(CheckReport::fail(cases, format!("level {n}: χ^pro {v} changes to {w} under lifting")));
            }
        }
    }
    Ok(CheckReport::pass(cases))
}

/// Runs one check suite.
pub fn run_check(env: &Env, c: &Check, opts: &Options) -> Result<CheckReport, String> {
    let depth = c.depth.unwrap_or(opts.depth);
    let seed = c.seed.unwrap_or(opts.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match &c.kind {
        CheckKind::ProjectionFormula => projection_formula(env, depth, &mut rng),
        CheckKind::Naturality { tower, via } => naturality(env, tower, via.as_deref(), depth, seed),
        CheckKind::System(s) => check_system(&env.system(s)?, depth).map_err(err),
        CheckKind::Diagrams(t) => diagrams(env, t, depth, &mut rng),
        CheckKind::Stability { pf, p } => {
            let pf = env.pf(pf)?;
            let data = match p {
                Some(p) => StepData::Constant(*p),
                None => StepData::Tower,
            };
            let horizon = opts.horizon.max(pf.level() + depth);
            let st = is_chi_stable(&pf, &data, horizon).map_err(err)?;
            Ok(if st.is_stable() {
                CheckReport::pass(1)
            } else {
                CheckReport::fail(1, render_stability(&st))
            })
        }
    }
}
