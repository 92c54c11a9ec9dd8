mod common;

use causal_id::admg::{Admg, VarSet};
use causal_id::expr::{free_variables, simplify, to_latex, Expression};
use causal_id::identify::{id_uncond, idc, identify, identify_traced, IdentifyError, IdentifyOptions, Query, Traced};
use causal_id::oracle::{joint, random_scm, Evaluator};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn effect(y: &[&str], x: &[&str]) -> Query {
    Query::effect(set(y), set(x))
}

fn traced(q: &Query, g: &Admg) -> Traced {
    identify_traced(q, g, IdentifyOptions::default())
}

fn latex_of(q: &Query, g: &Admg) -> String {
    to_latex(&identify(q, g).unwrap())
}

fn hedge(q: &Query, g: &Admg) -> causal_id::HedgeWitness {
    match identify(q, g) {
        Err(IdentifyError::NotIdentifiable(w)) => *w,
        other => panic!("expected a hedge, got {other:?}"),
    }
}

#[test]
fn front_door_golden() {
    let q = effect(&["Y"], &["X"]);
    assert_eq!(latex_of(&q, &front_door()), r"\sum_{z}P(z|x)\sum_{x}P(x)P(y|x, z)");
    let t = traced(&q, &front_door());
    assert_eq!(t.trace[0].line, 4);
    let z_call = t
        .trace
        .iter()
        .position(|s| s.y == set(&["Z"]) && s.x == set(&["X", "Y"]))
        .unwrap();
    assert_eq!(t.trace[z_call].line, 2);
    assert_eq!(t.trace[z_call + 1].line, 6);
}

#[test]
fn back_door_golden() {
    assert_eq!(
        latex_of(&effect(&["Y"], &["X"]), &sunscreen_graph()),
        r"\sum_{z}P(y|x, z)P(z)"
    );
}

#[test]
fn bow_arc_hedge() {
    let w = hedge(&effect(&["Y"], &["X"]), &bow_arc());
    assert_eq!(w.forest_f, bow_arc());
    assert_eq!(w.forest_f_sub.vertices(), &set(&["Y"]));
    assert_eq!(w.forest_f_sub.num_directed() + w.forest_f_sub.num_bidirected(), 0);
    assert_eq!(w.sub_x, set(&["X"]));
    w.check(true).unwrap();
}

#[test]
fn nested_hedge_example() {
    let g = hedge_example();
    let w = hedge(&effect(&["Y"], &["X"]), &g);
    assert_eq!(w.forest_f, g.induced_subgraph(&set(&["X", "W", "Z"])).unwrap());
    assert_eq!(w.forest_f_sub, g.induced_subgraph(&set(&["W"])).unwrap());
    assert_eq!(w.sub_x, set(&["X", "Z"]));
    assert_eq!(w.sub_y, set(&["W"]));
    assert_eq!(
        w.to_string(),
        "hedge for P_{X, Z}(W) formed by F = {X->W, Z->W, W<->X, X<->Z} and F' = {W}"
    );
}

#[test]
fn pregnancy_goldens() {
    let q = effect(&["Y1", "Y2"], &["X"]);
    assert_eq!(latex_of(&q, &pregnancy()), r"P(y2)\sum_{w}P(w)P(y1|w, x)");
    let g = pregnancy_linked();
    let w = hedge(&q, &g);
    assert_eq!(w.forest_f, g);
    assert_eq!(
        w.forest_f_sub,
        g.induced_subgraph(&set(&["W", "Z", "Y1", "Y2"])).unwrap()
    );
    w.check(false).unwrap();
    w.thinned().unwrap().check(true).unwrap();
}

#[test]
fn conditional_golden() {
    let g = conditional_example();
    let q = Query::new(set(&["Y"]), set(&["X"]), set(&["Z"]));
    let t = traced(&q, &g);
    let e = t.result.clone().unwrap();
    assert_eq!(to_latex(&e), r"\sum_{x}P(x|w)P(y|w, x, z)");
    assert_eq!(t.introduced_interventions(), set(&["W"]));
    for seed in 0..5 {
        assert!(max_deviation(&random_scm(&g, seed), &q, &e) <= 1e-9);
    }
    assert_eq!(
        latex_of(&effect(&["Y"], &["X"]), &g),
        r"\sum_{w, z}P(w)P(z|w, x)\sum_{x}P(x|w)P(y|w, x, z)"
    );
}

#[test]
fn full_outcome_without_intervention_is_the_joint() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.gen_range(1..=6);
        let g = random_admg(&mut rng, n, 0.4, 4);
        let e = identify(&Query::effect(g.vertices().clone(), VarSet::new()), &g).unwrap();
        assert_eq!(e, Expression::joint(g.vertices().clone()).unwrap());
    }
}

#[test]
fn invalid_queries_are_rejected() {
    let g = front_door();
    for q in [
        effect(&[], &["X"]),
        effect(&["Y"], &["Y"]),
        effect(&["Q"], &["X"]),
        Query::new(set(&["Y"]), set(&["X"]), set(&["X"])),
    ] {
        assert!(matches!(identify(&q, &g), Err(IdentifyError::InvalidQuery(_))), "{q:?}");
    }
}

#[test]
fn random_queries_respect_structural_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d);
    let (mut hedges, mut successes) = (0, 0);
    for _ in 0..600 {
        let n = rng.gen_range(2..=7);
        let g = random_admg(&mut rng, n, 0.35, 5);
        let conditional = rng.gen_bool(0.3);
        let q = random_query(&mut rng, &g, conditional);
        let t = traced(&q, &g);
        assert!(t.max_depth() <= 2 * n, "depth {} on {g}", t.max_depth());
        assert!(t.trace.iter().all(|s| (1..=7).contains(&s.line)));
        match &t.result {
            Ok(e) => {
                successes += 1;
                let mut allowed: VarSet = q.y.iter().chain(&q.x).chain(&q.z).cloned().collect();
                allowed.extend(t.introduced_interventions());
                assert!(
                    free_variables(e).is_subset(&allowed),
                    "{} for {q:?} on {g}",
                    to_latex(e)
                );
                assert_eq!(&simplify(e), e);
            }
            Err(IdentifyError::NotIdentifiable(w)) => {
                hedges += 1;
                w.check(false).unwrap_or_else(|m| panic!("{m}: {w} on {g}"));
                w.thinned()
                    .unwrap()
                    .check(true)
                    .unwrap_or_else(|m| panic!("{m}: {w} on {g}"));
                assert_eq!(t.trace.last().unwrap().line, 5);
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }
    assert!(hedges > 20 && successes > 200, "{hedges} hedges, {successes} successes");
}

#[test]
fn markovian_models_are_always_identifiable() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xda6);
    for _ in 0..300 {
        let n = rng.gen_range(1..=8);
        let g = random_admg(&mut rng, n, 0.4, 0);
        let conditional = n >= 3 && rng.gen_bool(0.3);
        let q = random_query(&mut rng, &g, conditional);
        assert!(identify(&q, &g).is_ok(), "{q:?} on {g}");
    }
}

#[test]
fn identified_effects_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0ac1e);
    let mut checked = 0;
    for seed in 0..250u64 {
        let n = rng.gen_range(2..=5);
        let g = random_admg(&mut rng, n, 0.4, 4);
        let model = random_scm(&g, seed);
        for _ in 0..2 {
            let conditional = n >= 3 && rng.gen_bool(0.5);
            let q = random_query(&mut rng, &g, conditional);
            if let Ok(e) = identify(&q, &g) {
                let dev = max_deviation(&model, &q, &e);
                assert!(dev <= 1e-9, "{} for {q:?} on {g}: {dev}", to_latex(&e));
                checked += 1;
            }
        }
    }
    assert!(checked > 250);
}

#[test]
fn introduced_interventions_do_not_change_the_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3);
    let mut fired = 0;
    for seed in 0..2000u64 {
        let n = rng.gen_range(3..=6);
        let g = random_admg(&mut rng, n, 0.35, 3);
        let conditional = rng.gen_bool(0.5);
        let q = random_query(&mut rng, &g, conditional);
        let t = traced(&q, &g);
        let Ok(e) = &t.result else { continue };
        let introduced: VarSet = t
            .introduced_interventions()
            .intersection(&free_variables(e))
            .cloned()
            .collect();
        if introduced.is_empty() {
            continue;
        }
        fired += 1;
        let table = joint(&random_scm(&g, seed));
        let evaluator = Evaluator::new(&table);
        let others: VarSet = free_variables(e).difference(&introduced).cloned().collect();
        for base in assignments(&others, &table) {
            let values: Vec<f64> = assignments(&introduced, &table)
                .into_iter()
                .map(|mut b| {
                    b.extend(base.clone());
                    evaluator.evaluate(e, &b).unwrap()
                })
                .collect();
            let spread =
                values.iter().cloned().fold(f64::MIN, f64::max) - values.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 1e-12, "{} on {g}: spread {spread}", to_latex(e));
        }
    }
    assert!(fired >= 20, "line 3 fired with a free variable only {fired} times");
}

#[test]
fn conditional_path_with_empty_condition_matches_unconditional() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1dc);
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let g = random_admg(&mut rng, n, 0.4, 3);
        let q = random_query(&mut rng, &g, false);
        let p = Expression::joint(g.vertices().clone()).unwrap();
        let a = idc(&q.y, &q.x, &VarSet::new(), &p, &g);
        let b = id_uncond(&q.y, &q.x, &p, &g);
        assert_eq!(a.map(|e| simplify(&e)), b.map(|e| simplify(&e)));
    }
}

#[test]
fn separated_condition_becomes_an_intervention() {
    // Z is a root with a single edge into X: Y is independent of Z once X is forced.
    let g = graph(&["Z->X", "X->Y", "W->Y", "W<->X"]);
    let p = Expression::joint(g.vertices().clone()).unwrap();
    let conditional = idc(&set(&["Y"]), &set(&["X"]), &set(&["Z"]), &p, &g).unwrap();
    let moved = id_uncond(&set(&["Y"]), &set(&["X", "Z"]), &p, &g).unwrap();
    assert_eq!(simplify(&conditional), simplify(&moved));
}

#[test]
fn isolated_condition_is_moved_immediately() {
    let g = Admg::new(set(&["X", "Y", "Z"]), [(v("X"), v("Y"))], []).unwrap();
    let q = Query::new(set(&["Y"]), set(&["X"]), set(&["Z"]));
    let t = traced(&q, &g);
    assert_eq!((t.trace[0].line, t.trace[0].added.clone()), (1, set(&["Z"])));
    assert_eq!(to_latex(&t.result.unwrap()), r"P(y|x)");
}
