use itertools::Itertools;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pebblelog::canonical::canonical_eval;
use pebblelog::lab::{one_step_images, template};
use pebblelog::logic::{equiv_q, eval_formula, parse_formula, SemanticsMode, DEFAULT_EQUIV_BUDGET};
use pebblelog::pebble::{spoiler_wins, StrategySolver, DEFAULT_GAME_BUDGET};
use pebblelog::structure::{
    canonical_database_with_constants, disjoint_union, guarded_tuples, hom_search, PPAtom, PPFormula,
};
use pebblelog::{Elem, Signature, Structure, StructureBuilder};

fn sig() -> Signature {
    Signature::relational(&[("E", 2), ("R", 1)]).unwrap()
}

fn build(n: usize, bits: &[bool]) -> Structure {
    let mut b = StructureBuilder::new(sig(), n).unwrap();
    let mut it = bits.iter();
    for x in 0..n as Elem {
        for y in 0..n as Elem {
            if *it.next().unwrap() {
                b.fact("E", &[x, y]).unwrap();
            }
        }
    }
    for x in 0..n as Elem {
        if *it.next().unwrap() {
            b.fact("R", &[x]).unwrap();
        }
    }
    b.build().unwrap()
}

fn structure(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| prop::collection::vec(prop::bool::weighted(0.35), n * n + n).prop_map(move |bits| build(n, &bits)))
}

fn digraph(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(prop::bool::weighted(0.4), n * n).prop_map(move |bits| {
            let mut b = StructureBuilder::new(Signature::relational(&[("E", 2)]).unwrap(), n).unwrap();
            for (i, &on) in bits.iter().enumerate() {
                if on {
                    b.fact("E", &[(i / n) as Elem, (i % n) as Elem]).unwrap();
                }
            }
            b.build().unwrap()
        })
    })
}

fn maps(a: &Structure, b: &Structure) -> bool {
    hom_search(a, b).unwrap().is_some()
}

fn hom_equivalent(a: &Structure, b: &Structure) -> bool {
    a.size() == b.size() && a.fact_count() == b.fact_count() && maps(a, b) && maps(b, a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disjoint_union_commutes(a in structure(3), b in structure(3)) {
        let ab = disjoint_union(&a, &b).unwrap();
        let ba = disjoint_union(&b, &a).unwrap();
        prop_assert!(hom_equivalent(&ab, &ba));
    }

    #[test]
    fn disjoint_union_associates(a in structure(2), b in structure(2), c in structure(2)) {
        let left = disjoint_union(&disjoint_union(&a, &b).unwrap(), &c).unwrap();
        let right = disjoint_union(&a, &disjoint_union(&b, &c).unwrap()).unwrap();
        prop_assert!(hom_equivalent(&left, &right));
    }

    #[test]
    fn homomorphisms_compose(a in structure(4), b in structure(4), c in structure(4)) {
        if maps(&a, &b) && maps(&b, &c) {
            prop_assert!(maps(&a, &c));
        }
    }

    #[test]
    fn inclusion_into_union(a in structure(4), b in structure(4)) {
        prop_assert!(maps(&a, &disjoint_union(&a, &b).unwrap()));
    }

    #[test]
    fn singletons_are_guarded(a in structure(5)) {
        let g = guarded_tuples(&a, 1);
        let all: std::collections::BTreeSet<Vec<Elem>> = a.elements().map(|e| vec![e]).collect();
        prop_assert_eq!(g, all);
    }

    #[test]
    fn game_order_does_not_matter(a in digraph(3), t in 0usize..5, seed in any::<u64>()) {
        let b = template(["K2", "K3", "loop", "edgeless1", "P3"][t]).unwrap();
        let solver = StrategySolver::new(&a, &b, 1, 2, DEFAULT_GAME_BUDGET).unwrap();
        let mut order: Vec<usize> = (0..solver.domain_count()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(solver.solve(), solver.solve_in_order(&order));
    }

    #[test]
    fn template_monotonicity(a in digraph(3), b in digraph(2), c in digraph(2)) {
        if maps(&b, &c) {
            for (l, k) in [(1, 2), (2, 3)] {
                if spoiler_wins(&a, &c, l, k, DEFAULT_GAME_BUDGET).unwrap() {
                    prop_assert!(spoiler_wins(&a, &b, l, k, DEFAULT_GAME_BUDGET).unwrap());
                }
            }
        }
    }

    #[test]
    fn canonical_class_is_hom_closed(a in digraph(3), t in 0usize..5) {
        let b = template(["K2", "K3", "loop", "edgeless1", "P3"][t]).unwrap();
        if canonical_eval(&a, &b, 1, 2, DEFAULT_GAME_BUDGET).unwrap() {
            for img in one_step_images(&a, 3).unwrap() {
                prop_assert!(canonical_eval(&img, &b, 1, 2, DEFAULT_GAME_BUDGET).unwrap());
            }
        }
    }

    #[test]
    fn monadic_sentences_ignore_guarding(a in structure(4), f in 0usize..4) {
        let phi = parse_formula([
            "forall X:1 nonempty . exists x in X . forall y in X . ~E(x,y)",
            "exists X:1 . forall x y . E(x,y) -> ~(X(x) <-> X(y))",
            "exists X:1 . (forall x . R(x) -> X(x)) & (forall x y . X(x) & E(x,y) -> X(y)) & exists z . ~X(z)",
            "forall X:1 . (exists x . X(x) & R(x)) | (forall x . X(x) -> ~R(x))",
        ][f]).unwrap();
        prop_assert_eq!(
            eval_formula(&phi, &a, SemanticsMode::Standard).unwrap(),
            eval_formula(&phi, &a, SemanticsMode::Guarded).unwrap()
        );
    }

    #[test]
    fn rank_equivalence_is_refined(a in structure(2), b in structure(2), c in structure(2)) {
        for q in 0..2 {
            let ab = equiv_q(&a, &b, q + 1, 1, DEFAULT_EQUIV_BUDGET).unwrap().equivalent;
            if ab {
                prop_assert!(equiv_q(&a, &b, q, 1, DEFAULT_EQUIV_BUDGET).unwrap().equivalent);
            }
            let bc = equiv_q(&b, &c, q, 1, DEFAULT_EQUIV_BUDGET).unwrap().equivalent;
            let ab = equiv_q(&a, &b, q, 1, DEFAULT_EQUIV_BUDGET).unwrap().equivalent;
            let ba = equiv_q(&b, &a, q, 1, DEFAULT_EQUIV_BUDGET).unwrap().equivalent;
            prop_assert_eq!(ab, ba);
            if ab && bc {
                prop_assert!(equiv_q(&a, &c, q, 1, DEFAULT_EQUIV_BUDGET).unwrap().equivalent);
            }
        }
    }
}

/// Direct evaluation of `∃ bound ∧ atoms` under an assignment of the free variables.
fn pp_holds(a: &Structure, vars: &[&str], nfree: usize, atoms: &[PPAtom], free_vals: &[Elem]) -> bool {
    let nbound = vars.len() - nfree;
    (0..nbound).map(|_| a.elements()).multi_cartesian_product().any(|bound| {
        let val = |v: &str| {
            let i = vars.iter().position(|w| *w == v).unwrap();
            if i < nfree {
                free_vals[i]
            } else {
                bound[i - nfree]
            }
        };
        atoms.iter().all(|at| {
            let t: Vec<Elem> = at.args.iter().map(|v| val(v)).collect();
            a.holds(&at.rel, &t)
        })
    })
}

#[test]
fn chandra_merlin_on_small_formulas() {
    let vars = ["x", "y", "z", "w"];
    let mut candidates = Vec::new();
    for &u in &vars {
        candidates.push(PPAtom::new("R", &[u]));
        for &v in &vars {
            candidates.push(PPAtom::new("E", &[u, v]));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let targets: Vec<Structure> = (0..6)
        .map(|i| {
            let n = 1 + i % 3;
            let bits: Vec<bool> = (0..n * n + n).map(|_| rand::Rng::gen_bool(&mut rng, 0.4)).collect();
            build(n, &bits)
        })
        .collect();
    for trial in 0..300 {
        let nvars = 1 + trial % 4;
        let nfree = trial % (nvars + 1);
        let vs = &vars[..nvars];
        let pool: Vec<&PPAtom> = candidates.iter().filter(|a| a.args.iter().all(|v| vs.contains(&v.as_str()))).collect();
        let count = 1 + trial % 3;
        let atoms: Vec<PPAtom> = pool.choose_multiple(&mut rng, count).map(|a| (*a).clone()).collect();
        let phi = PPFormula::new(
            sig(),
            vs[..nfree].iter().map(|s| s.to_string()).collect(),
            vs[nfree..].iter().map(|s| s.to_string()).collect(),
            atoms.clone(),
        )
        .unwrap();
        let db = canonical_database_with_constants(&phi).unwrap();
        for a in &targets {
            for free_vals in (0..nfree).map(|_| a.elements()).multi_cartesian_product() {
                let consts: Vec<(&str, Elem)> = vs[..nfree].iter().copied().zip(free_vals.iter().copied()).collect();
                let pointed = a.with_constants(&consts).unwrap();
                let direct = pp_holds(a, vs, nfree, &atoms, &free_vals);
                assert_eq!(maps(&db, &pointed), direct, "{phi:?}");
            }
        }
        // a pp-formula holds in its own canonical database at its own variables
        let own = canonical_database_with_constants(&phi).unwrap();
        let ids: Vec<Elem> = (0..nfree as Elem).collect();
        assert!(pp_holds(&own, vs, nfree, &atoms, &ids));
    }
}

#[test]
fn pebble_monotone_in_parameters() {
    let e = Signature::relational(&[("E", 2)]).unwrap();
    let small: Vec<Structure> = pebblelog::structure::enumerate_structures(&e, 3, true, pebblelog::DEFAULT_ENUMERATION_BUDGET)
        .unwrap()
        .collect();
    let templates: Vec<&Structure> = small.iter().filter(|s| s.size() <= 2).collect();
    for a in &small {
        for b in &templates {
            let w12 = spoiler_wins(a, b, 1, 2, DEFAULT_GAME_BUDGET).unwrap();
            let w13 = spoiler_wins(a, b, 1, 3, DEFAULT_GAME_BUDGET).unwrap();
            let w23 = spoiler_wins(a, b, 2, 3, DEFAULT_GAME_BUDGET).unwrap();
            assert!(!w12 || (w13 && w23));
            assert!(!w13 || w23);
        }
    }
}
