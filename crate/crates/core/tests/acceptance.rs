//! The twelve acceptance criteria. Each prints one PASS/FAIL line; the
//! process exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use pebblelog::canonical::{canonical_eval, soundness_check, synthesize_canonical, DEFAULT_SYNTHESIS_BUDGET};
use pebblelog::datalog::{intersect_program, union_program, DatalogProgram, Evaluator, Term, Width};
use pebblelog::lab::{
    acyclicity_sentence, complement_example_program, crb_program, digraph_signature, edge_program,
    hom_closure_check, loop_program, one_step_images, path, sim_partition, template, tournaments,
    unary_csp_oracle, unary_point, unary_signature, ClassOracle, Direction,
};
use pebblelog::logic::{
    embeds_henson, eval_formula, gso_ladder_sentence, henson_outer_sentence, henson_phi, henson_tournament,
    ladder_of_word, ladder_program, EquivChecker, SemanticsMode, DEFAULT_EQUIV_BUDGET,
};
use pebblelog::pebble::{spoiler_wins, DEFAULT_GAME_BUDGET};
use pebblelog::structure::{disjoint_union, enumerate_structures, hom_search, word_to_structure, StructureBuilder};
use pebblelog::{Elem, Signature, Structure, DEFAULT_ENUMERATION_BUDGET};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every criterion tolerates exactly this many violations.
const TOLERATED_VIOLATIONS: usize = 0;
const SEED: u64 = 0x5eed_2024;

struct Outcome {
    checked: usize,
    violations: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            checked: 0,
            violations: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

fn digraphs(max: usize, iso: bool) -> Vec<Structure> {
    enumerate_structures(&digraph_signature(), max, iso, DEFAULT_ENUMERATION_BUDGET)
        .unwrap()
        .collect()
}

fn structures(sig: &Signature, max: usize, iso: bool) -> Vec<Structure> {
    enumerate_structures(sig, max, iso, DEFAULT_ENUMERATION_BUDGET).unwrap().collect()
}

const TEMPLATES: [&str; 5] = ["K2", "K3", "loop", "edgeless1", "P3"];
const PARAMS: [(usize, usize); 2] = [(1, 2), (2, 3)];

fn c1_canonical_vs_game() -> Outcome {
    let mut o = Outcome::new();
    let univ = digraphs(4, true);
    for t in TEMPLATES {
        let b = template(t).unwrap();
        for (l, k) in PARAMS {
            for a in &univ {
                let x = canonical_eval(a, &b, l, k, DEFAULT_GAME_BUDGET).unwrap();
                let y = spoiler_wins(a, &b, l, k, DEFAULT_GAME_BUDGET).unwrap();
                o.check(x == y, || format!("{t} ({l},{k}) canonical={x} game={y} on\n{a:?}"));
            }
        }
    }
    o
}

fn c2_game_soundness() -> Outcome {
    let mut o = Outcome::new();
    let univ = digraphs(4, true);
    for t in TEMPLATES {
        let b = template(t).unwrap();
        for (l, k) in PARAMS {
            for a in &univ {
                if spoiler_wins(a, &b, l, k, DEFAULT_GAME_BUDGET).unwrap() {
                    let hom = hom_search(a, &b).unwrap();
                    o.check(hom.is_none(), || format!("{t} ({l},{k}) spoiler wins but a hom exists"));
                } else {
                    o.checked += 1;
                }
            }
        }
    }
    o
}

fn is_anbn(w: &str) -> bool {
    let n = w.len() / 2;
    n >= 1 && w.len() == 2 * n && w[..n].bytes().all(|c| c == b'a') && w[n..].bytes().all(|c| c == b'b')
}

fn c3_word_ladder() -> Outcome {
    let mut o = Outcome::new();
    let ev = Evaluator::new(&ladder_program()).unwrap();
    for len in 2..=10 {
        for i in 0..=len {
            let w = format!("{}{}", "a".repeat(i), "b".repeat(len - i));
            let b = ladder_of_word(&word_to_structure(&w).unwrap()).unwrap();
            let got = ev.derives_goal(&b).unwrap();
            o.check(got == is_anbn(&w), || format!("{w}: goal={got}"));
        }
    }
    let fig = ladder_of_word(&word_to_structure("aaaabbbb").unwrap()).unwrap();
    o.check(ev.derives_goal(&fig).unwrap(), || "the aaaabbbb ladder does not yield GOAL".into());
    o
}

fn all_words(max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for len in 1..=max {
        for bits in 0u32..1 << len {
            out.push((0..len).map(|i| if bits >> (len - 1 - i) & 1 == 1 { 'b' } else { 'a' }).collect());
        }
    }
    out
}

fn c4_gso_ladder() -> Outcome {
    let mut o = Outcome::new();
    let ev = Evaluator::new(&ladder_program()).unwrap();
    let phi = gso_ladder_sentence();
    for w in all_words(8) {
        let b = ladder_of_word(&word_to_structure(&w).unwrap()).unwrap();
        let datalog = ev.derives_goal(&b).unwrap();
        let gso = eval_formula(&phi, &b, SemanticsMode::Guarded).unwrap();
        o.check(datalog == gso, || format!("{w}: datalog={datalog} gso={gso}"));
    }
    o
}

fn c5_paths() -> Outcome {
    let mut o = Outcome::new();
    let ev = Evaluator::new(&complement_example_program()).unwrap();
    for n in 1..=6 {
        let got = ev.derives_goal(&path(n).unwrap()).unwrap();
        o.check(!got, || format!("P{n}: goal"));
    }
    for i in 1..=6 {
        for j in 1..=6 {
            let u = disjoint_union(&path(i).unwrap(), &path(j).unwrap()).unwrap();
            let got = ev.derives_goal(&u).unwrap();
            o.check(got == (i != j), || format!("P{i}+P{j}: goal={got}"));
        }
    }
    o
}

/// The block a member belongs to according to the closed-form description of the classes.
fn unary_block_label(a: &Structure) -> String {
    let maps = |b: &Structure| hom_search(a, b).unwrap().is_some();
    let empty = StructureBuilder::new(unary_signature(), 1).unwrap().build().unwrap();
    if maps(&empty) {
        return "I".into();
    }
    for i in 1..=3 {
        if maps(&unary_point(i).unwrap()) {
            return format!("S{i}");
        }
    }
    for (i, j) in [(1, 2), (1, 3), (2, 3)] {
        let u = disjoint_union(&unary_point(i).unwrap(), &unary_point(j).unwrap()).unwrap();
        if maps(&u) {
            return format!("S{i}+S{j}");
        }
    }
    "non-member".into()
}

fn c6_unary_sim() -> Outcome {
    let mut o = Outcome::new();
    let expected: BTreeSet<String> =
        ["I", "S1", "S2", "S3", "S1+S2", "S1+S3", "S2+S3"].iter().map(|s| s.to_string()).collect();
    let oracle = unary_csp_oracle().unwrap();
    let mut previous: Option<Vec<Vec<usize>>> = None;
    for witness_bound in [2, 3] {
        let part = sim_partition(&oracle, 3, witness_bound, DEFAULT_ENUMERATION_BUDGET).unwrap();
        o.check(part.blocks.len() == 7, || format!("{} blocks at witness bound {witness_bound}", part.blocks.len()));
        let mut labels = BTreeSet::new();
        for block in &part.blocks {
            let ls: BTreeSet<String> = block.iter().map(|&i| unary_block_label(&part.universe[i])).collect();
            o.check(ls.len() == 1, || format!("block mixes {ls:?}"));
            labels.extend(ls);
        }
        o.check(labels == expected, || format!("block labels {labels:?}"));
        if let Some(prev) = &previous {
            o.check(prev == &part.blocks, || "partition changed from witness bound 2 to 3".into());
        }
        previous = Some(part.blocks);
    }
    o
}

fn acyclic_oracle(d: &Structure) -> bool {
    // Kahn's algorithm on an adjacency matrix
    let n = d.size();
    let mut indeg: Vec<usize> = (0..n).map(|v| (0..n).filter(|&u| d.holds("E", &[u as Elem, v as Elem])).count()).collect();
    let mut done = vec![false; n];
    for _ in 0..n {
        match (0..n).find(|&v| !done[v] && indeg[v] == 0) {
            Some(v) => {
                done[v] = true;
                for w in 0..n {
                    if d.holds("E", &[v as Elem, w as Elem]) {
                        indeg[w] -= 1;
                    }
                }
            }
            None => return false,
        }
    }
    true
}

fn c7_acyclicity() -> Outcome {
    let mut o = Outcome::new();
    let phi = acyclicity_sentence();
    for d in digraphs(4, false) {
        let got = eval_formula(&phi, &d, SemanticsMode::Standard).unwrap();
        let want = acyclic_oracle(&d);
        o.check(got == want, || format!("sentence={got} oracle={want} on {d:?}"));
    }
    o
}

fn c8_henson() -> Outcome {
    let mut o = Outcome::new();
    for n in 2..=4 {
        let t = henson_tournament(n).unwrap();
        let all = t.elements().map(|e| vec![e]).collect();
        let s = t.with_relation("X", 1, &all).unwrap();
        o.check(eval_formula(&henson_phi(), &s, SemanticsMode::Standard).unwrap(), || format!("phi rejects T{n}"));
    }
    let outer = henson_outer_sentence();
    for size in 1..=5 {
        for t in tournaments(size, false).unwrap() {
            let got = eval_formula(&outer, &t, SemanticsMode::Standard).unwrap();
            let want = !embeds_henson(&t).unwrap();
            o.check(got == want, || format!("outer={got} oracle={want} on {t:?}"));
        }
    }
    o
}

fn semantics_universe(p: &DatalogProgram) -> Vec<Structure> {
    if p.edb().relation_count() == 4 {
        structures(p.edb(), 2, true)
    } else {
        structures(p.edb(), 3, false)
    }
}

fn max_width(a: Width, b: Width) -> Width {
    Width {
        l: a.l.max(b.l),
        k: a.k.max(b.k),
    }
}

fn gallery_programs() -> Vec<(&'static str, DatalogProgram)> {
    let k2 = synthesize_canonical(&template("K2").unwrap(), 1, 2, DEFAULT_SYNTHESIS_BUDGET).unwrap();
    vec![
        ("ladder", ladder_program()),
        ("crb", crb_program()),
        ("complement-example", complement_example_program()),
        ("edge", edge_program()),
        ("loop", loop_program()),
        ("canonical-K2", k2.program),
    ]
}

fn c9_union_intersection() -> Outcome {
    let mut o = Outcome::new();
    let progs = gallery_programs();
    for (n1, p1) in &progs {
        for (n2, p2) in &progs {
            if p1.edb() != p2.edb() {
                continue;
            }
            let u = union_program(p1, p2).unwrap();
            let i = intersect_program(p1, p2).unwrap();
            let w = max_width(p1.width(), p2.width());
            o.check(u.width() == w, || format!("{n1} u {n2}: width {}", u.width()));
            o.check(i.width() == w, || format!("{n1} n {n2}: width {}", i.width()));
            let (e1, e2) = (Evaluator::new(p1).unwrap(), Evaluator::new(p2).unwrap());
            let (eu, ei) = (Evaluator::new(&u).unwrap(), Evaluator::new(&i).unwrap());
            for a in semantics_universe(p1) {
                let (g1, g2) = (e1.derives_goal(&a).unwrap(), e2.derives_goal(&a).unwrap());
                let gu = eu.derives_goal(&a).unwrap();
                let gi = ei.derives_goal(&a).unwrap();
                o.check(gu == (g1 || g2), || format!("{n1} u {n2} wrong on {a:?}"));
                o.check(gi == (g1 && g2), || format!("{n1} n {n2} wrong on {a:?}"));
            }
        }
    }
    o
}

fn c10_union_composition() -> Outcome {
    let mut o = Outcome::new();
    let sig = Signature::relational(&[("E", 2), ("R1", 1)]).unwrap();
    let univ = structures(&sig, 2, false);
    let mut c = EquivChecker::new(1, DEFAULT_EQUIV_BUDGET);
    let ids: Vec<usize> = univ.iter().map(|s| c.add(s.clone()).unwrap()).collect();
    let mut unions = Vec::new();
    for a in &univ {
        for b in &univ {
            unions.push(c.add(disjoint_union(a, b).unwrap()).unwrap());
        }
    }
    for q in 0..=2 {
        let types: Vec<u32> = ids.iter().map(|&i| c.type_id(i, q).unwrap()).collect();
        let mut table: HashMap<(u32, u32), u32> = HashMap::new();
        for (ai, &ta) in types.iter().enumerate() {
            for (bi, &tb) in types.iter().enumerate() {
                let tu = c.type_id(unions[ai * univ.len() + bi], q).unwrap();
                let seen = *table.entry((ta, tb)).or_insert(tu);
                o.check(seen == tu, || format!("q={q}: union type depends on more than the part types"));
            }
        }
    }
    o
}

fn c11_canonicity() -> Outcome {
    let mut o = Outcome::new();
    let b = template("edgeless1").unwrap();
    let hand = edge_program();
    o.check(hand.width() == Width { l: 1, k: 2 }, || format!("hand-written width {}", hand.width()));
    let cex = soundness_check(&hand, &b, 4, DEFAULT_ENUMERATION_BUDGET).unwrap();
    o.check(cex.is_none(), || "hand-written program is unsound".into());
    let canon = synthesize_canonical(&b, 1, 2, DEFAULT_SYNTHESIS_BUDGET).unwrap();
    let ev_hand = Evaluator::new(&hand).unwrap();
    let ev_canon = Evaluator::new(&canon.program).unwrap();
    for a in digraphs(4, true) {
        if ev_hand.derives_goal(&a).unwrap() {
            let by_propagation = canonical_eval(&a, &b, 1, 2, DEFAULT_GAME_BUDGET).unwrap();
            let by_rules = ev_canon.derives_goal(&a).unwrap();
            o.check(by_propagation && by_rules, || format!("canonical misses {a:?}"));
        } else {
            o.checked += 1;
        }
    }
    o
}

type FactSet = HashSet<(String, Vec<Elem>)>;

fn fact_set(s: &Structure) -> FactSet {
    s.all_facts().map(|(r, t)| (r.to_string(), t.clone())).collect()
}

/// Whether every instance of every rule is satisfied by `facts`.
fn is_model(p: &DatalogProgram, n: usize, facts: &FactSet) -> bool {
    for rule in p.rules() {
        let vars: Vec<String> = rule.variables().iter().map(|v| v.to_string()).collect();
        let mut asg = vec![0 as Elem; vars.len()];
        let ground = |atom: &pebblelog::datalog::Atom, asg: &[Elem]| -> (String, Vec<Elem>) {
            let args = atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => asg[vars.iter().position(|w| w == v).unwrap()],
                    Term::Const(_) => unreachable!("gallery programs are constant-free"),
                })
                .collect();
            (atom.rel.clone(), args)
        };
        loop {
            if rule.body.iter().all(|a| facts.contains(&ground(a, &asg))) && !facts.contains(&ground(&rule.head, &asg)) {
                return false;
            }
            let mut i = 0;
            while i < asg.len() {
                asg[i] += 1;
                if (asg[i] as usize) < n {
                    break;
                }
                asg[i] = 0;
                i += 1;
            }
            if i == asg.len() {
                break;
            }
        }
    }
    true
}

fn random_structure(sig: &Signature, n: usize, rng: &mut ChaCha8Rng) -> Structure {
    let mut b = StructureBuilder::new(sig.clone(), n).unwrap();
    for (rel, arity) in sig.relations() {
        let mut t = vec![0 as Elem; arity];
        loop {
            if rng.gen_bool(0.3) {
                b.fact(rel, &t).unwrap();
            }
            let mut i = 0;
            while i < arity {
                t[i] += 1;
                if (t[i] as usize) < n {
                    break;
                }
                t[i] = 0;
                i += 1;
            }
            if i == arity {
                break;
            }
        }
    }
    b.build().unwrap()
}

/// Structures for the engine checks: all iso types up to 3 elements, or
/// for the four-relation ladder signature all up to 2 elements plus a
/// seeded sample of 3-element structures.
fn engine_universe(p: &DatalogProgram, rng: &mut ChaCha8Rng) -> Vec<Structure> {
    if p.edb().relation_count() == 4 {
        let mut u = structures(p.edb(), 2, true);
        u.extend((0..300).map(|_| random_structure(p.edb(), 3, rng)));
        u
    } else {
        structures(p.edb(), 3, true)
    }
}

fn one_fact_supersets(a: &Structure) -> Vec<Structure> {
    let n = a.size();
    let mut out = Vec::new();
    for (rel, arity) in a.signature().relations() {
        let tuples: Vec<Vec<Elem>> = if arity == 0 {
            vec![Vec::new()]
        } else {
            (0..arity)
                .map(|_| 0..n as Elem)
                .fold(vec![Vec::new()], |acc, r| {
                    acc.into_iter()
                        .flat_map(|t| r.clone().map(move |e| [t.clone(), vec![e]].concat()))
                        .collect()
                })
        };
        for t in tuples {
            if !a.holds(rel, &t) {
                let mut b = a.to_builder();
                b.fact(rel, &t).unwrap();
                out.push(b.build().unwrap());
            }
        }
    }
    out
}

fn c12_engine_invariants() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, p) in gallery_programs() {
        let ev = Evaluator::new(&p).unwrap();
        let shuffled: Vec<Evaluator> = (0..10)
            .map(|_| {
                let mut rules = p.rules().to_vec();
                rules.shuffle(&mut rng);
                Evaluator::new(&p.with_rules(rules).unwrap()).unwrap()
            })
            .collect();
        let univ = engine_universe(&p, &mut rng);
        for a in &univ {
            let lfp = ev.least_fixed_point(a).unwrap();
            let facts = fact_set(&lfp);
            // minimality: a model, and no derived fact can be dropped
            o.check(is_model(&p, a.size(), &facts), || format!("{name}: not a model on {a:?}"));
            let edb = fact_set(a);
            for f in facts.iter().filter(|f| !edb.contains(*f)) {
                let mut smaller = facts.clone();
                smaller.remove(f);
                o.check(!is_model(&p, a.size(), &smaller), || format!("{name}: {f:?} is not needed"));
            }
            for s in &shuffled {
                o.check(fact_set(&s.least_fixed_point(a).unwrap()) == facts, || format!("{name}: rule order matters"));
            }
            for bigger in one_fact_supersets(a) {
                let big = fact_set(&ev.least_fixed_point(&bigger).unwrap());
                o.check(facts.is_subset(&big), || format!("{name}: not monotone"));
            }
        }
        // homomorphism closure of the class defined by the program
        let oracle = ClassOracle::program(name, &p).unwrap();
        if p.edb().relation_count() == 4 {
            let report = hom_closure_check(&oracle, 2, Direction::Class, DEFAULT_ENUMERATION_BUDGET).unwrap();
            o.check(report.is_closed(), || format!("{name}: not hom-closed at 2 elements"));
            for a in univ.iter().filter(|a| a.size() == 3) {
                if ev.derives_goal(a).unwrap() {
                    for img in one_step_images(a, 3).unwrap() {
                        o.check(ev.derives_goal(&img).unwrap(), || format!("{name}: image leaves the class"));
                    }
                }
            }
        } else {
            let members: Vec<bool> = univ.iter().map(|a| ev.derives_goal(a).unwrap()).collect();
            for (i, a) in univ.iter().enumerate() {
                if !members[i] {
                    continue;
                }
                for (j, b) in univ.iter().enumerate() {
                    if !members[j] && hom_search(a, b).unwrap().is_some() {
                        o.check(false, || format!("{name}: hom from member to non-member"));
                    } else {
                        o.checked += 1;
                    }
                }
            }
        }
    }
    o
}

struct Criterion {
    id: usize,
    title: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "canonical propagation agrees with the pebble game", limit: Duration::from_secs(300), run: c1_canonical_vs_game },
        Criterion { id: 2, title: "Spoiler wins only without a homomorphism", limit: Duration::from_secs(300), run: c2_game_soundness },
        Criterion { id: 3, title: "ladder program accepts exactly a^n b^n", limit: Duration::from_secs(30), run: c3_word_ladder },
        Criterion { id: 4, title: "guarded ladder sentence agrees with the program", limit: Duration::from_secs(120), run: c4_gso_ladder },
        Criterion { id: 5, title: "path unions and the complement example", limit: Duration::from_secs(10), run: c5_paths },
        Criterion { id: 6, title: "unary example has seven stable blocks", limit: Duration::from_secs(60), run: c6_unary_sim },
        Criterion { id: 7, title: "acyclicity sentence matches topological sort", limit: Duration::from_secs(300), run: c7_acyclicity },
        Criterion { id: 8, title: "tournament sentence matches the embedding oracle", limit: Duration::from_secs(600), run: c8_henson },
        Criterion { id: 9, title: "union and intersection programs", limit: Duration::from_secs(300), run: c9_union_intersection },
        Criterion { id: 10, title: "rank types compose over disjoint unions", limit: Duration::from_secs(300), run: c10_union_composition },
        Criterion { id: 11, title: "canonical program contains a sound hand-written one", limit: Duration::from_secs(300), run: c11_canonicity },
        Criterion { id: 12, title: "Datalog engine invariants", limit: Duration::from_secs(600), run: c12_engine_invariants },
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = Vec::new();
    let mut summary = BTreeMap::new();
    for c in &criteria {
        if filter.as_ref().is_some_and(|f| f != &c.id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let out = (c.run)();
        let took = start.elapsed();
        let pass = out.violations.len() <= TOLERATED_VIOLATIONS && took <= c.limit;
        println!(
            "criterion {:>2} {} {}: {} checks, {} violations (tolerance {}), {:.1}s (limit {}s)",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            out.checked,
            out.violations.len(),
            TOLERATED_VIOLATIONS,
            took.as_secs_f64(),
            c.limit.as_secs()
        );
        for v in out.violations.iter().take(3) {
            println!("    {v}");
        }
        if !pass {
            failed.push(c.id);
        }
        summary.insert(c.id, pass);
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", summary.len());
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
