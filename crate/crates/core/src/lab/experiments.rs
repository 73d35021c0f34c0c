use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use super::gallery::{
    acyclicity_sentence, complement_example_program, digraph, digraph_signature, path, unary_csp_oracle,
};
use super::sim_partition;
use crate::datalog::{derives_goal, Evaluator};
use crate::error::{Error, Result};
use crate::logic::{
    embeds_henson, eval_formula, gso_ladder_sentence, henson_outer_sentence, henson_phi,
    henson_tournament, ladder_of_word, ladder_program, SemanticsMode,
};
use crate::structure::{
    disjoint_union, enumerate_structures, word_to_structure, Elem, Structure, DEFAULT_ENUMERATION_BUDGET,
};

pub const EXPERIMENTS: [&str; 5] = ["word-ladder", "paths", "unary-sim", "henson", "acyclic"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub case: String,
    pub expected: String,
    pub observed: String,
}

impl ReportRow {
    pub fn ok(&self) -> bool {
        self.expected == self.observed
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn ok(&self) -> bool {
        self.rows.iter().all(ReportRow::ok)
    }

    pub fn deviations(&self) -> usize {
        self.rows.iter().filter(|r| !r.ok()).count()
    }

    fn row(&mut self, case: impl Into<String>, expected: impl ToString, observed: impl ToString) {
        self.rows.push(ReportRow {
            case: case.into(),
            expected: expected.to_string(),
            observed: observed.to_string(),
        });
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.case.len()).max().unwrap_or(4).max(4);
        writeln!(f, "experiment {}", self.name)?;
        writeln!(f, "{:<width$}  {:<10}  {:<10}  status", "case", "expected", "observed")?;
        for r in &self.rows {
            let status = if r.ok() { "ok" } else { "DEVIATION" };
            writeln!(f, "{:<width$}  {:<10}  {:<10}  {status}", r.case, r.expected, r.observed)?;
        }
        write!(
            f,
            "{} cases, {} deviations",
            self.rows.len(),
            self.deviations()
        )
    }
}

fn goal(b: bool) -> &'static str {
    if b {
        "GOAL"
    } else {
        "NO-GOAL"
    }
}

fn truth(b: bool) -> &'static str {
    if b {
        "TRUE"
    } else {
        "FALSE"
    }
}

/// All tournaments on `n` vertices, optionally one per isomorphism class.
pub fn tournaments(n: usize, up_to_iso: bool) -> Result<Vec<Structure>> {
    if n == 0 || n > 7 {
        return Err(Error::InvalidParameters("tournaments need 1 to 7 vertices".into()));
    }
    let pairs: Vec<(Elem, Elem)> = (0..n as Elem).tuple_combinations().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let perms: Vec<Vec<Elem>> = (0..n as Elem).permutations(n).collect();
    for mask in 0u64..1 << pairs.len() {
        let edges: Vec<(Elem, Elem)> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| if mask >> i & 1 == 1 { (y, x) } else { (x, y) })
            .collect();
        if up_to_iso {
            let canon = perms
                .iter()
                .map(|p| {
                    let mut e: Vec<(Elem, Elem)> =
                        edges.iter().map(|&(x, y)| (p[x as usize], p[y as usize])).collect();
                    e.sort_unstable();
                    e
                })
                .min()
                .expect("non-empty");
            if !seen.insert(canon) {
                continue;
            }
        }
        out.push(digraph(n, &edges)?);
    }
    Ok(out)
}

/// Whether a digraph has no directed cycle (loops included).
pub fn is_acyclic(d: &Structure) -> bool {
    let n = d.size();
    let mut indeg = vec![0usize; n];
    let edges: Vec<&Vec<Elem>> = d.facts("E").map(|f| f.iter().collect()).unwrap_or_default();
    for t in &edges {
        indeg[t[1] as usize] += 1;
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = ready.pop() {
        removed += 1;
        for t in edges.iter().filter(|t| t[0] as usize == v) {
            let w = t[1] as usize;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                ready.push(w);
            }
        }
    }
    removed == n
}

fn word_ladder() -> Result<ExperimentReport> {
    let mut r = ExperimentReport {
        name: "word-ladder".into(),
        rows: Vec::new(),
    };
    let ev = Evaluator::new(&ladder_program())?;
    for len in 2..=10 {
        for i in 0..=len {
            let w = format!("{}{}", "a".repeat(i), "b".repeat(len - i));
            let b = ladder_of_word(&word_to_structure(&w)?)?;
            r.row(format!("datalog {w}"), goal(2 * i == len), goal(ev.derives_goal(&b)?));
        }
    }
    for len in 2..=6 {
        for i in 0..=len {
            let w = format!("{}{}", "a".repeat(i), "b".repeat(len - i));
            let b = ladder_of_word(&word_to_structure(&w)?)?;
            let gso = eval_formula(&gso_ladder_sentence(), &b, SemanticsMode::Guarded)?;
            r.row(format!("gso {w}"), truth(2 * i == len), truth(gso));
        }
    }
    let fig = ladder_of_word(&word_to_structure("aaaabbbb")?)?;
    r.row("aaaabbbb ladder", "GOAL", goal(ev.derives_goal(&fig)?));
    Ok(r)
}

fn paths() -> Result<ExperimentReport> {
    let mut r = ExperimentReport {
        name: "paths".into(),
        rows: Vec::new(),
    };
    let p = complement_example_program();
    for i in 1..=6 {
        r.row(format!("P{i}"), goal(false), goal(derives_goal(&p, &path(i)?)?));
    }
    for i in 1..=6 {
        for j in 1..=6 {
            let u = disjoint_union(&path(i)?, &path(j)?)?;
            r.row(format!("P{i}+P{j}"), goal(i != j), goal(derives_goal(&p, &u)?));
        }
    }
    Ok(r)
}

/// The set of unary relations used by a structure, e.g. `{R1,R3}`.
pub fn used_relations(a: &Structure) -> String {
    let used: Vec<&str> = a
        .signature()
        .relations()
        .filter(|(name, _)| a.facts(name).is_some_and(|f| !f.is_empty()))
        .map(|(name, _)| name)
        .collect();
    format!("{{{}}}", used.join(","))
}

fn unary_sim() -> Result<ExperimentReport> {
    let mut r = ExperimentReport {
        name: "unary-sim".into(),
        rows: Vec::new(),
    };
    let o = unary_csp_oracle()?;
    for witness_bound in [2, 3] {
        let part = sim_partition(&o, 3, witness_bound, DEFAULT_ENUMERATION_BUDGET)?;
        r.row(format!("blocks at witness bound {witness_bound}"), 7, part.blocks.len());
        let mut labels: Vec<String> = Vec::new();
        let mut consistent = true;
        for block in &part.blocks {
            let used: BTreeSet<String> = block.iter().map(|&i| used_relations(&part.universe[i])).collect();
            consistent &= used.len() == 1;
            labels.extend(used);
        }
        labels.sort();
        r.row(
            format!("blocks by used relations at {witness_bound}"),
            "{R1,R2} {R1,R3} {R1} {R2,R3} {R2} {R3} {}",
            if consistent { labels.join(" ") } else { "mixed".into() },
        );
    }
    Ok(r)
}

fn henson() -> Result<ExperimentReport> {
    let mut r = ExperimentReport {
        name: "henson".into(),
        rows: Vec::new(),
    };
    for n in 2..=4 {
        let t = henson_tournament(n)?;
        let all = t.elements().map(|e| vec![e]).collect();
        let s = t.with_relation("X", 1, &all)?;
        r.row(format!("phi on T{n}"), truth(true), truth(eval_formula(&henson_phi(), &s, SemanticsMode::Standard)?));
    }
    let outer = henson_outer_sentence();
    for n in 1..=4 {
        for (i, t) in tournaments(n, true)?.iter().enumerate() {
            let expected = !embeds_henson(t)?;
            let observed = eval_formula(&outer, t, SemanticsMode::Standard)?;
            r.row(format!("outer on tournament {n}.{i}"), truth(expected), truth(observed));
        }
    }
    Ok(r)
}

fn acyclic() -> Result<ExperimentReport> {
    let mut r = ExperimentReport {
        name: "acyclic".into(),
        rows: Vec::new(),
    };
    let phi = acyclicity_sentence();
    let (mut agree, mut total) = (0, 0);
    for d in enumerate_structures(&digraph_signature(), 3, false, DEFAULT_ENUMERATION_BUDGET)? {
        total += 1;
        if eval_formula(&phi, &d, SemanticsMode::Standard)? == is_acyclic(&d) {
            agree += 1;
        }
    }
    r.row("labelled digraphs <= 3 agreeing with topological sort", total, agree);
    let cycle = digraph(3, &[(0, 1), (1, 2), (2, 0)])?;
    let chain = digraph(3, &[(0, 1), (1, 2)])?;
    r.row("directed 3-cycle", truth(false), truth(eval_formula(&phi, &cycle, SemanticsMode::Standard)?));
    r.row("2-chain", truth(true), truth(eval_formula(&phi, &chain, SemanticsMode::Standard)?));
    Ok(r)
}

pub fn run_experiment(name: &str) -> Result<ExperimentReport> {
    match name {
        "word-ladder" => word_ladder(),
        "paths" => paths(),
        "unary-sim" => unary_sim(),
        "henson" => henson(),
        "acyclic" => acyclic(),
        other => Err(Error::UnknownName(other.to_string())),
    }
}
