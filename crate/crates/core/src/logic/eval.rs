use std::collections::BTreeSet;

use itertools::Itertools;

use super::ground::ground_and_solve;
use super::Formula;
use crate::error::{Budget, Error, Result};
use crate::structure::{guarded_tuples, Elem, Structure, Tuple};

/// Above this many second-order branches `Route::Auto` grounds to SAT.
pub const AUTO_BRUTE_LIMIT: u128 = 1 << 10;

/// Default cap on the estimated number of second-order branches.
pub const DEFAULT_SO_BUDGET: Budget = Budget(1 << 20);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemanticsMode {
    Standard,
    /// Second-order variables range over guarded relations only.
    Guarded,
}

/// How second-order quantifiers are decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Brute force when within budget, grounding otherwise.
    Auto,
    /// Enumerate every relation in popcount-then-lexicographic order.
    Brute,
    /// Ground to propositional logic and call a SAT solver; needs all
    /// second-order quantifiers to have the same polarity.
    Ground,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOutcome {
    pub value: bool,
    pub route: Route,
    /// For an outermost second-order quantifier: the witness relation of a
    /// true `∃` or the counterexample of a false `∀`.
    pub witness: Option<(String, BTreeSet<Tuple>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Term {
    Var(usize),
    Const(Elem),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum RelRef {
    Struct(usize),
    So(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    True,
    False,
    Rel(RelRef, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
    SoExists(usize, usize, Box<Node>),
    SoForall(usize, usize, Box<Node>),
}

/// A formula resolved against one structure.
pub(crate) struct Compiled {
    pub n: usize,
    pub root: Node,
    pub fo_slots: usize,
    pub so_slots: Vec<(String, usize)>,
    /// Structure relations as bitsets over tuple indices.
    pub rels: Vec<Vec<u64>>,
    /// Candidate tuple indices per arity, for second-order quantifiers.
    pub candidates: Vec<Vec<usize>>,
    /// The slot of an outermost second-order quantifier, if any.
    pub trace_slot: Option<usize>,
}

pub(crate) fn tuple_index(n: usize, t: &[Elem]) -> usize {
    t.iter().fold(0, |acc, &e| acc * n + e as usize)
}

pub(crate) fn index_tuple(n: usize, arity: usize, mut idx: usize) -> Tuple {
    let mut t = vec![0; arity];
    for slot in t.iter_mut().rev() {
        *slot = (idx % n) as Elem;
        idx /= n;
    }
    t
}

pub(crate) fn bit(set: &[u64], i: usize) -> bool {
    set[i / 64] >> (i % 64) & 1 == 1
}

fn words(bits: usize) -> usize {
    bits.div_ceil(64).max(1)
}

struct Scope<'a> {
    a: &'a Structure,
    fo: Vec<(String, usize)>,
    so: Vec<(String, usize, usize)>,
    fo_slots: usize,
    so_slots: Vec<(String, usize)>,
    assignment: &'a [(&'a str, Elem)],
    under_fo: usize,
    trace_slot: Option<usize>,
}

impl Scope<'_> {
    fn term(&self, name: &str) -> Result<Term> {
        if let Some((_, s)) = self.fo.iter().rev().find(|(v, _)| v == name) {
            return Ok(Term::Var(*s));
        }
        if let Some((_, e)) = self.assignment.iter().find(|(v, _)| *v == name) {
            return Ok(Term::Const(*e));
        }
        if let Some(e) = self.a.constant(name) {
            return Ok(Term::Const(e));
        }
        Err(Error::FreeVariables(vec![name.to_string()]))
    }

    fn compile(&mut self, f: &Formula) -> Result<Node> {
        use Formula as F;
        Ok(match f {
            F::True => Node::True,
            F::False => Node::False,
            F::Atom(r, args) => {
                let terms = args.iter().map(|v| self.term(v)).collect::<Result<Vec<_>>>()?;
                let (rel, arity) = if let Some((_, ar, slot)) = self.so.iter().rev().find(|(v, _, _)| v == r) {
                    (RelRef::So(*slot), *ar)
                } else {
                    let sig = self.a.signature();
                    let idx = sig
                        .relation_index(r)
                        .ok_or_else(|| Error::UndeclaredSymbol(r.clone()))?;
                    (RelRef::Struct(idx), sig.arity(r).unwrap_or(0))
                };
                if arity != terms.len() {
                    return Err(Error::ArityClash {
                        name: r.clone(),
                        declared: arity,
                        used: terms.len(),
                    });
                }
                Node::Rel(rel, terms)
            }
            F::Eq(x, y) => Node::Eq(self.term(x)?, self.term(y)?),
            F::Not(g) => Node::Not(Box::new(self.compile(g)?)),
            F::And(x, y) => Node::And(Box::new(self.compile(x)?), Box::new(self.compile(y)?)),
            F::Or(x, y) => Node::Or(Box::new(self.compile(x)?), Box::new(self.compile(y)?)),
            F::Implies(x, y) => Node::Implies(Box::new(self.compile(x)?), Box::new(self.compile(y)?)),
            F::Iff(x, y) => Node::Iff(Box::new(self.compile(x)?), Box::new(self.compile(y)?)),
            F::Exists(v, g) | F::Forall(v, g) => {
                let slot = self.fo_slots;
                self.fo_slots += 1;
                self.fo.push((v.clone(), slot));
                self.under_fo += 1;
                let body = self.compile(g);
                self.under_fo -= 1;
                self.fo.pop();
                let body = Box::new(body?);
                if matches!(f, F::Exists(..)) {
                    Node::Exists(slot, body)
                } else {
                    Node::Forall(slot, body)
                }
            }
            F::SoExists(v, r, g) | F::SoForall(v, r, g) => {
                let slot = self.so_slots.len();
                self.so_slots.push((v.clone(), *r));
                if self.under_fo == 0 && self.trace_slot.is_none() {
                    self.trace_slot = Some(slot);
                }
                self.so.push((v.clone(), *r, slot));
                let body = self.compile(g);
                self.so.pop();
                let body = Box::new(body?);
                if matches!(f, F::SoExists(..)) {
                    Node::SoExists(slot, *r, body)
                } else {
                    Node::SoForall(slot, *r, body)
                }
            }
        })
    }
}

pub(crate) fn compile(
    phi: &Formula,
    a: &Structure,
    mode: SemanticsMode,
    assignment: &[(&str, Elem)],
) -> Result<Compiled> {
    let free: Vec<String> = phi
        .free_vars()
        .into_iter()
        .filter(|v| a.constant(v).is_none() && !assignment.iter().any(|(w, _)| w == v))
        .collect();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free));
    }
    let mut scope = Scope {
        a,
        fo: Vec::new(),
        so: Vec::new(),
        fo_slots: 0,
        so_slots: Vec::new(),
        assignment,
        under_fo: 0,
        trace_slot: None,
    };
    let root = scope.compile(phi)?;
    let n = a.size();
    let rels = (0..a.signature().relation_count())
        .map(|i| {
            let arity = a.signature().arity(a.signature().relation_name(i)).unwrap_or(0);
            let mut set = vec![0u64; words(n.pow(arity as u32))];
            for t in a.relation(i) {
                let k = tuple_index(n, t);
                set[k / 64] |= 1 << (k % 64);
            }
            set
        })
        .collect();
    let max_arity = scope.so_slots.iter().map(|(_, r)| *r).max().unwrap_or(0);
    let candidates = (0..=max_arity)
        .map(|r| match mode {
            SemanticsMode::Standard => (0..n.pow(r as u32)).collect(),
            SemanticsMode::Guarded => guarded_tuples(a, r)
                .iter()
                .map(|t| tuple_index(n, t))
                .collect(),
        })
        .collect();
    Ok(Compiled {
        n,
        root,
        fo_slots: scope.fo_slots,
        so_slots: scope.so_slots,
        rels,
        candidates,
        trace_slot: scope.trace_slot,
    })
}

/// Estimated number of second-order branches brute force would explore.
pub fn so_branch_estimate(phi: &Formula, a: &Structure, mode: SemanticsMode) -> u128 {
    let n = a.size() as u128;
    let count = |r: usize| -> u32 {
        match mode {
            SemanticsMode::Standard => (a.size() as u128).saturating_pow(r as u32).min(127) as u32,
            SemanticsMode::Guarded => guarded_tuples(a, r).len().min(127) as u32,
        }
    };
    fn est(f: &Formula, n: u128, count: &dyn Fn(usize) -> u32) -> u128 {
        use Formula as F;
        match f {
            F::True | F::False | F::Atom(..) | F::Eq(..) => 0,
            F::Not(g) => est(g, n, count),
            F::And(x, y) | F::Or(x, y) | F::Implies(x, y) | F::Iff(x, y) => {
                est(x, n, count).saturating_add(est(y, n, count))
            }
            F::Exists(_, g) | F::Forall(_, g) => n.saturating_mul(est(g, n, count)),
            F::SoExists(_, r, g) | F::SoForall(_, r, g) => {
                let branches = 1u128.checked_shl(count(*r)).unwrap_or(u128::MAX);
                branches.saturating_mul(1 + est(g, n, count))
            }
        }
    }
    est(phi, n, &count)
}

struct Brute<'a> {
    c: &'a Compiled,
    fo: Vec<Elem>,
    so: Vec<Vec<u64>>,
    witness: Option<Vec<u64>>,
}

impl Brute<'_> {
    fn val(&self, t: Term) -> Elem {
        match t {
            Term::Var(s) => self.fo[s],
            Term::Const(e) => e,
        }
    }

    fn eval(&mut self, node: &Node) -> bool {
        match node {
            Node::True => true,
            Node::False => false,
            Node::Rel(r, args) => {
                let idx = args
                    .iter()
                    .fold(0usize, |acc, &t| acc * self.c.n + self.val(t) as usize);
                match r {
                    RelRef::Struct(i) => bit(&self.c.rels[*i], idx),
                    RelRef::So(s) => bit(&self.so[*s], idx),
                }
            }
            Node::Eq(x, y) => self.val(*x) == self.val(*y),
            Node::Not(g) => !self.eval(g),
            Node::And(x, y) => self.eval(x) && self.eval(y),
            Node::Or(x, y) => self.eval(x) || self.eval(y),
            Node::Implies(x, y) => !self.eval(x) || self.eval(y),
            Node::Iff(x, y) => self.eval(x) == self.eval(y),
            Node::Exists(s, g) | Node::Forall(s, g) => {
                let want = matches!(node, Node::Exists(..));
                for e in 0..self.c.n as Elem {
                    self.fo[*s] = e;
                    if self.eval(g) == want {
                        return want;
                    }
                }
                !want
            }
            Node::SoExists(s, r, g) | Node::SoForall(s, r, g) => {
                let want = matches!(node, Node::SoExists(..));
                let cands = &self.c.candidates[*r];
                let size = words(self.c.n.pow(*r as u32));
                for k in 0..=cands.len() {
                    for chosen in (0..cands.len()).combinations(k) {
                        let mut set = vec![0u64; size];
                        for &i in &chosen {
                            let t = cands[i];
                            set[t / 64] |= 1 << (t % 64);
                        }
                        self.so[*s] = set;
                        if self.eval(g) == want {
                            if self.c.trace_slot == Some(*s) {
                                self.witness = Some(self.so[*s].clone());
                            }
                            return want;
                        }
                    }
                }
                !want
            }
        }
    }
}

fn bits_to_tuples(c: &Compiled, arity: usize, set: &[u64]) -> BTreeSet<Tuple> {
    (0..c.n.pow(arity as u32))
        .filter(|&i| bit(set, i))
        .map(|i| index_tuple(c.n, arity, i))
        .collect()
}

fn brute(c: &Compiled) -> (bool, Option<(String, BTreeSet<Tuple>)>) {
    let mut b = Brute {
        c,
        fo: vec![0; c.fo_slots],
        so: c.so_slots.iter().map(|_| Vec::new()).collect(),
        witness: None,
    };
    let value = b.eval(&c.root);
    let witness = match (c.trace_slot, b.witness) {
        (Some(s), Some(set)) => {
            let (name, arity) = &c.so_slots[s];
            Some((name.clone(), bits_to_tuples(c, *arity, &set)))
        }
        _ => None,
    };
    (value, witness)
}

/// Evaluates with an explicit route and budget, reporting an outermost
/// second-order witness when there is one.
pub fn eval_traced(
    phi: &Formula,
    a: &Structure,
    mode: SemanticsMode,
    route: Route,
    budget: Budget,
    assignment: &[(&str, Elem)],
) -> Result<EvalOutcome> {
    let estimate = so_branch_estimate(phi, a, mode);
    let use_brute = match route {
        Route::Brute => {
            budget.check("second-order branches", estimate)?;
            true
        }
        Route::Ground => false,
        Route::Auto => !phi.has_so_quantifiers() || estimate <= AUTO_BRUTE_LIMIT,
    };
    if use_brute {
        let c = compile(phi, a, mode, assignment)?;
        let (value, witness) = brute(&c);
        return Ok(EvalOutcome {
            value,
            route: Route::Brute,
            witness,
        });
    }
    compile(phi, a, mode, assignment)?;
    let (value, witness) = match ground_and_solve(phi, a, mode, assignment) {
        Err(Error::InvalidInput(_)) if route == Route::Auto => {
            budget.check("second-order branches", estimate)?;
            let c = compile(phi, a, mode, assignment)?;
            let (value, witness) = brute(&c);
            return Ok(EvalOutcome {
                value,
                route: Route::Brute,
                witness,
            });
        }
        other => other?,
    };
    Ok(EvalOutcome {
        value,
        route: Route::Ground,
        witness,
    })
}

/// Truth value of a sentence; constants of `a` may occur as terms.
pub fn eval_formula(phi: &Formula, a: &Structure, mode: SemanticsMode) -> Result<bool> {
    Ok(eval_traced(phi, a, mode, Route::Auto, DEFAULT_SO_BUDGET, &[])?.value)
}

/// Truth value under an assignment of the free element variables.
pub fn eval_formula_with(
    phi: &Formula,
    a: &Structure,
    mode: SemanticsMode,
    assignment: &[(&str, Elem)],
) -> Result<bool> {
    Ok(eval_traced(phi, a, mode, Route::Auto, DEFAULT_SO_BUDGET, assignment)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::structure::{Signature, StructureBuilder};

    fn digraph(n: usize, edges: &[(Elem, Elem)]) -> Structure {
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let mut b = StructureBuilder::new(sig, n).unwrap();
        for &(x, y) in edges {
            b.fact("E", &[x, y]).unwrap();
        }
        b.build().unwrap()
    }

    fn acyclic() -> Formula {
        parse_formula("forall X:1 nonempty . exists x in X . forall y in X . ~E(x,y)").unwrap()
    }

    #[test]
    fn acyclicity_examples() {
        let cycle = digraph(3, &[(0, 1), (1, 2), (2, 0)]);
        let chain = digraph(3, &[(0, 1), (1, 2)]);
        for route in [Route::Brute, Route::Ground] {
            let run = |s: &Structure| {
                eval_traced(&acyclic(), s, SemanticsMode::Standard, route, DEFAULT_SO_BUDGET, &[])
                    .unwrap()
            };
            let on_cycle = run(&cycle);
            assert!(!on_cycle.value);
            let (name, cex) = on_cycle.witness.expect("counterexample set");
            assert_eq!(name, "X");
            assert_eq!(cex.len(), 3);
            assert!(run(&chain).value);
        }
    }

    #[test]
    fn brute_force_counterexample_is_minimal() {
        let s = digraph(3, &[(0, 1), (1, 0), (2, 2)]);
        let out = eval_traced(&acyclic(), &s, SemanticsMode::Standard, Route::Brute, DEFAULT_SO_BUDGET, &[])
            .unwrap();
        assert!(!out.value);
        // the loop at 3 is found before the 2-cycle
        assert_eq!(out.witness.unwrap().1, [vec![2]].into_iter().collect());
    }

    #[test]
    fn first_order_basics() {
        let s = digraph(2, &[]);
        let f = parse_formula("exists x . x = x").unwrap();
        assert!(eval_formula(&f, &s, SemanticsMode::Standard).unwrap());
        let g = parse_formula("E(x,y)").unwrap();
        assert!(matches!(
            eval_formula(&g, &s, SemanticsMode::Standard),
            Err(Error::FreeVariables(_))
        ));
        assert!(!eval_formula_with(&g, &s, SemanticsMode::Standard, &[("x", 0), ("y", 1)]).unwrap());
        let h = parse_formula("exists x . F(x)").unwrap();
        assert!(eval_formula(&h, &s, SemanticsMode::Standard).is_err());
        let k = parse_formula("exists x . E(x)").unwrap();
        assert!(matches!(
            eval_formula(&k, &s, SemanticsMode::Standard),
            Err(Error::ArityClash { .. })
        ));
    }

    #[test]
    fn budget_is_enforced_for_brute_force() {
        let s = digraph(5, &[]);
        let f = parse_formula("forall U:2 . exists x . U(x,x)").unwrap();
        let err = eval_traced(&f, &s, SemanticsMode::Standard, Route::Brute, DEFAULT_SO_BUDGET, &[])
            .unwrap_err();
        assert!(err.is_budget());
        // grounding decides it anyway
        assert!(!eval_formula(&f, &s, SemanticsMode::Standard).unwrap());
    }

    #[test]
    fn guarded_semantics_restricts_relations() {
        // no binary guarded relation on an edgeless structure contains (1,2)
        let s = digraph(2, &[]);
        let f = parse_formula("exists U:2 . U(x,y)").unwrap();
        let at = [("x", 0), ("y", 1)];
        assert!(eval_formula_with(&f, &s, SemanticsMode::Standard, &at).unwrap());
        assert!(!eval_formula_with(&f, &s, SemanticsMode::Guarded, &at).unwrap());
        let e = digraph(2, &[(0, 1)]);
        assert!(eval_formula_with(&f, &e, SemanticsMode::Guarded, &at).unwrap());
    }
}
