//! `≡_q` for guarded second-order logic via interned back-and-forth types.
//!
//! A position is a structure together with the elements picked by
//! first-order moves and the guarded relations picked by second-order
//! moves. Second-order moves range over relations of arity `1..=cap`.

use std::collections::{BTreeSet, HashMap};

use super::Formula;
use crate::error::{Budget, Result};
use crate::structure::{guarded_tuples, Elem, Structure, Tuple};

/// Default cap on the number of back-and-forth positions.
pub const DEFAULT_EQUIV_BUDGET: Budget = Budget(1 << 22);

#[derive(Debug, Clone, PartialEq)]
pub struct EquivResult {
    pub equivalent: bool,
    /// A sentence of quantifier rank at most `q`, true in the first
    /// structure and false in the second under guarded semantics.
    pub witness: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Pos {
    s: usize,
    consts: Vec<Elem>,
    rels: Vec<(usize, BTreeSet<Tuple>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Base {
        eq: Vec<bool>,
        facts: Vec<(usize, Vec<Vec<usize>>)>,
    },
    Step {
        q: usize,
        base: u32,
        fo: BTreeSet<u32>,
        so: Vec<BTreeSet<u32>>,
    },
}

/// Shares interned types across many structures, so that types of
/// different structures can be compared by id.
pub struct EquivChecker {
    cap: usize,
    budget: Budget,
    structures: Vec<Structure>,
    guarded: Vec<Vec<Vec<Tuple>>>,
    interner: HashMap<Key, u32>,
    memo: HashMap<(Pos, usize), u32>,
}

impl EquivChecker {
    pub fn new(cap: usize, budget: Budget) -> Self {
        EquivChecker {
            cap,
            budget,
            structures: Vec::new(),
            guarded: Vec::new(),
            interner: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    pub fn add(&mut self, s: Structure) -> Result<usize> {
        if let Some(first) = self.structures.first() {
            first.signature().ensure_same(s.signature())?;
        }
        let g = (0..=self.cap).map(|r| guarded_tuples(&s, r).into_iter().collect()).collect();
        self.structures.push(s);
        self.guarded.push(g);
        Ok(self.structures.len() - 1)
    }

    pub fn structure(&self, i: usize) -> &Structure {
        &self.structures[i]
    }

    fn branching(&self, s: usize) -> u128 {
        let so: u128 = (1..=self.cap)
            .map(|r| 1u128.checked_shl(self.guarded[s][r].len() as u32).unwrap_or(u128::MAX))
            .fold(0u128, |a, b| a.saturating_add(b));
        so.saturating_add(self.structures[s].size() as u128)
    }

    fn check_budget(&self, s: usize, q: usize) -> Result<()> {
        let b = self.branching(s);
        let mut total: u128 = 1;
        let mut level: u128 = 1;
        for _ in 0..q {
            level = level.saturating_mul(b);
            total = total.saturating_add(level);
        }
        self.budget.check("back-and-forth positions", total)
    }

    fn intern(&mut self, k: Key) -> u32 {
        let next = self.interner.len() as u32;
        *self.interner.entry(k).or_insert(next)
    }

    fn named(&self, p: &Pos) -> Vec<Elem> {
        let s = &self.structures[p.s];
        s.constants().map(|(_, e)| e).chain(p.consts.iter().copied()).collect()
    }

    fn base_key(&self, p: &Pos) -> Key {
        let s = &self.structures[p.s];
        let named = self.named(p);
        let k = named.len();
        let mut eq = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                eq.push(named[i] == named[j]);
            }
        }
        let sig = s.signature();
        let mut rels: Vec<(usize, Box<dyn Fn(&[Elem]) -> bool + '_>)> = Vec::new();
        for i in 0..sig.relation_count() {
            let arity = sig.arity(sig.relation_name(i)).unwrap_or(0);
            rels.push((arity, Box::new(move |t: &[Elem]| s.holds_at(i, t))));
        }
        for (arity, set) in &p.rels {
            rels.push((*arity, Box::new(move |t: &[Elem]| set.contains(t))));
        }
        let facts = rels
            .iter()
            .map(|(arity, holds)| {
                let mut out = Vec::new();
                let mut idx = vec![0usize; *arity];
                if k == 0 && *arity > 0 {
                    return (*arity, out);
                }
                loop {
                    let t: Vec<Elem> = idx.iter().map(|&i| named[i]).collect();
                    if holds(&t) {
                        out.push(idx.clone());
                    }
                    if !advance(&mut idx, k) {
                        break;
                    }
                }
                (*arity, out)
            })
            .collect();
        Key::Base { eq, facts }
    }

    fn expansions(&self, s: usize, r: usize) -> impl Iterator<Item = BTreeSet<Tuple>> + '_ {
        let g = &self.guarded[s][r];
        (0u64..1 << g.len()).map(move |mask| {
            g.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect()
        })
    }

    fn extend_fo(p: &Pos, e: Elem) -> Pos {
        let mut q = p.clone();
        q.consts.push(e);
        q
    }

    fn extend_so(p: &Pos, r: usize, rel: BTreeSet<Tuple>) -> Pos {
        let mut q = p.clone();
        q.rels.push((r, rel));
        q
    }

    fn type_of(&mut self, p: &Pos, q: usize) -> u32 {
        if let Some(&id) = self.memo.get(&(p.clone(), q)) {
            return id;
        }
        let base_key = self.base_key(p);
        let base = self.intern(base_key);
        let id = if q == 0 {
            base
        } else {
            let mut fo = BTreeSet::new();
            for e in self.structures[p.s].elements() {
                fo.insert(self.type_of(&Self::extend_fo(p, e), q - 1));
            }
            let mut so = Vec::new();
            for r in 1..=self.cap {
                let exps: Vec<BTreeSet<Tuple>> = self.expansions(p.s, r).collect();
                let mut types = BTreeSet::new();
                for rel in exps {
                    types.insert(self.type_of(&Self::extend_so(p, r, rel), q - 1));
                }
                so.push(types);
            }
            self.intern(Key::Step { q, base, fo, so })
        };
        self.memo.insert((p.clone(), q), id);
        id
    }

    fn root(s: usize) -> Pos {
        Pos {
            s,
            consts: Vec::new(),
            rels: Vec::new(),
        }
    }

    /// Interned `q`-type of structure `i`.
    pub fn type_id(&mut self, i: usize, q: usize) -> Result<u32> {
        self.check_budget(i, q)?;
        Ok(self.type_of(&Self::root(i), q))
    }

    pub fn equivalent(&mut self, i: usize, j: usize, q: usize) -> Result<bool> {
        Ok(self.type_id(i, q)? == self.type_id(j, q)?)
    }

    /// A sentence of rank at most `q` true in structure `i` and false in
    /// structure `j`, if their `q`-types differ.
    pub fn distinguish(&mut self, i: usize, j: usize, q: usize) -> Result<Option<Formula>> {
        if self.equivalent(i, j, q)? {
            return Ok(None);
        }
        Ok(Some(self.separate(&Self::root(i), &Self::root(j), q)))
    }

    fn fresh(&self, prefix: &str, k: usize) -> String {
        let sig = self.structures[0].signature();
        let mut name = format!("{prefix}{k}");
        while sig.has_relation(&name) || sig.has_constant(&name) {
            name.push('_');
        }
        name
    }

    fn term(&self, p: &Pos, i: usize) -> String {
        let s = &self.structures[p.s];
        let consts: Vec<&str> = s.constants().map(|(c, _)| c).collect();
        if i < consts.len() {
            consts[i].to_string()
        } else {
            self.fresh("x", i - consts.len())
        }
    }

    fn rel_name(&self, p: &Pos, i: usize) -> String {
        let sig = self.structures[p.s].signature();
        if i < sig.relation_count() {
            sig.relation_name(i).to_string()
        } else {
            self.fresh("X", i - sig.relation_count())
        }
    }

    /// Atomic or negated atomic formula on which the two positions differ.
    fn atomic_difference(&self, a: &Pos, b: &Pos) -> Formula {
        let (Key::Base { eq: ea, facts: fa }, Key::Base { eq: eb, facts: fb }) =
            (self.base_key(a), self.base_key(b))
        else {
            unreachable!()
        };
        let k = self.named(a).len();
        let mut pos = 0;
        for i in 0..k {
            for j in i + 1..k {
                if ea[pos] != eb[pos] {
                    let f = Formula::eq(&self.term(a, i), &self.term(a, j));
                    return if ea[pos] { f } else { f.not() };
                }
                pos += 1;
            }
        }
        for (r, ((_, ta), (_, tb))) in fa.iter().zip(&fb).enumerate() {
            let (sa, sb): (BTreeSet<_>, BTreeSet<_>) = (ta.iter().collect(), tb.iter().collect());
            let atom = |idx: &Vec<usize>| {
                let args: Vec<String> = idx.iter().map(|&i| self.term(a, i)).collect();
                let refs: Vec<&str> = args.iter().map(String::as_str).collect();
                Formula::atom(&self.rel_name(a, r), &refs)
            };
            if let Some(t) = sa.difference(&sb).next() {
                return atom(t);
            }
            if let Some(t) = sb.difference(&sa).next() {
                return atom(t).not();
            }
        }
        unreachable!("positions with equal atomic diagrams")
    }

    fn separate(&mut self, a: &Pos, b: &Pos, q: usize) -> Formula {
        if q == 0 || self.base_key(a) != self.base_key(b) {
            return self.atomic_difference(a, b);
        }
        let (sa, sb) = (a.s, b.s);
        let ea: Vec<Elem> = self.structures[sa].elements().collect();
        let eb: Vec<Elem> = self.structures[sb].elements().collect();
        let x = self.fresh("x", a.consts.len());
        for (from, to, els_from, els_to, flip) in [(a, b, &ea, &eb, false), (b, a, &eb, &ea, true)] {
            for &e in els_from {
                let pe = Self::extend_fo(from, e);
                let te = self.type_of(&pe, q - 1);
                let mut parts = Vec::new();
                let mut matched = false;
                for &f in els_to {
                    let pf = Self::extend_fo(to, f);
                    if self.type_of(&pf, q - 1) == te {
                        matched = true;
                        break;
                    }
                    push_unique(&mut parts, self.separate(&pe, &pf, q - 1));
                }
                if !matched {
                    let f = Formula::exists(&[&x], Formula::and_all(parts));
                    return if flip { f.not() } else { f };
                }
            }
        }
        let xr = self.fresh("X", a.rels.len());
        for r in 1..=self.cap {
            for (from, to, flip) in [(a, b, false), (b, a, true)] {
                let mine: Vec<BTreeSet<Tuple>> = self.expansions(from.s, r).collect();
                let theirs: Vec<BTreeSet<Tuple>> = self.expansions(to.s, r).collect();
                for rel in mine {
                    let pe = Self::extend_so(from, r, rel);
                    let te = self.type_of(&pe, q - 1);
                    let mut parts = Vec::new();
                    let mut matched = false;
                    for other in &theirs {
                        let pf = Self::extend_so(to, r, other.clone());
                        if self.type_of(&pf, q - 1) == te {
                            matched = true;
                            break;
                        }
                        push_unique(&mut parts, self.separate(&pe, &pf, q - 1));
                    }
                    if !matched {
                        let f = Formula::so_exists(&xr, r, Formula::and_all(parts));
                        return if flip { f.not() } else { f };
                    }
                }
            }
        }
        unreachable!("positions with distinct types differ somewhere")
    }
}

fn push_unique(parts: &mut Vec<Formula>, f: Formula) {
    if !parts.contains(&f) {
        parts.push(f);
    }
}

fn advance(idx: &mut [usize], k: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < k {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Decides `a ≡_q b` up to second-order arity `cap`, with a distinguishing
/// sentence when they differ.
pub fn equiv_q(a: &Structure, b: &Structure, q: usize, cap: usize, budget: Budget) -> Result<EquivResult> {
    a.signature().ensure_same(b.signature())?;
    let mut c = EquivChecker::new(cap, budget);
    let i = c.add(a.clone())?;
    let j = c.add(b.clone())?;
    let witness = c.distinguish(i, j, q)?;
    Ok(EquivResult {
        equivalent: witness.is_none(),
        witness,
    })
}
