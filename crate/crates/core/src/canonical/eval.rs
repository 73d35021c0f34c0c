use std::collections::{HashMap, HashSet, VecDeque};

use itertools::Itertools;

use crate::error::{Budget, Result};
use crate::pebble::{candidate_count, check_parameters};
use crate::structure::{Elem, Structure};

/// Alive maps per domain. Domains are bitmasks over `A`; a map is the list
/// of its values in increasing order of the domain elements.
#[derive(Debug, Clone)]
pub struct ConsistencyState {
    pub l: usize,
    pub k: usize,
    pub alive: HashMap<u64, HashSet<Vec<Elem>>>,
}

impl ConsistencyState {
    pub fn map_count(&self) -> usize {
        self.alive.values().map(HashSet::len).sum()
    }

    /// Whether the empty map survived.
    pub fn consistent(&self) -> bool {
        self.alive.get(&0).is_some_and(|s| !s.is_empty())
    }
}

fn members(mask: u64) -> Vec<Elem> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

struct Propagator<'a> {
    a: &'a Structure,
    b: &'a Structure,
    l: usize,
    top: usize,
    /// facts of A as (relation index, tuple, bitmask of the tuple's elements)
    facts: Vec<(usize, Vec<Elem>, u64)>,
}

impl Propagator<'_> {
    fn preserves(&self, mask: u64, vals: &[Elem]) -> bool {
        let dom = members(mask);
        let at = |x: Elem| vals[dom.iter().position(|&d| d == x).expect("in domain")];
        let facts_ok = self
            .facts
            .iter()
            .filter(|(_, _, m)| m & !mask == 0)
            .all(|(r, t, _)| {
                let image: Vec<Elem> = t.iter().map(|&x| at(x)).collect();
                self.b.holds_at(*r, &image)
            });
        facts_ok
            && self.a.constants().all(|(c, e)| {
                mask >> e & 1 == 0 || self.b.constant(c) == Some(at(e))
            })
    }

    fn initial(&self, mask: u64) -> HashSet<Vec<Elem>> {
        let d = mask.count_ones() as usize;
        (0..d)
            .map(|_| self.b.elements())
            .multi_cartesian_product()
            .filter(|vals| self.preserves(mask, vals))
            .collect()
    }

    fn survives(&self, alive: &HashMap<u64, HashSet<Vec<Elem>>>, mask: u64, vals: &[Elem]) -> bool {
        let dom = members(mask);
        for i in 0..dom.len() {
            let mut sub = vals.to_vec();
            sub.remove(i);
            if !alive[&(mask & !(1 << dom[i]))].contains(&sub) {
                return false;
            }
        }
        if dom.len() > self.l || dom.len() == self.top {
            return true;
        }
        let n = self.a.size() as u64;
        let rest: Vec<Elem> = (0..n as Elem).filter(|&x| mask >> x & 1 == 0).collect();
        rest.iter().combinations(self.top - dom.len()).all(|extra| {
            let sup = extra.iter().fold(mask, |m, &&x| m | 1 << x);
            let sup_dom = members(sup);
            let pos: Vec<usize> = dom
                .iter()
                .map(|x| sup_dom.iter().position(|y| y == x).expect("subset"))
                .collect();
            alive[&sup]
                .iter()
                .any(|g| pos.iter().zip(vals).all(|(&p, v)| g[p] == *v))
        })
    }
}

/// The (l,k)-consistency fixpoint computed by a worklist of domains.
///
/// A map on domain `D` survives if every one-point restriction survives
/// and, when `|D| ≤ l`, it extends to a surviving map on every domain of
/// size `min(k, |A|)` containing `D`.
pub fn consistency_state(a: &Structure, b: &Structure, l: usize, k: usize, budget: Budget) -> Result<ConsistencyState> {
    check_parameters(a, b, l, k)?;
    budget.check("partial maps", candidate_count(a.size(), b.size(), k))?;
    let n = a.size();
    let top = k.min(n);
    let mut facts = Vec::new();
    for r in 0..a.signature().relation_count() {
        for t in a.relation(r) {
            let mask = t.iter().fold(0u64, |m, &x| m | 1 << x);
            facts.push((r, t.clone(), mask));
        }
    }
    let p = Propagator { a, b, l, top, facts };

    let domains: Vec<u64> = (0..=top)
        .flat_map(|d| (0..n as u64).combinations(d))
        .map(|c| c.iter().fold(0u64, |m, &x| m | 1 << x))
        .collect();
    let mut alive: HashMap<u64, HashSet<Vec<Elem>>> =
        domains.iter().map(|&m| (m, p.initial(m))).collect();

    let mut queue: VecDeque<u64> = domains.iter().copied().collect();
    let mut queued: HashSet<u64> = domains.iter().copied().collect();
    while let Some(mask) = queue.pop_front() {
        queued.remove(&mask);
        let doomed: Vec<Vec<Elem>> = alive[&mask]
            .iter()
            .filter(|vals| !p.survives(&alive, mask, vals))
            .cloned()
            .collect();
        if doomed.is_empty() {
            continue;
        }
        let set = alive.get_mut(&mask).expect("domain");
        for v in &doomed {
            set.remove(v);
        }
        let size = mask.count_ones() as usize;
        let mut touched = Vec::new();
        if size < top {
            touched.extend((0..n as u64).filter(|x| mask >> x & 1 == 0).map(|x| mask | 1 << x));
        }
        if size == top {
            let dom = members(mask);
            for d in 0..=l.min(size) {
                touched.extend(dom.iter().combinations(d).map(|c| c.iter().fold(0u64, |m, &&x| m | 1 << x)));
            }
        }
        for t in touched {
            if t != mask && queued.insert(t) {
                queue.push_back(t);
            }
        }
    }
    Ok(ConsistencyState { l, k, alive })
}

/// Whether the canonical width-(l,k) program for the complement of
/// `CSP(b)` derives goal on `a`.
pub fn canonical_eval(a: &Structure, b: &Structure, l: usize, k: usize, budget: Budget) -> Result<bool> {
    Ok(!consistency_state(a, b, l, k, budget)?.consistent())
}
