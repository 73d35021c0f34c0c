//! Existential (l,k)-pebble games decided through the greatest strategy
//! family of partial homomorphisms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;

use crate::error::{Budget, Error, Result};
use crate::lab::ClassOracle;
use crate::structure::{enumerate_structures, hom_search, Elem, Structure, DEFAULT_ENUMERATION_BUDGET};

/// Default cap on the number of candidate partial maps.
pub const DEFAULT_GAME_BUDGET: Budget = Budget(10_000_000);

/// A finite partial map `A ⇀ B`, kept sorted by source element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartialHom(pub Vec<(Elem, Elem)>);

impl PartialHom {
    pub fn new(mut pairs: Vec<(Elem, Elem)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        PartialHom(pairs)
    }

    pub fn domain(&self) -> impl Iterator<Item = Elem> + '_ {
        self.0.iter().map(|&(x, _)| x)
    }

    pub fn get(&self, x: Elem) -> Option<Elem> {
        self.0
            .binary_search_by_key(&x, |&(d, _)| d)
            .ok()
            .map(|i| self.0[i].1)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `x1->y1,x2->y2` with element names; the empty map prints as `{}`.
    pub fn render(&self, a: &Structure, b: &Structure) -> String {
        if self.0.is_empty() {
            return "{}".to_string();
        }
        self.0
            .iter()
            .map(|&(x, y)| format!("{}->{}", a.name(x), b.name(y)))
            .join(",")
    }
}

/// Whether `map` preserves every fact of `a` lying inside its domain and
/// every constant interpreted inside its domain.
pub fn is_partial_hom(a: &Structure, b: &Structure, map: &PartialHom) -> bool {
    let mut image = Vec::new();
    for idx in 0..a.signature().relation_count() {
        'facts: for t in a.relation(idx) {
            image.clear();
            for &e in t {
                match map.get(e) {
                    Some(v) => image.push(v),
                    None => continue 'facts,
                }
            }
            if !b.holds_at(idx, &image) {
                return false;
            }
        }
    }
    a.constants().all(|(c, e)| match map.get(e) {
        Some(v) => b.constant(c) == Some(v),
        None => true,
    })
}

/// Duplicator's positions: a restriction-closed family of partial
/// homomorphisms with the forth property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyFamily {
    pub l: usize,
    pub k: usize,
    pub members: BTreeSet<PartialHom>,
}

impl StrategyFamily {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, h: &PartialHom) -> bool {
        self.members.contains(h)
    }

    /// One rendered map per line, sorted.
    pub fn dump(&self, a: &Structure, b: &Structure) -> Vec<String> {
        let mut lines: Vec<String> = self.members.iter().map(|h| h.render(a, b)).collect();
        lines.sort();
        lines
    }
}

pub(crate) fn check_parameters(a: &Structure, b: &Structure, l: usize, k: usize) -> Result<()> {
    a.signature().ensure_same(b.signature())?;
    if l < 1 || l >= k {
        return Err(Error::InvalidParameters(format!(
            "need 1 <= l < k, got l={l}, k={k}"
        )));
    }
    if a.size() > 64 {
        return Err(Error::InvalidParameters("at most 64 elements in A".into()));
    }
    Ok(())
}

/// Σ over domains D ⊆ A with |D| ≤ k of |B|^|D|.
pub(crate) fn candidate_count(n: usize, m: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for d in 0..=k.min(n) {
        total = total.saturating_add(binom.saturating_mul((m as u128).saturating_pow(d as u32)));
        binom = binom * (n - d) as u128 / (d + 1) as u128;
    }
    total
}

/// The deletion fixpoint, exposed so the processing order can be varied.
pub struct StrategySolver<'a> {
    a: &'a Structure,
    b: &'a Structure,
    l: usize,
    k: usize,
    domains: Vec<Vec<Elem>>,
}

impl<'a> StrategySolver<'a> {
    pub fn new(a: &'a Structure, b: &'a Structure, l: usize, k: usize, budget: Budget) -> Result<Self> {
        check_parameters(a, b, l, k)?;
        budget.check("partial maps", candidate_count(a.size(), b.size(), k))?;
        let domains = (0..=k.min(a.size()))
            .flat_map(|d| a.elements().combinations(d))
            .collect();
        Ok(StrategySolver { a, b, l, k, domains })
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn solve(&self) -> StrategyFamily {
        let order: Vec<usize> = (0..self.domains.len()).collect();
        self.solve_in_order(&order)
    }

    /// Runs the deletion rounds visiting domains in the given order.
    pub fn solve_in_order(&self, order: &[usize]) -> StrategyFamily {
        let mut alive: HashMap<&[Elem], BTreeSet<Vec<Elem>>> = HashMap::new();
        for dom in &self.domains {
            let maps = (0..dom.len())
                .map(|_| self.b.elements())
                .multi_cartesian_product()
                .filter(|vals| is_partial_hom(self.a, self.b, &zip(dom, vals)))
                .collect();
            alive.insert(dom.as_slice(), maps);
        }

        let mut changed = true;
        while changed {
            changed = false;
            for &di in order {
                let dom = &self.domains[di];
                let doomed: Vec<Vec<Elem>> = alive[dom.as_slice()]
                    .iter()
                    .filter(|vals| !self.keeps(&alive, dom, vals))
                    .cloned()
                    .collect();
                if !doomed.is_empty() {
                    changed = true;
                    let set = alive.get_mut(dom.as_slice()).expect("domain");
                    for v in doomed {
                        set.remove(&v);
                    }
                }
            }
        }

        let members = self
            .domains
            .iter()
            .flat_map(|dom| alive[dom.as_slice()].iter().map(move |vals| zip(dom, vals)))
            .collect();
        StrategyFamily {
            l: self.l,
            k: self.k,
            members,
        }
    }

    fn keeps(&self, alive: &HashMap<&[Elem], BTreeSet<Vec<Elem>>>, dom: &[Elem], vals: &[Elem]) -> bool {
        // closed under removing one point
        for i in 0..dom.len() {
            let mut sub_dom = dom.to_vec();
            let mut sub_vals = vals.to_vec();
            sub_dom.remove(i);
            sub_vals.remove(i);
            if !alive[sub_dom.as_slice()].contains(&sub_vals) {
                return false;
            }
        }
        if dom.len() > self.l {
            return true;
        }
        // forth: every superset domain of size at most k has an extension
        for sup in &self.domains {
            if sup.len() <= dom.len() || !dom.iter().all(|x| sup.contains(x)) {
                continue;
            }
            let extends = alive[sup.as_slice()].iter().any(|ext| {
                dom.iter()
                    .zip(vals)
                    .all(|(x, y)| ext[sup.iter().position(|s| s == x).expect("subset")] == *y)
            });
            if !extends {
                return false;
            }
        }
        true
    }
}

fn zip(dom: &[Elem], vals: &[Elem]) -> PartialHom {
    PartialHom(dom.iter().copied().zip(vals.iter().copied()).collect())
}

pub fn greatest_strategy_family(
    a: &Structure,
    b: &Structure,
    l: usize,
    k: usize,
    budget: Budget,
) -> Result<StrategyFamily> {
    Ok(StrategySolver::new(a, b, l, k, budget)?.solve())
}

/// Spoiler wins the existential (l,k)-pebble game on `(a, b)` iff the
/// greatest strategy family is empty.
pub fn spoiler_wins(a: &Structure, b: &Structure, l: usize, k: usize, budget: Budget) -> Result<bool> {
    Ok(greatest_strategy_family(a, b, l, k, budget)?.is_empty())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameOutcome {
    SpoilerWins,
    /// Index into the menu of the template Duplicator should pick.
    DuplicatorWins { template: usize },
}

#[derive(Debug, Clone)]
pub struct GameVerdict {
    pub outcome: GameOutcome,
    /// Menu entries whose CSP meets the class, with a witness structure.
    pub rejected: Vec<(usize, Structure)>,
}

impl fmt::Display for GameOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameOutcome::SpoilerWins => f.write_str("SPOILER"),
            GameOutcome::DuplicatorWins { .. } => f.write_str("DUPLICATOR"),
        }
    }
}

/// The (l,k)-game with Duplicator restricted to a finite menu of templates.
///
/// A template `b` is admissible when no structure of the class with at most
/// `check_bound` elements maps to it.
pub fn lk_game_decision(
    a: &Structure,
    menu: &[Structure],
    oracle: &ClassOracle,
    l: usize,
    k: usize,
    check_bound: usize,
    budget: Budget,
) -> Result<GameVerdict> {
    let mut rejected = Vec::new();
    let mut surviving = Vec::new();
    for (i, b) in menu.iter().enumerate() {
        a.signature().ensure_same(b.signature())?;
        let mut witness = None;
        for c in enumerate_structures(a.signature(), check_bound, true, DEFAULT_ENUMERATION_BUDGET)? {
            if hom_search(&c, b)?.is_some() && oracle.contains(&c)? {
                witness = Some(c);
                break;
            }
        }
        match witness {
            Some(c) => rejected.push((i, c)),
            None => surviving.push(i),
        }
    }
    if surviving.is_empty() {
        return Err(Error::EmptyMenu);
    }
    for &i in &surviving {
        if !spoiler_wins(a, &menu[i], l, k, budget)? {
            return Ok(GameVerdict {
                outcome: GameOutcome::DuplicatorWins { template: i },
                rejected,
            });
        }
    }
    Ok(GameVerdict {
        outcome: GameOutcome::SpoilerWins,
        rejected,
    })
}
