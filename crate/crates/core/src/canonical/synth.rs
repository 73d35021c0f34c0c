use std::collections::BTreeSet;

use itertools::Itertools;

use crate::datalog::{Atom, DatalogProgram, Rule, GOAL};
use crate::error::{Budget, Error, Result};
use crate::structure::{Signature, Structure};

/// Default cap on the number of candidate rule bodies.
pub const DEFAULT_SYNTHESIS_BUDGET: Budget = Budget(2_000_000);

/// The materialized canonical program together with the IDB symbol of
/// every subset `S ⊆ B^r`.
#[derive(Debug, Clone)]
pub struct CanonicalProgram {
    pub program: DatalogProgram,
    /// `(r, mask, name)`; bit `i` of `mask` is the `i`-th tuple of `B^r`
    /// in lexicographic order.
    pub idbs: Vec<(usize, u64, String)>,
}

/// `I{r}_{mask}`, e.g. `I1_2` for `{1} ⊆ B` when `B = {0, 1}`.
pub fn idb_name(r: usize, mask: u64) -> String {
    format!("I{r}_{mask}")
}

type Bits = u128;

struct Space {
    m: usize,
    j: usize,
    /// assignments of `x1..xj` into `B`, as value vectors
    assignments: Vec<Vec<u32>>,
}

impl Space {
    fn new(m: usize, j: usize) -> Self {
        let assignments = (0..j)
            .map(|_| 0..m as u32)
            .multi_cartesian_product()
            .collect::<Vec<_>>();
        let assignments = if j == 0 { vec![Vec::new()] } else { assignments };
        Space { m, j, assignments }
    }

    fn satisfying(&self, pred: impl Fn(&[u32]) -> bool) -> Bits {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| pred(a))
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    fn tuple_index(&self, vals: &[u32]) -> usize {
        vals.iter().fold(0, |acc, &v| acc * self.m + v as usize)
    }
}

fn var(i: usize) -> String {
    format!("x{}", i + 1)
}

fn atom(rel: &str, vars: &[usize]) -> Atom {
    let names: Vec<String> = vars.iter().map(|&v| var(v)).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Atom::new(rel, &refs)
}

/// Materializes the canonical width-(l,k) program for the complement of
/// `CSP(b)`.
///
/// Rule bodies range over `x1..xj` (`j ≤ k`, every variable used) and
/// consist of any set of EDB atoms plus at most two IDB atoms `I_S(ȳ)`
/// with `S` not the full set and `ȳ` repetition-free. Each body gets its
/// strongest sound head on every repetition-free tuple of at most `l`
/// variables, or `goal` if no assignment into `b` satisfies it. Rules
/// `I_S' :- I_S` for `S ⊊ S'` are added.
pub fn synthesize_canonical(b: &Structure, l: usize, k: usize, budget: Budget) -> Result<CanonicalProgram> {
    if !b.signature().is_constant_free() {
        return Err(Error::InvalidInput("canonical synthesis needs a constant-free template".into()));
    }
    if l < 1 || l >= k {
        return Err(Error::InvalidParameters(format!("need 1 <= l < k, got l={l}, k={k}")));
    }
    let m = b.size();
    if m == 0 {
        return Err(Error::InvalidInput("the template must be non-empty".into()));
    }
    if (m as u128).saturating_pow(k as u32) > Bits::BITS as u128 || (m as u128).saturating_pow(l as u32) > 20 {
        return Err(Error::BudgetExceeded {
            what: "canonical synthesis",
            needed: (m as u128).saturating_pow(k as u32),
            limit: budget.0,
        });
    }

    let mut idb = Signature::new();
    idb.add_relation(GOAL, 0)?;
    let mut idbs = Vec::new();
    for r in 1..=l {
        for mask in 0..1u64 << m.pow(r as u32) {
            let name = idb_name(r, mask);
            idb.add_relation(&name, r)?;
            idbs.push((r, mask, name));
        }
    }

    // budget: bodies over all j ≤ k
    let mut needed: u128 = 0;
    for j in 1..=k {
        let edb_atoms: usize = b.signature().relations().map(|(_, ar)| j.pow(ar as u32)).sum();
        let idb_atoms: u128 = (1..=l.min(j))
            .map(|r| {
                let tuples = (j - r + 1..=j).product::<usize>() as u128;
                tuples * ((1u128 << m.pow(r as u32)) - 1)
            })
            .sum();
        let choices = 1 + idb_atoms + idb_atoms * (idb_atoms + 1) / 2;
        needed = needed.saturating_add(choices.saturating_mul(1u128.checked_shl(edb_atoms as u32).unwrap_or(u128::MAX)));
    }
    budget.check("candidate rule bodies", needed)?;

    let mut rules: Vec<Rule> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut push = |rule: Rule, rules: &mut Vec<Rule>| {
        if seen.insert(rule.to_string()) {
            rules.push(rule);
        }
    };

    for j in 1..=k {
        let sp = Space::new(m, j);
        let full_bits: Bits = if sp.assignments.len() == Bits::BITS as usize {
            Bits::MAX
        } else {
            (1 << sp.assignments.len()) - 1
        };

        // EDB atoms with their satisfying assignments
        let mut edb: Vec<(Atom, Bits, u32)> = Vec::new();
        for (ri, (rel, ar)) in b.signature().relations().enumerate() {
            for vars in (0..ar).map(|_| 0..j).multi_cartesian_product() {
                let vars = if ar == 0 { Vec::new() } else { vars };
                let bits = sp.satisfying(|asg| {
                    let t: Vec<u32> = vars.iter().map(|&v| asg[v]).collect();
                    b.holds_at(ri, &t)
                });
                let used = vars.iter().fold(0u32, |u, &v| u | 1 << v);
                edb.push((atom(rel, &vars), bits, used));
                if ar == 0 {
                    break;
                }
            }
        }

        // IDB atoms on repetition-free tuples, any non-full S
        let mut idb_atoms: Vec<(Atom, Bits, u32)> = Vec::new();
        for r in 1..=l.min(j) {
            let size = m.pow(r as u32);
            for vars in (0..j).permutations(r) {
                for mask in 0..(1u64 << size) - 1 {
                    let bits = sp.satisfying(|asg| {
                        let t: Vec<u32> = vars.iter().map(|&v| asg[v]).collect();
                        mask >> sp.tuple_index(&t) & 1 == 1
                    });
                    let used = vars.iter().fold(0u32, |u, &v| u | 1 << v);
                    idb_atoms.push((atom(&idb_name(r, mask), &vars), bits, used));
                }
            }
        }
        let mut idb_choices: Vec<Vec<usize>> = vec![Vec::new()];
        idb_choices.extend((0..idb_atoms.len()).map(|i| vec![i]));
        idb_choices.extend((0..idb_atoms.len()).tuple_combinations().map(|(x, y)| vec![x, y]));

        let all_vars: u32 = (1 << j) - 1;
        let heads: Vec<Vec<usize>> = (1..=l.min(j)).flat_map(|r| (0..j).permutations(r)).collect();

        for edb_mask in 0u64..1 << edb.len() {
            let (mut bits, mut used) = (full_bits, 0u32);
            let mut body_edb = Vec::new();
            for (i, (a, ab, au)) in edb.iter().enumerate() {
                if edb_mask >> i & 1 == 1 {
                    bits &= ab;
                    used |= au;
                    body_edb.push(a.clone());
                }
            }
            for choice in &idb_choices {
                let mut bits = bits;
                let mut used = used;
                let mut body = body_edb.clone();
                for &i in choice {
                    let (a, ab, au) = &idb_atoms[i];
                    bits &= ab;
                    used |= au;
                    body.push(a.clone());
                }
                if used != all_vars {
                    continue;
                }
                if bits == 0 {
                    push(Rule::new(Atom::new(GOAL, &[]), body), &mut rules);
                    continue;
                }
                for head in &heads {
                    let r = head.len();
                    let full = (1u64 << m.pow(r as u32)) - 1;
                    let s = sp
                        .assignments
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| bits >> i & 1 == 1)
                        .fold(0u64, |s, (_, asg)| {
                            let t: Vec<u32> = head.iter().map(|&v| asg[v]).collect();
                            s | 1 << sp.tuple_index(&t)
                        });
                    if s == full {
                        continue;
                    }
                    let head_atom = atom(&idb_name(r, s), head);
                    if body.contains(&head_atom) {
                        continue;
                    }
                    push(Rule::new(head_atom, body.clone()), &mut rules);
                }
            }
        }
        let _ = sp.j;
    }

    // weakening
    for r in 1..=l {
        let vars: Vec<usize> = (0..r).collect();
        let full = (1u64 << m.pow(r as u32)) - 1;
        for s in 0..full {
            for t in s + 1..full {
                if s & !t == 0 {
                    let rule = Rule::new(atom(&idb_name(r, t), &vars), vec![atom(&idb_name(r, s), &vars)]);
                    push(rule, &mut rules);
                }
            }
        }
    }

    let program = DatalogProgram::new(b.signature().clone(), idb, rules)?;
    Ok(CanonicalProgram { program, idbs })
}
