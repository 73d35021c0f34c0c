use std::collections::BTreeMap;
use std::fmt;

use super::{hom_closure_check, ClassOracle, ClosureReport, Direction};
use crate::error::{Budget, Error, Result};
use crate::structure::{disjoint_union, enumerate_structures, Structure};

/// The bounded-witness approximation of `∼`: members `a, b` share a block
/// iff `a ⊎ c ∈ C ⇔ b ⊎ c ∈ C` for every member `c` with at most
/// `witness_bound` elements. Fewer witnesses can only merge blocks, so this
/// over-coarsens the true relation.
#[derive(Debug, Clone)]
pub struct SimPartition {
    pub member_bound: usize,
    pub witness_bound: usize,
    /// Members of the class up to isomorphism.
    pub universe: Vec<Structure>,
    /// Indices into `universe`, blocks ordered by first member.
    pub blocks: Vec<Vec<usize>>,
    pub witnesses: usize,
}

impl SimPartition {
    pub fn block_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&i))
    }
}

impl fmt::Display for SimPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} blocks over {} members (<= {} elements), {} witnesses (<= {} elements)",
            self.blocks.len(),
            self.universe.len(),
            self.member_bound,
            self.witnesses,
            self.witness_bound
        )?;
        for (i, block) in self.blocks.iter().enumerate() {
            let rep = &self.universe[block[0]];
            let facts: Vec<String> = rep
                .all_facts()
                .map(|(r, t)| format!("{r}{}", rep.show_tuple(t)))
                .collect();
            writeln!(
                f,
                "block {i}: {} members, e.g. size {} {{{}}}",
                block.len(),
                rep.size(),
                facts.join(" ")
            )?;
        }
        Ok(())
    }
}

pub fn sim_partition(
    o: &ClassOracle,
    member_bound: usize,
    witness_bound: usize,
    budget: Budget,
) -> Result<SimPartition> {
    if let ClosureReport::Violation { from, to } =
        hom_closure_check(o, member_bound, Direction::Complement, budget)?
    {
        return Err(Error::Precondition {
            reason: format!(
                "the complement of {} is not closed under homomorphisms: a non-member of size {} maps to a member",
                o.name(),
                from.size()
            ),
            counterexample: Some(Box::new(to)),
        });
    }
    let mut universe = Vec::new();
    for a in enumerate_structures(o.signature(), member_bound, true, budget)? {
        if o.contains(&a)? {
            universe.push(a);
        }
    }
    let witnesses: Vec<Structure> = universe
        .iter()
        .filter(|c| c.size() <= witness_bound)
        .cloned()
        .collect();
    let mut by_profile: BTreeMap<Vec<bool>, usize> = BTreeMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, a) in universe.iter().enumerate() {
        let profile = witnesses
            .iter()
            .map(|c| o.contains(&disjoint_union(a, c)?))
            .collect::<Result<Vec<bool>>>()?;
        let next = blocks.len();
        let b = *by_profile.entry(profile).or_insert(next);
        if b == next {
            blocks.push(Vec::new());
        }
        blocks[b].push(i);
    }
    Ok(SimPartition {
        member_bound,
        witness_bound,
        universe,
        blocks,
        witnesses: witnesses.len(),
    })
}
