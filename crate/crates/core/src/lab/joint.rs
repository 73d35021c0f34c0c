use super::ClassOracle;
use crate::error::{Budget, Result};
use crate::structure::{disjoint_union, enumerate_structures, hom_search, Structure};

#[derive(Debug, Clone)]
pub enum JointReport {
    Holds,
    /// Two members with no common member image within the search bound.
    Fails { a: Structure, b: Structure },
}

impl JointReport {
    pub fn holds(&self) -> bool {
        matches!(self, JointReport::Holds)
    }
}

/// Joint homomorphism property on members up to `size_bound` elements.
///
/// The witness `c` is searched among members with at most `witness_bound`
/// elements, or `|A| + |B|` when no bound is given; the disjoint union is
/// tried first.
pub fn joint_hom_check(
    o: &ClassOracle,
    size_bound: usize,
    witness_bound: Option<usize>,
    budget: Budget,
) -> Result<JointReport> {
    let mut members = Vec::new();
    for a in enumerate_structures(o.signature(), size_bound, true, budget)? {
        if o.contains(&a)? {
            members.push(a);
        }
    }
    for (i, a) in members.iter().enumerate() {
        for b in &members[i..] {
            if o.contains(&disjoint_union(a, b)?)? {
                continue;
            }
            let bound = witness_bound.unwrap_or(a.size() + b.size());
            let mut found = false;
            for c in enumerate_structures(o.signature(), bound, true, budget)? {
                if hom_search(a, &c)?.is_some() && hom_search(b, &c)?.is_some() && o.contains(&c)? {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(JointReport::Fails {
                    a: a.clone(),
                    b: b.clone(),
                });
            }
        }
    }
    Ok(JointReport::Holds)
}
