use itertools::Itertools;

use super::ClassOracle;
use crate::error::{Budget, Result};
use crate::structure::{enumerate_structures, Elem, Structure, StructureBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `a ∈ C` and `a → b` imply `b ∈ C`.
    Class,
    /// `a ∉ C` and `a → b` imply `b ∉ C`.
    Complement,
}

#[derive(Debug, Clone)]
pub enum ClosureReport {
    Closed,
    /// `from` maps homomorphically onto `to`, violating the closure.
    Violation { from: Structure, to: Structure },
}

impl ClosureReport {
    pub fn is_closed(&self) -> bool {
        matches!(self, ClosureReport::Closed)
    }
}

/// Images of `a` under one elementary homomorphism: adding a fact, adding
/// an isolated element (when below `max_size`), or identifying two elements.
pub fn one_step_images(a: &Structure, max_size: usize) -> Result<Vec<Structure>> {
    let sig = a.signature();
    let n = a.size();
    let mut out = Vec::new();
    for (name, arity) in sig.relations() {
        for t in (0..arity).map(|_| 0..n as Elem).multi_cartesian_product() {
            if !a.holds(name, &t) {
                let mut b = a.to_builder();
                b.fact(name, &t)?;
                out.push(b.build()?);
            }
        }
        if arity == 0 && !a.holds(name, &[]) {
            let mut b = a.to_builder();
            b.fact(name, &[])?;
            out.push(b.build()?);
        }
    }
    if n < max_size {
        let mut b = StructureBuilder::new(sig.clone(), n + 1)?;
        for (rel, t) in a.all_facts() {
            b.fact(rel, t)?;
        }
        for (c, e) in a.constants() {
            b.constant(c, e)?;
        }
        out.push(b.build()?);
    }
    for (i, j) in (0..n as Elem).tuple_combinations() {
        out.push(merge(a, i, j)?);
    }
    Ok(out)
}

/// The quotient identifying `j` with `i`.
fn merge(a: &Structure, i: Elem, j: Elem) -> Result<Structure> {
    let image = |e: Elem| -> Elem {
        let e = if e == j { i } else { e };
        if e > j {
            e - 1
        } else {
            e
        }
    };
    let mut b = StructureBuilder::new(a.signature().clone(), a.size() - 1)?;
    for (rel, t) in a.all_facts() {
        let img: Vec<Elem> = t.iter().map(|&e| image(e)).collect();
        b.fact(rel, &img)?;
    }
    for (c, e) in a.constants() {
        b.constant(c, image(e))?;
    }
    b.build()
}

/// Checks closure of the class (or its complement) under homomorphisms
/// between structures of at most `size_bound` elements.
///
/// Every homomorphism between such structures factors into elementary
/// steps that stay within the size bound, so it suffices to test each
/// structure (up to isomorphism) against its one-step images.
pub fn hom_closure_check(
    o: &ClassOracle,
    size_bound: usize,
    direction: Direction,
    budget: Budget,
) -> Result<ClosureReport> {
    for a in enumerate_structures(o.signature(), size_bound, true, budget)? {
        let inside = o.contains(&a)?;
        if inside != (direction == Direction::Class) {
            continue;
        }
        for b in one_step_images(&a, size_bound)? {
            if o.contains(&b)? != inside {
                return Ok(ClosureReport::Violation { from: a, to: b });
            }
        }
    }
    Ok(ClosureReport::Closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::parse_program;
    use crate::structure::{hom_search, Signature};
    use crate::DEFAULT_ENUMERATION_BUDGET as B;

    fn k2() -> Structure {
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let mut b = StructureBuilder::new(sig, 2).unwrap();
        b.fact("E", &[0, 1]).unwrap().fact("E", &[1, 0]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn images_are_homomorphic() {
        let mut b = StructureBuilder::new(k2().signature().clone(), 3).unwrap();
        b.fact("E", &[0, 1]).unwrap().fact("E", &[2, 2]).unwrap();
        let a = b.build().unwrap();
        let imgs = one_step_images(&a, 4).unwrap();
        assert_eq!(imgs.len(), 7 + 1 + 3);
        for c in &imgs {
            assert!(hom_search(&a, c).unwrap().is_some());
        }
    }

    #[test]
    fn csp_complement_is_closed() {
        let o = ClassOracle::csp("CSP(K2)", k2());
        assert!(hom_closure_check(&o, 3, Direction::Complement, B).unwrap().is_closed());
        let co = ClassOracle::co_csp("not 2-colourable", k2());
        assert!(hom_closure_check(&co, 3, Direction::Class, B).unwrap().is_closed());
    }

    #[test]
    fn one_element_class_is_not_closed() {
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let o = ClassOracle::predicate("one element", sig, |a| Ok(a.size() == 1));
        match hom_closure_check(&o, 2, Direction::Class, B).unwrap() {
            ClosureReport::Violation { from, to } => {
                assert_eq!(from.size(), 1);
                assert!(hom_search(&from, &to).unwrap().is_some());
                assert!(!o.contains(&to).unwrap());
            }
            ClosureReport::Closed => panic!("expected a violation"),
        }
    }

    #[test]
    fn datalog_classes_are_closed() {
        let p = parse_program("#edb R/1 B/1\n#idb goal/0\ngoal :- R(x), B(y).\n").unwrap();
        let o = ClassOracle::program("crb", &p).unwrap();
        assert!(hom_closure_check(&o, 3, Direction::Class, B).unwrap().is_closed());
    }
}
