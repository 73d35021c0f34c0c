use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use super::{Elem, Structure, StructureBuilder, Tuple};
use crate::error::{Error, Result};

/// Disjoint union with shared constants.
///
/// Elements of `b` that interpret a constant are identified with the
/// interpretation of the same constant in `a`; all other elements of `b`
/// are appended after the elements of `a`.
pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    a.signature().ensure_same(b.signature())?;

    // where every element of b lands in the union
    let mut glue: BTreeMap<Elem, Elem> = BTreeMap::new();
    for (c, eb) in b.constants() {
        let ea = a.constant(c).expect("same signature");
        match glue.insert(eb, ea) {
            Some(prev) if prev != ea => return Err(Error::ConstantDisagreement(c.to_string())),
            _ => {}
        }
    }
    let mut seen_a: BTreeMap<Elem, Elem> = BTreeMap::new();
    for (c, eb) in b.constants() {
        let ea = a.constant(c).expect("same signature");
        match seen_a.insert(ea, eb) {
            Some(prev) if prev != eb => return Err(Error::ConstantDisagreement(c.to_string())),
            _ => {}
        }
    }

    let mut names: Vec<String> = a.names().to_vec();
    let mut target = vec![0; b.size()];
    let fresh: Vec<Elem> = b.elements().filter(|e| !glue.contains_key(e)).collect();
    for e in b.elements() {
        if let Some(&g) = glue.get(&e) {
            target[e as usize] = g;
        }
    }
    let numeric = a.has_default_names() && b.has_default_names();
    for &e in &fresh {
        target[e as usize] = names.len() as Elem;
        let name = if numeric {
            (names.len() + 1).to_string()
        } else {
            let mut candidate = b.name(e).to_string();
            while names.contains(&candidate) {
                candidate.push('\'');
            }
            candidate
        };
        names.push(name);
    }

    let mut out = StructureBuilder::with_names(a.signature().clone(), names)?;
    for (rel, t) in a.all_facts() {
        out.fact(rel, t)?;
    }
    let mut image = Vec::new();
    for (rel, t) in b.all_facts() {
        image.clear();
        image.extend(t.iter().map(|&e| target[e as usize]));
        out.fact(rel, &image)?;
    }
    for (c, e) in a.constants() {
        out.constant(c, e)?;
    }
    out.build()
}

/// Tuples of length `n` whose entries are covered by the entries of a
/// single fact, together with the constant tuples `(e,..,e)` (guarded by
/// `x = x`).
pub fn guarded_tuples(a: &Structure, n: usize) -> BTreeSet<Tuple> {
    let mut out = BTreeSet::new();
    if n == 0 {
        out.insert(Vec::new());
        return out;
    }
    let mut covers: BTreeSet<Vec<Elem>> = a.elements().map(|e| vec![e]).collect();
    for (_, t) in a.all_facts() {
        let set: BTreeSet<Elem> = t.iter().copied().collect();
        if !set.is_empty() {
            covers.insert(set.into_iter().collect());
        }
    }
    for cover in &covers {
        for t in (0..n).map(|_| cover.iter().copied()).multi_cartesian_product() {
            out.insert(t);
        }
    }
    out
}

/// Brute-force isomorphism test (permutation search), intended for small
/// structures.
pub fn is_isomorphic(a: &Structure, b: &Structure) -> bool {
    if a.signature() != b.signature() || a.size() != b.size() {
        return false;
    }
    if (0..a.signature().relation_count()).any(|i| a.relation(i).len() != b.relation(i).len()) {
        return false;
    }
    let n = a.size();
    (0..n as Elem).permutations(n).any(|perm| {
        let perm: Vec<Elem> = perm;
        a.constants().all(|(c, e)| b.constant(c) == Some(perm[e as usize]))
            && (0..a.signature().relation_count()).all(|i| {
                a.relation(i).iter().all(|t| {
                    let img: Vec<Elem> = t.iter().map(|&e| perm[e as usize]).collect();
                    b.holds_at(i, &img)
                })
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{hom_search, Signature};

    fn unary_sig() -> Signature {
        Signature::relational(&[("R1", 1), ("R2", 1), ("R3", 1)]).unwrap()
    }

    fn point(rel: Option<&str>) -> Structure {
        let mut b = StructureBuilder::new(unary_sig(), 1).unwrap();
        if let Some(r) = rel {
            b.fact(r, &[0]).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn union_of_empty_points() {
        let i = point(None);
        let u = disjoint_union(&i, &i).unwrap();
        assert_eq!(u.size(), 2);
        assert_eq!(u.fact_count(), 0);
    }

    #[test]
    fn union_of_unary_points() {
        let u = disjoint_union(&point(Some("R1")), &point(Some("R2"))).unwrap();
        assert_eq!(u.size(), 2);
        assert_eq!(u.facts("R1").unwrap().iter().collect::<Vec<_>>(), vec![&vec![0]]);
        assert_eq!(u.facts("R2").unwrap().iter().collect::<Vec<_>>(), vec![&vec![1]]);
        assert!(u.facts("R3").unwrap().is_empty());
    }

    #[test]
    fn shared_constants_are_glued() {
        let mut sig = Signature::relational(&[("E", 2)]).unwrap();
        sig.add_constant("c").unwrap();
        let mut a = StructureBuilder::new(sig.clone(), 2).unwrap();
        a.fact("E", &[0, 1]).unwrap().constant("c", 0).unwrap();
        let a = a.build().unwrap();
        let mut b = StructureBuilder::new(sig.clone(), 3).unwrap();
        b.fact("E", &[2, 1]).unwrap().constant("c", 2).unwrap();
        let b = b.build().unwrap();
        let u = disjoint_union(&a, &b).unwrap();
        assert_eq!(u.size(), 4);
        assert_eq!(u.constant("c"), Some(0));
        assert!(u.holds("E", &[0, 1]));
        // b's element 2 is the constant, b's element 1 becomes union element 3
        assert!(u.holds("E", &[0, 3]));
    }

    #[test]
    fn inconsistent_constants_are_rejected() {
        let mut sig = Signature::new();
        sig.add_constant("c").unwrap();
        sig.add_constant("d").unwrap();
        let mut a = StructureBuilder::new(sig.clone(), 1).unwrap();
        a.constant("c", 0).unwrap().constant("d", 0).unwrap();
        let mut b = StructureBuilder::new(sig, 2).unwrap();
        b.constant("c", 0).unwrap().constant("d", 1).unwrap();
        let err = disjoint_union(&a.build().unwrap(), &b.build().unwrap()).unwrap_err();
        assert!(matches!(err, Error::ConstantDisagreement(_)));
    }

    #[test]
    fn inclusion_into_union_is_a_homomorphism() {
        let a = point(Some("R3"));
        let u = disjoint_union(&a, &point(Some("R1"))).unwrap();
        assert!(hom_search(&a, &u).unwrap().is_some());
    }

    #[test]
    fn guarded_pairs() {
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let mut b = StructureBuilder::new(sig.clone(), 2).unwrap();
        b.fact("E", &[0, 1]).unwrap();
        let with_fact = b.build().unwrap();
        assert_eq!(guarded_tuples(&with_fact, 2).len(), 4);

        let bare = Structure::empty(&sig, 2).unwrap();
        let pairs: Vec<Tuple> = guarded_tuples(&bare, 2).into_iter().collect();
        assert_eq!(pairs, vec![vec![0, 0], vec![1, 1]]);
        assert_eq!(guarded_tuples(&bare, 1).len(), 2);
    }

    #[test]
    fn isomorphism_check() {
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let mut x = StructureBuilder::new(sig.clone(), 3).unwrap();
        x.fact("E", &[0, 1]).unwrap();
        let mut y = StructureBuilder::new(sig, 3).unwrap();
        y.fact("E", &[2, 0]).unwrap();
        assert!(is_isomorphic(&x.build().unwrap(), &y.build().unwrap()));
    }
}
