use super::{Elem, Structure};
use crate::error::Result;

/// A total map from the domain of a source structure to a target domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Homomorphism {
    pub map: Vec<Elem>,
}

impl Homomorphism {
    pub fn apply(&self, e: Elem) -> Elem {
        self.map[e as usize]
    }

    pub fn identity(n: usize) -> Self {
        Homomorphism {
            map: (0..n as Elem).collect(),
        }
    }
}

/// Checks that `map` sends every fact and constant of `a` into `b`.
pub fn is_homomorphism(a: &Structure, b: &Structure, map: &[Elem]) -> bool {
    if map.len() != a.size() || map.iter().any(|&e| e as usize >= b.size()) {
        return false;
    }
    if a.signature() != b.signature() {
        return false;
    }
    let mut image = Vec::new();
    for idx in 0..a.signature().relation_count() {
        for t in a.relation(idx) {
            image.clear();
            image.extend(t.iter().map(|&e| map[e as usize]));
            if !b.holds_at(idx, &image) {
                return false;
            }
        }
    }
    a.constants()
        .all(|(c, e)| b.constant(c) == Some(map[e as usize]))
}

/// Backtracking search for a homomorphism `a -> b`.
///
/// Variables are assigned in domain order and values tried in increasing
/// order, so the witness returned is the lexicographically least one.
pub fn hom_search(a: &Structure, b: &Structure) -> Result<Option<Homomorphism>> {
    a.signature().ensure_same(b.signature())?;
    Ok(HomSearch::new(a, b).map(|s| s.run()).unwrap_or(None))
}

struct HomSearch<'a> {
    a: &'a Structure,
    b: &'a Structure,
    candidates: Vec<Vec<Elem>>,
    // (relation index, fact) pairs, grouped by the largest element they mention
    closing: Vec<Vec<(usize, &'a [Elem])>>,
}

impl<'a> HomSearch<'a> {
    fn new(a: &'a Structure, b: &'a Structure) -> Option<Self> {
        let n = a.size();
        let mut candidates: Vec<Vec<Elem>> = vec![b.elements().collect(); n];
        let mut closing: Vec<Vec<(usize, &[Elem])>> = vec![Vec::new(); n];
        let mut nullary_ok = true;

        for idx in 0..a.signature().relation_count() {
            let target = b.relation(idx);
            for t in a.relation(idx) {
                match t.iter().max() {
                    None => nullary_ok &= target.contains(&Vec::new()),
                    Some(&m) => closing[m as usize].push((idx, t.as_slice())),
                }
                // positional support: candidate values must occur in that column
                for (pos, &e) in t.iter().enumerate() {
                    candidates[e as usize].retain(|&v| target.iter().any(|u| u[pos] == v));
                }
            }
        }
        if !nullary_ok {
            return None;
        }
        for (c, e) in a.constants() {
            let forced = b.constant(c)?;
            candidates[e as usize].retain(|&v| v == forced);
        }
        Some(HomSearch {
            a,
            b,
            candidates,
            closing,
        })
    }

    fn run(&self) -> Option<Homomorphism> {
        let mut map = vec![0; self.a.size()];
        if self.assign(0, &mut map) {
            Some(Homomorphism { map })
        } else {
            None
        }
    }

    fn assign(&self, v: usize, map: &mut Vec<Elem>) -> bool {
        if v == map.len() {
            return true;
        }
        let mut image = Vec::new();
        'values: for &val in &self.candidates[v] {
            map[v] = val;
            for &(idx, t) in &self.closing[v] {
                image.clear();
                image.extend(t.iter().map(|&e| map[e as usize]));
                if !self.b.holds_at(idx, &image) {
                    continue 'values;
                }
            }
            if self.assign(v + 1, map) {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{Signature, StructureBuilder};

    fn digraph(n: usize, edges: &[(Elem, Elem)]) -> Structure {
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let mut b = StructureBuilder::new(sig, n).unwrap();
        for &(x, y) in edges {
            b.fact("E", &[x, y]).unwrap();
        }
        b.build().unwrap()
    }

    fn clique(n: usize) -> Structure {
        let mut edges = Vec::new();
        for x in 0..n as Elem {
            for y in 0..n as Elem {
                if x != y {
                    edges.push((x, y));
                }
            }
        }
        digraph(n, &edges)
    }

    // Oracle: try every map.
    fn brute_force(a: &Structure, b: &Structure) -> Option<Vec<Elem>> {
        let n = a.size();
        let m = b.size() as u64;
        (0..m.pow(n as u32))
            .map(|code| {
                let mut c = code;
                let mut map = vec![0; n];
                for slot in map.iter_mut().rev() {
                    *slot = (c % m) as Elem;
                    c /= m;
                }
                map
            })
            .find(|map| is_homomorphism(a, b, map))
    }

    #[test]
    fn identity_is_found() {
        let c = digraph(3, &[(0, 1), (1, 2), (2, 2)]);
        assert_eq!(hom_search(&c, &c).unwrap(), Some(Homomorphism::identity(3)));
    }

    #[test]
    fn k3_does_not_map_to_k2() {
        assert_eq!(brute_force(&clique(3), &clique(2)), None);
        assert_eq!(hom_search(&clique(3), &clique(2)).unwrap(), None);
    }

    #[test]
    fn directed_four_cycle_maps_to_k2() {
        let c4 = digraph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let found = hom_search(&c4, &clique(2)).unwrap().unwrap();
        assert!(is_homomorphism(&c4, &clique(2), &found.map));
        assert_eq!(Some(found.map), brute_force(&c4, &clique(2)));
    }

    #[test]
    fn witness_is_lexicographically_least() {
        let a = digraph(3, &[(0, 1)]);
        let b = digraph(3, &[(1, 2), (0, 2), (2, 0)]);
        let found = hom_search(&a, &b).unwrap().unwrap();
        assert_eq!(Some(found.map), brute_force(&a, &b));
    }

    #[test]
    fn signature_mismatch_is_an_error() {
        let other = Structure::empty(&Signature::relational(&[("F", 2)]).unwrap(), 1).unwrap();
        assert!(hom_search(&clique(2), &other).is_err());
    }

    #[test]
    fn constants_are_respected() {
        let mut sig = Signature::relational(&[("E", 2)]).unwrap();
        sig.add_constant("c").unwrap();
        let mut a = StructureBuilder::new(sig.clone(), 1).unwrap();
        a.constant("c", 0).unwrap();
        let a = a.build().unwrap();
        let mut b = StructureBuilder::new(sig, 2).unwrap();
        b.constant("c", 1).unwrap();
        let b = b.build().unwrap();
        assert_eq!(hom_search(&a, &b).unwrap().unwrap().map, vec![1]);
    }
}
