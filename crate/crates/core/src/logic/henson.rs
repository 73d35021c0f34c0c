use super::{parse_formula, Formula};
use crate::error::{Error, Result};
use crate::structure::{Elem, Signature, Structure, StructureBuilder};

/// `T_n` on vertices `0..=n+1`.
pub fn henson_tournament(n: usize) -> Result<Structure> {
    if n < 2 {
        return Err(Error::InvalidParameters(format!("T_n needs n >= 2, got {n}")));
    }
    let sig = Signature::relational(&[("E", 2)])?;
    let names = (0..=n + 1).map(|i| i.to_string()).collect();
    let mut b = StructureBuilder::with_names(sig, names)?;
    for i in 0..=n {
        b.fact("E", &[i as Elem, i as Elem + 1])?;
    }
    b.fact("E", &[0, n as Elem + 1])?;
    for j in 0..=n + 1 {
        for i in 0..j {
            if i + 1 < j && (i, j) != (0, n + 1) {
                b.fact("E", &[j as Elem, i as Elem])?;
            }
        }
    }
    b.build()
}

fn same(u: &str, w: &str) -> String {
    format!("((A({u}) & A({w})) | (B({u}) & B({w})))")
}

fn other(u: &str, w: &str) -> String {
    format!("((A({u}) & B({w})) | (B({u}) & A({w})))")
}

/// `w` immediately precedes `u`; binds `q`.
fn prev(w: &str, u: &str) -> String {
    format!(
        "(({u} = a & {w} = s) | ({u} != a & {u} != s & {o} & E({w},{u}) \
         & (forall q . {oq} & E(q,{u}) -> ~E({w},q))))",
        o = other(w, u),
        oq = other("q", u),
    )
}

/// `w` comes before `u`; binds `p` and `q`.
fn before(w: &str, u: &str) -> String {
    format!(
        "(({w} = s & {u} != s) | ({sm} & E({u},{w})) \
         | ({ot} & (exists p . {pv} & (p = {w} | ({sp} & E(p,{w}))))))",
        sm = same(w, u),
        ot = other(w, u),
        pv = prev("p", u),
        sp = same("p", w),
    )
}

/// The `{X, E}`-sentence that holds iff `(X; E)` is isomorphic to some `T_n`.
pub fn henson_phi() -> Formula {
    let conjuncts = [
        // tournament on X
        "forall x . X(x) -> ~E(x,x)".to_string(),
        "forall x y . X(x) & X(y) & x != y -> (E(x,y) <-> ~E(y,x))".to_string(),
        // X = {s} + A + B
        "X(s) & X(t) & t != s & A(a) & B(b)".to_string(),
        "forall x . (A(x) -> X(x)) & (B(x) -> X(x)) & ~(A(x) & B(x))".to_string(),
        "forall x . X(x) -> (x = s | A(x) | B(x))".to_string(),
        "~A(s) & ~B(s)".to_string(),
        // A and B are linearly ordered with sinks a and b
        "forall x y z . A(x) & A(y) & A(z) & E(x,y) & E(y,z) -> E(x,z)".to_string(),
        "forall x y z . B(x) & B(y) & B(z) & E(x,y) & E(y,z) -> E(x,z)".to_string(),
        "forall x . A(x) & x != a -> E(x,a)".to_string(),
        "forall x . B(x) & x != b -> E(x,b)".to_string(),
        // the special vertices
        "E(s,t) & E(s,a) & E(a,b) & t != a & t != b".to_string(),
        "forall x . X(x) & x != s & x != a & x != t -> E(x,s)".to_string(),
        // a single successor chain from s to t alternating between A and B
        format!("forall u . X(u) & u != s -> (exists w . {})", prev("w", "u")),
        format!("forall u v w . {} & {} -> u = v", prev("w", "u"), prev("w", "v")),
        format!("forall w . X(w) & w != t -> (exists u . {})", prev("w", "u")),
        format!("forall u . ~{}", prev("t", "u")),
        format!(
            "forall u v w . u != s & {} & {} -> {} & E(w,u) & ~(exists z . {} & E(w,z) & E(z,u))",
            prev("u", "v"),
            prev("v", "w"),
            same("w", "u"),
            same("z", "u"),
        ),
        // every other edge points backwards along the chain
        format!(
            "forall u w . X(u) & X(w) & u != w -> (E(u,w) <-> ({} | (u = s & w = t) \
             | ({} & ~{} & ~(w = s & u = t))))",
            prev("u", "w"),
            before("w", "u"),
            prev("w", "u"),
        ),
    ];
    let body = conjuncts.join(") & (");
    let text = format!("exists A:1 B:1 . exists s t a b . ({body})");
    parse_formula(&text).expect("static sentence")
}

/// `∀x ¬E(x,x) ∧ ∀X ¬Φ` over `{E}`.
pub fn henson_outer_sentence() -> Formula {
    let loopless = parse_formula("forall x . ~E(x,x)").expect("static sentence");
    loopless.and(Formula::so_forall("X", 1, henson_phi().not()))
}

fn embeds(d: &Structure, t: &Structure, map: &mut Vec<Elem>, used: &mut Vec<bool>) -> bool {
    let i = map.len();
    if i == t.size() {
        return true;
    }
    for v in d.elements() {
        if used[v as usize] {
            continue;
        }
        let ok = (0..i).all(|j| {
            let (u, tj) = (map[j], j as Elem);
            d.holds("E", &[u, v]) == t.holds("E", &[tj, i as Elem])
                && d.holds("E", &[v, u]) == t.holds("E", &[i as Elem, tj])
        }) && d.holds("E", &[v, v]) == t.holds("E", &[i as Elem, i as Elem]);
        if ok {
            map.push(v);
            used[v as usize] = true;
            if embeds(d, t, map, used) {
                return true;
            }
            map.pop();
            used[v as usize] = false;
        }
    }
    false
}

/// Whether some `T_n` is an induced subgraph of the digraph `d` over `{E}`.
pub fn embeds_henson(d: &Structure) -> Result<bool> {
    if d.signature().arity("E") != Some(2) || d.signature().relation_count() != 1 {
        return Err(Error::SignatureMismatch(format!("expected {{E/2}}, got [{}]", d.signature())));
    }
    for n in 2..d.size().saturating_sub(1) {
        let t = henson_tournament(n)?;
        if embeds(d, &t, &mut Vec::new(), &mut vec![false; d.size()]) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{eval_formula, SemanticsMode};
    use std::collections::BTreeSet;

    fn tuples(s: &Structure) -> BTreeSet<(String, String)> {
        s.facts("E")
            .unwrap()
            .iter()
            .map(|t| (s.name(t[0]).to_string(), s.name(t[1]).to_string()))
            .collect()
    }

    #[test]
    fn t2_edges() {
        let t = henson_tournament(2).unwrap();
        let expect: BTreeSet<(String, String)> = [(0, 1), (1, 2), (2, 3), (0, 3), (2, 0), (3, 1)]
            .iter()
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .collect();
        assert_eq!(tuples(&t), expect);
        assert!(henson_tournament(1).is_err());
    }

    #[test]
    fn tournaments_are_tournaments() {
        for n in 2..7 {
            let t = henson_tournament(n).unwrap();
            let m = t.size() as Elem;
            assert_eq!(t.facts("E").unwrap().len(), (m * (m - 1) / 2) as usize);
            for x in 0..m {
                assert!(!t.holds("E", &[x, x]));
                for y in 0..m {
                    if x != y {
                        assert_ne!(t.holds("E", &[x, y]), t.holds("E", &[y, x]));
                    }
                }
            }
        }
    }

    #[test]
    fn phi_accepts_henson_tournaments() {
        for n in 2..=3 {
            let t = henson_tournament(n).unwrap();
            let all = t.elements().map(|e| vec![e]).collect();
            let s = t.with_relation("X", 1, &all).unwrap();
            assert!(eval_formula(&henson_phi(), &s, SemanticsMode::Standard).unwrap(), "T_{n}");
        }
    }

    #[test]
    fn embedding_oracle() {
        let t3 = henson_tournament(3).unwrap();
        assert!(embeds_henson(&t3).unwrap());
        assert!(embeds_henson(&henson_tournament(2).unwrap()).unwrap());
        let sig = Signature::relational(&[("E", 2)]).unwrap();
        let mut b = StructureBuilder::new(sig, 4).unwrap();
        for j in 0..4 {
            for i in 0..j {
                b.fact("E", &[i, j]).unwrap();
            }
        }
        assert!(!embeds_henson(&b.build().unwrap()).unwrap());
    }
}
