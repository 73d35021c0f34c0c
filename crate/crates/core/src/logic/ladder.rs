use std::collections::BTreeSet;

use super::{eval_formula_with, parse_formula, Formula, SemanticsMode};
use crate::datalog::{parse_program, DatalogProgram};
use crate::error::{Error, Result};
use crate::structure::{word_signature, Signature, Structure, StructureBuilder, Tuple};

const LADDER_RELS: [&str; 4] = ["N", "R", "S", "T"];

/// `{N, R, S, T}`, all binary.
pub fn ladder_signature() -> Signature {
    Signature::relational(&LADDER_RELS.map(|r| (r, 2))).expect("static signature")
}

pub fn ladder_program() -> DatalogProgram {
    parse_program(
        "#edb N/2 R/2 S/2 T/2\n\
         #idb U/2 goal/0\n\
         U(x,y) :- S(x,y).\n\
         U(x',y') :- U(x,y), N(x,x'), N(y,y'), R(x',y').\n\
         goal :- U(x,y), T(x,y).\n",
    )
    .expect("static program")
}

/// Every binary relation that contains `S` and is closed under the
/// recursive rule meets `T`. Under guarded semantics `U` ranges over
/// guarded relations, which include the least such relation.
pub fn gso_ladder_sentence() -> Formula {
    parse_formula(
        "forall U:2 . ((forall x y . S(x,y) -> U(x,y)) \
         & (forall x y x' y' . U(x,y) & N(x,x') & N(y,y') & R(x',y') -> U(x',y'))) \
         -> exists x y . U(x,y) & T(x,y)",
    )
    .expect("static sentence")
}

fn fresh(avoid: &[&str]) -> String {
    let mut z = "z".to_string();
    while avoid.contains(&z.as_str()) {
        z.push('\'');
    }
    z
}

/// The word formula `φ_X(x, y)` that defines ladder relation `X`.
pub fn ladder_phi(rel: &str, x: &str, y: &str) -> Result<Formula> {
    let z = fresh(&[x, y]);
    let z = z.as_str();
    let less = |u: &str, v: &str| Formula::atom("<", &[u, v]);
    let none = |body: Formula| Formula::exists(&[z], body).not();
    Ok(match rel {
        "S" => Formula::and_all([
            none(less(z, x)),
            Formula::atom("P_b", &[y]),
            none(Formula::atom("P_b", &[z]).and(less(z, y))),
        ]),
        "T" => Formula::and_all([
            Formula::atom("P_a", &[x]),
            none(Formula::atom("P_a", &[z]).and(less(x, z))),
            none(less(y, z)),
        ]),
        "R" => less(x, y),
        "N" => less(x, y).and(none(less(x, z).and(less(z, y)))),
        other => return Err(Error::UnknownName(other.to_string())),
    })
}

/// `∀x ∀y ((x < y ∧ P_a(y)) → P_a(x))`.
pub fn psi2() -> Formula {
    parse_formula("forall x y . x < y & P_a(y) -> P_a(x)").expect("static sentence")
}

/// Replaces each ladder atom by its defining word formula, optionally
/// conjoining `psi2`.
pub fn substitute_ladder(phi: &Formula, with_psi2: bool) -> Result<Formula> {
    for (r, arity) in phi.free_relations() {
        if !LADDER_RELS.contains(&r.as_str()) {
            return Err(Error::UndeclaredSymbol(r));
        }
        if arity != 2 {
            return Err(Error::ArityClash {
                name: r,
                declared: 2,
                used: arity,
            });
        }
    }
    let mut failure = None;
    let out = phi.map_atoms(&mut |r, args| {
        if !LADDER_RELS.contains(&r) || args.len() != 2 {
            return None;
        }
        match ladder_phi(r, &args[0], &args[1]) {
            Ok(f) => Some(f),
            Err(e) => {
                failure = Some(e);
                None
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(if with_psi2 { out.and(psi2()) } else { out })
}

fn check_linear_order(w: &Structure) -> Result<()> {
    let n = w.size() as u32;
    let lt = |x: u32, y: u32| w.holds("<", &[x, y]);
    for x in 0..n {
        if lt(x, x) {
            return Err(Error::NotLinearOrder(format!("{0} < {0}", w.name(x))));
        }
        for y in 0..n {
            if x != y && lt(x, y) == lt(y, x) {
                return Err(Error::NotLinearOrder(format!(
                    "{} and {} are not strictly comparable",
                    w.name(x),
                    w.name(y)
                )));
            }
            for z in 0..n {
                if lt(x, y) && lt(y, z) && !lt(x, z) {
                    return Err(Error::NotLinearOrder(format!(
                        "{} < {} < {} but not {} < {}",
                        w.name(x),
                        w.name(y),
                        w.name(z),
                        w.name(x),
                        w.name(z)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// The `{S,T,R,N}`-structure on the same domain with `X = {(x,y) | φ_X(x,y)}`.
pub fn ladder_of_word(w: &Structure) -> Result<Structure> {
    w.signature().ensure_same(&word_signature())?;
    check_linear_order(w)?;
    let mut b = StructureBuilder::with_names(ladder_signature(), w.names().to_vec())?;
    for rel in LADDER_RELS {
        let phi = ladder_phi(rel, "x", "y")?;
        let mut tuples: BTreeSet<Tuple> = BTreeSet::new();
        for x in w.elements() {
            for y in w.elements() {
                if eval_formula_with(&phi, w, SemanticsMode::Standard, &[("x", x), ("y", y)])? {
                    tuples.insert(vec![x, y]);
                }
            }
        }
        for t in &tuples {
            b.fact(rel, t)?;
        }
    }
    b.build()
}
