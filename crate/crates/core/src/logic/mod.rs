//! First-order and second-order formulas over relational signatures.
//!
//! Second-order variables are ordinary relation names bound by `SoExists`
//! or `SoForall`; an atom refers to the innermost such binder, or else to a
//! symbol of the structure.

mod equiv;
mod eval;
mod ground;
mod henson;
mod ladder;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use equiv::{equiv_q, EquivChecker, EquivResult, DEFAULT_EQUIV_BUDGET};
pub use eval::{
    eval_formula, eval_formula_with, eval_traced, so_branch_estimate, EvalOutcome, Route,
    SemanticsMode, AUTO_BRUTE_LIMIT, DEFAULT_SO_BUDGET,
};
pub use henson::{embeds_henson, henson_phi, henson_outer_sentence, henson_tournament};
pub use ladder::{
    gso_ladder_sentence, ladder_of_word, ladder_phi, ladder_program, ladder_signature, psi2,
    substitute_ladder,
};
pub use parse::parse_formula;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<String>),
    Eq(String, String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    SoExists(String, usize, Box<Formula>),
    SoForall(String, usize, Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn atom(rel: &str, args: &[&str]) -> Formula {
        Atom(rel.to_string(), args.iter().map(|s| s.to_string()).collect())
    }

    pub fn eq(x: &str, y: &str) -> Formula {
        Eq(x.to_string(), y.to_string())
    }

    pub fn neq(x: &str, y: &str) -> Formula {
        Formula::eq(x, y).not()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Formula {
        And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Formula {
        Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Formula {
        Implies(Box::new(self), Box::new(other))
    }

    pub fn iff(self, other: Formula) -> Formula {
        Iff(Box::new(self), Box::new(other))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(False)
    }

    pub fn exists(vars: &[&str], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |f, v| Exists(v.to_string(), Box::new(f)))
    }

    pub fn forall(vars: &[&str], body: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(body, |f, v| Forall(v.to_string(), Box::new(f)))
    }

    /// `∃x ∈ X φ`, i.e. `∃x (X(x) ∧ φ)`.
    pub fn exists_in(x: &str, set: &str, body: Formula) -> Formula {
        Formula::exists(&[x], Formula::atom(set, &[x]).and(body))
    }

    /// `∀x ∈ X φ`, i.e. `∀x (X(x) → φ)`.
    pub fn forall_in(x: &str, set: &str, body: Formula) -> Formula {
        Formula::forall(&[x], Formula::atom(set, &[x]).implies(body))
    }

    pub fn so_exists(var: &str, arity: usize, body: Formula) -> Formula {
        SoExists(var.to_string(), arity, Box::new(body))
    }

    pub fn so_forall(var: &str, arity: usize, body: Formula) -> Formula {
        SoForall(var.to_string(), arity, Box::new(body))
    }

    /// `∀X ≠ ∅ φ`, i.e. `∀X ((∃x X(x)) → φ)`.
    pub fn forall_nonempty(var: &str, body: Formula) -> Formula {
        let nonempty = Formula::exists(&["x"], Formula::atom(var, &["x"]));
        Formula::so_forall(var, 1, nonempty.implies(body))
    }

    /// `∃X ≠ ∅ φ`, i.e. `∃X ((∃x X(x)) ∧ φ)`.
    pub fn exists_nonempty(var: &str, body: Formula) -> Formula {
        let nonempty = Formula::exists(&["x"], Formula::atom(var, &["x"]));
        Formula::so_exists(var, 1, nonempty.and(body))
    }

    /// Nesting depth of quantifiers, first- and second-order alike.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            True | False | Atom(..) | Eq(..) => 0,
            Not(f) => f.quantifier_rank(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            Exists(_, f) | Forall(_, f) | SoExists(_, _, f) | SoForall(_, _, f) => {
                1 + f.quantifier_rank()
            }
        }
    }

    /// Element variables (or constant names) occurring free.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            True | False => {}
            Atom(_, args) => {
                for a in args {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
            }
            Eq(x, y) => {
                for a in [x, y] {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
            }
            Not(f) | SoExists(_, _, f) | SoForall(_, _, f) => f.collect_free(bound, out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Exists(v, f) | Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Relation symbols used but not bound by a second-order quantifier,
    /// with the arities they are used at.
    pub fn free_relations(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.collect_rels(&mut Vec::new(), &mut out);
        out
    }

    fn collect_rels(&self, bound: &mut Vec<String>, out: &mut BTreeSet<(String, usize)>) {
        match self {
            True | False | Eq(..) => {}
            Atom(r, args) => {
                if !bound.contains(r) {
                    out.insert((r.clone(), args.len()));
                }
            }
            Not(f) | Exists(_, f) | Forall(_, f) => f.collect_rels(bound, out),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.collect_rels(bound, out);
                b.collect_rels(bound, out);
            }
            SoExists(v, _, f) | SoForall(v, _, f) => {
                bound.push(v.clone());
                f.collect_rels(bound, out);
                bound.pop();
            }
        }
    }

    /// Whether every second-order variable is unary.
    pub fn is_monadic(&self) -> bool {
        match self {
            True | False | Atom(..) | Eq(..) => true,
            Not(f) | Exists(_, f) | Forall(_, f) => f.is_monadic(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => a.is_monadic() && b.is_monadic(),
            SoExists(_, r, f) | SoForall(_, r, f) => *r == 1 && f.is_monadic(),
        }
    }

    pub fn has_so_quantifiers(&self) -> bool {
        match self {
            True | False | Atom(..) | Eq(..) => false,
            Not(f) | Exists(_, f) | Forall(_, f) => f.has_so_quantifiers(),
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
                a.has_so_quantifiers() || b.has_so_quantifiers()
            }
            SoExists(..) | SoForall(..) => true,
        }
    }

    /// Negation normal form over `∧ ∨ ¬ ∃ ∀` with negations on atoms only.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Formula {
        let lit = |f: Formula| if positive { f } else { f.not() };
        match self {
            True => if positive { True } else { False },
            False => if positive { False } else { True },
            Atom(..) | Eq(..) => lit(self.clone()),
            Not(f) => f.nnf_signed(!positive),
            And(a, b) => {
                let (a, b) = (a.nnf_signed(positive), b.nnf_signed(positive));
                if positive { a.and(b) } else { a.or(b) }
            }
            Or(a, b) => {
                let (a, b) = (a.nnf_signed(positive), b.nnf_signed(positive));
                if positive { a.or(b) } else { a.and(b) }
            }
            Implies(a, b) => a.clone().not().or((**b).clone()).nnf_signed(positive),
            Iff(a, b) => {
                let both = (**a).clone().and((**b).clone());
                let neither = a.clone().not().and(b.clone().not());
                both.or(neither).nnf_signed(positive)
            }
            Exists(v, f) => {
                let body = Box::new(f.nnf_signed(positive));
                if positive { Exists(v.clone(), body) } else { Forall(v.clone(), body) }
            }
            Forall(v, f) => {
                let body = Box::new(f.nnf_signed(positive));
                if positive { Forall(v.clone(), body) } else { Exists(v.clone(), body) }
            }
            SoExists(v, r, f) => {
                let body = Box::new(f.nnf_signed(positive));
                if positive { SoExists(v.clone(), *r, body) } else { SoForall(v.clone(), *r, body) }
            }
            SoForall(v, r, f) => {
                let body = Box::new(f.nnf_signed(positive));
                if positive { SoForall(v.clone(), *r, body) } else { SoExists(v.clone(), *r, body) }
            }
        }
    }

    /// Replaces every atom `R(args)` for which `f` returns a formula.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&str, &[String]) -> Option<Formula>) -> Formula {
        match self {
            Atom(r, args) => f(r, args).unwrap_or_else(|| self.clone()),
            True | False | Eq(..) => self.clone(),
            Not(g) => g.map_atoms(f).not(),
            And(a, b) => a.map_atoms(f).and(b.map_atoms(f)),
            Or(a, b) => a.map_atoms(f).or(b.map_atoms(f)),
            Implies(a, b) => a.map_atoms(f).implies(b.map_atoms(f)),
            Iff(a, b) => a.map_atoms(f).iff(b.map_atoms(f)),
            Exists(v, g) => Exists(v.clone(), Box::new(g.map_atoms(f))),
            Forall(v, g) => Forall(v.clone(), Box::new(g.map_atoms(f))),
            SoExists(v, r, g) => SoExists(v.clone(), *r, Box::new(g.map_atoms(f))),
            SoForall(v, r, g) => SoForall(v.clone(), *r, Box::new(g.map_atoms(f))),
        }
    }

    /// Simultaneous renaming of free element variables.
    pub fn rename_free(&self, map: &[(&str, &str)]) -> Formula {
        self.rename_inner(map, &mut Vec::new())
    }

    fn rename_inner(&self, map: &[(&str, &str)], bound: &mut Vec<String>) -> Formula {
        let sub = |v: &String, bound: &Vec<String>| -> String {
            if bound.contains(v) {
                return v.clone();
            }
            map.iter()
                .find(|(from, _)| from == v)
                .map(|(_, to)| to.to_string())
                .unwrap_or_else(|| v.clone())
        };
        match self {
            True | False => self.clone(),
            Atom(r, args) => Atom(r.clone(), args.iter().map(|a| sub(a, bound)).collect()),
            Eq(x, y) => Eq(sub(x, bound), sub(y, bound)),
            Not(f) => f.rename_inner(map, bound).not(),
            And(a, b) => a.rename_inner(map, bound).and(b.rename_inner(map, bound)),
            Or(a, b) => a.rename_inner(map, bound).or(b.rename_inner(map, bound)),
            Implies(a, b) => a.rename_inner(map, bound).implies(b.rename_inner(map, bound)),
            Iff(a, b) => a.rename_inner(map, bound).iff(b.rename_inner(map, bound)),
            Exists(v, f) | Forall(v, f) => {
                bound.push(v.clone());
                let body = Box::new(f.rename_inner(map, bound));
                bound.pop();
                if matches!(self, Exists(..)) {
                    Exists(v.clone(), body)
                } else {
                    Forall(v.clone(), body)
                }
            }
            SoExists(v, r, f) => SoExists(v.clone(), *r, Box::new(f.rename_inner(map, bound))),
            SoForall(v, r, f) => SoForall(v.clone(), *r, Box::new(f.rename_inner(map, bound))),
        }
    }
}

fn prec(f: &Formula) -> u8 {
    match f {
        Iff(..) => 1,
        Implies(..) => 2,
        Or(..) => 3,
        And(..) => 4,
        Exists(..) | Forall(..) | SoExists(..) | SoForall(..) => 0,
        _ => 6,
    }
}

impl Formula {
    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = prec(self);
        let paren = p < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            True => f.write_str("true")?,
            False => f.write_str("false")?,
            Atom(r, args) if r == "<" && args.len() == 2 => write!(f, "{} < {}", args[0], args[1])?,
            Atom(r, args) if args.is_empty() => f.write_str(r)?,
            Atom(r, args) => write!(f, "{r}({})", args.join(","))?,
            Eq(x, y) => write!(f, "{x} = {y}")?,
            Not(g) => match &**g {
                Eq(x, y) => write!(f, "{x} != {y}")?,
                _ => {
                    f.write_str("~")?;
                    g.fmt_at(f, 5)?;
                }
            },
            And(a, b) => {
                a.fmt_at(f, 4)?;
                f.write_str(" & ")?;
                b.fmt_at(f, 5)?;
            }
            Or(a, b) => {
                a.fmt_at(f, 3)?;
                f.write_str(" | ")?;
                b.fmt_at(f, 4)?;
            }
            Implies(a, b) => {
                a.fmt_at(f, 3)?;
                f.write_str(" -> ")?;
                b.fmt_at(f, 2)?;
            }
            Iff(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" <-> ")?;
                b.fmt_at(f, 2)?;
            }
            Exists(v, g) | Forall(v, g) => {
                let q = if matches!(self, Exists(..)) { "exists" } else { "forall" };
                write!(f, "{q} {v} . ")?;
                g.fmt_at(f, 0)?;
            }
            SoExists(v, r, g) | SoForall(v, r, g) => {
                let q = if matches!(self, SoExists(..)) { "exists" } else { "forall" };
                write!(f, "{q} {v}:{r} . ")?;
                g.fmt_at(f, 0)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_free_variables() {
        let f = Formula::exists(&["x", "y"], Formula::neq("x", "y"));
        assert_eq!(f.quantifier_rank(), 2);
        assert!(f.free_vars().is_empty());
        let g = Formula::forall_nonempty("X", Formula::atom("E", &["x", "z"]));
        assert_eq!(g.free_vars().into_iter().collect::<Vec<_>>(), vec!["x", "z"]);
        assert_eq!(
            g.free_relations().into_iter().collect::<Vec<_>>(),
            vec![("E".to_string(), 2)]
        );
    }

    #[test]
    fn nnf_pushes_negations() {
        let f = Formula::so_forall("X", 1, Formula::atom("X", &["x"]).implies(Formula::False)).not();
        let n = f.nnf();
        assert!(matches!(n, SoExists(..)));
        assert_eq!(n.to_string(), "exists X:1 . X(x) & true");
    }
}
