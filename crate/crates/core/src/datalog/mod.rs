//! Datalog programs without negation: syntax, width, least fixed points and
//! the union/intersection combinators.

mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::structure::{valid_token, Signature};

pub use eval::{derives_goal, least_fixed_point, Evaluator};
pub use parse::parse_program;

pub const GOAL: &str = "goal";

/// Argument of an atom: a variable, or a constant symbol written `@c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "@{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub rel: String,
    pub args: Vec<Term>,
}

impl Atom {
    /// Atom whose arguments are all variables.
    pub fn new(rel: &str, vars: &[&str]) -> Self {
        Atom {
            rel: rel.to_string(),
            args: vars.iter().map(|v| Term::Var(v.to_string())).collect(),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> + '_ {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rel)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(Term::to_string).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Rule { head, body }
    }

    /// Distinct variables in order of first occurrence (head first).
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = Vec::new();
        for v in std::iter::once(&self.head)
            .chain(&self.body)
            .flat_map(Atom::vars)
        {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen
    }

    pub fn has_constants(&self) -> bool {
        std::iter::once(&self.head)
            .chain(&self.body)
            .any(|a| a.args.iter().any(|t| matches!(t, Term::Const(_))))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            let body: Vec<String> = self.body.iter().map(Atom::to_string).collect();
            write!(f, " :- {}", body.join(", "))?;
        }
        f.write_str(".")
    }
}

/// Width `(l, k)`: maximal IDB arity and maximal number of variables per rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Width {
    pub l: usize,
    pub k: usize,
}

impl fmt::Display for Width {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.l, self.k)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatalogProgram {
    edb: Signature,
    idb: Signature,
    rules: Vec<Rule>,
}

impl DatalogProgram {
    /// Checks disjointness of EDB and IDB, the presence of a nullary `goal`,
    /// declared symbols and arities, and range restriction.
    pub fn new(edb: Signature, idb: Signature, rules: Vec<Rule>) -> Result<Self> {
        if idb.arity(GOAL) != Some(0) {
            return Err(Error::InvalidInput("the IDB signature must contain goal/0".into()));
        }
        if !idb.is_constant_free() {
            return Err(Error::InvalidInput("IDB symbols must be relations".into()));
        }
        for (name, _) in idb.relations() {
            if edb.has_relation(name) || edb.has_constant(name) {
                return Err(Error::DuplicateSymbol(name.to_string()));
            }
        }
        for rule in &rules {
            check_rule(&edb, &idb, rule)?;
        }
        Ok(DatalogProgram { edb, idb, rules })
    }

    pub fn edb(&self) -> &Signature {
        &self.edb
    }

    pub fn idb(&self) -> &Signature {
        &self.idb
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Same program with the rules in a different order.
    pub fn with_rules(&self, rules: Vec<Rule>) -> Result<Self> {
        Self::new(self.edb.clone(), self.idb.clone(), rules)
    }

    /// Program extended by extra rules.
    pub fn extended(&self, extra: &[Rule]) -> Result<Self> {
        let mut rules = self.rules.clone();
        rules.extend_from_slice(extra);
        self.with_rules(rules)
    }

    pub fn width(&self) -> Width {
        width(self)
    }

    /// EDB ∪ IDB.
    pub fn full_signature(&self) -> Signature {
        self.edb.merge(&self.idb).expect("disjoint by construction")
    }
}

fn check_rule(edb: &Signature, idb: &Signature, rule: &Rule) -> Result<()> {
    let head_arity = idb.arity(&rule.head.rel).ok_or_else(|| {
        if edb.has_relation(&rule.head.rel) {
            Error::InvalidInput(format!("rule head `{}` uses an EDB symbol", rule.head))
        } else {
            Error::UndeclaredSymbol(rule.head.rel.clone())
        }
    })?;
    check_arity(&rule.head, head_arity)?;
    for atom in &rule.body {
        let arity = idb
            .arity(&atom.rel)
            .or_else(|| edb.arity(&atom.rel))
            .ok_or_else(|| Error::UndeclaredSymbol(atom.rel.clone()))?;
        check_arity(atom, arity)?;
    }
    for atom in std::iter::once(&rule.head).chain(&rule.body) {
        for t in &atom.args {
            match t {
                Term::Var(v) if !valid_token(v) => return Err(Error::InvalidName(v.clone())),
                Term::Const(c) if !edb.has_constant(c) => {
                    return Err(Error::UndeclaredSymbol(format!("@{c}")))
                }
                _ => {}
            }
        }
    }
    let body_vars: BTreeSet<&str> = rule.body.iter().flat_map(Atom::vars).collect();
    if let Some(v) = rule.head.vars().find(|v| !body_vars.contains(v)) {
        return Err(Error::UnsafeRule {
            rule: rule.to_string(),
            var: v.to_string(),
        });
    }
    Ok(())
}

fn check_arity(atom: &Atom, declared: usize) -> Result<()> {
    if atom.args.len() == declared {
        Ok(())
    } else {
        Err(Error::ArityClash {
            name: atom.rel.clone(),
            declared,
            used: atom.args.len(),
        })
    }
}

impl fmt::Display for DatalogProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "#edb {}", self.edb)?;
        writeln!(f, "#idb {}", self.idb)?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

pub fn width(p: &DatalogProgram) -> Width {
    Width {
        l: p.idb.max_arity(),
        k: p.rules.iter().map(|r| r.variables().len()).max().unwrap_or(0),
    }
}

fn rename_atom(atom: &Atom, rename: &dyn Fn(&str) -> Option<String>) -> Atom {
    Atom {
        rel: rename(&atom.rel).unwrap_or_else(|| atom.rel.clone()),
        args: atom.args.clone(),
    }
}

fn renamed(p: &DatalogProgram, suffix: &str, keep_goal: bool) -> (Signature, Vec<Rule>) {
    let rename = |name: &str| -> Option<String> {
        if !p.idb.has_relation(name) || (keep_goal && name == GOAL) {
            None
        } else {
            Some(format!("{name}{suffix}"))
        }
    };
    let mut idb = Signature::new();
    for (name, arity) in p.idb.relations() {
        let new = rename(name).unwrap_or_else(|| name.to_string());
        idb.add_relation(&new, arity).expect("fresh names");
    }
    let rules = p
        .rules
        .iter()
        .map(|r| Rule {
            head: rename_atom(&r.head, &rename),
            body: r.body.iter().map(|a| rename_atom(a, &rename)).collect(),
        })
        .collect();
    (idb, rules)
}

fn same_edb(p1: &DatalogProgram, p2: &DatalogProgram) -> Result<()> {
    p1.edb.ensure_same(&p2.edb)
}

/// Program computing `⟦p1⟧ ∪ ⟦p2⟧`; IDBs other than `goal` get the
/// suffixes `#1` and `#2`.
pub fn union_program(p1: &DatalogProgram, p2: &DatalogProgram) -> Result<DatalogProgram> {
    same_edb(p1, p2)?;
    let (idb1, mut rules) = renamed(p1, "#1", true);
    let (idb2, rules2) = renamed(p2, "#2", true);
    rules.extend(rules2);
    DatalogProgram::new(p1.edb.clone(), idb1.merge(&idb2)?, rules)
}

/// Program computing `⟦p1⟧ ∩ ⟦p2⟧`: every IDB including `goal` gets the
/// suffix `#1` or `#2`, and `goal :- goal#1, goal#2.` is added.
pub fn intersect_program(p1: &DatalogProgram, p2: &DatalogProgram) -> Result<DatalogProgram> {
    same_edb(p1, p2)?;
    let (idb1, mut rules) = renamed(p1, "#1", false);
    let (idb2, rules2) = renamed(p2, "#2", false);
    rules.extend(rules2);
    let g1 = format!("{GOAL}#1");
    let g2 = format!("{GOAL}#2");
    rules.push(Rule::new(
        Atom::new(GOAL, &[]),
        vec![Atom::new(&g1, &[]), Atom::new(&g2, &[])],
    ));
    let mut idb = idb1.merge(&idb2)?;
    idb.add_relation(GOAL, 0)?;
    DatalogProgram::new(p1.edb.clone(), idb, rules)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn crb() -> DatalogProgram {
        parse_program("#edb R/1 B/1\n#idb goal/0\ngoal :- R(x), B(y).\n").unwrap()
    }

    fn ladder() -> DatalogProgram {
        parse_program(
            "#edb S/2 T/2 R/2 N/2\n#idb U/2 goal/0\n\
             U(x,y) :- S(x,y).\n\
             U(x',y') :- U(x,y), N(x,x'), N(y,y'), R(x',y').\n\
             goal :- U(x,y), T(x,y).\n",
        )
        .unwrap()
    }

    #[test]
    fn widths() {
        assert_eq!(crb().width(), Width { l: 0, k: 2 });
        assert_eq!(ladder().width(), Width { l: 2, k: 4 });
        let both = intersect_program(&ladder(), &ladder()).unwrap();
        assert_eq!(both.width(), Width { l: 2, k: 4 });
        let either = union_program(&ladder(), &ladder()).unwrap();
        assert_eq!(either.width(), Width { l: 2, k: 4 });
    }

    #[test]
    fn combinators_rename_idbs() {
        let both = intersect_program(&ladder(), &ladder()).unwrap();
        for name in ["U#1", "U#2", "goal#1", "goal#2", "goal"] {
            assert!(both.idb().has_relation(name), "{name}");
        }
        assert_eq!(both.rules().len(), 7);
        assert_eq!(both.rules().last().unwrap().to_string(), "goal :- goal#1, goal#2.");
        let either = union_program(&ladder(), &ladder()).unwrap();
        assert!(either.idb().has_relation("U#1") && !either.idb().has_relation("goal#1"));
    }

    #[test]
    fn edb_mismatch_is_rejected() {
        assert!(union_program(&crb(), &ladder()).is_err());
        assert!(intersect_program(&crb(), &ladder()).is_err());
    }

    #[test]
    fn validation() {
        let edb = Signature::relational(&[("E", 2)]).unwrap();
        let idb = Signature::relational(&[("goal", 0), ("P", 1)]).unwrap();
        let unsafe_rule = Rule::new(Atom::new("P", &["x"]), vec![Atom::new("E", &["y", "y"])]);
        assert!(matches!(
            DatalogProgram::new(edb.clone(), idb.clone(), vec![unsafe_rule]),
            Err(Error::UnsafeRule { .. })
        ));
        let bad_arity = Rule::new(Atom::new("P", &["x"]), vec![Atom::new("E", &["x"])]);
        assert!(matches!(
            DatalogProgram::new(edb.clone(), idb.clone(), vec![bad_arity]),
            Err(Error::ArityClash { .. })
        ));
        let edb_head = Rule::new(Atom::new("E", &["x", "x"]), vec![Atom::new("P", &["x"])]);
        assert!(DatalogProgram::new(edb.clone(), idb, vec![edb_head]).is_err());
        let no_goal = Signature::relational(&[("P", 1)]).unwrap();
        assert!(DatalogProgram::new(edb, no_goal, vec![]).is_err());
    }
}
