use std::collections::BTreeSet;
use std::fmt;

use super::{valid_token, Elem, Signature, Structure, StructureBuilder};
use crate::error::{Error, Result};

/// A relational atom `R(v1,..,vn)` over variable names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PPAtom {
    pub rel: String,
    pub args: Vec<String>,
}

impl PPAtom {
    pub fn new(rel: &str, args: &[&str]) -> Self {
        PPAtom {
            rel: rel.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// An equality-free primitive positive formula `∃ bound (atom ∧ ... ∧ atom)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPFormula {
    signature: Signature,
    free: Vec<String>,
    bound: Vec<String>,
    atoms: Vec<PPAtom>,
}

impl PPFormula {
    pub fn new(
        signature: Signature,
        free: Vec<String>,
        bound: Vec<String>,
        atoms: Vec<PPAtom>,
    ) -> Result<Self> {
        let mut vars = BTreeSet::new();
        for v in free.iter().chain(&bound) {
            if !valid_token(v) {
                return Err(Error::InvalidName(v.clone()));
            }
            if !vars.insert(v.as_str()) {
                return Err(Error::InvalidInput(format!("variable `{v}` listed twice")));
            }
        }
        if vars.is_empty() {
            return Err(Error::InvalidInput(
                "a pp-formula needs at least one variable".into(),
            ));
        }
        for atom in &atoms {
            if atom.rel == "=" {
                return Err(Error::InvalidInput(
                    "equality atoms are not allowed in pp-formulas".into(),
                ));
            }
            let arity = signature
                .arity(&atom.rel)
                .ok_or_else(|| Error::UndeclaredSymbol(atom.rel.clone()))?;
            if arity != atom.args.len() {
                return Err(Error::ArityClash {
                    name: atom.rel.clone(),
                    declared: arity,
                    used: atom.args.len(),
                });
            }
            if let Some(v) = atom.args.iter().find(|v| !vars.contains(v.as_str())) {
                return Err(Error::InvalidInput(format!("variable `{v}` is not declared")));
            }
        }
        Ok(PPFormula {
            signature,
            free,
            bound,
            atoms,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn free(&self) -> &[String] {
        &self.free
    }

    pub fn bound(&self) -> &[String] {
        &self.bound
    }

    pub fn atoms(&self) -> &[PPAtom] {
        &self.atoms
    }

    /// Free variables first, then bound ones.
    pub fn variables(&self) -> impl Iterator<Item = &str> + '_ {
        self.free.iter().chain(&self.bound).map(String::as_str)
    }

    fn var_index(&self, v: &str) -> Elem {
        self.variables().position(|w| w == v).expect("checked in new") as Elem
    }
}

impl fmt::Display for PPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.bound.is_empty() {
            write!(f, "exists {} . ", self.bound.join(" "))?;
        }
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| format!("{}({})", a.rel, a.args.join(",")))
            .collect();
        f.write_str(&parts.join(" & "))
    }
}

/// The canonical database: one element per variable, one fact per atom.
pub fn canonical_database(phi: &PPFormula) -> Result<Structure> {
    let names: Vec<String> = phi.variables().map(str::to_string).collect();
    let mut b = StructureBuilder::with_names(phi.signature.clone(), names)?;
    for atom in &phi.atoms {
        let t: Vec<Elem> = atom.args.iter().map(|v| phi.var_index(v)).collect();
        b.fact(&atom.rel, &t)?;
    }
    b.build()
}

/// The canonical database expanded by one constant per free variable; the
/// constant carries the variable's name and denotes the variable's element.
pub fn canonical_database_with_constants(phi: &PPFormula) -> Result<Structure> {
    let base = canonical_database(phi)?;
    let consts: Vec<(&str, Elem)> = phi
        .free
        .iter()
        .map(|v| (v.as_str(), phi.var_index(v)))
        .collect();
    base.with_constants(&consts)
}
