use std::fmt;
use std::sync::Arc;

use crate::datalog::{DatalogProgram, Evaluator};
use crate::error::Result;
use crate::logic::{eval_formula, Formula, SemanticsMode};
use crate::structure::{hom_search, is_isomorphic, Signature, Structure};

type Predicate = Arc<dyn Fn(&Structure) -> Result<bool> + Send + Sync>;

#[derive(Clone)]
enum Backing {
    Program(Arc<Evaluator>),
    Formula(Formula, SemanticsMode),
    Csp(Structure),
    CoCsp(Structure),
    Explicit(Vec<Structure>),
    AnyOf(Vec<ClassOracle>),
    AllOf(Vec<ClassOracle>),
    Not(Box<ClassOracle>),
    Predicate(Predicate),
}

/// Membership test for a class of finite structures over one signature.
#[derive(Clone)]
pub struct ClassOracle {
    name: String,
    signature: Signature,
    backing: Backing,
}

impl fmt::Debug for ClassOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassOracle({} over [{}])", self.name, self.signature)
    }
}

impl ClassOracle {
    /// Structures on which the program derives `goal`.
    pub fn program(name: &str, p: &DatalogProgram) -> Result<Self> {
        Ok(ClassOracle {
            name: name.to_string(),
            signature: p.edb().clone(),
            backing: Backing::Program(Arc::new(Evaluator::new(p)?)),
        })
    }

    /// Models of a sentence.
    pub fn formula(name: &str, signature: Signature, phi: Formula, mode: SemanticsMode) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature,
            backing: Backing::Formula(phi, mode),
        }
    }

    /// `CSP(b)`: structures with a homomorphism to `b`.
    pub fn csp(name: &str, b: Structure) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature: b.signature().clone(),
            backing: Backing::Csp(b),
        }
    }

    /// The complement of `CSP(b)`.
    pub fn co_csp(name: &str, b: Structure) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature: b.signature().clone(),
            backing: Backing::CoCsp(b),
        }
    }

    /// Structures isomorphic to one in the list.
    pub fn explicit(name: &str, signature: Signature, members: Vec<Structure>) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature,
            backing: Backing::Explicit(members),
        }
    }

    pub fn any_of(name: &str, signature: Signature, parts: Vec<ClassOracle>) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature,
            backing: Backing::AnyOf(parts),
        }
    }

    pub fn all_of(name: &str, signature: Signature, parts: Vec<ClassOracle>) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature,
            backing: Backing::AllOf(parts),
        }
    }

    pub fn complement(name: &str, inner: ClassOracle) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature: inner.signature.clone(),
            backing: Backing::Not(Box::new(inner)),
        }
    }

    pub fn predicate(
        name: &str,
        signature: Signature,
        f: impl Fn(&Structure) -> Result<bool> + Send + Sync + 'static,
    ) -> Self {
        ClassOracle {
            name: name.to_string(),
            signature,
            backing: Backing::Predicate(Arc::new(f)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn contains(&self, a: &Structure) -> Result<bool> {
        self.signature.ensure_same(a.signature())?;
        match &self.backing {
            Backing::Program(ev) => ev.derives_goal(a),
            Backing::Formula(phi, mode) => eval_formula(phi, a, *mode),
            Backing::Csp(b) => Ok(hom_search(a, b)?.is_some()),
            Backing::CoCsp(b) => Ok(hom_search(a, b)?.is_none()),
            Backing::Explicit(list) => Ok(list.iter().any(|m| is_isomorphic(m, a))),
            Backing::AnyOf(parts) => {
                for p in parts {
                    if p.contains(a)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Backing::AllOf(parts) => {
                for p in parts {
                    if !p.contains(a)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Backing::Not(inner) => Ok(!inner.contains(a)?),
            Backing::Predicate(f) => f(a),
        }
    }
}
