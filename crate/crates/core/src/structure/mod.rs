//! Finite relational signatures and structures.
//!
//! Elements are dense integers `0..n`; every element also carries a display
//! name which the text format uses. Relations are stored as sorted tuple
//! sets, indexed by the position of the relation symbol in the signature
//! (symbols are kept in lexicographic order).

mod enumerate;
mod hom;
mod ops;
mod pp;
pub(crate) mod text;
mod word;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

pub use enumerate::{enumerate_structures, StructureIter, DEFAULT_ENUMERATION_BUDGET};
pub use hom::{hom_search, is_homomorphism, Homomorphism};
pub use ops::{disjoint_union, guarded_tuples, is_isomorphic};
pub use pp::{canonical_database, canonical_database_with_constants, PPAtom, PPFormula};
pub use text::{parse_structure, serialize_structure};
pub use word::{word_signature, word_to_structure};

/// Element identifier inside a structure.
pub type Elem = u32;
/// A tuple of elements.
pub type Tuple = Vec<Elem>;

pub(crate) fn valid_token(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('#')
        && !name.starts_with('%')
        && !name.starts_with('@')
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !"(),/=.:%;".contains(c))
}

/// A finite relational signature, optionally with constant symbols.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    relations: BTreeMap<String, usize>,
    constants: BTreeSet<String>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a constant-free signature from `(name, arity)` pairs.
    pub fn relational<S: AsRef<str>>(rels: &[(S, usize)]) -> Result<Self> {
        let mut sig = Signature::new();
        for (name, arity) in rels {
            sig.add_relation(name.as_ref(), *arity)?;
        }
        Ok(sig)
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<()> {
        if !valid_token(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        if self.relations.contains_key(name) || self.constants.contains(name) {
            return Err(Error::DuplicateSymbol(name.to_string()));
        }
        self.relations.insert(name.to_string(), arity);
        Ok(())
    }

    pub fn add_constant(&mut self, name: &str) -> Result<()> {
        if !valid_token(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        if self.relations.contains_key(name) || self.constants.contains(name) {
            return Err(Error::DuplicateSymbol(name.to_string()));
        }
        self.constants.insert(name.to_string());
        Ok(())
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Result<Self> {
        self.add_relation(name, arity)?;
        Ok(self)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.get(name).copied()
    }

    pub fn has_relation(&self, name: &str) -> bool {
        self.relations.contains_key(name)
    }

    pub fn has_constant(&self, name: &str) -> bool {
        self.constants.contains(name)
    }

    /// Relation symbols in signature order.
    pub fn relations(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.relations.iter().map(|(n, a)| (n.as_str(), *a))
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> + '_ {
        self.constants.iter().map(String::as_str)
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.keys().position(|k| k == name)
    }

    pub fn relation_name(&self, index: usize) -> &str {
        self.relations.keys().nth(index).expect("relation index")
    }

    pub fn max_arity(&self) -> usize {
        self.relations.values().copied().max().unwrap_or(0)
    }

    pub fn is_constant_free(&self) -> bool {
        self.constants.is_empty()
    }

    /// Union of two signatures; symbols present in both must agree.
    pub fn merge(&self, other: &Signature) -> Result<Signature> {
        let mut out = self.clone();
        for (name, arity) in other.relations() {
            match out.arity(name) {
                Some(a) if a == arity => {}
                Some(a) => {
                    return Err(Error::ArityClash {
                        name: name.to_string(),
                        declared: a,
                        used: arity,
                    })
                }
                None => out.add_relation(name, arity)?,
            }
        }
        for c in other.constants() {
            if !out.has_constant(c) {
                out.add_constant(c)?;
            }
        }
        Ok(out)
    }

    pub(crate) fn ensure_same(&self, other: &Signature) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "[{}] vs [{}]",
                self, other
            )))
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, arity) in self.relations() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{name}/{arity}")?;
        }
        for c in self.constants() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A finite structure over a [`Signature`]. Immutable once built; use
/// [`StructureBuilder`] to create one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    signature: Signature,
    names: Vec<String>,
    relations: Vec<BTreeSet<Tuple>>,
    constants: BTreeMap<String, Elem>,
}

impl Structure {
    /// Structure on `n` elements named `1..=n` with all relations empty.
    pub fn empty(signature: &Signature, n: usize) -> Result<Self> {
        StructureBuilder::new(signature.clone(), n)?.build()
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        0..self.names.len() as Elem
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn element_by_name(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name).map(|i| i as Elem)
    }

    /// Whether the names are the default `1..=n`.
    pub fn has_default_names(&self) -> bool {
        self.names
            .iter()
            .enumerate()
            .all(|(i, n)| *n == (i + 1).to_string())
    }

    /// Tuples of relation `name`, or `None` if it is not in the signature.
    pub fn facts(&self, name: &str) -> Option<&BTreeSet<Tuple>> {
        self.signature
            .relation_index(name)
            .map(|i| &self.relations[i])
    }

    pub fn relation(&self, index: usize) -> &BTreeSet<Tuple> {
        &self.relations[index]
    }

    pub fn holds(&self, name: &str, tuple: &[Elem]) -> bool {
        self.facts(name).is_some_and(|r| r.contains(tuple))
    }

    pub fn holds_at(&self, index: usize, tuple: &[Elem]) -> bool {
        self.relations[index].contains(tuple)
    }

    pub fn constant(&self, name: &str) -> Option<Elem> {
        self.constants.get(name).copied()
    }

    pub fn constants(&self) -> impl Iterator<Item = (&str, Elem)> + '_ {
        self.constants.iter().map(|(n, e)| (n.as_str(), *e))
    }

    pub fn fact_count(&self) -> usize {
        self.relations.iter().map(BTreeSet::len).sum()
    }

    /// All facts as `(relation name, tuple)` in signature then tuple order.
    pub fn all_facts(&self) -> impl Iterator<Item = (&str, &Tuple)> + '_ {
        self.signature
            .relations()
            .zip(self.relations.iter())
            .flat_map(|((name, _), set)| set.iter().map(move |t| (name, t)))
    }

    /// Expansion by fresh constant symbols.
    pub fn with_constants(&self, consts: &[(&str, Elem)]) -> Result<Structure> {
        let mut b = self.to_builder();
        for (name, e) in consts {
            b.signature.add_constant(name)?;
            b.constant(name, *e)?;
        }
        b.build()
    }

    /// Expansion by a fresh relation symbol with the given tuples.
    pub fn with_relation(&self, name: &str, arity: usize, tuples: &BTreeSet<Tuple>) -> Result<Structure> {
        let mut sig = self.signature.clone();
        sig.add_relation(name, arity)?;
        let mut b = StructureBuilder::with_names(sig, self.names.clone())?;
        for (rel, t) in self.all_facts() {
            b.fact(rel, t)?;
        }
        for t in tuples {
            b.fact(name, t)?;
        }
        for (c, e) in self.constants() {
            b.constant(c, e)?;
        }
        b.build()
    }

    /// Reduct to the relations of `sig` (which must be a sub-signature).
    pub fn reduct(&self, sig: &Signature) -> Result<Structure> {
        let mut b = StructureBuilder::with_names(sig.clone(), self.names.clone())?;
        for (name, arity) in sig.relations() {
            match self.signature.arity(name) {
                Some(a) if a == arity => {
                    for t in self.facts(name).into_iter().flatten() {
                        b.fact(name, t)?;
                    }
                }
                _ => return Err(Error::SignatureMismatch(format!("no relation {name}/{arity}"))),
            }
        }
        for c in sig.constants() {
            let e = self
                .constant(c)
                .ok_or_else(|| Error::SignatureMismatch(format!("no constant {c}")))?;
            b.constant(c, e)?;
        }
        b.build()
    }

    pub fn to_builder(&self) -> StructureBuilder {
        StructureBuilder {
            signature: self.signature.clone(),
            names: self.names.clone(),
            relations: self.relations.clone(),
            constants: self.constants.clone(),
        }
    }

    /// Renders a tuple with element names, e.g. `(a,b)`.
    pub fn show_tuple(&self, t: &[Elem]) -> String {
        let inner: Vec<&str> = t.iter().map(|&e| self.name(e)).collect();
        format!("({})", inner.join(","))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_structure(self))
    }
}

/// Mutable staging area for a [`Structure`]; `build` checks the invariants.
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    signature: Signature,
    names: Vec<String>,
    relations: Vec<BTreeSet<Tuple>>,
    constants: BTreeMap<String, Elem>,
}

impl StructureBuilder {
    pub fn new(signature: Signature, n: usize) -> Result<Self> {
        Self::with_names(signature, (1..=n).map(|i| i.to_string()).collect())
    }

    pub fn with_names(signature: Signature, names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::InvalidStructure("domain must be non-empty".into()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(Error::InvalidStructure("duplicate element name".into()));
        }
        if let Some(bad) = names.iter().find(|n| !valid_token(n)) {
            return Err(Error::InvalidName(bad.clone()));
        }
        let relations = vec![BTreeSet::new(); signature.relation_count()];
        Ok(StructureBuilder {
            signature,
            names,
            relations,
            constants: BTreeMap::new(),
        })
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn fact(&mut self, rel: &str, tuple: &[Elem]) -> Result<&mut Self> {
        let idx = self
            .signature
            .relation_index(rel)
            .ok_or_else(|| Error::UndeclaredSymbol(rel.to_string()))?;
        let arity = self.signature.arity(rel).unwrap_or(0);
        if tuple.len() != arity {
            return Err(Error::ArityClash {
                name: rel.to_string(),
                declared: arity,
                used: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&e| e as usize >= self.names.len()) {
            return Err(Error::InvalidStructure(format!(
                "element {bad} outside the domain of size {}",
                self.names.len()
            )));
        }
        self.relations[idx].insert(tuple.to_vec());
        Ok(self)
    }

    /// Adds a fact given by element names.
    pub fn fact_named(&mut self, rel: &str, names: &[&str]) -> Result<&mut Self> {
        let tuple = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n)
                    .map(|i| i as Elem)
                    .ok_or_else(|| Error::InvalidStructure(format!("unknown element `{n}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.fact(rel, &tuple)
    }

    pub fn constant(&mut self, name: &str, e: Elem) -> Result<&mut Self> {
        if !self.signature.has_constant(name) {
            return Err(Error::UndeclaredSymbol(name.to_string()));
        }
        if e as usize >= self.names.len() {
            return Err(Error::InvalidStructure(format!("constant {name} outside the domain")));
        }
        self.constants.insert(name.to_string(), e);
        Ok(self)
    }

    pub fn build(self) -> Result<Structure> {
        for c in self.signature.constants() {
            if !self.constants.contains_key(c) {
                return Err(Error::InvalidStructure(format!("constant `{c}` is not interpreted")));
            }
        }
        Ok(Structure {
            signature: self.signature,
            names: self.names,
            relations: self.relations,
            constants: self.constants,
        })
    }
}
