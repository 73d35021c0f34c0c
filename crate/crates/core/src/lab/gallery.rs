use super::ClassOracle;
use crate::datalog::{parse_program, DatalogProgram};
use crate::error::{Error, Result};
use crate::logic::{
    gso_ladder_sentence, henson_outer_sentence, henson_tournament, ladder_of_word, ladder_program,
    parse_formula, Formula,
};
use crate::structure::{disjoint_union, word_to_structure, Elem, Signature, Structure, StructureBuilder};

/// A named object from the gallery.
#[derive(Debug, Clone)]
pub enum Artifact {
    Program(DatalogProgram),
    Structure(Structure),
    Formula(Formula),
    Oracle(ClassOracle),
}

pub const GALLERY_NAMES: [&str; 12] = [
    "ladder_program",
    "ladder_structure_fig1",
    "crb_program",
    "path(n)",
    "complement_example_program",
    "unary_csp_oracle",
    "henson(n)",
    "acyclicity_sentence",
    "henson_outer_sentence",
    "gso_ladder_sentence",
    "edge_program",
    "loop_program",
];

/// `goal :- R(x), B(y)`.
pub fn crb_program() -> DatalogProgram {
    parse_program("#edb B/1 R/1\n#idb goal/0\ngoal :- R(x), B(y).\n").expect("static program")
}

/// The program with binary IDB `E` over `{S/1, T/1, R/2}` whose class
/// contains `P_i ⊎ P_j` exactly when `i ≠ j`.
pub fn complement_example_program() -> DatalogProgram {
    parse_program(
        "#edb R/2 S/1 T/1\n\
         #idb E/2 goal/0\n\
         E(x,y) :- S(x), S(y).\n\
         E(x,y) :- E(x',y'), R(x',x), R(y',y).\n\
         goal :- T(x), E(x,x'), R(x',y).\n",
    )
    .expect("static program")
}

pub fn path_signature() -> Signature {
    Signature::relational(&[("R", 2), ("S", 1), ("T", 1)]).expect("static signature")
}

/// `P_n` on `1..=n` with `S = {1}`, `T = {n}`, `R = {(i, i+1)}`.
pub fn path(n: usize) -> Result<Structure> {
    if n == 0 {
        return Err(Error::InvalidParameters("P_n needs n >= 1".into()));
    }
    let mut b = StructureBuilder::new(path_signature(), n)?;
    b.fact("S", &[0])?.fact("T", &[n as Elem - 1])?;
    for i in 1..n as Elem {
        b.fact("R", &[i - 1, i])?;
    }
    b.build()
}

pub fn unary_signature() -> Signature {
    Signature::relational(&[("R1", 1), ("R2", 1), ("R3", 1)]).expect("static signature")
}

/// The one-element structure `S_i` where only `R_i` holds.
pub fn unary_point(i: usize) -> Result<Structure> {
    let mut b = StructureBuilder::new(unary_signature(), 1)?;
    b.fact(&format!("R{i}"), &[0])?;
    b.build()
}

/// `CSP(S1 ⊎ S2) ∪ CSP(S2 ⊎ S3) ∪ CSP(S3 ⊎ S1)` over `{R1, R2, R3}`.
pub fn unary_csp_oracle() -> Result<ClassOracle> {
    let mut parts = Vec::new();
    for (i, j) in [(1, 2), (2, 3), (3, 1)] {
        let t = disjoint_union(&unary_point(i)?, &unary_point(j)?)?;
        parts.push(ClassOracle::csp(&format!("CSP(S{i}+S{j})"), t));
    }
    Ok(ClassOracle::any_of("unary CSP union", unary_signature(), parts))
}

/// `∀X ≠ ∅ ∃x ∈ X ∀y ∈ X ¬E(x,y)`.
pub fn acyclicity_sentence() -> Formula {
    parse_formula("forall X:1 nonempty . exists x in X . forall y in X . ~E(x,y)").expect("static sentence")
}

pub fn digraph_signature() -> Signature {
    Signature::relational(&[("E", 2)]).expect("static signature")
}

pub fn digraph(n: usize, edges: &[(Elem, Elem)]) -> Result<Structure> {
    let mut b = StructureBuilder::new(digraph_signature(), n)?;
    for &(x, y) in edges {
        b.fact("E", &[x, y])?;
    }
    b.build()
}

/// Small digraph templates: `K2`, `K3`, `loop`, `edgeless1`, `P3`.
pub fn template(name: &str) -> Result<Structure> {
    match name {
        "K2" => digraph(2, &[(0, 1), (1, 0)]),
        "K3" => digraph(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]),
        "loop" => digraph(1, &[(0, 0)]),
        "edgeless1" => digraph(1, &[]),
        "P3" => digraph(3, &[(0, 1), (1, 2)]),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// A width-(1,2) program sound for the complement of `CSP(edgeless1)`.
pub fn edge_program() -> DatalogProgram {
    parse_program("#edb E/2\n#idb I/1 goal/0\nI(x) :- E(x,y).\ngoal :- I(x).\n").expect("static program")
}

/// `L(x) :- E(x,x). goal :- L(x).`
pub fn loop_program() -> DatalogProgram {
    parse_program("#edb E/2\n#idb L/1 goal/0\nL(x) :- E(x,x).\ngoal :- L(x).\n").expect("static program")
}

fn parameter(name: &str, prefix: &str) -> Option<Result<usize>> {
    let inner = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(
        inner
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameters(format!("bad parameter in `{name}`"))),
    )
}

pub fn gallery(name: &str) -> Result<Artifact> {
    if let Some(n) = parameter(name, "path") {
        return Ok(Artifact::Structure(path(n?)?));
    }
    if let Some(n) = parameter(name, "henson") {
        return Ok(Artifact::Structure(henson_tournament(n?)?));
    }
    Ok(match name {
        "ladder_program" => Artifact::Program(ladder_program()),
        "ladder_structure_fig1" => {
            Artifact::Structure(ladder_of_word(&word_to_structure("aaaabbbb")?)?)
        }
        "crb_program" => Artifact::Program(crb_program()),
        "edge_program" => Artifact::Program(edge_program()),
        "loop_program" => Artifact::Program(loop_program()),
        "complement_example_program" => Artifact::Program(complement_example_program()),
        "unary_csp_oracle" => Artifact::Oracle(unary_csp_oracle()?),
        "acyclicity_sentence" => Artifact::Formula(acyclicity_sentence()),
        "henson_outer_sentence" => Artifact::Formula(henson_outer_sentence()),
        "gso_ladder_sentence" => Artifact::Formula(gso_ladder_sentence()),
        other => return Err(Error::UnknownName(other.to_string())),
    })
}
