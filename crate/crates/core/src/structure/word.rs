use super::{Elem, Signature, Structure, StructureBuilder};
use crate::error::{Error, Result};

/// Signature `{<, P_a, P_b}` of word structures.
pub fn word_signature() -> Signature {
    Signature::relational(&[("<", 2), ("P_a", 1), ("P_b", 1)]).expect("static signature")
}

/// Encodes a word over `{a,b}` as a structure on positions `1..=|w|`.
pub fn word_to_structure(w: &str) -> Result<Structure> {
    if w.is_empty() {
        return Err(Error::InvalidInput("the empty word has no structure".into()));
    }
    let letters: Vec<char> = w.chars().collect();
    let mut b = StructureBuilder::new(word_signature(), letters.len())?;
    for (i, &c) in letters.iter().enumerate() {
        let rel = match c {
            'a' => "P_a",
            'b' => "P_b",
            other => return Err(Error::InvalidInput(format!("letter `{other}` is not in {{a,b}}"))),
        };
        b.fact(rel, &[i as Elem])?;
        for j in i + 1..letters.len() {
            b.fact("<", &[i as Elem, j as Elem])?;
        }
    }
    b.build()
}
