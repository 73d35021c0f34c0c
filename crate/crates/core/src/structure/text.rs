//! Line-oriented structure format.
//!
//! ```text
//! #signature E/2 S/1 c
//! #domain 3
//! #const c=1
//! E 1 2
//! S 3
//! ```
//!
//! `#elements a b c` may replace `#domain n`. `%` starts a comment.

use std::fmt::Write as _;

use super::{Elem, Signature, Structure, StructureBuilder};
use crate::error::{Error, Result};

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Whitespace-separated tokens with their 1-based columns.
pub(crate) fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(s, t)| (line[..s].chars().count() + 1, t))
        .collect()
}

/// Parses a signature declaration body such as `E/2 S/1 c`.
pub(crate) fn parse_signature_tokens(toks: &[(usize, &str)], line: usize) -> Result<Signature> {
    let mut sig = Signature::new();
    for &(col, tok) in toks {
        let res = match tok.split_once('/') {
            Some((name, arity)) => {
                let arity: usize = arity
                    .parse()
                    .map_err(|_| Error::parse(line, col, format!("bad arity in `{tok}`")))?;
                sig.add_relation(name, arity)
            }
            None => sig.add_constant(tok),
        };
        res.map_err(|e| Error::parse(line, col, e.to_string()))?;
    }
    Ok(sig)
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut sig: Option<Signature> = None;
    let mut builder: Option<StructureBuilder> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokens(strip_comment(raw));
        let Some(&(col, head)) = toks.first() else {
            continue;
        };
        match head {
            "#signature" => {
                if sig.is_some() {
                    return Err(Error::parse(line, col, "duplicate #signature"));
                }
                sig = Some(parse_signature_tokens(&toks[1..], line)?);
            }
            "#domain" | "#elements" => {
                let s = sig
                    .clone()
                    .ok_or_else(|| Error::parse(line, col, "#signature must come first"))?;
                if builder.is_some() {
                    return Err(Error::parse(line, col, "domain declared twice"));
                }
                let names: Vec<String> = if head == "#domain" {
                    let &[(ncol, n)] = &toks[1..] else {
                        return Err(Error::parse(line, col, "#domain takes one number"));
                    };
                    let n: usize = n
                        .parse()
                        .map_err(|_| Error::parse(line, ncol, "#domain takes one number"))?;
                    (1..=n).map(|i| i.to_string()).collect()
                } else {
                    toks[1..].iter().map(|(_, t)| t.to_string()).collect()
                };
                builder = Some(
                    StructureBuilder::with_names(s, names)
                        .map_err(|e| Error::parse(line, col, e.to_string()))?,
                );
            }
            "#const" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, col, "#const before the domain"))?;
                for &(ccol, tok) in &toks[1..] {
                    let (c, e) = tok
                        .split_once('=')
                        .ok_or_else(|| Error::parse(line, ccol, "expected `name=element`"))?;
                    let e = element(b, e, line, ccol)?;
                    b.constant(c, e)
                        .map_err(|err| Error::parse(line, ccol, err.to_string()))?;
                }
            }
            h if h.starts_with('#') => {
                return Err(Error::parse(line, col, format!("unknown header `{h}`")));
            }
            rel => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| Error::parse(line, col, "fact before the domain"))?;
                let tuple = toks[1..]
                    .iter()
                    .map(|&(c, t)| element(b, t, line, c))
                    .collect::<Result<Vec<_>>>()?;
                b.fact(rel, &tuple)
                    .map_err(|e| Error::parse(line, col, e.to_string()))?;
            }
        }
    }
    let b = builder.ok_or_else(|| Error::parse(last_line.max(1), 1, "missing #domain or #elements"))?;
    b.build()
        .map_err(|e| Error::parse(last_line.max(1), 1, e.to_string()))
}

fn element(b: &StructureBuilder, name: &str, line: usize, col: usize) -> Result<Elem> {
    b.names
        .iter()
        .position(|n| n == name)
        .map(|i| i as Elem)
        .ok_or_else(|| Error::parse(line, col, format!("unknown element `{name}`")))
}

/// Canonical text form; facts are sorted by relation symbol then tuple.
pub fn serialize_structure(s: &Structure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#signature {}", s.signature());
    if s.has_default_names() {
        let _ = writeln!(out, "#domain {}", s.size());
    } else {
        let _ = writeln!(out, "#elements {}", s.names().join(" "));
    }
    let consts: Vec<String> = s
        .constants()
        .map(|(c, e)| format!("{c}={}", s.name(e)))
        .collect();
    if !consts.is_empty() {
        let _ = writeln!(out, "#const {}", consts.join(" "));
    }
    for (rel, t) in s.all_facts() {
        out.push_str(rel);
        for &e in t {
            out.push(' ');
            out.push_str(s.name(e));
        }
        out.push('\n');
    }
    out
}
