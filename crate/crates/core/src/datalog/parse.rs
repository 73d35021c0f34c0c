//! Program text format.
//!
//! ```text
//! #edb S/2 T/2 R/2 N/2
//! #idb U/2 goal/0
//! U(x,y) :- S(x,y).
//! U(x',y') :- U(x,y), N(x,x'), N(y,y'), R(x',y').
//! goal :- U(x,y), T(x,y).
//! ```
//!
//! Nullary atoms are written without parentheses, facts without `:-`, and
//! constants as `@c`. `%` starts a comment. `goal/0` is added to the IDB
//! declaration when missing.

use super::{Atom, DatalogProgram, Rule, Term, GOAL};
use crate::error::{Error, Result};
use crate::structure::text::{parse_signature_tokens, tokens};
use crate::structure::Signature;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    At,
    LParen,
    RParen,
    Comma,
    Dot,
    Implies,
}

struct Lexed {
    toks: Vec<(usize, usize, Tok)>,
    end: (usize, usize),
}

const PUNCT: &str = "(),/=.:%;@";

fn lex_line(line_no: usize, line: &str, out: &mut Vec<(usize, usize, Tok)>) -> Result<()> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '%' => break,
            c if c.is_whitespace() => i += 1,
            '(' | ')' | ',' | '.' | '@' => {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    _ => Tok::At,
                };
                out.push((line_no, col, t));
                i += 1;
            }
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    out.push((line_no, col, Tok::Implies));
                    i += 2;
                } else {
                    return Err(Error::parse(line_no, col, "expected `:-`"));
                }
            }
            c if PUNCT.contains(c) => {
                return Err(Error::parse(line_no, col, format!("unexpected `{c}`")));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !PUNCT.contains(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word.starts_with('#') {
                    return Err(Error::parse(line_no, col, "identifiers cannot start with `#`"));
                }
                out.push((line_no, col, Tok::Ident(word)));
            }
        }
    }
    Ok(())
}

struct Parser {
    lexed: Lexed,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.lexed.toks.get(self.pos).map(|(_, _, t)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.lexed
            .toks
            .get(self.pos)
            .map(|&(l, c, _)| (l, c))
            .unwrap_or(self.lexed.end)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.here();
        Error::parse(l, c, msg)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn term(&mut self) -> Result<Term> {
        if self.peek() == Some(&Tok::At) {
            self.pos += 1;
            Ok(Term::Const(self.ident("constant name")?))
        } else {
            Ok(Term::Var(self.ident("variable")?))
        }
    }

    fn atom(&mut self) -> Result<(Atom, (usize, usize))> {
        let at = self.here();
        let rel = self.ident("atom")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                args.push(self.term()?);
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    args.push(self.term()?);
                }
            }
            self.expect(Tok::RParen, "`)` or `,`")?;
        }
        Ok((Atom { rel, args }, at))
    }

    fn rule(&mut self) -> Result<(Rule, (usize, usize))> {
        let (head, at) = self.atom()?;
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            body.push(self.atom()?.0);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                body.push(self.atom()?.0);
            }
        }
        self.expect(Tok::Dot, "`.` at the end of the rule")?;
        Ok((Rule { head, body }, at))
    }
}

pub fn parse_program(text: &str) -> Result<DatalogProgram> {
    let mut edb: Option<Signature> = None;
    let mut idb: Option<Signature> = None;
    let mut toks = Vec::new();
    let mut end = (1, 1);
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        end = (line_no, raw.chars().count() + 1);
        let trimmed = raw.trim_start();
        if trimmed.starts_with('#') {
            let body = match raw.find('%') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let parts = tokens(body);
            let (col, head) = parts[0];
            let slot = match head {
                "#edb" => &mut edb,
                "#idb" => &mut idb,
                other => return Err(Error::parse(line_no, col, format!("unknown header `{other}`"))),
            };
            if slot.is_some() {
                return Err(Error::parse(line_no, col, format!("duplicate {head}")));
            }
            *slot = Some(parse_signature_tokens(&parts[1..], line_no)?);
        } else {
            lex_line(line_no, raw, &mut toks)?;
        }
    }
    let edb = edb.ok_or_else(|| Error::parse(1, 1, "missing #edb header"))?;
    let mut idb = idb.ok_or_else(|| Error::parse(1, 1, "missing #idb header"))?;
    if !idb.has_relation(GOAL) {
        idb.add_relation(GOAL, 0)
            .map_err(|e| Error::parse(1, 1, e.to_string()))?;
    }

    let mut p = Parser {
        lexed: Lexed { toks, end },
        pos: 0,
    };
    let mut rules = Vec::new();
    while p.peek().is_some() {
        rules.push(p.rule()?);
    }
    for (rule, (l, c)) in &rules {
        DatalogProgram::new(edb.clone(), idb.clone(), vec![rule.clone()]).map_err(|e| match e {
            Error::Parse { .. } => e,
            other => Error::parse(*l, *c, other.to_string()),
        })?;
    }
    DatalogProgram::new(edb, idb, rules.into_iter().map(|(r, _)| r).collect())
}
