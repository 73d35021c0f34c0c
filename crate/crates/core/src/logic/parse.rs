//! Formula text syntax.
//!
//! ```text
//! forall X:1 nonempty . exists x in X . forall y in X . ~E(x,y)
//! ```
//!
//! Binding strength, tightest first: `~`, `&`, `|`, `->` (right
//! associative), `<->`. Quantifier bodies extend as far right as possible.
//! `x < y` is the binary atom `<`; a bare identifier is a nullary atom.

use super::Formula;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Neq,
    Less,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<(Vec<(usize, usize, Tok)>, (usize, usize))> {
    let mut out = Vec::new();
    let mut end = (1, 1);
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        end = (li + 1, chars.len() + 1);
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let at = (li + 1, i + 1);
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = if c.is_whitespace() {
                i += 1;
                continue;
            } else if c == '%' {
                break;
            } else if rest.starts_with("<->") {
                (Tok::Iff, 3)
            } else if rest.starts_with("->") {
                (Tok::Implies, 2)
            } else if rest.starts_with("!=") {
                (Tok::Neq, 2)
            } else if c.is_ascii_digit() {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                if j < chars.len() && is_ident_char(chars[j]) {
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    let s: String = chars[i..j].iter().collect();
                    (Tok::Ident(s), j - i)
                } else {
                    let n = s
                        .parse()
                        .map_err(|_| Error::parse(at.0, at.1, "number too large"))?;
                    (Tok::Num(n), j - i)
                }
            } else if is_ident_char(c) {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    '~' => Tok::Not,
                    '&' => Tok::And,
                    '|' => Tok::Or,
                    '=' => Tok::Eq,
                    '<' => Tok::Less,
                    other => {
                        return Err(Error::parse(at.0, at.1, format!("unexpected character `{other}`")))
                    }
                };
                (t, 1)
            };
            out.push((at.0, at.1, tok));
            i += len;
        }
    }
    Ok((out, end))
}

struct Parser {
    toks: Vec<(usize, usize, Tok)>,
    end: (usize, usize),
    pos: usize,
}

const KEYWORDS: [&str; 6] = ["forall", "exists", "in", "nonempty", "true", "false"];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.2)
    }

    fn peek_ident(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Ident(s)) => Some(s),
            _ => None,
        }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self
            .toks
            .get(self.pos)
            .map(|t| (t.0, t.1))
            .unwrap_or(self.end);
        Error::parse(l, c, msg)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut left = self.implication()?;
        while self.eat(&Tok::Iff) {
            let right = self.implication()?;
            left = left.iff(right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula> {
        let left = self.disjunction()?;
        if self.eat(&Tok::Implies) {
            let right = self.implication()?;
            Ok(left.implies(right))
        } else {
            Ok(left)
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut left = self.conjunction()?;
        while self.eat(&Tok::Or) {
            left = left.or(self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while self.eat(&Tok::And) {
            left = left.and(self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Not) {
            return Ok(self.unary()?.not());
        }
        match self.peek_ident() {
            Some("forall") | Some("exists") => self.quantifier(),
            _ => self.primary(),
        }
    }

    fn quantifier(&mut self) -> Result<Formula> {
        let universal = self.peek_ident() == Some("forall");
        self.pos += 1;
        let mut binders: Vec<(String, Option<usize>)> = Vec::new();
        loop {
            match self.peek_ident() {
                Some(s) if !KEYWORDS.contains(&s) => {
                    let v = self.name("variable")?;
                    let arity = if self.eat(&Tok::Colon) {
                        match self.peek() {
                            Some(&Tok::Num(n)) => {
                                self.pos += 1;
                                Some(n)
                            }
                            _ => return Err(self.error("expected an arity after `:`")),
                        }
                    } else {
                        None
                    };
                    binders.push((v, arity));
                }
                _ => break,
            }
        }
        if binders.is_empty() {
            return Err(self.error("expected a variable"));
        }
        let mut guard = None;
        let mut nonempty = false;
        if self.peek_ident() == Some("in") {
            self.pos += 1;
            guard = Some(self.name("set variable after `in`")?);
            if binders.iter().any(|(_, a)| a.is_some()) {
                return Err(self.error("`in` applies to element variables only"));
            }
        } else if self.peek_ident() == Some("nonempty") {
            if binders.len() != 1 || binders[0].1 != Some(1) {
                return Err(self.error("`nonempty` needs a single variable of arity 1"));
            }
            self.pos += 1;
            nonempty = true;
        }
        self.expect(Tok::Dot, "`.` after the quantifier")?;
        let mut body = self.formula()?;
        for (v, arity) in binders.into_iter().rev() {
            body = match (arity, universal) {
                (Some(_), _) if nonempty => {
                    if universal {
                        Formula::forall_nonempty(&v, body)
                    } else {
                        Formula::exists_nonempty(&v, body)
                    }
                }
                (Some(r), true) => Formula::so_forall(&v, r, body),
                (Some(r), false) => Formula::so_exists(&v, r, body),
                (None, true) => match &guard {
                    Some(set) => Formula::forall_in(&v, set, body),
                    None => Formula::forall(&[&v], body),
                },
                (None, false) => match &guard {
                    Some(set) => Formula::exists_in(&v, set, body),
                    None => Formula::exists(&[&v], body),
                },
            };
        }
        Ok(body)
    }

    fn primary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(f);
        }
        match self.peek_ident() {
            Some("true") => {
                self.pos += 1;
                return Ok(Formula::True);
            }
            Some("false") => {
                self.pos += 1;
                return Ok(Formula::False);
            }
            _ => {}
        }
        let name = self.name("a formula")?;
        if self.eat(&Tok::LParen) {
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                args.push(self.name("argument")?);
                while self.eat(&Tok::Comma) {
                    args.push(self.name("argument")?);
                }
                self.expect(Tok::RParen, "`)` or `,`")?;
            }
            return Ok(Formula::Atom(name, args));
        }
        if self.eat(&Tok::Eq) {
            let rhs = self.name("right-hand side of `=`")?;
            return Ok(Formula::Eq(name, rhs));
        }
        if self.eat(&Tok::Neq) {
            let rhs = self.name("right-hand side of `!=`")?;
            return Ok(Formula::Eq(name, rhs).not());
        }
        if self.eat(&Tok::Less) {
            let rhs = self.name("right-hand side of `<`")?;
            return Ok(Formula::Atom("<".into(), vec![name, rhs]));
        }
        Ok(Formula::Atom(name, Vec::new()))
    }
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, end, pos: 0 };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}
