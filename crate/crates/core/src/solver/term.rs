//! Ground terms and atoms, with a parser for solver output.
//!
//! Grammar (whitespace separates atoms):
//!
//! ```text
//! atom := ident | ident '(' term {',' term} ')'
//! term := ident | integer | string | ident '(' term {',' term} ')' | '(' term {',' term} ')'
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::ItemKind;
use crate::perception::Fluent;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Const(String),
    Int(i64),
    Str(String),
    /// Functional term; an empty name is a tuple.
    Func(String, Vec<Term>),
}

impl Term {
    pub fn constant(s: impl Into<String>) -> Term {
        Term::Const(s.into())
    }

    pub fn func(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Func(name.into(), args)
    }

    pub fn as_const(&self) -> Option<&str> {
        match self {
            Term::Const(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// `(name, args)` for constants and functional terms alike.
    pub fn as_func(&self) -> Option<(&str, &[Term])> {
        match self {
            Term::Const(s) => Some((s, &[])),
            Term::Func(n, a) => Some((n, a)),
            _ => None,
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => f.write_str(s),
            Term::Int(n) => write!(f, "{n}"),
            Term::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Term::Func(name, args) => {
                f.write_str(name)?;
                write_args(f, args)
            }
        }
    }
}

impl From<ItemKind> for Term {
    fn from(k: ItemKind) -> Term {
        match k {
            ItemKind::Health => Term::constant("health"),
            ItemKind::Ammo => Term::constant("ammo"),
            ItemKind::Weapon(t) => Term::func("weapon", vec![Term::Int(t.into())]),
        }
    }
}

impl From<&Fluent> for Term {
    fn from(f: &Fluent) -> Term {
        let c = |s: &str| Term::constant(s);
        match f {
            Fluent::At(w) => Term::func("at", vec![c(w.as_str())]),
            Fluent::HealthLevel(l) => Term::func("health_level", vec![c(&l.to_string())]),
            Fluent::Armed(t) => Term::func("armed", vec![Term::Int((*t).into())]),
            Fluent::AmmoOk => c("ammo_ok"),
            Fluent::ItemAvailable(i, w, k) => Term::func(
                "item_available",
                vec![c(i.as_str()), c(w.as_str()), (*k).into()],
            ),
            Fluent::EnemyLastSeen(w) => Term::func("enemy_last_seen", vec![c(w.as_str())]),
            Fluent::EnemyExpected(w) => Term::func("enemy_expected", vec![c(w.as_str())]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if self.args.is_empty() {
            Ok(())
        } else {
            write_args(f, &self.args)
        }
    }
}

/// One stable model.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub atoms: BTreeSet<GroundAtom>,
}

impl AnswerSet {
    pub fn with_predicate<'a>(
        &'a self,
        name: &'a str,
        arity: usize,
    ) -> impl Iterator<Item = &'a GroundAtom> + 'a {
        self.atoms
            .iter()
            .filter(move |a| a.predicate == name && a.arity() == arity)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Space-separated atoms, the way a solver prints a model.
    pub fn render(&self) -> String {
        self.atoms
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl FromIterator<GroundAtom> for AnswerSet {
    fn from_iter<I: IntoIterator<Item = GroundAtom>>(iter: I) -> Self {
        AnswerSet {
            atoms: iter.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    column_offset: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column_offset + self.pos + 1,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() || c == b'_' => self.pos += 1,
            Some(c) => return Err(self.error(format!("unexpected `{}`", c as char))),
            None => return Err(self.error("unexpected end of input")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'')
        {
            self.pos += 1;
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        // Caller has consumed '('.
        let mut args = Vec::new();
        loop {
            self.skip_ws();
            args.push(self.term()?);
            self.skip_ws();
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(args);
                }
                Some(c) => {
                    return Err(self.error(format!("expected `,` or `)`, found `{}`", c as char)))
                }
                None => return Err(self.error("unterminated argument list")),
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'-' => {
                let start = self.pos;
                self.pos += 1;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                text.parse().map(Term::Int).map_err(|_| ParseError {
                    line: self.line,
                    column: self.column_offset + start + 1,
                    message: format!("bad integer `{text}`"),
                })
            }
            Some(b'"') => {
                self.pos += 1;
                let mut s = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(self.error("unterminated string")),
                        Some(b'"') => {
                            self.pos += 1;
                            break;
                        }
                        Some(b'\\') => {
                            self.pos += 1;
                            match self.peek() {
                                Some(b'n') => s.push(b'\n'),
                                Some(c) => s.push(c),
                                None => return Err(self.error("unterminated escape")),
                            }
                            self.pos += 1;
                        }
                        Some(c) => {
                            s.push(c);
                            self.pos += 1;
                        }
                    }
                }
                Ok(Term::Str(String::from_utf8_lossy(&s).into_owned()))
            }
            Some(b'(') => {
                self.pos += 1;
                Ok(Term::Func(String::new(), self.args()?))
            }
            _ => {
                let name = self.ident()?;
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    Ok(Term::Func(name, self.args()?))
                } else {
                    Ok(Term::Const(name))
                }
            }
        }
    }

    fn atom(&mut self) -> Result<GroundAtom, ParseError> {
        let predicate = self.ident()?;
        let args = if self.peek() == Some(b'(') {
            self.pos += 1;
            self.args()?
        } else {
            Vec::new()
        };
        match self.peek() {
            None => {}
            Some(c) if c.is_ascii_whitespace() => {}
            Some(c) => return Err(self.error(format!("unexpected `{}` after atom", c as char))),
        }
        Ok(GroundAtom { predicate, args })
    }
}

/// Parses a whitespace-separated list of atoms. `line` is only used for
/// error positions.
pub fn parse_atoms(text: &str, line: usize) -> Result<Vec<GroundAtom>, ParseError> {
    parse_atoms_at(text, line, 0)
}

/// Like [`parse_atoms`] for text that starts `column_offset` bytes into its line.
pub fn parse_atoms_at(
    text: &str,
    line: usize,
    column_offset: usize,
) -> Result<Vec<GroundAtom>, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        line,
        column_offset,
    };
    let mut atoms = Vec::new();
    loop {
        p.skip_ws();
        if p.peek().is_none() {
            return Ok(atoms);
        }
        atoms.push(p.atom()?);
    }
}

/// Parses a single term such as `move_towards(w1)`.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        line: 1,
        column_offset: 0,
    };
    p.skip_ws();
    let t = p.term()?;
    p.skip_ws();
    if p.peek().is_some() {
        return Err(p.error("trailing input after term"));
    }
    Ok(t)
}
