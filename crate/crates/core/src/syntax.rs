//! Concrete syntax for types and terms.
//!
//! ```text
//! Type := sortName | "t" | typeVar
//!       | Type "->" Type            (right associative)
//!       | "Pi" typeVar "." Type
//!       | "(" Type ")"
//! Term := ident | ident ":" Type
//!       | "lam" ident ":" Type "." Term
//!       | "Lam" typeVar "." Term
//!       | Term Term                 (left associative)
//!       | Term "{" Type "}"
//!       | "(" Term ")"
//! ```
//!
//! A sort name begins with an uppercase letter or is the universal sort `e`;
//! a type variable is a single lowercase letter (other than `e` and `t`) or a
//! spelled-out lowercase Greek letter such as `alpha` or `xi`.  Bare
//! identifiers in terms resolve against the enclosing binders first and the
//! constant signature second.  `#` starts a comment running to end of line.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::term::{Term, Type};

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, message: message.into() }
    }

    /// Shift line numbers when a fragment is parsed out of a larger file.
    pub fn at_line(mut self, line: usize) -> ParseError {
        self.line = line;
        self
    }
}

const GREEK_NAMES: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "omicron", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi",
    "psi", "omega",
];

fn is_greek_letter(c: char) -> bool {
    ('\u{03b1}'..='\u{03c9}').contains(&c)
}

/// Classifies an identifier appearing in type position.
fn classify_type_name(name: &str, line: usize) -> Result<Type, ParseError> {
    if name == "t" {
        return Ok(Type::Truth);
    }
    if name == "e" {
        return Ok(Type::entity());
    }
    let mut chars = name.chars();
    let first = chars.next().ok_or_else(|| ParseError::new(line, "empty type name"))?;
    if first.is_uppercase() {
        return Ok(Type::base(name));
    }
    if is_type_var_name(name) {
        return Ok(Type::var(name));
    }
    Err(ParseError::new(
        line,
        format!("`{name}` is not a sort (sorts start uppercase) or a type variable"),
    ))
}

fn is_type_var_name(name: &str) -> bool {
    if name == "e" || name == "t" {
        return false;
    }
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => c.is_ascii_lowercase() || is_greek_letter(c),
        _ => GREEK_NAMES.contains(&name),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Colon,
    Dot,
    Arrow,
    Comma,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Comma => write!(f, "`,`"),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || is_greek_letter(c)
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || is_greek_letter(c)
}

fn lex(src: &str, line: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let mut cur_line = line;
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '\n' => {
                cur_line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                out.push((Tok::LParen, cur_line));
                chars.next();
            }
            ')' => {
                out.push((Tok::RParen, cur_line));
                chars.next();
            }
            '{' => {
                out.push((Tok::LBrace, cur_line));
                chars.next();
            }
            '}' => {
                out.push((Tok::RBrace, cur_line));
                chars.next();
            }
            ':' => {
                out.push((Tok::Colon, cur_line));
                chars.next();
            }
            '.' => {
                out.push((Tok::Dot, cur_line));
                chars.next();
            }
            ',' => {
                out.push((Tok::Comma, cur_line));
                chars.next();
            }
            '-' => {
                chars.next();
                match chars.peek() {
                    Some(&(_, '>')) => {
                        chars.next();
                        out.push((Tok::Arrow, cur_line));
                    }
                    _ => return Err(ParseError::new(cur_line, "expected `->` after `-`")),
                }
            }
            c if is_ident_start(c) => {
                let start = i;
                let mut end = i + c.len_utf8();
                chars.next();
                while let Some(&(j, c2)) = chars.peek() {
                    if is_ident_continue(c2) {
                        end = j + c2.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(src[start..end].to_string()), cur_line));
            }
            other => {
                return Err(ParseError::new(cur_line, format!("unexpected character `{other}`")))
            }
        }
    }
    Ok(out)
}

struct Tokens {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_line: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map(|(_, l)| *l).unwrap_or(self.end_line)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        let line = self.line();
        match self.next() {
            Some(t) if t == tok => Ok(()),
            Some(t) => Err(ParseError::new(line, format!("expected {tok}, found {t}"))),
            None => Err(ParseError::new(line, format!("expected {tok}, found end of input"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

// ---------------------------------------------------------------------------
// Types

fn parse_type_expr(toks: &mut Tokens) -> Result<Type, ParseError> {
    let line = toks.line();
    if let Some(Tok::Ident(name)) = toks.peek() {
        if name == "Pi" {
            toks.next();
            let var_line = toks.line();
            let var = match toks.next() {
                Some(Tok::Ident(v)) if is_type_var_name(&v) => v,
                Some(t) => {
                    return Err(ParseError::new(var_line, format!("expected type variable, found {t}")))
                }
                None => return Err(ParseError::new(var_line, "expected type variable")),
            };
            toks.expect(Tok::Dot)?;
            let body = parse_type_expr(toks)?;
            return Ok(Type::forall(var, body));
        }
    }
    let dom = parse_type_atom(toks, line)?;
    if toks.peek() == Some(&Tok::Arrow) {
        toks.next();
        let cod = parse_type_expr(toks)?;
        Ok(Type::arrow(dom, cod))
    } else {
        Ok(dom)
    }
}

fn parse_type_atom(toks: &mut Tokens, line: usize) -> Result<Type, ParseError> {
    match toks.next() {
        Some(Tok::LParen) => {
            let inner = parse_type_expr(toks)?;
            toks.expect(Tok::RParen)?;
            Ok(inner)
        }
        Some(Tok::Ident(name)) => classify_type_name(&name, line),
        Some(t) => Err(ParseError::new(line, format!("expected a type, found {t}"))),
        None => Err(ParseError::new(line, "expected a type, found end of input")),
    }
}

/// Parses a complete type.
pub fn parse_type(src: &str) -> Result<Type, ParseError> {
    parse_type_at(src, 1)
}

pub fn parse_type_at(src: &str, line: usize) -> Result<Type, ParseError> {
    let mut toks = Tokens { toks: lex(src, line)?, pos: 0, end_line: line };
    let ty = parse_type_expr(&mut toks)?;
    if !toks.at_end() {
        return Err(ParseError::new(
            toks.line(),
            format!("unexpected {} after type", toks.peek().unwrap()),
        ));
    }
    Ok(ty)
}

// ---------------------------------------------------------------------------
// Terms

/// Name resolution environment for bare identifiers in terms.
#[derive(Debug, Clone, Default)]
pub struct Resolver {
    pub constants: BTreeMap<String, Type>,
}

impl Resolver {
    pub fn new(constants: BTreeMap<String, Type>) -> Resolver {
        Resolver { constants }
    }
}

struct TermParser<'a> {
    toks: Tokens,
    resolver: &'a Resolver,
    binders: Vec<(String, Type)>,
}

impl<'a> TermParser<'a> {
    fn lookup_binder(&self, name: &str) -> Option<&Type> {
        self.binders.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn resolve_bare(&self, name: &str, line: usize) -> Result<Term, ParseError> {
        if let Some(ty) = self.lookup_binder(name) {
            return Ok(Term::var(name, ty.clone()));
        }
        if let Some(ty) = self.resolver.constants.get(name) {
            return Ok(Term::cnst(name, ty.clone()));
        }
        Err(ParseError::new(
            line,
            format!("unknown identifier `{name}` (not bound and not a declared constant)"),
        ))
    }

    fn resolve_annotated(&self, name: &str, ty: Type) -> Term {
        if self.lookup_binder(name).is_some() {
            // The annotation is kept; the typechecker flags disagreement
            // with the binder.
            Term::var(name, ty)
        } else {
            // Declared or ad-hoc constant; disagreement with the signature
            // is likewise the typechecker's business.
            Term::cnst(name, ty)
        }
    }

    fn parse_expr(&mut self) -> Result<Term, ParseError> {
        match self.toks.peek() {
            Some(Tok::Ident(k)) if k == "lam" => {
                self.toks.next();
                let line = self.toks.line();
                let name = match self.toks.next() {
                    Some(Tok::Ident(n)) => n,
                    Some(t) => {
                        return Err(ParseError::new(line, format!("expected binder name, found {t}")))
                    }
                    None => return Err(ParseError::new(line, "expected binder name")),
                };
                self.toks.expect(Tok::Colon)?;
                let ty = parse_type_expr(&mut self.toks)?;
                self.toks.expect(Tok::Dot)?;
                self.binders.push((name.clone(), ty.clone()));
                let body = self.parse_expr()?;
                self.binders.pop();
                Ok(Term::abs(name, ty, body))
            }
            Some(Tok::Ident(k)) if k == "Lam" => {
                self.toks.next();
                let line = self.toks.line();
                let var = match self.toks.next() {
                    Some(Tok::Ident(v)) if is_type_var_name(&v) => v,
                    Some(t) => {
                        return Err(ParseError::new(line, format!("expected type variable, found {t}")))
                    }
                    None => return Err(ParseError::new(line, "expected type variable")),
                };
                self.toks.expect(Tok::Dot)?;
                let body = self.parse_expr()?;
                Ok(Term::tyabs(var, body))
            }
            _ => self.parse_spine(),
        }
    }

    fn parse_spine(&mut self) -> Result<Term, ParseError> {
        let mut head = self.parse_atom()?;
        loop {
            match self.toks.peek() {
                Some(Tok::LBrace) => {
                    self.toks.next();
                    let ty = parse_type_expr(&mut self.toks)?;
                    self.toks.expect(Tok::RBrace)?;
                    head = Term::tyapp(head, ty);
                }
                Some(Tok::LParen) | Some(Tok::Ident(_)) => {
                    let arg = self.parse_atom()?;
                    head = Term::app(head, arg);
                }
                _ => return Ok(head),
            }
        }
    }

    fn parse_atom(&mut self) -> Result<Term, ParseError> {
        let line = self.toks.line();
        match self.toks.next() {
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.toks.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "lam" || name == "Lam" => Err(ParseError::new(
                line,
                format!("`{name}` must be parenthesised in application position"),
            )),
            Some(Tok::Ident(name)) => {
                if self.toks.peek() == Some(&Tok::Colon) {
                    self.toks.next();
                    let ty = parse_type_expr(&mut self.toks)?;
                    Ok(self.resolve_annotated(&name, ty))
                } else {
                    self.resolve_bare(&name, line)
                }
            }
            Some(t) => Err(ParseError::new(line, format!("expected a term, found {t}"))),
            None => Err(ParseError::new(line, "expected a term, found end of input")),
        }
    }
}

/// Parses a complete term, resolving bare identifiers against `resolver`.
pub fn parse_term(src: &str, resolver: &Resolver) -> Result<Term, ParseError> {
    parse_term_at(src, resolver, 1)
}

pub fn parse_term_at(src: &str, resolver: &Resolver, line: usize) -> Result<Term, ParseError> {
    let toks = Tokens { toks: lex(src, line)?, pos: 0, end_line: line };
    let mut parser = TermParser { toks, resolver, binders: Vec::new() };
    let term = parser.parse_expr()?;
    if !parser.toks.at_end() {
        return Err(ParseError::new(
            parser.toks.line(),
            format!("unexpected {} after term", parser.toks.peek().unwrap()),
        ));
    }
    Ok(term)
}
