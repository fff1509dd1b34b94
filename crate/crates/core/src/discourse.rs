//! Derivation trees for discourses.
//!
//! A discourse file holds one sentence per line, each an s-expression over
//! lexicon words.  Every word occurrence carries an anchor id — written
//! `word#3`, or assigned automatically — which the composition engine uses to
//! track how the occurrence has been coerced so far.  `(ref n m)` introduces
//! a fresh occurrence `n` that picks up occurrence `m` anaphorically, and
//! `(conj p q shared)` co-predicates two predicates over one shared argument.
//!
//! ```text
//! (won Liverpool#1)
//! (hired (ref 2 1))
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::ParseError;

pub type AnchorId = u32;

#[derive(Debug, Clone, PartialEq)]
pub enum DerivationNode {
    /// A word occurrence.
    Leaf { word: String, anchor: AnchorId },
    /// Function application, `(f a)`; longer lists nest to the left.
    Apply { fun: Box<DerivationNode>, arg: Box<DerivationNode> },
    /// Co-predication: both predicates apply to the shared argument.
    Conj {
        left: Box<DerivationNode>,
        right: Box<DerivationNode>,
        shared: Box<DerivationNode>,
    },
    /// An anaphoric occurrence `anchor` whose antecedent is an earlier
    /// occurrence.
    Ref { anchor: AnchorId, antecedent: AnchorId },
}

impl DerivationNode {
    pub fn leaf(word: impl Into<String>, anchor: AnchorId) -> DerivationNode {
        DerivationNode::Leaf { word: word.into(), anchor }
    }

    pub fn apply(fun: DerivationNode, arg: DerivationNode) -> DerivationNode {
        DerivationNode::Apply { fun: Box::new(fun), arg: Box::new(arg) }
    }

    pub fn conj(
        left: DerivationNode,
        right: DerivationNode,
        shared: DerivationNode,
    ) -> DerivationNode {
        DerivationNode::Conj {
            left: Box::new(left),
            right: Box::new(right),
            shared: Box::new(shared),
        }
    }

    /// All anchor ids introduced in this subtree, in left-to-right order.
    pub fn anchors(&self) -> Vec<AnchorId> {
        let mut out = Vec::new();
        self.collect_anchors(&mut out);
        out
    }

    fn collect_anchors(&self, out: &mut Vec<AnchorId>) {
        match self {
            DerivationNode::Leaf { anchor, .. } | DerivationNode::Ref { anchor, .. } => {
                out.push(*anchor)
            }
            DerivationNode::Apply { fun, arg } => {
                fun.collect_anchors(out);
                arg.collect_anchors(out);
            }
            DerivationNode::Conj { left, right, shared } => {
                left.collect_anchors(out);
                right.collect_anchors(out);
                shared.collect_anchors(out);
            }
        }
    }
}

impl fmt::Display for DerivationNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivationNode::Leaf { word, anchor } => write!(f, "{word}#{anchor}"),
            DerivationNode::Apply { .. } => {
                // Flatten the application spine for readability.
                let mut parts = Vec::new();
                let mut node = self;
                while let DerivationNode::Apply { fun, arg } = node {
                    parts.push(arg.to_string());
                    node = fun;
                }
                parts.push(node.to_string());
                parts.reverse();
                write!(f, "({})", parts.join(" "))
            }
            DerivationNode::Conj { left, right, shared } => {
                write!(f, "(conj {left} {right} {shared})")
            }
            DerivationNode::Ref { anchor, antecedent } => {
                write!(f, "(ref {anchor} {antecedent})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Discourse {
    pub sentences: Vec<DerivationNode>,
}

impl fmt::Display for Discourse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sentences {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing

enum Sx {
    Sym(String),
    List(Vec<Sx>),
}

fn lex_line(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in line.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read_sx(tokens: &[String], pos: &mut usize, line: usize) -> Result<Sx, ParseError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| ParseError::new(line, "unexpected end of sentence"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(|t| t.as_str()) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sx::List(items));
                    }
                    Some(_) => items.push(read_sx(tokens, pos, line)?),
                    None => return Err(ParseError::new(line, "missing `)`")),
                }
            }
        }
        ")" => Err(ParseError::new(line, "unexpected `)`")),
        sym => Ok(Sx::Sym(sym.to_string())),
    }
}

/// An unresolved node: leaves may still lack anchors.
enum Raw {
    Leaf { word: String, anchor: Option<AnchorId> },
    Apply(Box<Raw>, Box<Raw>),
    Conj(Box<Raw>, Box<Raw>, Box<Raw>),
    Ref { anchor: AnchorId, antecedent: AnchorId },
}

fn parse_leaf(sym: &str, line: usize) -> Result<Raw, ParseError> {
    if sym == "conj" || sym == "ref" {
        return Err(ParseError::new(line, format!("`{sym}` cannot be used as a word")));
    }
    match sym.split_once('#') {
        Some((word, id)) => {
            if word.is_empty() {
                return Err(ParseError::new(line, "word before `#` is empty"));
            }
            let anchor: AnchorId = id
                .parse()
                .map_err(|_| ParseError::new(line, format!("invalid anchor id `{id}`")))?;
            Ok(Raw::Leaf { word: word.to_string(), anchor: Some(anchor) })
        }
        None => Ok(Raw::Leaf { word: sym.to_string(), anchor: None }),
    }
}

fn parse_raw(sx: &Sx, line: usize) -> Result<Raw, ParseError> {
    match sx {
        Sx::Sym(sym) => parse_leaf(sym, line),
        Sx::List(items) => {
            if items.is_empty() {
                return Err(ParseError::new(line, "empty `()` in sentence"));
            }
            if let Sx::Sym(head) = &items[0] {
                match head.as_str() {
                    "conj" => {
                        if items.len() != 4 {
                            return Err(ParseError::new(
                                line,
                                "`conj` takes two predicates and a shared argument",
                            ));
                        }
                        return Ok(Raw::Conj(
                            Box::new(parse_raw(&items[1], line)?),
                            Box::new(parse_raw(&items[2], line)?),
                            Box::new(parse_raw(&items[3], line)?),
                        ));
                    }
                    "ref" => {
                        if items.len() != 3 {
                            return Err(ParseError::new(
                                line,
                                "`ref` takes a fresh anchor id and an antecedent id",
                            ));
                        }
                        let id = |sx: &Sx| -> Result<AnchorId, ParseError> {
                            match sx {
                                Sx::Sym(s) => s.parse().map_err(|_| {
                                    ParseError::new(line, format!("invalid anchor id `{s}`"))
                                }),
                                Sx::List(_) => {
                                    Err(ParseError::new(line, "`ref` ids must be numbers"))
                                }
                            }
                        };
                        return Ok(Raw::Ref {
                            anchor: id(&items[1])?,
                            antecedent: id(&items[2])?,
                        });
                    }
                    _ => {}
                }
            }
            if items.len() == 1 {
                return parse_raw(&items[0], line);
            }
            let mut node = parse_raw(&items[0], line)?;
            for item in &items[1..] {
                node = Raw::Apply(Box::new(node), Box::new(parse_raw(item, line)?));
            }
            Ok(node)
        }
    }
}

fn explicit_ids(raw: &Raw, out: &mut Vec<(AnchorId, usize)>, line: usize) {
    match raw {
        Raw::Leaf { anchor: Some(id), .. } | Raw::Ref { anchor: id, .. } => {
            out.push((*id, line))
        }
        Raw::Leaf { .. } => {}
        Raw::Apply(f, a) => {
            explicit_ids(f, out, line);
            explicit_ids(a, out, line);
        }
        Raw::Conj(l, r, s) => {
            explicit_ids(l, out, line);
            explicit_ids(r, out, line);
            explicit_ids(s, out, line);
        }
    }
}

struct Assigner {
    used: BTreeSet<AnchorId>,
    next: AnchorId,
    introduced: BTreeSet<AnchorId>,
}

impl Assigner {
    fn fresh(&mut self) -> AnchorId {
        while self.used.contains(&self.next) {
            self.next += 1;
        }
        let id = self.next;
        self.used.insert(id);
        id
    }

    fn resolve(&mut self, raw: Raw, line: usize) -> Result<DerivationNode, ParseError> {
        match raw {
            Raw::Leaf { word, anchor } => {
                let anchor = match anchor {
                    Some(id) => id,
                    None => self.fresh(),
                };
                self.introduced.insert(anchor);
                Ok(DerivationNode::Leaf { word, anchor })
            }
            Raw::Apply(f, a) => Ok(DerivationNode::Apply {
                fun: Box::new(self.resolve(*f, line)?),
                arg: Box::new(self.resolve(*a, line)?),
            }),
            Raw::Conj(l, r, s) => Ok(DerivationNode::Conj {
                left: Box::new(self.resolve(*l, line)?),
                right: Box::new(self.resolve(*r, line)?),
                shared: Box::new(self.resolve(*s, line)?),
            }),
            Raw::Ref { anchor, antecedent } => {
                if !self.introduced.contains(&antecedent) {
                    return Err(ParseError::new(
                        line,
                        format!("`ref` antecedent {antecedent} has not been introduced"),
                    ));
                }
                self.introduced.insert(anchor);
                Ok(DerivationNode::Ref { anchor, antecedent })
            }
        }
    }
}

/// Parses a discourse: one sentence per line, `#`-to-end-of-line comments
/// are not supported here since `#` marks anchors — use `;` instead.
pub fn parse_discourse(src: &str) -> Result<Discourse, ParseError> {
    let mut raws = Vec::new();
    for (idx, raw_line) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find(';') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let tokens = lex_line(line);
        let mut pos = 0;
        let sx = read_sx(&tokens, &mut pos, line_no)?;
        if pos != tokens.len() {
            return Err(ParseError::new(line_no, "each line must hold exactly one sentence"));
        }
        raws.push((parse_raw(&sx, line_no)?, line_no));
    }

    // Explicit ids claim their numbers up front so automatic assignment can
    // never collide with one that appears later.
    let mut explicit = Vec::new();
    for (raw, line_no) in &raws {
        explicit_ids(raw, &mut explicit, *line_no);
    }
    let mut seen = BTreeSet::new();
    for (id, line_no) in &explicit {
        if !seen.insert(*id) {
            return Err(ParseError::new(
                *line_no,
                format!("anchor id {id} is introduced twice"),
            ));
        }
    }

    let mut assigner = Assigner { used: seen, next: 1, introduced: BTreeSet::new() };
    let mut sentences = Vec::new();
    for (raw, line_no) in raws {
        sentences.push(assigner.resolve(raw, line_no)?);
    }
    Ok(Discourse { sentences })
}
