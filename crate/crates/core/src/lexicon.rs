//! The lexicon: words with a main term and optional coercions.
//!
//! Each entry carries the word's main lambda term plus a list of
//! transformations — named coercion terms that give access to related senses,
//! graded by how freely they combine with one another (see [`Degree`]).  An
//! identity transformation on the entry's subject sort is synthesised at load
//! time and never written to files.
//!
//! File format, one declaration per line, `#` comments:
//!
//! ```text
//! sort City <: e
//! const and : t -> t -> t
//! word Liverpool : City = Liverpool
//!   opt f_P : City -> People = f_P deg F
//!   opt f_C : City -> Club = f_C deg R
//!   compat {f_P, f_L} {f_C}
//! ```
//!
//! A bare identifier on the right-hand side of `word` or `opt` declares a
//! fresh constant of the stated type (or reuses an existing declaration of
//! the same type).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::standard_constants;
use crate::ontology::{Ontology, OntologyError};
use crate::syntax::{parse_term_at, parse_type_at, ParseError, Resolver};
use crate::term::{Term, Type};
use crate::typing::{type_of, TypingContext};

/// How freely a transformation tolerates other transformations being applied
/// to the same anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    /// Combines with anything (written `F`, numeric degree 1).
    Flexible,
    /// Behaves rigidly inside a sentence, but the constraint is destroyed by
    /// anaphoric distance (written `SF`, numeric degree 2).
    SemiFlexible,
    /// Excludes every other transformation on the same occurrence for the
    /// whole discourse (written `R`, numeric degree 3).
    Rigid,
}

impl Degree {
    pub fn numeric(self) -> u8 {
        match self {
            Degree::Flexible => 1,
            Degree::SemiFlexible => 2,
            Degree::Rigid => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Degree::Flexible => "F",
            Degree::SemiFlexible => "SF",
            Degree::Rigid => "R",
        }
    }

    pub fn parse(s: &str) -> Option<Degree> {
        match s {
            "F" => Some(Degree::Flexible),
            "SF" => Some(Degree::SemiFlexible),
            "R" => Some(Degree::Rigid),
            _ => None,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Where a transformation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Declared in a lexical entry.
    Lexical,
    /// Synthesised from a subsort edge.
    Ontology,
    /// The implicit identity slot of an entry.
    Identity,
}

/// A named coercion `term : source -> target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformation {
    pub name: String,
    pub term: Term,
    pub source: Type,
    pub target: Type,
    pub degree: Degree,
    pub origin: Origin,
}

impl Transformation {
    pub fn is_identity(&self) -> bool {
        self.origin == Origin::Identity
    }

    /// `f_C : City -> Club (R)` — used in diagnostics.
    pub fn describe(&self) -> String {
        format!("{} : {} -> {} ({})", self.name, self.source, self.target, self.degree)
    }
}

/// One word of the lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct LexicalEntry {
    pub word: String,
    pub main: Term,
    /// The declared type of `main`.
    pub main_type: Type,
    /// Identity slot first, then declared transformations in file order.
    pub transformations: Vec<Transformation>,
    /// When present, the authority on which transformations may be used
    /// together within one sentence: every jointly used set must be included
    /// in one of these.
    pub compatible_subsets: Option<Vec<BTreeSet<String>>>,
}

impl LexicalEntry {
    /// The sort on which the implicit identity lives: the entry's own type
    /// for names, the domain for predicates.
    fn subject_type(main_type: &Type) -> Type {
        match main_type {
            Type::Arrow(dom, _) => (**dom).clone(),
            other => other.clone(),
        }
    }

    fn synthesise_identity(main_type: &Type) -> Transformation {
        let subject = Self::subject_type(main_type);
        Transformation {
            name: "Id".to_string(),
            term: Term::abs("x", subject.clone(), Term::var("x", subject.clone())),
            source: subject.clone(),
            target: subject,
            degree: Degree::Flexible,
            origin: Origin::Identity,
        }
    }

    pub fn identity(&self) -> &Transformation {
        self.transformations
            .iter()
            .find(|t| t.is_identity())
            .expect("every entry carries its identity slot")
    }

    pub fn transformation(&self, name: &str) -> Option<&Transformation> {
        self.transformations.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub word: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.word {
            Some(w) => write!(f, "word `{w}`: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LexiconError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("lexicon failed validation:\n{}", .0.iter().map(|d| format!("  - {d}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<Diagnostic>),
    #[error("ontology error: {0}")]
    Ontology(#[from] OntologyError),
    #[error("overlay ontology is incompatible with the base: {0}")]
    IncompatibleOntology(String),
    #[error("unknown word `{0}`")]
    UnknownWord(String),
}

/// A full lexicon: ontology, constant signature and entries in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub ontology: Ontology,
    /// Every constant in scope, standard ones included.
    pub constants: BTreeMap<String, Type>,
    /// Constants that were declared with an explicit `const` line, in file
    /// order; only these are serialised.
    explicit_constants: Vec<String>,
    entries: Vec<LexicalEntry>,
    index: BTreeMap<String, usize>,
}

impl Lexicon {
    /// An empty lexicon over the built-in ontology and standard constants.
    pub fn empty() -> Lexicon {
        Lexicon {
            ontology: Ontology::new(),
            constants: standard_constants(),
            explicit_constants: Vec::new(),
            entries: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    pub fn entries(&self) -> &[LexicalEntry] {
        &self.entries
    }

    pub fn lookup(&self, word: &str) -> Result<&LexicalEntry, LexiconError> {
        self.index
            .get(word)
            .map(|&i| &self.entries[i])
            .ok_or_else(|| LexiconError::UnknownWord(word.to_string()))
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// The typing context induced by this lexicon.
    pub fn typing_context(&self) -> TypingContext {
        let mut ctx = TypingContext::with_sorts(self.ontology.sorts());
        ctx.constants = self.constants.clone();
        ctx
    }

    /// Name resolution for parsing terms against this lexicon.
    pub fn resolver(&self) -> Resolver {
        Resolver::new(self.constants.clone())
    }

    fn push_entry(&mut self, entry: LexicalEntry) {
        match self.index.get(&entry.word) {
            Some(&i) => self.entries[i] = entry,
            None => {
                self.index.insert(entry.word.clone(), self.entries.len());
                self.entries.push(entry);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Loading

struct PendingEntry {
    word: String,
    main: Term,
    main_type: Type,
    transformations: Vec<Transformation>,
    compat: Option<Vec<BTreeSet<String>>>,
    line: usize,
}

/// Parses a lexicon file.  Validation failures are reported together rather
/// than one at a time.
pub fn load_lexicon(src: &str) -> Result<Lexicon, LexiconError> {
    // Sort declarations are collected up front so they may refer forward;
    // a genuinely cyclic file is then reported as a cycle.
    let mut sort_decls: Vec<(String, Vec<String>)> = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if let Some(rest) = line.strip_prefix("sort ") {
            sort_decls.push(parse_sort_decl(rest, line_no)?);
        }
    }
    let ontology = Ontology::from_declarations(&sort_decls, true)?;

    let mut constants = standard_constants();
    let mut explicit_constants = Vec::new();
    let mut pending: Vec<PendingEntry> = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() || line.starts_with("sort ") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("const ") {
            let (name, ty) = parse_const_decl(rest, line_no)?;
            declare_constant(&mut constants, &name, ty, line_no)?;
            if !explicit_constants.contains(&name) {
                explicit_constants.push(name);
            }
        } else if let Some(rest) = line.strip_prefix("word ") {
            let (word, ty, term_src) = split_typed_binding(rest, line_no)?;
            if pending.iter().any(|p| p.word == word) {
                return Err(ParseError::new(line_no, format!("word `{word}` is declared twice")).into());
            }
            let main = parse_rhs_term(&term_src, &word, &ty, &mut constants, line_no)?;
            pending.push(PendingEntry {
                word,
                main,
                main_type: ty,
                transformations: Vec::new(),
                compat: None,
                line: line_no,
            });
        } else if let Some(rest) = line.strip_prefix("opt ") {
            let entry = pending.last_mut().ok_or_else(|| {
                ParseError::new(line_no, "`opt` must follow a `word` declaration")
            })?;
            let (name, ty, rhs) = split_typed_binding(rest, line_no)?;
            let (term_src, degree) = split_degree(&rhs, line_no)?;
            let (source, target) = match &ty {
                Type::Arrow(d, c) => ((**d).clone(), (**c).clone()),
                other => {
                    return Err(ParseError::new(
                        line_no,
                        format!("transformation `{name}` must have an arrow type, got `{other}`"),
                    )
                    .into())
                }
            };
            let term = parse_rhs_term(&term_src, &name, &ty, &mut constants, line_no)?;
            entry.transformations.push(Transformation {
                name,
                term,
                source,
                target,
                degree,
                origin: Origin::Lexical,
            });
        } else if let Some(rest) = line.strip_prefix("compat ") {
            let entry = pending.last_mut().ok_or_else(|| {
                ParseError::new(line_no, "`compat` must follow a `word` declaration")
            })?;
            let sets = parse_compat_sets(rest, line_no)?;
            entry.compat.get_or_insert_with(Vec::new).extend(sets);
        } else {
            return Err(ParseError::new(
                line_no,
                format!("expected `sort`, `const`, `word`, `opt` or `compat`, found `{line}`"),
            )
            .into());
        }
    }

    let mut lexicon = Lexicon {
        ontology,
        constants,
        explicit_constants,
        entries: Vec::new(),
        index: BTreeMap::new(),
    };
    for p in pending {
        let mut transformations = vec![LexicalEntry::synthesise_identity(&p.main_type)];
        transformations.extend(p.transformations);
        let _ = p.line;
        lexicon.push_entry(LexicalEntry {
            word: p.word,
            main: p.main,
            main_type: p.main_type,
            transformations,
            compatible_subsets: p.compat,
        });
    }

    let diagnostics = validate_lexicon(&lexicon);
    if diagnostics.is_empty() {
        Ok(lexicon)
    } else {
        Err(LexiconError::Validation(diagnostics))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_sort_decl(rest: &str, line: usize) -> Result<(String, Vec<String>), ParseError> {
    let (name, parents) = match rest.split_once("<:") {
        Some((n, ps)) => {
            let parents: Vec<String> = ps
                .split(',')
                .map(|p| p.trim().to_string())
                .filter(|p| !p.is_empty())
                .collect();
            if parents.is_empty() {
                return Err(ParseError::new(line, "`<:` must be followed by parent sorts"));
            }
            (n.trim().to_string(), parents)
        }
        None => (rest.trim().to_string(), Vec::new()),
    };
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(ParseError::new(line, format!("invalid sort name `{name}`")));
    }
    if !name.starts_with(|c: char| c.is_uppercase()) && name != "e" {
        return Err(ParseError::new(
            line,
            format!("sort `{name}` must start with an uppercase letter"),
        ));
    }
    Ok((name, parents))
}

fn parse_const_decl(rest: &str, line: usize) -> Result<(String, Type), ParseError> {
    let (name, ty_src) = rest
        .split_once(':')
        .ok_or_else(|| ParseError::new(line, "expected `const <name> : <type>`"))?;
    let name = name.trim().to_string();
    if name.is_empty() {
        return Err(ParseError::new(line, "constant name is empty"));
    }
    let ty = parse_type_at(ty_src.trim(), line)?;
    Ok((name, ty))
}

fn declare_constant(
    constants: &mut BTreeMap<String, Type>,
    name: &str,
    ty: Type,
    line: usize,
) -> Result<(), ParseError> {
    match constants.get(name) {
        Some(existing) if existing.alpha_eq(&ty) => Ok(()),
        Some(existing) => Err(ParseError::new(
            line,
            format!("constant `{name}` is already declared with type `{existing}`"),
        )),
        None => {
            constants.insert(name.to_string(), ty);
            Ok(())
        }
    }
}

/// Splits `name : Type = rhs`, parsing the type.
fn split_typed_binding(rest: &str, line: usize) -> Result<(String, Type, String), ParseError> {
    let (lhs, rhs) = rest
        .split_once('=')
        .ok_or_else(|| ParseError::new(line, "expected `<name> : <type> = <term>`"))?;
    let (name, ty_src) = lhs
        .split_once(':')
        .ok_or_else(|| ParseError::new(line, "expected `:` between name and type"))?;
    let name = name.trim().to_string();
    if name.is_empty() {
        return Err(ParseError::new(line, "name is empty"));
    }
    let ty = parse_type_at(ty_src.trim(), line)?;
    Ok((name, ty, rhs.trim().to_string()))
}

/// Strips the trailing `deg F|SF|R` marker from an `opt` right-hand side.
fn split_degree(rhs: &str, line: usize) -> Result<(String, Degree), ParseError> {
    let tokens: Vec<&str> = rhs.split_whitespace().collect();
    if tokens.len() >= 2 && tokens[tokens.len() - 2] == "deg" {
        let degree = Degree::parse(tokens[tokens.len() - 1]).ok_or_else(|| {
            ParseError::new(
                line,
                format!("unknown degree `{}` (expected F, SF or R)", tokens[tokens.len() - 1]),
            )
        })?;
        let term_src = rhs
            .rsplit_once("deg")
            .map(|(t, _)| t.trim().to_string())
            .unwrap_or_default();
        if term_src.is_empty() {
            return Err(ParseError::new(line, "transformation term is empty"));
        }
        Ok((term_src, degree))
    } else {
        Err(ParseError::new(line, "transformation must end with `deg F`, `deg SF` or `deg R`"))
    }
}

/// Parses the right-hand side of a `word` or `opt` line.  A bare identifier
/// declares (or reuses) a constant of the stated type, and the binding's own
/// name is in scope as a constant of the stated type while its term parses
/// (so `word won : Club -> t = lam x:Club. won x` needs no `const` line).
fn parse_rhs_term(
    src: &str,
    name: &str,
    stated: &Type,
    constants: &mut BTreeMap<String, Type>,
    line: usize,
) -> Result<Term, ParseError> {
    let trimmed = src.trim();
    let is_bare_ident = !trimmed.is_empty()
        && trimmed.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && trimmed.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
    if is_bare_ident && trimmed != "lam" && trimmed != "Lam" {
        if trimmed == name {
            // Another entry may reuse the name at a different type (entry
            // names are entry-scoped); an existing declaration wins, and
            // validation reports any resulting type mismatch.
            let ty = constants
                .entry(name.to_string())
                .or_insert_with(|| stated.clone())
                .clone();
            return Ok(Term::cnst(name, ty));
        }
        declare_constant(constants, trimmed, stated.clone(), line)?;
        return Ok(Term::cnst(trimmed, constants[trimmed].clone()));
    }
    let mut local = constants.clone();
    local.insert(name.to_string(), stated.clone());
    let term = parse_term_at(trimmed, &Resolver::new(local), line)?;
    constants.entry(name.to_string()).or_insert_with(|| stated.clone());
    Ok(term)
}

fn parse_compat_sets(rest: &str, line: usize) -> Result<Vec<BTreeSet<String>>, ParseError> {
    let mut sets = Vec::new();
    let mut remaining = rest.trim();
    while !remaining.is_empty() {
        if !remaining.starts_with('{') {
            return Err(ParseError::new(line, "expected `{` in compat declaration"));
        }
        let close = remaining
            .find('}')
            .ok_or_else(|| ParseError::new(line, "unterminated `{` in compat declaration"))?;
        let inner = &remaining[1..close];
        let set: BTreeSet<String> = inner
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        sets.push(set);
        remaining = remaining[close + 1..].trim_start();
    }
    if sets.is_empty() {
        return Err(ParseError::new(line, "compat declaration lists no sets"));
    }
    Ok(sets)
}

// ---------------------------------------------------------------------------
// Validation

/// Checks every entry against the signature and ontology.  An empty result
/// means the lexicon is coherent.
pub fn validate_lexicon(lexicon: &Lexicon) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let ctx = lexicon.typing_context();
    let diag = |word: &str, message: String| Diagnostic { word: Some(word.to_string()), message };

    for entry in &lexicon.entries {
        match type_of(&entry.main, &ctx) {
            Ok(ty) => {
                if !ty.alpha_eq(&entry.main_type) {
                    out.push(diag(
                        &entry.word,
                        format!("main term has type `{ty}`, entry declares `{}`", entry.main_type),
                    ));
                }
            }
            Err(e) => out.push(diag(&entry.word, format!("main term does not typecheck: {e}"))),
        }

        let mut seen = BTreeSet::new();
        for tr in &entry.transformations {
            if !seen.insert(tr.name.clone()) {
                out.push(diag(&entry.word, format!("duplicate transformation `{}`", tr.name)));
            }
            if tr.origin != Origin::Identity && tr.name == "Id" {
                out.push(diag(&entry.word, "`Id` is reserved for the identity slot".to_string()));
            }
            let expected = Type::arrow(tr.source.clone(), tr.target.clone());
            match type_of(&tr.term, &ctx) {
                Ok(ty) => {
                    if !ty.alpha_eq(&expected) {
                        out.push(diag(
                            &entry.word,
                            format!(
                                "transformation `{}` has type `{ty}`, declared `{expected}`",
                                tr.name
                            ),
                        ));
                    }
                }
                Err(e) => out.push(diag(
                    &entry.word,
                    format!("transformation `{}` does not typecheck: {e}", tr.name),
                )),
            }
            if tr.origin != Origin::Identity && tr.source.alpha_eq(&tr.target) {
                out.push(diag(
                    &entry.word,
                    format!("transformation `{}` maps `{}` to itself", tr.name, tr.source),
                ));
            }
        }

        if let Some(sets) = &entry.compatible_subsets {
            for set in sets {
                for name in set {
                    if entry.transformation(name).is_none() {
                        out.push(diag(
                            &entry.word,
                            format!("compat set mentions unknown transformation `{name}`"),
                        ));
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Serialisation

/// Renders the lexicon back into its file format.  Loading the result yields
/// the same lexicon (identity slots are re-synthesised, auto-declared
/// constants re-appear through the bare-identifier rule).
pub fn serialize_lexicon(lexicon: &Lexicon) -> String {
    let mut out = String::new();
    for (name, parents) in lexicon.ontology.declared() {
        if parents.is_empty() {
            out.push_str(&format!("sort {name}\n"));
        } else {
            out.push_str(&format!("sort {name} <: {}\n", parents.join(", ")));
        }
    }
    for name in &lexicon.explicit_constants {
        out.push_str(&format!("const {name} : {}\n", lexicon.constants[name]));
    }
    for entry in &lexicon.entries {
        out.push_str(&format!("word {} : {} = {}\n", entry.word, entry.main_type, entry.main));
        for tr in &entry.transformations {
            if tr.origin != Origin::Lexical {
                continue;
            }
            out.push_str(&format!(
                "  opt {} : {} -> {} = {} deg {}\n",
                tr.name,
                type_in_arrow_position(&tr.source),
                tr.target,
                tr.term,
                tr.degree
            ));
        }
        if let Some(sets) = &entry.compatible_subsets {
            let rendered: Vec<String> = sets
                .iter()
                .map(|s| format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", ")))
                .collect();
            out.push_str(&format!("  compat {}\n", rendered.join(" ")));
        }
    }
    out
}

fn type_in_arrow_position(ty: &Type) -> String {
    match ty {
        Type::Arrow(..) | Type::Forall(..) => format!("({ty})"),
        _ => ty.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Overlays

/// Merges `overlay` into `base`.
///
/// Word-wise: an overlay entry replaces the base entry's main term, appends
/// its new transformations, and overrides transformations of the same name;
/// new words are appended.  The ontologies are unioned and must stay acyclic.
/// The merged lexicon is re-validated.
pub fn merge_overlay(base: &Lexicon, overlay: &Lexicon) -> Result<Lexicon, LexiconError> {
    if base.ontology.e_top() != overlay.ontology.e_top() {
        return Err(LexiconError::IncompatibleOntology(
            "the `e`-top settings disagree".to_string(),
        ));
    }
    let ontology = base
        .ontology
        .merge(&overlay.ontology)
        .map_err(|e| LexiconError::IncompatibleOntology(e.to_string()))?;

    let mut constants = base.constants.clone();
    for (name, ty) in &overlay.constants {
        // Overlay declarations win; entries that relied on the old type are
        // caught by re-validation below.
        constants.insert(name.clone(), ty.clone());
    }
    let mut explicit_constants = base.explicit_constants.clone();
    for name in &overlay.explicit_constants {
        if !explicit_constants.contains(name) {
            explicit_constants.push(name.clone());
        }
    }

    let mut merged = Lexicon {
        ontology,
        constants,
        explicit_constants,
        entries: base.entries.clone(),
        index: base.index.clone(),
    };

    for over in &overlay.entries {
        let entry = match merged.index.get(&over.word) {
            Some(&i) => {
                let base_entry = &merged.entries[i];
                let mut transformations =
                    vec![LexicalEntry::synthesise_identity(&over.main_type)];
                // Keep base transformations (overridden by name), then append
                // genuinely new ones in overlay order.
                for tr in &base_entry.transformations {
                    if tr.is_identity() {
                        continue;
                    }
                    match over.transformations.iter().find(|o| !o.is_identity() && o.name == tr.name)
                    {
                        Some(replacement) => transformations.push(replacement.clone()),
                        None => transformations.push(tr.clone()),
                    }
                }
                for tr in &over.transformations {
                    if tr.is_identity() || transformations.iter().any(|t| t.name == tr.name) {
                        continue;
                    }
                    transformations.push(tr.clone());
                }
                LexicalEntry {
                    word: over.word.clone(),
                    main: over.main.clone(),
                    main_type: over.main_type.clone(),
                    transformations,
                    compatible_subsets: over
                        .compatible_subsets
                        .clone()
                        .or_else(|| base_entry.compatible_subsets.clone()),
                }
            }
            None => over.clone(),
        };
        merged.push_entry(entry);
    }

    let diagnostics = validate_lexicon(&merged);
    if diagnostics.is_empty() {
        Ok(merged)
    } else {
        Err(LexiconError::Validation(diagnostics))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = "\
sort City <: e
sort Club <: e
sort People <: e
sort Location <: e
const won : Club -> t
word Liverpool : City = Liverpool
  opt f_P : City -> People = f_P deg F
  opt f_L : City -> Location = f_L deg F
  opt f_C : City -> Club = f_C deg R
word won : Club -> t = lam x:Club. won x
";

    #[test]
    fn load_demo_lexicon() {
        let lex = load_lexicon(DEMO).unwrap();
        let liverpool = lex.lookup("Liverpool").unwrap();
        assert!(liverpool.main_type.alpha_eq(&Type::base("City")));
        // Identity first, then file order.
        let names: Vec<&str> =
            liverpool.transformations.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, vec!["Id", "f_P", "f_L", "f_C"]);
        assert_eq!(liverpool.transformation("f_C").unwrap().degree, Degree::Rigid);
        assert_eq!(liverpool.identity().origin, Origin::Identity);
        // The bare RHS declared `Liverpool : City` as a constant.
        assert!(lex.constants["Liverpool"].alpha_eq(&Type::base("City")));
    }

    #[test]
    fn identity_lives_on_the_subject_sort() {
        let lex = load_lexicon(DEMO).unwrap();
        // For a predicate the identity is on its domain.
        let won = lex.lookup("won").unwrap();
        assert!(won.identity().source.alpha_eq(&Type::base("Club")));
        let liverpool = lex.lookup("Liverpool").unwrap();
        assert!(liverpool.identity().source.alpha_eq(&Type::base("City")));
    }

    #[test]
    fn unknown_word_is_an_error() {
        let lex = load_lexicon(DEMO).unwrap();
        assert_eq!(
            lex.lookup("Everton").unwrap_err(),
            LexiconError::UnknownWord("Everton".to_string())
        );
    }

    #[test]
    fn validation_catches_type_lies() {
        let src = "\
sort City <: e
word Liverpool : City = Liverpool
  opt f_C : City -> Club = f_C deg R
";
        // `Club` is not declared.
        let err = load_lexicon(src).unwrap_err();
        match err {
            LexiconError::Validation(diags) => {
                assert!(diags.iter().any(|d| d.message.contains("Club")), "{diags:?}");
            }
            other => panic!("expected validation failure, got {other}"),
        }
    }

    #[test]
    fn validation_catches_degenerate_transformations() {
        let src = "\
sort City <: e
word Liverpool : City = Liverpool
  opt noop : City -> City = noop deg F
";
        let err = load_lexicon(src).unwrap_err();
        match err {
            LexiconError::Validation(diags) => {
                assert!(diags.iter().any(|d| d.message.contains("maps `City` to itself")));
            }
            other => panic!("expected validation failure, got {other}"),
        }
    }

    #[test]
    fn stated_word_type_must_match_term() {
        let src = "\
sort City <: e
const Liverpool : City
word Liverpool : e = Liverpool
";
        match load_lexicon(src) {
            Err(LexiconError::Validation(diags)) => {
                assert!(diags.iter().any(|d| d.message.contains("type")), "{diags:?}");
            }
            other => panic!("expected a validation failure, got {other:?}"),
        }
    }

    #[test]
    fn compat_sets_parse_and_validate() {
        let src = format!("{DEMO}  compat {{f_P, f_L}} {{f_C}}\n");
        // compat must attach to the last word; `won` has no such names.
        let err = load_lexicon(&src).unwrap_err();
        assert!(matches!(err, LexiconError::Validation(_)));

        let src = "\
sort City <: e
sort People <: e
sort Location <: e
word Liverpool : City = Liverpool
  opt f_P : City -> People = f_P deg F
  opt f_L : City -> Location = f_L deg F
  compat {f_P, f_L} {Id}
";
        let lex = load_lexicon(src).unwrap();
        let sets = lex.lookup("Liverpool").unwrap().compatible_subsets.as_ref().unwrap();
        assert_eq!(sets.len(), 2);
        assert!(sets[0].contains("f_P") && sets[0].contains("f_L"));
    }

    #[test]
    fn serialisation_reaches_a_fixpoint() {
        let lex = load_lexicon(DEMO).unwrap();
        let once = serialize_lexicon(&lex);
        let reloaded = load_lexicon(&once).unwrap();
        assert_eq!(lex, reloaded);
        let twice = serialize_lexicon(&reloaded);
        assert_eq!(once, twice);
    }

    #[test]
    fn merge_overlay_appends_and_overrides() {
        let base = load_lexicon(DEMO).unwrap();
        let overlay = load_lexicon(
            "\
sort City <: e
sort Agent <: e
word Liverpool : City = Liverpool
  opt f_A : City -> Agent = f_A deg F
  opt f_C : City -> Club = f_C deg F
sort Club <: e
",
        )
        .unwrap();
        let merged = merge_overlay(&base, &overlay).unwrap();
        let entry = merged.lookup("Liverpool").unwrap();
        let names: Vec<&str> = entry.transformations.iter().map(|t| t.name.as_str()).collect();
        // Base order preserved, new transformation appended.
        assert_eq!(names, vec!["Id", "f_P", "f_L", "f_C", "f_A"]);
        // Same-name override changed the degree.
        assert_eq!(entry.transformation("f_C").unwrap().degree, Degree::Flexible);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let base = load_lexicon(DEMO).unwrap();
        let merged = merge_overlay(&Lexicon::empty(), &base).unwrap();
        assert_eq!(merged, base);
        let merged = merge_overlay(&base, &Lexicon::empty()).unwrap();
        assert_eq!(merged, base);
    }

    #[test]
    fn merge_is_associative_on_disjoint_overlays() {
        let base = load_lexicon(DEMO).unwrap();
        let o1 = load_lexicon("sort Animal <: e\nword dog : Animal = dog\n").unwrap();
        let o2 = load_lexicon("sort Food <: e\nword soup : Food = soup\n").unwrap();
        let left = merge_overlay(&merge_overlay(&base, &o1).unwrap(), &o2).unwrap();
        let right = merge_overlay(&base, &merge_overlay(&o1, &o2).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn overlay_can_retype_a_word() {
        let base = load_lexicon("sort Animal <: e\nword wolf : Animal = wolf\n").unwrap();
        let overlay = load_lexicon("sort Agent <: e\nword wolf : Agent = wolf\n").unwrap();
        let merged = merge_overlay(&base, &overlay).unwrap();
        let wolf = merged.lookup("wolf").unwrap();
        assert!(wolf.main_type.alpha_eq(&Type::base("Agent")));
        // The identity slot follows the new type.
        assert!(wolf.identity().source.alpha_eq(&Type::base("Agent")));
    }

    #[test]
    fn incompatible_overlay_ontology_is_rejected() {
        let base = load_lexicon("sort A\nsort B <: A\n").unwrap();
        let overlay = load_lexicon("sort B\nsort A <: B\n").unwrap();
        assert!(matches!(
            merge_overlay(&base, &overlay),
            Err(LexiconError::IncompatibleOntology(_))
        ));
    }
}
