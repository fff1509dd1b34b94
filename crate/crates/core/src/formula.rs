//! Many-sorted predicate-calculus formulas and the erasure from normal-form
//! lambda terms into them.
//!
//! A composed sentence normalises to a closed term of type `t`; [`erase`]
//! reads that normal form off as a first-order formula over sorted variables,
//! with coercions appearing as function symbols (`won(f_C(Liverpool))`) and
//! the choice operator appearing as an epsilon term.  Terms with genuinely
//! higher-order residue (quantification over predicates, predicates in
//! argument position) do not erase and are reported as such.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::subst::substitute_type;
use crate::syntax::ParseError;
use crate::term::{fresh_name, Term, Type};

/// The signature every lexicon starts from.
///
/// `and`, `or`, `implies : t -> t -> t`; `not : t -> t`;
/// `forall`, `exists : Pi a. (a -> t) -> t`; `epsilon : Pi a. (a -> t) -> a`.
pub fn standard_constants() -> BTreeMap<String, Type> {
    let mut out = BTreeMap::new();
    let binary = Type::arrow(Type::Truth, Type::arrow(Type::Truth, Type::Truth));
    out.insert("and".to_string(), binary.clone());
    out.insert("or".to_string(), binary.clone());
    out.insert("implies".to_string(), binary);
    out.insert("not".to_string(), Type::arrow(Type::Truth, Type::Truth));
    let pred = |a: &str| Type::arrow(Type::var(a), Type::Truth);
    let quant = Type::forall("a", Type::arrow(pred("a"), Type::Truth));
    out.insert("forall".to_string(), quant.clone());
    out.insert("exists".to_string(), quant);
    out.insert(
        "epsilon".to_string(),
        Type::forall("a", Type::arrow(pred("a"), Type::var("a"))),
    );
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantKind {
    Forall,
    Exists,
}

/// A first-order term: variable, constant, function application or a choice
/// (epsilon) term.
#[derive(Debug, Clone, PartialEq)]
pub enum FTerm {
    Var(String),
    Const(String),
    App { fun: String, args: Vec<FTerm> },
    Epsilon { var: String, sort: Type, body: Box<Formula> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom { pred: String, args: Vec<FTerm> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Quant { kind: QuantKind, var: String, sort: Type, body: Box<Formula> },
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<FTerm>) -> Formula {
        Formula::Atom { pred: pred.into(), args }
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    // An associated constructor named after the connective, like the rest of
    // the family; it is never callable as a method, so it cannot shadow the
    // operator trait.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn quant(kind: QuantKind, var: impl Into<String>, sort: Type, body: Formula) -> Formula {
        Formula::Quant { kind, var: var.into(), sort, body: Box::new(body) }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EraseError {
    #[error("term has type `{0}`, only type `t` erases to a formula")]
    NotTruth(Type),
    #[error("term does not erase to first-order form: {0}")]
    NotErasable(String),
}

// ---------------------------------------------------------------------------
// Erasure

/// Reads a closed beta-normal term of type `t` off as a formula.
pub fn erase(term: &Term) -> Result<Formula, EraseError> {
    let ty = annotated_type(term)?;
    if ty != Type::Truth {
        return Err(EraseError::NotTruth(ty));
    }
    erase_formula(term)
}

/// The type a Church-annotated term wears on its sleeve.  (Whether the term
/// actually has that type is the type checker's business; erasure is applied
/// to terms the engine has already checked and normalised.)
fn annotated_type(term: &Term) -> Result<Type, EraseError> {
    match term {
        Term::Var(_, ty) | Term::Const(_, ty) => Ok(ty.clone()),
        Term::App(f, _) => match annotated_type(f)? {
            Type::Arrow(_, cod) => Ok(*cod),
            other => Err(EraseError::NotErasable(format!(
                "application of a term of type `{other}`"
            ))),
        },
        Term::Abs(_, ty, body) => Ok(Type::arrow(ty.clone(), annotated_type(body)?)),
        Term::TyAbs(a, body) => Ok(Type::forall(a.clone(), annotated_type(body)?)),
        Term::TyApp(f, ty) => match annotated_type(f)? {
            Type::Forall(a, b) => Ok(substitute_type(&b, &a, ty)),
            other => Err(EraseError::NotErasable(format!(
                "type application of a term of type `{other}`"
            ))),
        },
    }
}

/// Splits a term into head, type arguments and term arguments.
fn spine(term: &Term) -> (&Term, Vec<&Type>, Vec<&Term>) {
    let mut head = term;
    let mut ty_args = Vec::new();
    let mut args = Vec::new();
    loop {
        match head {
            Term::App(f, a) => {
                args.push(a.as_ref());
                head = f;
            }
            Term::TyApp(f, ty) => {
                ty_args.push(ty);
                head = f;
            }
            _ => break,
        }
    }
    args.reverse();
    ty_args.reverse();
    (head, ty_args, args)
}

fn quantifier_sort(ty: &Type) -> Result<Type, EraseError> {
    match ty {
        Type::Base(_) => Ok(ty.clone()),
        other => Err(EraseError::NotErasable(format!(
            "quantification over `{other}` is not first-order"
        ))),
    }
}

/// Returns the bound variable and body of a predicate argument, eta-expanding
/// when the argument is not itself a lambda.
fn open_predicate(arg: &Term, sort: &Type) -> Result<(String, Term), EraseError> {
    match arg {
        Term::Abs(x, _, body) => Ok((x.clone(), (**body).clone())),
        other => {
            let x = fresh_name("x", &other.free_var_names());
            let var = Term::var(&x, sort.clone());
            Ok((x, Term::app(other.clone(), var)))
        }
    }
}

fn erase_formula(term: &Term) -> Result<Formula, EraseError> {
    let (head, ty_args, args) = spine(term);
    match head {
        Term::Const(name, _) => match name.as_str() {
            "and" | "or" | "implies" if ty_args.is_empty() && args.len() == 2 => {
                let l = erase_formula(args[0])?;
                let r = erase_formula(args[1])?;
                Ok(match name.as_str() {
                    "and" => Formula::and(l, r),
                    "or" => Formula::or(l, r),
                    _ => Formula::implies(l, r),
                })
            }
            "not" if ty_args.is_empty() && args.len() == 1 => {
                Ok(Formula::not(erase_formula(args[0])?))
            }
            "forall" | "exists" if ty_args.len() == 1 && args.len() == 1 => {
                let sort = quantifier_sort(ty_args[0])?;
                let (var, body) = open_predicate(args[0], &sort)?;
                let kind =
                    if name == "forall" { QuantKind::Forall } else { QuantKind::Exists };
                Ok(Formula::quant(kind, var, sort, erase_formula(&body)?))
            }
            "epsilon" => Err(EraseError::NotErasable(
                "a choice term is not a formula".to_string(),
            )),
            _ if ty_args.is_empty() => {
                let args = args
                    .iter()
                    .map(|a| erase_fterm(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Formula::atom(name.clone(), args))
            }
            _ => Err(EraseError::NotErasable(format!(
                "polymorphic constant `{name}` has no first-order reading"
            ))),
        },
        Term::Var(name, _) => Err(EraseError::NotErasable(format!(
            "variable `{name}` heads a formula position"
        ))),
        Term::Abs(..) | Term::TyAbs(..) if args.is_empty() && ty_args.is_empty() => {
            Err(EraseError::NotErasable("a bare abstraction is not a formula".to_string()))
        }
        _ => Err(EraseError::NotErasable("term is not in normal form".to_string())),
    }
}

fn erase_fterm(term: &Term) -> Result<FTerm, EraseError> {
    let (head, ty_args, args) = spine(term);
    match head {
        Term::Var(x, ty) if ty_args.is_empty() && args.is_empty() => match ty {
            Type::Base(_) => Ok(FTerm::Var(x.clone())),
            other => Err(EraseError::NotErasable(format!(
                "variable `{x}` of type `{other}` in argument position"
            ))),
        },
        Term::Const(name, ty) if name == "epsilon" && ty_args.len() == 1 && args.len() == 1 => {
            let _ = ty;
            let sort = quantifier_sort(ty_args[0])?;
            let (var, body) = open_predicate(args[0], &sort)?;
            Ok(FTerm::Epsilon { var, sort, body: Box::new(erase_formula(&body)?) })
        }
        Term::Const(name, ty) if ty_args.is_empty() => {
            if args.is_empty() {
                match ty {
                    Type::Base(_) => Ok(FTerm::Const(name.clone())),
                    other => Err(EraseError::NotErasable(format!(
                        "constant `{name}` of type `{other}` in argument position"
                    ))),
                }
            } else {
                let args = args
                    .iter()
                    .map(|a| erase_fterm(a))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(FTerm::App { fun: name.clone(), args })
            }
        }
        Term::Const(name, _) => Err(EraseError::NotErasable(format!(
            "polymorphic constant `{name}` in argument position"
        ))),
        _ => Err(EraseError::NotErasable(
            "argument position holds no first-order term".to_string(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Rendering

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaStyle {
    Unicode,
    Ascii,
    Sexpr,
}

impl Formula {
    pub fn render(&self, style: FormulaStyle) -> String {
        match style {
            FormulaStyle::Sexpr => self.render_sexpr(),
            _ => self.render_infix(style, true),
        }
    }

    fn render_infix(&self, style: FormulaStyle, top: bool) -> String {
        let unicode = style == FormulaStyle::Unicode;
        match self {
            Formula::Atom { pred, args } => {
                if args.is_empty() {
                    pred.clone()
                } else {
                    let rendered: Vec<String> =
                        args.iter().map(|a| a.render_infix(style)).collect();
                    format!("{pred}({})", rendered.join(", "))
                }
            }
            Formula::Not(f) => {
                let op = if unicode { "¬" } else { "~" };
                match f.as_ref() {
                    Formula::Atom { .. } | Formula::Not(_) => {
                        format!("{op}{}", f.render_infix(style, false))
                    }
                    _ => format!("{op}({})", f.render_infix(style, true)),
                }
            }
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                let op = match (self, unicode) {
                    (Formula::And(..), true) => "∧",
                    (Formula::And(..), false) => "&",
                    (Formula::Or(..), true) => "∨",
                    (Formula::Or(..), false) => "|",
                    (_, true) => "→",
                    (_, false) => "->",
                };
                let side = |f: &Formula| match f {
                    Formula::Atom { .. } | Formula::Not(_) => f.render_infix(style, false),
                    _ => format!("({})", f.render_infix(style, true)),
                };
                let body = format!("{} {op} {}", side(l), side(r));
                let _ = top;
                body
            }
            Formula::Quant { kind, var, sort, body } => {
                let q = match (kind, unicode) {
                    (QuantKind::Forall, true) => "∀",
                    (QuantKind::Forall, false) => "forall ",
                    (QuantKind::Exists, true) => "∃",
                    (QuantKind::Exists, false) => "exists ",
                };
                // In the symbolic style the binder scopes as far right as
                // possible, so its body needs no parentheses; the ascii
                // golden-file style spells the grouping out.
                let rendered = match body.as_ref() {
                    Formula::And(..) | Formula::Or(..) | Formula::Implies(..) if !unicode => {
                        format!("({})", body.render_infix(style, true))
                    }
                    _ => body.render_infix(style, true),
                };
                format!("{q}{var}:{sort}. {rendered}")
            }
        }
    }

    fn render_sexpr(&self) -> String {
        match self {
            Formula::Atom { pred, args } => {
                let mut parts = vec![pred.clone()];
                parts.extend(args.iter().map(|a| a.render_sexpr()));
                format!("({})", parts.join(" "))
            }
            Formula::Not(f) => format!("(not {})", f.render_sexpr()),
            Formula::And(l, r) => format!("(and {} {})", l.render_sexpr(), r.render_sexpr()),
            Formula::Or(l, r) => format!("(or {} {})", l.render_sexpr(), r.render_sexpr()),
            Formula::Implies(l, r) => {
                format!("(implies {} {})", l.render_sexpr(), r.render_sexpr())
            }
            Formula::Quant { kind, var, sort, body } => {
                let q = match kind {
                    QuantKind::Forall => "forall",
                    QuantKind::Exists => "exists",
                };
                format!("({q} ({var} {sort}) {})", body.render_sexpr())
            }
        }
    }
}

impl FTerm {
    fn render_infix(&self, style: FormulaStyle) -> String {
        match self {
            FTerm::Var(x) => x.clone(),
            FTerm::Const(c) => c.clone(),
            FTerm::App { fun, args } => {
                let rendered: Vec<String> =
                    args.iter().map(|a| a.render_infix(style)).collect();
                format!("{fun}({})", rendered.join(", "))
            }
            FTerm::Epsilon { var, sort, body } => {
                let eps = if style == FormulaStyle::Unicode { "ε " } else { "eps " };
                let rendered = match body.as_ref() {
                    Formula::And(..) | Formula::Or(..) | Formula::Implies(..) => {
                        format!("({})", body.render_infix(style, true))
                    }
                    _ => body.render_infix(style, false),
                };
                format!("{eps}{var}:{sort}. {rendered}")
            }
        }
    }

    fn render_sexpr(&self) -> String {
        match self {
            FTerm::Var(x) => x.clone(),
            FTerm::Const(c) => c.clone(),
            FTerm::App { fun, args } => {
                let mut parts = vec![fun.clone()];
                parts.extend(args.iter().map(|a| a.render_sexpr()));
                format!("({})", parts.join(" "))
            }
            FTerm::Epsilon { var, sort, body } => {
                format!("(eps ({var} {sort}) {})", body.render_sexpr())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(FormulaStyle::Ascii))
    }
}

// ---------------------------------------------------------------------------
// S-expression reader

/// Parses the output of [`FormulaStyle::Sexpr`] back into a formula.
pub fn parse_formula_sexpr(src: &str) -> Result<Formula, ParseError> {
    let tokens = lex_sexpr(src)?;
    let mut pos = 0;
    let sexpr = read_sexpr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(ParseError::new(1, "trailing input after formula"));
    }
    formula_of_sexpr(&sexpr)
}

#[derive(Debug, Clone, PartialEq)]
enum Sexpr {
    Sym(String),
    List(Vec<Sexpr>),
}

fn lex_sexpr(src: &str) -> Result<Vec<String>, ParseError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in src.chars() {
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
    Ok(out)
}

fn read_sexpr(tokens: &[String], pos: &mut usize) -> Result<Sexpr, ParseError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| ParseError::new(1, "unexpected end of formula"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(|s| s.as_str()) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    Some(_) => items.push(read_sexpr(tokens, pos)?),
                    None => return Err(ParseError::new(1, "missing `)`")),
                }
            }
        }
        ")" => Err(ParseError::new(1, "unexpected `)`")),
        sym => Ok(Sexpr::Sym(sym.to_string())),
    }
}

fn binder_of_sexpr(s: &Sexpr) -> Result<(String, Type), ParseError> {
    match s {
        Sexpr::List(items) => match items.as_slice() {
            [Sexpr::Sym(var), Sexpr::Sym(sort)] => {
                let sort =
                    if sort == "t" { Type::Truth } else { Type::base(sort.as_str()) };
                Ok((var.clone(), sort))
            }
            _ => Err(ParseError::new(1, "binder must be `(var sort)`")),
        },
        Sexpr::Sym(_) => Err(ParseError::new(1, "binder must be `(var sort)`")),
    }
}

fn formula_of_sexpr(s: &Sexpr) -> Result<Formula, ParseError> {
    let items = match s {
        Sexpr::List(items) if !items.is_empty() => items,
        Sexpr::List(_) => return Err(ParseError::new(1, "empty list is not a formula")),
        Sexpr::Sym(sym) => {
            return Err(ParseError::new(1, format!("bare symbol `{sym}` is not a formula")))
        }
    };
    let head = match &items[0] {
        Sexpr::Sym(h) => h.as_str(),
        Sexpr::List(_) => return Err(ParseError::new(1, "formula head must be a symbol")),
    };
    match head {
        "and" | "or" | "implies" if items.len() == 3 => {
            let l = formula_of_sexpr(&items[1])?;
            let r = formula_of_sexpr(&items[2])?;
            Ok(match head {
                "and" => Formula::and(l, r),
                "or" => Formula::or(l, r),
                _ => Formula::implies(l, r),
            })
        }
        "not" if items.len() == 2 => Ok(Formula::not(formula_of_sexpr(&items[1])?)),
        "forall" | "exists" if items.len() == 3 => {
            let (var, sort) = binder_of_sexpr(&items[1])?;
            let kind = if head == "forall" { QuantKind::Forall } else { QuantKind::Exists };
            Ok(Formula::quant(kind, var, sort, formula_of_sexpr(&items[2])?))
        }
        _ => {
            let args = items[1..]
                .iter()
                .map(fterm_of_sexpr)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Formula::atom(head, args))
        }
    }
}

fn fterm_of_sexpr(s: &Sexpr) -> Result<FTerm, ParseError> {
    match s {
        // Variables and constants are not distinguishable in the surface
        // syntax; the reader uses case as erasure's conventions do not
        // survive round-tripping otherwise: lowercase single letters are
        // variables, everything else a constant.
        Sexpr::Sym(sym) => {
            if sym.chars().all(|c| c.is_lowercase() || c.is_ascii_digit())
                && sym.chars().next().is_some_and(|c| c.is_lowercase())
            {
                Ok(FTerm::Var(sym.clone()))
            } else {
                Ok(FTerm::Const(sym.clone()))
            }
        }
        Sexpr::List(items) if !items.is_empty() => {
            let head = match &items[0] {
                Sexpr::Sym(h) => h.as_str(),
                Sexpr::List(_) => {
                    return Err(ParseError::new(1, "term head must be a symbol"))
                }
            };
            if head == "eps" && items.len() == 3 {
                let (var, sort) = binder_of_sexpr(&items[1])?;
                let body = formula_of_sexpr(&items[2])?;
                Ok(FTerm::Epsilon { var, sort, body: Box::new(body) })
            } else {
                let args = items[1..]
                    .iter()
                    .map(fterm_of_sexpr)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(FTerm::App { fun: head.to_string(), args })
            }
        }
        Sexpr::List(_) => Err(ParseError::new(1, "empty list is not a term")),
    }
}

// ---------------------------------------------------------------------------
// Embedding back into terms

/// Builds the canonical lambda term a formula denotes, using `signature` for
/// predicate and constant types.  `erase(embed(f)) == f` up to the
/// variable/constant convention of the reader.
pub fn embed(formula: &Formula, signature: &BTreeMap<String, Type>) -> Term {
    embed_formula(formula, signature, &mut BTreeMap::new())
}

fn embed_formula(
    formula: &Formula,
    sig: &BTreeMap<String, Type>,
    env: &mut BTreeMap<String, Type>,
) -> Term {
    let connective = |name: &str| Term::cnst(name, standard_constants()[name].clone());
    match formula {
        Formula::Atom { pred, args } => {
            let embedded: Vec<Term> =
                args.iter().map(|a| embed_fterm(a, sig, env)).collect();
            let pred_ty = sig.get(pred).cloned().unwrap_or_else(|| {
                // Reconstruct a plausible signature from the argument types.
                let doms: Vec<Type> = embedded
                    .iter()
                    .map(|t| annotated_type(t).unwrap_or(Type::entity()))
                    .collect();
                Type::arrows(doms, Type::Truth)
            });
            Term::apps(Term::cnst(pred, pred_ty), embedded)
        }
        Formula::Not(f) => Term::app(connective("not"), embed_formula(f, sig, env)),
        Formula::And(l, r) => Term::apps(
            connective("and"),
            vec![embed_formula(l, sig, env), embed_formula(r, sig, env)],
        ),
        Formula::Or(l, r) => Term::apps(
            connective("or"),
            vec![embed_formula(l, sig, env), embed_formula(r, sig, env)],
        ),
        Formula::Implies(l, r) => Term::apps(
            connective("implies"),
            vec![embed_formula(l, sig, env), embed_formula(r, sig, env)],
        ),
        Formula::Quant { kind, var, sort, body } => {
            let name = match kind {
                QuantKind::Forall => "forall",
                QuantKind::Exists => "exists",
            };
            let shadowed = env.insert(var.clone(), sort.clone());
            let inner = embed_formula(body, sig, env);
            match shadowed {
                Some(old) => env.insert(var.clone(), old),
                None => env.remove(var),
            };
            Term::app(
                Term::tyapp(connective(name), sort.clone()),
                Term::abs(var, sort.clone(), inner),
            )
        }
    }
}

fn embed_fterm(term: &FTerm, sig: &BTreeMap<String, Type>, env: &mut BTreeMap<String, Type>) -> Term {
    match term {
        FTerm::Var(x) => {
            let ty = env.get(x).cloned().unwrap_or_else(Type::entity);
            Term::var(x, ty)
        }
        FTerm::Const(c) => {
            let ty = sig.get(c).cloned().unwrap_or_else(Type::entity);
            Term::cnst(c, ty)
        }
        FTerm::App { fun, args } => {
            let embedded: Vec<Term> = args.iter().map(|a| embed_fterm(a, sig, env)).collect();
            let fun_ty = sig.get(fun).cloned().unwrap_or_else(|| {
                let doms: Vec<Type> = embedded
                    .iter()
                    .map(|t| annotated_type(t).unwrap_or(Type::entity()))
                    .collect();
                Type::arrows(doms, Type::entity())
            });
            Term::apps(Term::cnst(fun, fun_ty), embedded)
        }
        FTerm::Epsilon { var, sort, body } => {
            let shadowed = env.insert(var.clone(), sort.clone());
            let inner = embed_formula(body, sig, env);
            match shadowed {
                Some(old) => env.insert(var.clone(), old),
                None => env.remove(var),
            };
            Term::app(
                Term::tyapp(
                    Term::cnst("epsilon", standard_constants()["epsilon"].clone()),
                    sort.clone(),
                ),
                Term::abs(var, sort.clone(), inner),
            )
        }
    }
}
