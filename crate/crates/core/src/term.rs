//! Core syntax: many-sorted System-F types and Church-style terms.
//!
//! Types are built from declared base sorts, the truth type `t`, type
//! variables, arrows and `Pi` quantification.  Terms carry their binder
//! annotations (and variable/constant annotations) inline, so a closed term
//! determines its type without an ambient context.

use std::collections::BTreeSet;
use std::fmt;

/// A type of the calculus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    /// A declared base sort such as `e` or `City`.
    Base(String),
    /// The truth-value type `t`.
    Truth,
    /// A type variable bound by some enclosing `Pi` or `Lam`.
    Var(String),
    /// Function type, right-associative.
    Arrow(Box<Type>, Box<Type>),
    /// Second-order quantification `Pi a. T`.
    Forall(String, Box<Type>),
}

impl Type {
    pub fn base(name: impl Into<String>) -> Type {
        Type::Base(name.into())
    }

    pub fn var(name: impl Into<String>) -> Type {
        Type::Var(name.into())
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Box::new(dom), Box::new(cod))
    }

    pub fn forall(var: impl Into<String>, body: Type) -> Type {
        Type::Forall(var.into(), Box::new(body))
    }

    /// `e`, the universal sort of entities.
    pub fn entity() -> Type {
        Type::Base("e".to_string())
    }

    /// Arrow chain `a1 -> a2 -> ... -> cod`, associated to the right.
    pub fn arrows(doms: Vec<Type>, cod: Type) -> Type {
        doms.into_iter()
            .rev()
            .fold(cod, |acc, d| Type::arrow(d, acc))
    }

    /// Free type variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Type::Base(_) | Type::Truth => {}
            Type::Var(v) => {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
            Type::Arrow(d, c) => {
                d.collect_free(bound, out);
                c.collect_free(bound, out);
            }
            Type::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Structural equality up to renaming of `Pi`-bound variables.
    pub fn alpha_eq(&self, other: &Type) -> bool {
        alpha_eq_type(self, other, &mut Vec::new())
    }
}

fn alpha_eq_type(a: &Type, b: &Type, pairs: &mut Vec<(String, String)>) -> bool {
    match (a, b) {
        (Type::Base(x), Type::Base(y)) => x == y,
        (Type::Truth, Type::Truth) => true,
        (Type::Var(x), Type::Var(y)) => {
            // Bound variables compare through the binder correspondence;
            // free ones by name.
            for (l, r) in pairs.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Type::Arrow(d1, c1), Type::Arrow(d2, c2)) => {
            alpha_eq_type(d1, d2, pairs) && alpha_eq_type(c1, c2, pairs)
        }
        (Type::Forall(v1, b1), Type::Forall(v2, b2)) => {
            pairs.push((v1.clone(), v2.clone()));
            let ok = alpha_eq_type(b1, b2, pairs);
            pairs.pop();
            ok
        }
        _ => false,
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_type(self, f, false)
    }
}

/// `left_of_arrow` forces parentheses around arrows and `Pi` types that
/// appear in the domain position of an arrow.
fn fmt_type(ty: &Type, f: &mut fmt::Formatter<'_>, left_of_arrow: bool) -> fmt::Result {
    match ty {
        Type::Base(n) => write!(f, "{n}"),
        Type::Truth => write!(f, "t"),
        Type::Var(v) => write!(f, "{v}"),
        Type::Arrow(d, c) => {
            if left_of_arrow {
                write!(f, "(")?;
            }
            fmt_type(d, f, true)?;
            write!(f, " -> ")?;
            fmt_type(c, f, false)?;
            if left_of_arrow {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Forall(v, body) => {
            if left_of_arrow {
                write!(f, "(")?;
            }
            write!(f, "Pi {v}. ")?;
            fmt_type(body, f, false)?;
            if left_of_arrow {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

/// A Church-style term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    /// Bound (or context-supplied) variable with its annotation.
    Var(String, Type),
    /// A declared constant with its annotation.
    Const(String, Type),
    /// Application.
    App(Box<Term>, Box<Term>),
    /// `lam x:T. body`
    Abs(String, Type, Box<Term>),
    /// `Lam a. body`
    TyAbs(String, Box<Term>),
    /// `body {T}`
    TyApp(Box<Term>, Type),
}

impl Term {
    pub fn var(name: impl Into<String>, ty: Type) -> Term {
        Term::Var(name.into(), ty)
    }

    pub fn cnst(name: impl Into<String>, ty: Type) -> Term {
        Term::Const(name.into(), ty)
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    /// Left-associated application spine `fun a1 a2 ...`.
    pub fn apps(fun: Term, args: Vec<Term>) -> Term {
        args.into_iter().fold(fun, Term::app)
    }

    pub fn abs(name: impl Into<String>, ty: Type, body: Term) -> Term {
        Term::Abs(name.into(), ty, Box::new(body))
    }

    pub fn tyabs(var: impl Into<String>, body: Term) -> Term {
        Term::TyAbs(var.into(), Box::new(body))
    }

    pub fn tyapp(fun: Term, ty: Type) -> Term {
        Term::TyApp(Box::new(fun), ty)
    }

    /// Free term variables together with their annotations.
    pub fn free_vars(&self) -> Vec<(String, Type)> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<(String, Type)>) {
        match self {
            Term::Var(x, ty) => {
                if !bound.iter().any(|b| b == x)
                    && !out.iter().any(|(n, t)| n == x && t.alpha_eq(ty))
                {
                    out.push((x.clone(), ty.clone()));
                }
            }
            Term::Const(_, _) => {}
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
            Term::Abs(x, _, body) => {
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Term::TyAbs(_, body) => body.collect_free(bound, out),
            Term::TyApp(f, _) => f.collect_free(bound, out),
        }
    }

    /// Names of free term variables (without annotations).
    pub fn free_var_names(&self) -> BTreeSet<String> {
        self.free_vars().into_iter().map(|(n, _)| n).collect()
    }

    /// Free type variables of a term: those of every annotation, minus the
    /// ones bound by enclosing `Lam` binders.
    pub fn free_type_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_tyvars(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_tyvars(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let add_ty = |ty: &Type, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            for v in ty.free_vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Term::Var(_, ty) | Term::Const(_, ty) => add_ty(ty, bound, out),
            Term::App(f, a) => {
                f.collect_free_tyvars(bound, out);
                a.collect_free_tyvars(bound, out);
            }
            Term::Abs(_, ty, body) => {
                add_ty(ty, bound, out);
                body.collect_free_tyvars(bound, out);
            }
            Term::TyAbs(v, body) => {
                bound.push(v.clone());
                body.collect_free_tyvars(bound, out);
                bound.pop();
            }
            Term::TyApp(f, ty) => {
                f.collect_free_tyvars(bound, out);
                add_ty(ty, bound, out);
            }
        }
    }

    /// Equality up to consistent renaming of term and type binders.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_eq_term(self, other, &mut Vec::new(), &mut Vec::new())
    }
}

fn alpha_eq_term(
    a: &Term,
    b: &Term,
    term_pairs: &mut Vec<(String, String)>,
    type_pairs: &mut Vec<(String, String)>,
) -> bool {
    match (a, b) {
        (Term::Var(x, tx), Term::Var(y, ty)) => {
            let names_match = {
                let mut decided = None;
                for (l, r) in term_pairs.iter().rev() {
                    if l == x || r == y {
                        decided = Some(l == x && r == y);
                        break;
                    }
                }
                decided.unwrap_or(x == y)
            };
            names_match && alpha_eq_type(tx, ty, type_pairs)
        }
        (Term::Const(x, tx), Term::Const(y, ty)) => x == y && alpha_eq_type(tx, ty, type_pairs),
        (Term::App(f1, a1), Term::App(f2, a2)) => {
            alpha_eq_term(f1, f2, term_pairs, type_pairs)
                && alpha_eq_term(a1, a2, term_pairs, type_pairs)
        }
        (Term::Abs(x, tx, b1), Term::Abs(y, ty, b2)) => {
            if !alpha_eq_type(tx, ty, type_pairs) {
                return false;
            }
            term_pairs.push((x.clone(), y.clone()));
            let ok = alpha_eq_term(b1, b2, term_pairs, type_pairs);
            term_pairs.pop();
            ok
        }
        (Term::TyAbs(v1, b1), Term::TyAbs(v2, b2)) => {
            type_pairs.push((v1.clone(), v2.clone()));
            let ok = alpha_eq_term(b1, b2, term_pairs, type_pairs);
            type_pairs.pop();
            ok
        }
        (Term::TyApp(f1, t1), Term::TyApp(f2, t2)) => {
            alpha_eq_term(f1, f2, term_pairs, type_pairs) && alpha_eq_type(t1, t2, type_pairs)
        }
        _ => false,
    }
}

/// Public alpha-equality entry points matching the rest of the API surface.
pub fn alpha_equal(a: &Term, b: &Term) -> bool {
    a.alpha_eq(b)
}

pub fn alpha_equal_types(a: &Type, b: &Type) -> bool {
    a.alpha_eq(b)
}

/// Picks a name based on `base` that avoids everything in `avoid`.
/// The sequence tried is `x, x1, x2, ...` (any existing numeric suffix on
/// `base` is stripped first), so freshened binders print the way the rest of
/// the calculus does.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem: &str = {
        let trimmed = base.trim_end_matches(|c: char| c.is_ascii_digit());
        if trimmed.is_empty() {
            base
        } else {
            trimmed
        }
    };
    if !avoid.contains(stem) {
        return stem.to_string();
    }
    let mut n: u64 = 1;
    loop {
        let cand = format!("{stem}{n}");
        if !avoid.contains(&cand) {
            return cand;
        }
        n += 1;
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_term(self, f, TermPos::Top)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum TermPos {
    Top,
    /// Function position of an application: binders need parentheses.
    Fun,
    /// Argument position: anything non-atomic needs parentheses.
    Arg,
}

fn fmt_term(t: &Term, f: &mut fmt::Formatter<'_>, pos: TermPos) -> fmt::Result {
    match t {
        Term::Var(x, _) => write!(f, "{x}"),
        Term::Const(c, _) => write!(f, "{c}"),
        Term::App(fun, arg) => {
            let parens = pos == TermPos::Arg;
            if parens {
                write!(f, "(")?;
            }
            fmt_term(fun, f, TermPos::Fun)?;
            write!(f, " ")?;
            fmt_term(arg, f, TermPos::Arg)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::TyApp(fun, ty) => {
            let parens = pos == TermPos::Arg && matches!(**fun, Term::Abs(..) | Term::TyAbs(..));
            if parens {
                write!(f, "(")?;
            }
            fmt_term(fun, f, TermPos::Fun)?;
            write!(f, "{{{ty}}}")?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::Abs(x, ty, body) => {
            let parens = pos != TermPos::Top;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "lam {x}:{ty}. ")?;
            fmt_term(body, f, TermPos::Top)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Term::TyAbs(v, body) => {
            let parens = pos != TermPos::Top;
            if parens {
                write!(f, "(")?;
            }
            write!(f, "Lam {v}. ")?;
            fmt_term(body, f, TermPos::Top)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e() -> Type {
        Type::entity()
    }

    #[test]
    fn arrow_display_is_right_associative() {
        let ty = Type::arrows(vec![e(), e()], Type::Truth);
        assert_eq!(ty.to_string(), "e -> e -> t");
        let higher = Type::arrow(Type::arrow(e(), Type::Truth), Type::Truth);
        assert_eq!(higher.to_string(), "(e -> t) -> t");
    }

    #[test]
    fn forall_display() {
        let ty = Type::forall("a", Type::arrow(Type::var("a"), Type::Truth));
        assert_eq!(ty.to_string(), "Pi a. a -> t");
        let in_domain = Type::arrow(ty, Type::Truth);
        assert_eq!(in_domain.to_string(), "(Pi a. a -> t) -> t");
    }

    #[test]
    fn alpha_equal_types_rename_bound() {
        let a = Type::forall("a", Type::arrow(Type::var("a"), Type::Truth));
        let b = Type::forall("b", Type::arrow(Type::var("b"), Type::Truth));
        assert!(a.alpha_eq(&b));
        // Free variables still compare by name.
        assert!(!Type::var("a").alpha_eq(&Type::var("b")));
    }

    #[test]
    fn alpha_equal_distinguishes_annotations() {
        let a = Term::abs("x", e(), Term::var("x", e()));
        let b = Term::abs("y", e(), Term::var("y", e()));
        let c = Term::abs("x", Type::Truth, Term::var("x", Type::Truth));
        assert!(alpha_equal(&a, &b));
        assert!(!alpha_equal(&a, &c));
    }

    #[test]
    fn alpha_equal_respects_binder_correspondence() {
        // lam x. lam y. x  vs  lam y. lam x. y  are alpha-equal;
        // lam x. lam y. x  vs  lam x. lam y. y  are not.
        let fst = Term::abs("x", e(), Term::abs("y", e(), Term::var("x", e())));
        let fst2 = Term::abs("y", e(), Term::abs("x", e(), Term::var("y", e())));
        let snd = Term::abs("x", e(), Term::abs("y", e(), Term::var("y", e())));
        assert!(alpha_equal(&fst, &fst2));
        assert!(!alpha_equal(&fst, &snd));
    }

    #[test]
    fn free_vars_skip_bound_occurrences() {
        let t = Term::abs(
            "x",
            e(),
            Term::app(Term::var("P", Type::arrow(e(), Type::Truth)), Term::var("x", e())),
        );
        let fv = t.free_var_names();
        assert!(fv.contains("P"));
        assert!(!fv.contains("x"));
    }

    #[test]
    fn free_type_vars_respect_tyabs() {
        // Lam a. lam x:a. x  has no free type variables.
        let t = Term::tyabs("a", Term::abs("x", Type::var("a"), Term::var("x", Type::var("a"))));
        assert!(t.free_type_vars().is_empty());
        // lam x:a. x  has `a` free.
        let open = Term::abs("x", Type::var("a"), Term::var("x", Type::var("a")));
        assert!(open.free_type_vars().contains("a"));
    }

    #[test]
    fn fresh_name_sequence() {
        let mut avoid = BTreeSet::new();
        assert_eq!(fresh_name("x", &avoid), "x");
        avoid.insert("x".to_string());
        assert_eq!(fresh_name("x", &avoid), "x1");
        avoid.insert("x1".to_string());
        assert_eq!(fresh_name("x1", &avoid), "x2");
    }

    #[test]
    fn term_display_parenthesisation() {
        let club = Term::cnst("club", Type::arrow(e(), Type::Truth));
        let x = Term::var("x", e());
        let app = Term::app(club.clone(), x.clone());
        assert_eq!(app.to_string(), "club x");
        let nested = Term::app(Term::cnst("not", Type::arrow(Type::Truth, Type::Truth)), app);
        assert_eq!(nested.to_string(), "not (club x)");
        let lam = Term::abs("x", e(), Term::app(club, x));
        assert_eq!(lam.to_string(), "lam x:e. club x");
        let redex = Term::app(lam, Term::cnst("Leeds", e()));
        assert_eq!(redex.to_string(), "(lam x:e. club x) Leeds");
    }

    #[test]
    fn tyapp_display() {
        let exists = Term::cnst(
            "exists",
            Type::forall("a", Type::arrow(Type::arrow(Type::var("a"), Type::Truth), Type::Truth)),
        );
        let spec = Term::tyapp(exists, e());
        assert_eq!(spec.to_string(), "exists{e}");
    }
}
