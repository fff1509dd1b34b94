//! Beta and type-beta reduction.
//!
//! [`reduce_step`] contracts the leftmost-outermost redex, which is the
//! canonical strategy everywhere in the crate; an innermost strategy is also
//! provided so tests can confirm that both reach the same normal form.  The
//! calculus is strongly normalising, but [`normalize`] still enforces a step
//! budget as a defence against ill-formed inputs.

use thiserror::Error;

use crate::subst::{substitute_term, substitute_type_in_term};
use crate::term::Term;
use crate::typing::{type_of, TypeError, TypingContext};

/// Default maximum number of reduction steps taken by [`normalize`].
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReduceError {
    #[error("term is ill-typed: {0}")]
    IllTyped(#[from] TypeError),
    #[error("normalisation did not finish within {budget} steps")]
    BudgetExhausted { budget: u64 },
}

/// Reduction order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Normal order: contract the leftmost-outermost redex first.
    LeftmostOutermost,
    /// Applicative-ish order: contract the leftmost innermost redex first.
    Innermost,
}

/// Contracts one redex under the chosen strategy, or returns `None` when the
/// term is already in normal form.  Does not re-typecheck.
pub fn step(term: &Term, strategy: Strategy) -> Option<Term> {
    match strategy {
        Strategy::LeftmostOutermost => step_outermost(term),
        Strategy::Innermost => step_innermost(term),
    }
}

fn contract(term: &Term) -> Option<Term> {
    match term {
        Term::App(fun, arg) => match &**fun {
            Term::Abs(x, _, body) => Some(substitute_term(body, x, arg)),
            _ => None,
        },
        Term::TyApp(fun, ty) => match &**fun {
            Term::TyAbs(v, body) => Some(substitute_type_in_term(body, v, ty)),
            _ => None,
        },
        _ => None,
    }
}

fn step_outermost(term: &Term) -> Option<Term> {
    if let Some(next) = contract(term) {
        return Some(next);
    }
    match term {
        Term::Var(..) | Term::Const(..) => None,
        Term::App(fun, arg) => step_outermost(fun)
            .map(|f| Term::app(f, (**arg).clone()))
            .or_else(|| step_outermost(arg).map(|a| Term::app((**fun).clone(), a))),
        Term::TyApp(fun, ty) => step_outermost(fun).map(|f| Term::tyapp(f, ty.clone())),
        Term::Abs(x, ty, body) => {
            step_outermost(body).map(|b| Term::abs(x.clone(), ty.clone(), b))
        }
        Term::TyAbs(v, body) => step_outermost(body).map(|b| Term::tyabs(v.clone(), b)),
    }
}

fn step_innermost(term: &Term) -> Option<Term> {
    match term {
        Term::Var(..) | Term::Const(..) => None,
        Term::App(fun, arg) => step_innermost(fun)
            .map(|f| Term::app(f, (**arg).clone()))
            .or_else(|| step_innermost(arg).map(|a| Term::app((**fun).clone(), a)))
            .or_else(|| contract(term)),
        Term::TyApp(fun, ty) => step_innermost(fun)
            .map(|f| Term::tyapp(f, ty.clone()))
            .or_else(|| contract(term)),
        Term::Abs(x, ty, body) => {
            step_innermost(body).map(|b| Term::abs(x.clone(), ty.clone(), b))
        }
        Term::TyAbs(v, body) => step_innermost(body).map(|b| Term::tyabs(v.clone(), b)),
    }
}

/// Contracts the leftmost-outermost redex of a well-typed term.
/// Returns `Ok(None)` when the term is already in normal form.
pub fn reduce_step(term: &Term, ctx: &TypingContext) -> Result<Option<Term>, ReduceError> {
    type_of(term, ctx)?;
    Ok(step_outermost(term))
}

/// Reduces to beta normal form under the leftmost-outermost strategy.
pub fn normalize(term: &Term, ctx: &TypingContext, budget: u64) -> Result<Term, ReduceError> {
    normalize_with(term, ctx, budget, Strategy::LeftmostOutermost)
}

/// Reduces to beta normal form under the chosen strategy.  The input is
/// typechecked once up front; each intermediate step preserves the type.
pub fn normalize_with(
    term: &Term,
    ctx: &TypingContext,
    budget: u64,
    strategy: Strategy,
) -> Result<Term, ReduceError> {
    type_of(term, ctx)?;
    let mut current = term.clone();
    for _ in 0..budget {
        match step(&current, strategy) {
            Some(next) => current = next,
            None => return Ok(current),
        }
    }
    if step(&current, strategy).is_none() {
        Ok(current)
    } else {
        Err(ReduceError::BudgetExhausted { budget })
    }
}

/// The full single-step reduction sequence under the chosen strategy,
/// including the start term and the normal form.  Used for step-by-step
/// traces; the innermost order matches how derivations are usually displayed
/// (arguments simplified before the surrounding application fires).
pub fn reduction_sequence(
    term: &Term,
    ctx: &TypingContext,
    budget: u64,
    strategy: Strategy,
) -> Result<Vec<Term>, ReduceError> {
    type_of(term, ctx)?;
    let mut seq = vec![term.clone()];
    for _ in 0..budget {
        match step(seq.last().expect("nonempty"), strategy) {
            Some(next) => seq.push(next),
            None => return Ok(seq),
        }
    }
    Err(ReduceError::BudgetExhausted { budget })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{alpha_equal, Type};

    fn e() -> Type {
        Type::entity()
    }

    #[test]
    fn beta_step_substitutes() {
        let ctx = TypingContext::new();
        let id = Term::abs("x", e(), Term::var("x", e()));
        let redex = Term::app(id, Term::cnst("Leeds", e()));
        let stepped = reduce_step(&redex, &ctx).unwrap().unwrap();
        assert_eq!(stepped, Term::cnst("Leeds", e()));
        assert!(reduce_step(&stepped, &ctx).unwrap().is_none());
    }

    #[test]
    fn type_beta_step_substitutes() {
        let ctx = TypingContext::new();
        let poly_id =
            Term::tyabs("a", Term::abs("x", Type::var("a"), Term::var("x", Type::var("a"))));
        let redex = Term::app(Term::tyapp(poly_id, e()), Term::cnst("Leeds", e()));
        let once = reduce_step(&redex, &ctx).unwrap().unwrap();
        assert_eq!(once.to_string(), "(lam x:e. x) Leeds");
        let twice = reduce_step(&once, &ctx).unwrap().unwrap();
        assert_eq!(twice, Term::cnst("Leeds", e()));
    }

    #[test]
    fn reduce_step_rejects_ill_typed_input() {
        let ctx = TypingContext::new();
        let bad = Term::app(Term::cnst("Leeds", e()), Term::cnst("Leeds", e()));
        assert!(matches!(reduce_step(&bad, &ctx), Err(ReduceError::IllTyped(_))));
    }

    #[test]
    fn outermost_before_inner() {
        // (lam x:e. Leeds) ((lam y:e. y) Leeds): leftmost-outermost discards
        // the argument redex in one step, innermost contracts it first.
        let ctx = TypingContext::new();
        let leeds = Term::cnst("Leeds", e());
        let outer = Term::abs("x", e(), leeds.clone());
        let inner = Term::app(Term::abs("y", e(), Term::var("y", e())), leeds.clone());
        let t = Term::app(outer, inner.clone());

        let out_step = step(&t, Strategy::LeftmostOutermost).unwrap();
        assert_eq!(out_step, leeds);

        let in_step = step(&t, Strategy::Innermost).unwrap();
        assert!(matches!(in_step, Term::App(..)));

        // Both strategies agree on the normal form.
        let nf_out = normalize_with(&t, &ctx, 100, Strategy::LeftmostOutermost).unwrap();
        let nf_in = normalize_with(&t, &ctx, 100, Strategy::Innermost).unwrap();
        assert!(alpha_equal(&nf_out, &nf_in));
    }

    #[test]
    fn normalize_reduces_under_binders() {
        let ctx = TypingContext::new();
        // lam x:e. (lam y:e. y) x  reduces to  lam x:e. x
        let t = Term::abs(
            "x",
            e(),
            Term::app(Term::abs("y", e(), Term::var("y", e())), Term::var("x", e())),
        );
        let nf = normalize(&t, &ctx, 100).unwrap();
        assert!(alpha_equal(&nf, &Term::abs("x", e(), Term::var("x", e()))));
    }

    #[test]
    fn budget_exhaustion_reports_budget() {
        let ctx = TypingContext::new();
        let id = Term::abs("x", e(), Term::var("x", e()));
        // Five nested redexes with budget 2.
        let mut t = Term::cnst("Leeds", e());
        for _ in 0..5 {
            t = Term::app(id.clone(), t);
        }
        assert_eq!(
            normalize(&t, &ctx, 2),
            Err(ReduceError::BudgetExhausted { budget: 2 })
        );
        assert!(normalize(&t, &ctx, 5).is_ok());
    }

    #[test]
    fn reduction_sequence_records_each_step() {
        let ctx = TypingContext::new();
        let id = Term::abs("x", e(), Term::var("x", e()));
        let t = Term::app(id.clone(), Term::app(id, Term::cnst("Leeds", e())));
        let seq = reduction_sequence(&t, &ctx, 100, Strategy::LeftmostOutermost).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq.last().unwrap(), &Term::cnst("Leeds", e()));
    }
}
