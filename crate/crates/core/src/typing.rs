//! Type formation and type assignment.
//!
//! The second-order fragment is Church-style, so every term determines its
//! type; the checker validates annotations against the context and enforces
//! the side condition on `Lam`: a type variable may only be abstracted when
//! it does not occur free in the type of a free term variable of the body.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::subst::substitute_type;
use crate::term::{Term, Type};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{var}` is annotated `{annotated}` but bound at `{bound}`")]
    AnnotationMismatch { var: String, bound: Type, annotated: Type },
    #[error("constant `{name}` is declared `{declared}` but annotated `{annotated}`")]
    ConstantMismatch { name: String, declared: Type, annotated: Type },
    #[error("function expects `{expected}` but the argument has type `{actual}`")]
    ApplicationMismatch { expected: Type, actual: Type },
    #[error("cannot abstract `{var}`: it occurs free in the type of free variable `{offender}`")]
    EscapeViolation { var: String, offender: String },
    #[error("`{0}` is not a function type")]
    NotAFunction(Type),
    #[error("`{0}` is not a Pi type")]
    NotAForall(Type),
    #[error("ill-formed type `{ty}`: {reason}")]
    IllFormedType { ty: Type, reason: String },
}

/// Everything a term may legitimately refer to: term-variable bindings,
/// type variables in scope, the constant signature, and the declared sorts.
#[derive(Debug, Clone, Default)]
pub struct TypingContext {
    pub term_vars: BTreeMap<String, Type>,
    pub type_vars: BTreeSet<String>,
    pub constants: BTreeMap<String, Type>,
    pub sorts: BTreeSet<String>,
}

impl TypingContext {
    /// An empty context that still knows about the universal sort `e`.
    pub fn new() -> TypingContext {
        let mut ctx = TypingContext::default();
        ctx.sorts.insert("e".to_string());
        ctx
    }

    pub fn with_sorts(sorts: impl IntoIterator<Item = String>) -> TypingContext {
        let mut ctx = TypingContext::new();
        ctx.sorts.extend(sorts);
        ctx
    }

    pub fn declare_constant(&mut self, name: impl Into<String>, ty: Type) {
        self.constants.insert(name.into(), ty);
    }

    fn bind_term(&self, name: &str, ty: &Type) -> TypingContext {
        let mut next = self.clone();
        next.term_vars.insert(name.to_string(), ty.clone());
        next
    }

    fn bind_type(&self, name: &str) -> TypingContext {
        let mut next = self.clone();
        next.type_vars.insert(name.to_string());
        next
    }
}

/// Is `ty` a type in this context?  Sorts must be declared, type variables
/// must be in scope (or bound by an enclosing `Pi`).
pub fn well_formed_type(ty: &Type, ctx: &TypingContext) -> bool {
    check_type(ty, ctx).is_ok()
}

/// Like [`well_formed_type`] but reports the offending subexpression.
pub fn check_type(ty: &Type, ctx: &TypingContext) -> Result<(), TypeError> {
    match ty {
        Type::Truth => Ok(()),
        Type::Base(name) => {
            if ctx.sorts.contains(name) {
                Ok(())
            } else {
                Err(TypeError::IllFormedType {
                    ty: ty.clone(),
                    reason: format!("sort `{name}` is not declared"),
                })
            }
        }
        Type::Var(v) => {
            if ctx.type_vars.contains(v) {
                Ok(())
            } else {
                Err(TypeError::IllFormedType {
                    ty: ty.clone(),
                    reason: format!("type variable `{v}` is not in scope"),
                })
            }
        }
        Type::Arrow(d, c) => {
            check_type(d, ctx)?;
            check_type(c, ctx)
        }
        Type::Forall(v, body) => check_type(body, &ctx.bind_type(v)),
    }
}

/// Assigns a type to `term` under `ctx`.
pub fn type_of(term: &Term, ctx: &TypingContext) -> Result<Type, TypeError> {
    match term {
        Term::Var(x, annotated) => match ctx.term_vars.get(x) {
            Some(bound) => {
                if bound.alpha_eq(annotated) {
                    Ok(annotated.clone())
                } else {
                    Err(TypeError::AnnotationMismatch {
                        var: x.clone(),
                        bound: bound.clone(),
                        annotated: annotated.clone(),
                    })
                }
            }
            None => Err(TypeError::UnboundVariable(x.clone())),
        },
        Term::Const(name, annotated) => {
            // Constants synthesised during analysis (coercions, sort
            // predicates) may not be in the signature; the annotation is
            // authoritative then, but a declared constant must agree.
            if let Some(declared) = ctx.constants.get(name) {
                if !declared.alpha_eq(annotated) {
                    return Err(TypeError::ConstantMismatch {
                        name: name.clone(),
                        declared: declared.clone(),
                        annotated: annotated.clone(),
                    });
                }
            }
            check_type(annotated, ctx)?;
            Ok(annotated.clone())
        }
        Term::App(fun, arg) => {
            let fun_ty = type_of(fun, ctx)?;
            let arg_ty = type_of(arg, ctx)?;
            match fun_ty {
                Type::Arrow(dom, cod) => {
                    if dom.alpha_eq(&arg_ty) {
                        Ok(*cod)
                    } else {
                        Err(TypeError::ApplicationMismatch { expected: *dom, actual: arg_ty })
                    }
                }
                other => Err(TypeError::NotAFunction(other)),
            }
        }
        Term::Abs(x, ty, body) => {
            check_type(ty, ctx)?;
            let body_ty = type_of(body, &ctx.bind_term(x, ty))?;
            Ok(Type::arrow(ty.clone(), body_ty))
        }
        Term::TyAbs(var, body) => {
            // Escape restriction: `var` must not occur free in the type of a
            // free term variable of the body.
            for (name, ty) in body.free_vars() {
                if ty.free_vars().contains(var) {
                    return Err(TypeError::EscapeViolation {
                        var: var.clone(),
                        offender: name,
                    });
                }
            }
            let body_ty = type_of(body, &ctx.bind_type(var))?;
            Ok(Type::forall(var.clone(), body_ty))
        }
        Term::TyApp(fun, ty) => {
            check_type(ty, ctx)?;
            match type_of(fun, ctx)? {
                Type::Forall(var, body) => Ok(substitute_type(&body, &var, ty)),
                other => Err(TypeError::NotAForall(other)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e() -> Type {
        Type::entity()
    }

    fn et() -> Type {
        Type::arrow(e(), Type::Truth)
    }

    #[test]
    fn well_formedness_examples() {
        let ctx = TypingContext::new();
        // Pi a. (a -> t) -> t  is closed and well-formed.
        let quant = Type::forall("a", Type::arrow(Type::arrow(Type::var("a"), Type::Truth), Type::Truth));
        assert!(well_formed_type(&quant, &ctx));
        // a -> t  with no binder for `a` is not.
        let open = Type::arrow(Type::var("a"), Type::Truth);
        assert!(!well_formed_type(&open, &ctx));
        // e -> t  is fine: `e` is always declared.
        assert!(well_formed_type(&et(), &ctx));
        // An undeclared sort is rejected.
        assert!(!well_formed_type(&Type::base("City"), &ctx));
    }

    #[test]
    fn identity_types_as_expected() {
        let ctx = TypingContext::new();
        let id = Term::abs("x", e(), Term::var("x", e()));
        assert_eq!(type_of(&id, &ctx).unwrap().to_string(), "e -> e");
    }

    #[test]
    fn application_mismatch_reports_both_types() {
        let mut ctx = TypingContext::new();
        ctx.sorts.insert("City".to_string());
        ctx.sorts.insert("Club".to_string());
        let won = Term::cnst("won", Type::arrow(Type::base("Club"), Type::Truth));
        let liverpool = Term::cnst("Liverpool", Type::base("City"));
        let err = type_of(&Term::app(won, liverpool), &ctx).unwrap_err();
        assert_eq!(
            err,
            TypeError::ApplicationMismatch {
                expected: Type::base("Club"),
                actual: Type::base("City"),
            }
        );
    }

    #[test]
    fn unbound_variable_is_reported() {
        let ctx = TypingContext::new();
        let err = type_of(&Term::var("x", e()), &ctx).unwrap_err();
        assert_eq!(err, TypeError::UnboundVariable("x".to_string()));
    }

    #[test]
    fn polymorphic_identity() {
        let ctx = TypingContext::new();
        let id = Term::tyabs("a", Term::abs("x", Type::var("a"), Term::var("x", Type::var("a"))));
        let ty = type_of(&id, &ctx).unwrap();
        assert!(ty.alpha_eq(&Type::forall("b", Type::arrow(Type::var("b"), Type::var("b")))));
    }

    #[test]
    fn escape_restriction_rejects_abstraction_over_free_var_type() {
        // lam x:a. Lam a. x  — the inner `Lam a` would capture the type of
        // the free `x`.
        let ctx = TypingContext::new().bind_type("a");
        let inner = Term::tyabs("a", Term::var("x", Type::var("a")));
        let whole = Term::abs("x", Type::var("a"), inner);
        let err = type_of(&whole, &ctx).unwrap_err();
        assert!(matches!(err, TypeError::EscapeViolation { .. }), "got {err:?}");
    }

    #[test]
    fn tyapp_specialises_quantifiers() {
        let ctx = TypingContext::new();
        let forall_ty =
            Type::forall("a", Type::arrow(Type::arrow(Type::var("a"), Type::Truth), Type::Truth));
        let forall = Term::cnst("forall", forall_ty);
        // forall{e} : (e -> t) -> t
        let at_e = type_of(&Term::tyapp(forall.clone(), e()), &ctx).unwrap();
        assert!(at_e.alpha_eq(&Type::arrow(et(), Type::Truth)));
        // forall{e -> t} : ((e -> t) -> t) -> t
        let at_et = type_of(&Term::tyapp(forall, et()), &ctx).unwrap();
        assert!(at_et.alpha_eq(&Type::arrow(Type::arrow(et(), Type::Truth), Type::Truth)));
    }

    #[test]
    fn tyapp_on_non_forall_is_rejected() {
        let ctx = TypingContext::new();
        let c = Term::cnst("Leeds", e());
        let err = type_of(&Term::tyapp(c, e()), &ctx).unwrap_err();
        assert!(matches!(err, TypeError::NotAForall(_)));
    }

    #[test]
    fn app_on_non_function_is_rejected() {
        let ctx = TypingContext::new();
        let c = Term::cnst("Leeds", e());
        let err = type_of(&Term::app(c.clone(), c), &ctx).unwrap_err();
        assert!(matches!(err, TypeError::NotAFunction(_)));
    }

    #[test]
    fn declared_constant_must_match_annotation() {
        let mut ctx = TypingContext::new();
        ctx.declare_constant("and", Type::arrows(vec![Type::Truth, Type::Truth], Type::Truth));
        let bad = Term::cnst("and", Type::Truth);
        assert!(matches!(type_of(&bad, &ctx), Err(TypeError::ConstantMismatch { .. })));
    }
}
