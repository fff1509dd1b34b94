//! Capture-avoiding substitution for types and terms.
//!
//! Binders that would capture a free variable of the replacement are renamed
//! on the fly with [`fresh_name`], so substitution is a pure function with no
//! shared name supply.

use std::collections::BTreeSet;

use crate::term::{fresh_name, Term, Type};

/// `ty[var := replacement]` on types.
pub fn substitute_type(ty: &Type, var: &str, replacement: &Type) -> Type {
    match ty {
        Type::Base(_) | Type::Truth => ty.clone(),
        Type::Var(v) => {
            if v == var {
                replacement.clone()
            } else {
                ty.clone()
            }
        }
        Type::Arrow(d, c) => Type::arrow(
            substitute_type(d, var, replacement),
            substitute_type(c, var, replacement),
        ),
        Type::Forall(v, body) => {
            if v == var {
                // Substitution stops at a shadowing binder.
                ty.clone()
            } else if replacement.free_vars().contains(v) {
                // Rename the binder away from the replacement's free variables.
                let mut avoid: BTreeSet<String> = replacement.free_vars();
                avoid.extend(body.free_vars());
                avoid.insert(var.to_string());
                let fresh = fresh_name(v, &avoid);
                let renamed = substitute_type(body, v, &Type::var(fresh.clone()));
                Type::forall(fresh, substitute_type(&renamed, var, replacement))
            } else {
                Type::forall(v.clone(), substitute_type(body, var, replacement))
            }
        }
    }
}

/// `term[var := replacement]` on type variables occurring in annotations.
pub fn substitute_type_in_term(term: &Term, var: &str, replacement: &Type) -> Term {
    match term {
        Term::Var(x, ty) => Term::Var(x.clone(), substitute_type(ty, var, replacement)),
        Term::Const(c, ty) => Term::Const(c.clone(), substitute_type(ty, var, replacement)),
        Term::App(f, a) => Term::app(
            substitute_type_in_term(f, var, replacement),
            substitute_type_in_term(a, var, replacement),
        ),
        Term::Abs(x, ty, body) => Term::abs(
            x.clone(),
            substitute_type(ty, var, replacement),
            substitute_type_in_term(body, var, replacement),
        ),
        Term::TyAbs(v, body) => {
            if v == var {
                term.clone()
            } else if replacement.free_vars().contains(v) {
                let mut avoid: BTreeSet<String> = replacement.free_vars();
                avoid.extend(body.free_type_vars());
                avoid.insert(var.to_string());
                let fresh = fresh_name(v, &avoid);
                let renamed = substitute_type_in_term(body, v, &Type::var(fresh.clone()));
                Term::tyabs(fresh, substitute_type_in_term(&renamed, var, replacement))
            } else {
                Term::tyabs(v.clone(), substitute_type_in_term(body, var, replacement))
            }
        }
        Term::TyApp(f, ty) => Term::tyapp(
            substitute_type_in_term(f, var, replacement),
            substitute_type(ty, var, replacement),
        ),
    }
}

/// `body[var := replacement]` on term variables.
pub fn substitute_term(body: &Term, var: &str, replacement: &Term) -> Term {
    let replacement_fv: BTreeSet<String> = replacement.free_var_names();
    subst_term(body, var, replacement, &replacement_fv)
}

fn subst_term(body: &Term, var: &str, replacement: &Term, rep_fv: &BTreeSet<String>) -> Term {
    match body {
        Term::Var(x, _) => {
            if x == var {
                replacement.clone()
            } else {
                body.clone()
            }
        }
        Term::Const(_, _) => body.clone(),
        Term::App(f, a) => Term::app(
            subst_term(f, var, replacement, rep_fv),
            subst_term(a, var, replacement, rep_fv),
        ),
        Term::Abs(x, ty, inner) => {
            if x == var || !inner.free_var_names().contains(var) {
                body.clone()
            } else if rep_fv.contains(x) {
                let mut avoid = rep_fv.clone();
                avoid.extend(inner.free_var_names());
                avoid.insert(var.to_string());
                let fresh = fresh_name(x, &avoid);
                let renamed = subst_term(
                    inner,
                    x,
                    &Term::var(fresh.clone(), ty.clone()),
                    &BTreeSet::from([fresh.clone()]),
                );
                Term::abs(fresh, ty.clone(), subst_term(&renamed, var, replacement, rep_fv))
            } else {
                Term::abs(x.clone(), ty.clone(), subst_term(inner, var, replacement, rep_fv))
            }
        }
        // Term substitution cannot capture type variables: the replacement is
        // required to be well-formed in the same scope, so a `Lam` binder here
        // either shadows nothing relevant or was already renamed upstream.
        Term::TyAbs(v, inner) => {
            if !inner.free_var_names().contains(var) {
                return body.clone();
            }
            let rep_ftv = replacement.free_type_vars();
            if rep_ftv.contains(v) {
                let mut avoid = rep_ftv;
                avoid.extend(inner.free_type_vars());
                let fresh = fresh_name(v, &avoid);
                let renamed = substitute_type_in_term(inner, v, &Type::var(fresh.clone()));
                Term::tyabs(fresh, subst_term(&renamed, var, replacement, rep_fv))
            } else {
                Term::tyabs(v.clone(), subst_term(inner, var, replacement, rep_fv))
            }
        }
        Term::TyApp(f, ty) => Term::tyapp(subst_term(f, var, replacement, rep_fv), ty.clone()),
    }
}
