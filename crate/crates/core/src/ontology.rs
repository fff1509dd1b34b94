//! The sort ontology: base sorts ordered by a hyponymy relation.
//!
//! Sorts form a DAG (multiple supersorts are allowed, cycles are not).  The
//! universal sort `e` can act as a top element — enabled by default — so that
//! every entity sort injects into `e`.  Subsort edges induce accommodation
//! coercions, synthesised on demand.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::lexicon::{Degree, Origin, Transformation};
use crate::term::{Term, Type};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OntologyError {
    #[error("sort `{0}` is already declared")]
    DuplicateSort(String),
    #[error("parent sort `{0}` is not declared")]
    UnknownParent(String),
    #[error("sort `{0}` is not declared")]
    UnknownSort(String),
    #[error("cycle through sort `{0}`")]
    CycleIntroduced(String),
    #[error("`e` is not configured as a universal supersort")]
    NoUniversalSort,
}

/// An immutable sort hierarchy.  All operations that extend it return a new
/// value.
#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    /// Declaration order, excluding the built-in `e` and `t`.
    order: Vec<String>,
    /// Direct parents, in declaration order.
    parents: BTreeMap<String, Vec<String>>,
    /// Proper ancestors under the declared edges (excluding the implicit
    /// `e`-top edges).
    ancestors: BTreeMap<String, BTreeSet<String>>,
    e_top: bool,
}

impl Default for Ontology {
    fn default() -> Self {
        Ontology::new()
    }
}

impl Ontology {
    /// An ontology containing only the built-in `e` and `t`, with `e`
    /// acting as top.
    pub fn new() -> Ontology {
        Ontology::with_e_top(true)
    }

    pub fn with_e_top(e_top: bool) -> Ontology {
        let mut parents = BTreeMap::new();
        parents.insert("e".to_string(), Vec::new());
        parents.insert("t".to_string(), Vec::new());
        let mut ancestors = BTreeMap::new();
        ancestors.insert("e".to_string(), BTreeSet::new());
        ancestors.insert("t".to_string(), BTreeSet::new());
        Ontology { order: Vec::new(), parents, ancestors, e_top }
    }

    /// Builds an ontology from `sort` declarations in file order.  Forward
    /// references between the declarations are allowed, which is also what
    /// makes a cyclic file detectable as a cycle rather than as a missing
    /// parent.
    pub fn from_declarations(
        decls: &[(String, Vec<String>)],
        e_top: bool,
    ) -> Result<Ontology, OntologyError> {
        let mut onto = Ontology::with_e_top(e_top);
        for (name, _) in decls {
            if onto.parents.contains_key(name) {
                return Err(OntologyError::DuplicateSort(name.clone()));
            }
            onto.order.push(name.clone());
            onto.parents.insert(name.clone(), Vec::new());
        }
        for (name, parents) in decls {
            for p in parents {
                if !onto.parents.contains_key(p) {
                    return Err(OntologyError::UnknownParent(p.clone()));
                }
            }
            onto.parents.insert(name.clone(), parents.clone());
        }
        onto.recompute_ancestors()?;
        Ok(onto)
    }

    /// Declares one new sort under already-declared parents.
    pub fn declare_sort(
        &self,
        name: &str,
        parents: &[String],
    ) -> Result<Ontology, OntologyError> {
        if self.parents.contains_key(name) {
            return Err(OntologyError::DuplicateSort(name.to_string()));
        }
        for p in parents {
            if !self.parents.contains_key(p) {
                return Err(OntologyError::UnknownParent(p.clone()));
            }
        }
        let mut next = self.clone();
        next.order.push(name.to_string());
        next.parents.insert(name.to_string(), parents.to_vec());
        next.recompute_ancestors()?;
        Ok(next)
    }

    /// Union of two ontologies; a sort declared on both sides keeps the union
    /// of its parent sets.  Fails when the union relation is cyclic or the
    /// `e`-top settings disagree.
    pub fn merge(&self, other: &Ontology) -> Result<Ontology, OntologyError> {
        let mut next = self.clone();
        next.e_top = self.e_top;
        for name in &other.order {
            let incoming = &other.parents[name];
            match next.parents.get_mut(name) {
                Some(existing) => {
                    for p in incoming {
                        if !existing.contains(p) {
                            existing.push(p.clone());
                        }
                    }
                }
                None => {
                    next.order.push(name.clone());
                    next.parents.insert(name.clone(), incoming.clone());
                }
            }
        }
        // A parent may now be declared only on the other side; both orders
        // were unioned above, so just validate.
        for (name, ps) in &next.parents {
            for p in ps {
                if !next.parents.contains_key(p) {
                    return Err(OntologyError::UnknownParent(format!("{p} (parent of {name})")));
                }
            }
        }
        next.recompute_ancestors()?;
        Ok(next)
    }

    fn recompute_ancestors(&mut self) -> Result<(), OntologyError> {
        // Depth-first closure with an explicit visiting set for cycle
        // detection.
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Visiting,
            Done,
        }
        fn visit(
            sort: &str,
            parents: &BTreeMap<String, Vec<String>>,
            marks: &mut BTreeMap<String, Mark>,
            out: &mut BTreeMap<String, BTreeSet<String>>,
        ) -> Result<(), OntologyError> {
            match marks.get(sort) {
                Some(Mark::Done) => return Ok(()),
                Some(Mark::Visiting) => {
                    return Err(OntologyError::CycleIntroduced(sort.to_string()))
                }
                None => {}
            }
            marks.insert(sort.to_string(), Mark::Visiting);
            let mut acc = BTreeSet::new();
            for p in &parents[sort] {
                visit(p, parents, marks, out)?;
                acc.insert(p.clone());
                acc.extend(out[p].iter().cloned());
            }
            marks.insert(sort.to_string(), Mark::Done);
            out.insert(sort.to_string(), acc);
            Ok(())
        }

        let mut marks = BTreeMap::new();
        let mut out = BTreeMap::new();
        let names: Vec<String> = self.parents.keys().cloned().collect();
        for name in names {
            visit(&name, &self.parents, &mut marks, &mut out)?;
        }
        self.ancestors = out;
        Ok(())
    }

    pub fn e_top(&self) -> bool {
        self.e_top
    }

    pub fn contains(&self, sort: &str) -> bool {
        self.parents.contains_key(sort)
    }

    /// All sort names, built-ins included.
    pub fn sorts(&self) -> BTreeSet<String> {
        self.parents.keys().cloned().collect()
    }

    /// User-declared sorts in declaration order.
    pub fn declared(&self) -> impl Iterator<Item = (&String, &Vec<String>)> {
        self.order.iter().map(move |n| (n, &self.parents[n]))
    }

    /// Reflexive-transitive hyponymy.  `t` never relates to anything else;
    /// with `e`-top enabled, every entity sort lies below `e`.
    pub fn is_subsort(&self, sub: &str, sup: &str) -> bool {
        if !self.contains(sub) || !self.contains(sup) {
            return false;
        }
        if sub == sup {
            return true;
        }
        if sub == "t" || sup == "t" {
            return false;
        }
        if self.e_top && sup == "e" {
            return true;
        }
        self.ancestors[sub].contains(sup)
    }

    /// The accommodation coercion `sub_a_b : a -> b` when `a` is a proper
    /// subsort of `b`, and `None` otherwise.
    pub fn accommodation_coercion(&self, sub: &str, sup: &str) -> Option<Transformation> {
        if sub == sup || !self.is_subsort(sub, sup) {
            return None;
        }
        let name = format!("sub_{sub}_{sup}");
        let ty = Type::arrow(Type::base(sub), Type::base(sup));
        Some(Transformation {
            name: name.clone(),
            term: Term::cnst(name, ty),
            source: Type::base(sub),
            target: Type::base(sup),
            degree: Degree::Flexible,
            origin: Origin::Ontology,
        })
    }

    /// Lifts a sort to a predicate over entities: `hat_<sort> : e -> t`.
    /// Requires `e` to act as universal supersort, since the lifted predicate
    /// carves the sort out of `e`.
    pub fn lift_sort_to_predicate(&self, sort: &str) -> Result<Term, OntologyError> {
        if !self.contains(sort) {
            return Err(OntologyError::UnknownSort(sort.to_string()));
        }
        if !self.e_top {
            return Err(OntologyError::NoUniversalSort);
        }
        Ok(Term::cnst(
            format!("hat_{sort}"),
            Type::arrow(Type::entity(), Type::Truth),
        ))
    }
}
