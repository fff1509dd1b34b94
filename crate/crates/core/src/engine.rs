//! The composition engine.
//!
//! [`compose`] walks a discourse sentence by sentence, elaborating each
//! derivation tree bottom-up.  Where a function's domain matches its
//! argument's sort the application is plain; where it does not, the engine
//! searches the argument's lexical entry and the sort ontology for a coercion
//! that repairs the mismatch, checks it against the argument occurrence's
//! accumulated flexibility constraints, and records it in the reading's
//! trace.  Each surviving combination of coercion choices becomes one
//! [`Reading`]; when nothing survives, the failed combinations are reported
//! with their individual verdicts instead.
//!
//! Occurrences are tracked by anchor id in [`AnchorState`] values threaded
//! across sentences: a rigid coercion rebases the occurrence (later anaphoric
//! references continue from the coerced value, and chain depth grows), while
//! flexible and semi-flexible coercions read a facet off the original value
//! in place.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::discourse::{AnchorId, DerivationNode, Discourse};
use crate::formula::{erase, EraseError, Formula};
use crate::lexicon::{Degree, LexicalEntry, Lexicon, Origin, Transformation};
use crate::ontology::Ontology;
use crate::reduce::{normalize, ReduceError, Strategy, DEFAULT_STEP_BUDGET};
use crate::subst::substitute_type;
use crate::term::{fresh_name, Term, Type};
use crate::typing::{TypeError, TypingContext};

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Longest admissible chain of lexical coercions from an original word
    /// occurrence to the value a predicate consumes.
    pub max_chain_depth: usize,
    /// When false, only the first reading of the deterministic enumeration is
    /// returned per sentence.
    pub enumerate_all_readings: bool,
    /// When true, semi-flexible coercions stop constraining once the
    /// discourse moves to a later sentence.
    pub sentence_resets_semiflexible: bool,
    /// Normalisation budget per reading.
    pub step_budget: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_chain_depth: 2,
            enumerate_all_readings: true,
            sentence_resets_semiflexible: true,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum InferError {
    #[error("no type instantiation matches `{pattern}` against `{actual}`")]
    MatchFailure { pattern: Type, actual: Type },
    #[error("type parameter `{0}` is unconstrained by the supplied arguments")]
    Ambiguous(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EngineError {
    #[error("unknown word `{0}`")]
    UnknownWord(String),
    #[error("anchor {0} does not refer to an earlier occurrence")]
    DanglingRef(AnchorId),
    #[error("conjunction side of type `{0}` is not a one-place predicate over a sort")]
    ConjSide(Type),
    #[error("the shared argument of a conjunction must be a word occurrence")]
    ConjShared,
    #[error("cannot apply a term of type `{0}`")]
    NotAFunction(Type),
    #[error("sentence does not compose to a truth value (got `{0}`)")]
    SentenceNotTruth(Type),
    #[error(transparent)]
    Infer(#[from] InferError),
    #[error(transparent)]
    IllTyped(#[from] TypeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Erase(#[from] EraseError),
    #[error("max_chain_depth must be at least 1")]
    BadConfig,
}

// ---------------------------------------------------------------------------
// Anchor states

/// One applied transformation on an occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedRecord {
    pub name: String,
    pub sentence: usize,
    pub degree: Degree,
    pub origin: Origin,
}

/// Discourse-level bookkeeping for one word occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorState {
    pub anchor: AnchorId,
    pub word: String,
    /// The value later predicates see; rigid coercions rebase it.
    pub current_term: Term,
    pub current_type: Type,
    /// Number of lexical coercions composed into `current_term`.
    pub depth: usize,
    pub applied: Vec<AppliedRecord>,
}

impl AnchorState {
    fn fresh(anchor: AnchorId, entry: &LexicalEntry) -> AnchorState {
        AnchorState {
            anchor,
            word: entry.word.clone(),
            current_term: entry.main.clone(),
            current_type: entry.main_type.clone(),
            depth: 0,
            applied: Vec::new(),
        }
    }

    /// The state for an anaphoric occurrence picking this one up.  The value
    /// and chain depth carry over; rigid and flexible history belongs to the
    /// old occurrence, while semi-flexible history survives the reference
    /// (and only expires at sentence boundaries, if configured).
    fn for_reference(&self, anchor: AnchorId) -> AnchorState {
        AnchorState {
            anchor,
            word: self.word.clone(),
            current_term: self.current_term.clone(),
            current_type: self.current_type.clone(),
            depth: self.depth,
            applied: self
                .applied
                .iter()
                .filter(|r| r.degree == Degree::SemiFlexible)
                .cloned()
                .collect(),
        }
    }

    fn is_active(record: &AppliedRecord, sentence: usize, cfg: &EngineConfig) -> bool {
        match record.degree {
            Degree::Rigid | Degree::Flexible => true,
            Degree::SemiFlexible => {
                !cfg.sentence_resets_semiflexible || record.sentence == sentence
            }
        }
    }

    /// The occurrence's flexibility label: the strongest degree among applied
    /// transformations that still constrain at `sentence`.
    pub fn label(&self, sentence: usize, cfg: &EngineConfig) -> Option<Degree> {
        self.applied
            .iter()
            .filter(|r| Self::is_active(r, sentence, cfg))
            .map(|r| r.degree)
            .max()
    }
}

/// Applies a transformation to an occurrence: appends the record, and — for
/// rigid transformations — rebases the occurrence onto the coerced value so
/// the rest of the discourse continues from it.
pub fn update_anchor_state(
    state: &AnchorState,
    tr: &Transformation,
    sentence: usize,
    cfg: &EngineConfig,
) -> Result<AnchorState, InfelicityReason> {
    if tr.origin == Origin::Lexical && state.depth + 1 > cfg.max_chain_depth {
        return Err(InfelicityReason::ChainDepthExceeded {
            word: state.word.clone(),
            depth: state.depth + 1,
            max: cfg.max_chain_depth,
        });
    }
    Ok(update_unchecked(state, tr, sentence))
}

fn update_unchecked(state: &AnchorState, tr: &Transformation, sentence: usize) -> AnchorState {
    let mut next = state.clone();
    let already = next
        .applied
        .iter()
        .any(|r| r.name == tr.name && r.sentence == sentence);
    if !already {
        next.applied.push(AppliedRecord {
            name: tr.name.clone(),
            sentence,
            degree: tr.degree,
            origin: tr.origin,
        });
    }
    if tr.degree == Degree::Rigid && tr.origin == Origin::Lexical {
        next.current_term = Term::app(tr.term.clone(), next.current_term);
        next.current_type = tr.target.clone();
        next.depth += 1;
    }
    next
}

// ---------------------------------------------------------------------------
// Verdicts and readings

#[derive(Debug, Clone, PartialEq)]
pub enum InfelicityReason {
    /// Two transformations on the same occurrence whose degrees admit no
    /// joint use.
    PairRejected { left: (String, Degree), right: (String, Degree) },
    /// The entry's declared compatible subsets admit no set containing all
    /// jointly used transformations.
    SubsetRejected { names: BTreeSet<String> },
    /// One more lexical coercion would exceed the chain budget.
    ChainDepthExceeded { word: String, depth: usize, max: usize },
}

impl fmt::Display for InfelicityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfelicityReason::PairRejected { left, right } => write!(
                f,
                "label ∅ for pair ({}:{}, {}:{})",
                left.0, left.1, right.0, right.1
            ),
            InfelicityReason::SubsetRejected { names } => {
                let list: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
                write!(f, "no compatible subset admits {{{}}}", list.join(", "))
            }
            InfelicityReason::ChainDepthExceeded { word, depth, max } => {
                write!(f, "ChainDepthExceeded on {word}: depth {depth} > max {max}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissingTransformation {
    pub word: String,
    pub source: Type,
    pub target: Type,
    pub selected_by: String,
}

impl fmt::Display for MissingTransformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: no transformation {} -> {} (selected by {})",
            self.word, self.source, self.target, self.selected_by
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Felicitous { label: Option<Degree> },
    Infelicitous(InfelicityReason),
    Missing(MissingTransformation),
}

impl Verdict {
    pub fn is_felicitous(&self) -> bool {
        matches!(self, Verdict::Felicitous { .. })
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Verdict::Missing(_))
    }

    pub fn render(&self) -> String {
        match self {
            Verdict::Felicitous { label: None } => "felicitous".to_string(),
            Verdict::Felicitous { label: Some(d) } => format!("felicitous (label {d})"),
            Verdict::Infelicitous(reason) => format!("infelicitous: {reason}"),
            Verdict::Missing(miss) => format!("missing: {miss}"),
        }
    }
}

/// One coercion insertion.  `position` names the application node that
/// received the coercion: `/` is the sentence root, `/0` its function child,
/// `/1/2` and so on; a conjunction contributes `/left` and `/right` slots.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub anchor: AnchorId,
    pub word: String,
    pub name: String,
    pub position: String,
    pub source: Type,
    pub target: Type,
    pub degree: Degree,
    pub origin: Origin,
}

/// One way of understanding one sentence.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    /// 1-based sentence index.
    pub sentence: usize,
    /// The erased predicate-calculus formula; absent only when composition
    /// could not even assemble a term (missing transformation).
    pub formula: Option<Formula>,
    /// The beta-normal logical form.
    pub normal_form: Option<Term>,
    /// The composed term before normalisation (useful for step displays).
    pub assembled: Option<Term>,
    pub trace: Vec<TraceStep>,
    pub verdict: Verdict,
}

impl Reading {
    /// `[f_C]`, `[f_L, f_P]`, `[]` — the coercion names in insertion order.
    pub fn trace_names(&self) -> String {
        let names: Vec<&str> = self.trace.iter().map(|s| s.name.as_str()).collect();
        format!("[{}]", names.join(", "))
    }
}

// ---------------------------------------------------------------------------
// Degree joins

/// Whether two transformations may serve the same occurrence jointly, and
/// under which label.  The same transformation twice is always fine; two
/// different flexible ones join flexibly; a flexible and a semi-flexible one
/// join semi-flexibly; everything else is rejected.
pub fn join_degrees(left: (&str, Degree), right: (&str, Degree)) -> Option<Degree> {
    if left.0 == right.0 {
        return Some(left.1.max(right.1));
    }
    let (lo, hi) = if left.1 <= right.1 { (left.1, right.1) } else { (right.1, left.1) };
    match (lo, hi) {
        (Degree::Flexible, Degree::Flexible) => Some(Degree::Flexible),
        (Degree::Flexible, Degree::SemiFlexible) => Some(Degree::SemiFlexible),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Type-argument inference

fn match_type(
    pattern: &Type,
    actual: &Type,
    binders: &BTreeSet<String>,
    bindings: &mut BTreeMap<String, Type>,
) -> bool {
    match (pattern, actual) {
        (Type::Var(v), _) if binders.contains(v) => match bindings.get(v) {
            Some(bound) => bound.alpha_eq(actual),
            None => {
                bindings.insert(v.clone(), actual.clone());
                true
            }
        },
        (Type::Var(v), Type::Var(w)) => v == w,
        (Type::Base(a), Type::Base(b)) => a == b,
        (Type::Truth, Type::Truth) => true,
        (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => {
            match_type(a1, a2, binders, bindings) && match_type(b1, b2, binders, bindings)
        }
        (Type::Forall(a, b), Type::Forall(c, d)) => {
            let mut avoid = b.free_vars();
            avoid.extend(d.free_vars());
            avoid.extend(binders.iter().cloned());
            let fresh = fresh_name(a, &avoid);
            let pb = substitute_type(b, a, &Type::var(&fresh));
            let ab = substitute_type(d, c, &Type::var(&fresh));
            match_type(&pb, &ab, binders, bindings)
        }
        _ => false,
    }
}

/// Instantiates the outermost type binders of `fun` by matching its domains
/// against the expected argument types, left to right.  Returns the
/// type-applied term together with its instantiated type.
pub fn infer_type_arguments(
    fun: &Term,
    fun_ty: &Type,
    expected: &[Type],
) -> Result<(Term, Type), InferError> {
    let mut binder_order = Vec::new();
    let mut body = fun_ty.clone();
    while let Type::Forall(a, b) = body {
        binder_order.push(a);
        body = *b;
    }
    if binder_order.is_empty() {
        return Ok((fun.clone(), fun_ty.clone()));
    }
    let binders: BTreeSet<String> = binder_order.iter().cloned().collect();
    let mut bindings = BTreeMap::new();
    let mut walk = body.clone();
    for exp in expected {
        let Type::Arrow(dom, cod) = walk else { break };
        if !match_type(&dom, exp, &binders, &mut bindings) {
            return Err(InferError::MatchFailure {
                pattern: (*dom).clone(),
                actual: exp.clone(),
            });
        }
        walk = *cod;
    }
    let mut term = fun.clone();
    let mut ty = body;
    for binder in &binder_order {
        let assignment = bindings
            .get(binder)
            .ok_or_else(|| InferError::Ambiguous(binder.clone()))?;
        term = Term::tyapp(term, assignment.clone());
        ty = substitute_type(&ty, binder, assignment);
    }
    Ok((term, ty))
}

// ---------------------------------------------------------------------------
// The polymorphic conjunction operator

/// The conjunction of two predicates over different facets of one shared
/// argument: each side receives its own view of the argument.
///
/// ```text
/// Lam alpha. Lam beta. lam P:alpha -> t. lam Q:beta -> t.
///   Lam xi. lam x:xi. lam f:xi -> alpha. lam g:xi -> beta.
///     and (P (f x)) (Q (g x))
/// ```
pub fn land_operator() -> Term {
    let alpha = Type::var("alpha");
    let beta = Type::var("beta");
    let xi = Type::var("xi");
    let p_ty = Type::arrow(alpha.clone(), Type::Truth);
    let q_ty = Type::arrow(beta.clone(), Type::Truth);
    let f_ty = Type::arrow(xi.clone(), alpha.clone());
    let g_ty = Type::arrow(xi.clone(), beta.clone());
    let and_ty = Type::arrow(Type::Truth, Type::arrow(Type::Truth, Type::Truth));
    let body = Term::apps(
        Term::cnst("and", and_ty),
        vec![
            Term::app(
                Term::var("P", p_ty.clone()),
                Term::app(Term::var("f", f_ty.clone()), Term::var("x", xi.clone())),
            ),
            Term::app(
                Term::var("Q", q_ty.clone()),
                Term::app(Term::var("g", g_ty.clone()), Term::var("x", xi.clone())),
            ),
        ],
    );
    Term::tyabs(
        "alpha",
        Term::tyabs(
            "beta",
            Term::abs(
                "P",
                p_ty,
                Term::abs(
                    "Q",
                    q_ty,
                    Term::tyabs(
                        "xi",
                        Term::abs(
                            "x",
                            xi,
                            Term::abs("f", f_ty, Term::abs("g", g_ty, body)),
                        ),
                    ),
                ),
            ),
        ),
    )
}

// ---------------------------------------------------------------------------
// Candidate search

/// Every coercion that could in principle mediate between an argument of
/// type `arg_ty` and a function domain `domain`: the argument entry's
/// declared transformations (the identity never repairs a mismatch and is
/// excluded) plus the ontology's accommodation along subsort edges.
pub fn candidate_coercions(
    entry: Option<&LexicalEntry>,
    ontology: &Ontology,
    arg_ty: &Type,
    domain: &Type,
) -> Vec<Transformation> {
    let mut out = Vec::new();
    if let Some(entry) = entry {
        for tr in &entry.transformations {
            if tr.is_identity() {
                continue;
            }
            if tr.source.alpha_eq(arg_ty) && tr.target.alpha_eq(domain) {
                out.push(tr.clone());
            }
        }
    }
    if let (Type::Base(sub), Type::Base(sup)) = (arg_ty, domain) {
        if let Some(tr) = ontology.accommodation_coercion(sub, sup) {
            out.push(tr);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Elaboration

type States = BTreeMap<AnchorId, AnchorState>;

#[derive(Debug, Clone)]
struct Branch {
    term: Term,
    ty: Type,
    anchor: Option<AnchorId>,
    states: States,
    trace: Vec<TraceStep>,
    violation: Option<InfelicityReason>,
    label: Option<Degree>,
}

#[derive(Debug, Default)]
struct Outcome {
    branches: Vec<Branch>,
    misses: Vec<MissingTransformation>,
}

fn path_str(segments: &[String]) -> String {
    format!("/{}", segments.join("/"))
}

fn head_word(node: &DerivationNode) -> String {
    match node {
        DerivationNode::Leaf { word, .. } => word.clone(),
        DerivationNode::Apply { fun, .. } => head_word(fun),
        DerivationNode::Conj { left, .. } => head_word(left),
        DerivationNode::Ref { antecedent, .. } => format!("(ref {antecedent})"),
    }
}

/// Splits one arrow off an already-instantiated function type.
fn apply_type(fun_ty: &Type) -> Result<(Type, Type), EngineError> {
    match fun_ty {
        Type::Arrow(d, c) => Ok(((**d).clone(), (**c).clone())),
        other => Err(EngineError::NotAFunction(other.clone())),
    }
}

/// Tries to use `fun` directly on an argument of type `arg_ty`: instantiates
/// outer type binders when present, then requires the domain to match.
/// Returns the (possibly type-applied) function and the result type.
fn try_apply(fun: &Term, fun_ty: &Type, arg_ty: &Type) -> Result<Option<(Term, Type)>, EngineError> {
    match fun_ty {
        Type::Arrow(d, c) => {
            if d.alpha_eq(arg_ty) {
                Ok(Some((fun.clone(), (**c).clone())))
            } else {
                Ok(None)
            }
        }
        Type::Forall(..) => match infer_type_arguments(fun, fun_ty, std::slice::from_ref(arg_ty)) {
            Ok((inst, inst_ty)) => {
                let (_, cod) = apply_type(&inst_ty)?;
                Ok(Some((inst, cod)))
            }
            Err(InferError::MatchFailure { .. }) => Ok(None),
            Err(ambiguous) => Err(ambiguous.into()),
        },
        _ => Ok(None),
    }
}

/// The domain a missing coercion would have to reach.
fn domain_hint(fun_ty: &Type) -> Type {
    let mut body = fun_ty.clone();
    while let Type::Forall(_, b) = body {
        body = *b;
    }
    match body {
        Type::Arrow(d, _) => *d,
        other => other,
    }
}

struct Sentence<'a> {
    index: usize,
    lex: &'a Lexicon,
    cfg: &'a EngineConfig,
}

impl<'a> Sentence<'a> {
    /// Checks a candidate against the occurrence's constraint history.
    fn check_candidate(
        &self,
        state: &AnchorState,
        entry: Option<&LexicalEntry>,
        cand: &Transformation,
    ) -> Option<InfelicityReason> {
        if cand.origin == Origin::Lexical && state.depth + 1 > self.cfg.max_chain_depth {
            return Some(InfelicityReason::ChainDepthExceeded {
                word: state.word.clone(),
                depth: state.depth + 1,
                max: self.cfg.max_chain_depth,
            });
        }
        let subsets = entry.and_then(|e| e.compatible_subsets.as_ref());
        if let Some(sets) = subsets {
            if cand.origin != Origin::Ontology {
                let mut joint: BTreeSet<String> = state
                    .applied
                    .iter()
                    .filter(|r| r.sentence == self.index && r.origin != Origin::Ontology)
                    .map(|r| r.name.clone())
                    .collect();
                joint.insert(cand.name.clone());
                if !sets.iter().any(|set| joint.is_subset(set)) {
                    return Some(InfelicityReason::SubsetRejected { names: joint });
                }
            }
        }
        for record in &state.applied {
            if !AnchorState::is_active(record, self.index, self.cfg) {
                continue;
            }
            // Same-sentence lexical pairs are governed by the declared
            // subsets when present; the degree table covers the rest.
            let subset_covered = subsets.is_some()
                && record.sentence == self.index
                && record.origin != Origin::Ontology
                && cand.origin != Origin::Ontology;
            if subset_covered {
                continue;
            }
            if join_degrees((&record.name, record.degree), (&cand.name, cand.degree)).is_none() {
                return Some(InfelicityReason::PairRejected {
                    left: (record.name.clone(), record.degree),
                    right: (cand.name.clone(), cand.degree),
                });
            }
        }
        None
    }

    fn elaborate(&self, node: &DerivationNode, path: &[String], states: &States) -> Result<Outcome, EngineError> {
        match node {
            DerivationNode::Leaf { word, anchor } => {
                let entry = self
                    .lex
                    .lookup(word)
                    .map_err(|_| EngineError::UnknownWord(word.clone()))?;
                let state = AnchorState::fresh(*anchor, entry);
                let mut states = states.clone();
                let branch = Branch {
                    term: state.current_term.clone(),
                    ty: state.current_type.clone(),
                    anchor: Some(*anchor),
                    states: {
                        states.insert(*anchor, state);
                        states
                    },
                    trace: Vec::new(),
                    violation: None,
                    label: None,
                };
                Ok(Outcome { branches: vec![branch], misses: Vec::new() })
            }
            DerivationNode::Ref { anchor, antecedent } => {
                let ante = states
                    .get(antecedent)
                    .ok_or(EngineError::DanglingRef(*antecedent))?;
                let state = ante.for_reference(*anchor);
                let mut states = states.clone();
                let branch = Branch {
                    term: state.current_term.clone(),
                    ty: state.current_type.clone(),
                    anchor: Some(*anchor),
                    states: {
                        states.insert(*anchor, state);
                        states
                    },
                    trace: Vec::new(),
                    violation: None,
                    label: None,
                };
                Ok(Outcome { branches: vec![branch], misses: Vec::new() })
            }
            DerivationNode::Apply { fun, arg } => {
                let mut out = Outcome::default();
                let fun_path = child_path(path, "0");
                let arg_path = child_path(path, "1");
                let fun_out = self.elaborate(fun, &fun_path, states)?;
                out.misses.extend(fun_out.misses);
                for fb in fun_out.branches {
                    let arg_out = self.elaborate(arg, &arg_path, &fb.states)?;
                    out.misses.extend(arg_out.misses);
                    for ab in arg_out.branches {
                        self.apply_branches(&fb, ab, fun, path, &mut out)?;
                    }
                }
                Ok(out)
            }
            DerivationNode::Conj { left, right, shared } => {
                let mut out = Outcome::default();
                let left_path = child_path(path, "0");
                let right_path = child_path(path, "1");
                let shared_path = child_path(path, "2");
                let left_out = self.elaborate(left, &left_path, states)?;
                out.misses.extend(left_out.misses);
                for lb in left_out.branches {
                    let right_out = self.elaborate(right, &right_path, &lb.states)?;
                    out.misses.extend(right_out.misses);
                    for rb in right_out.branches {
                        let shared_out = self.elaborate(shared, &shared_path, &rb.states)?;
                        out.misses.extend(shared_out.misses);
                        for sb in shared_out.branches {
                            self.conjoin_branches(&lb, &rb, sb, left, right, path, &mut out)?;
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    fn apply_branches(
        &self,
        fb: &Branch,
        ab: Branch,
        fun_node: &DerivationNode,
        path: &[String],
        out: &mut Outcome,
    ) -> Result<(), EngineError> {
        let inherited_violation = fb.violation.clone().or_else(|| ab.violation.clone());
        let label = fb.label.max(ab.label);
        let mut trace = fb.trace.clone();
        trace.extend(ab.trace.iter().cloned());

        if let Some((fun_inst, result_ty)) = try_apply(&fb.term, &fb.ty, &ab.ty)? {
            out.branches.push(Branch {
                term: Term::app(fun_inst, ab.term.clone()),
                ty: result_ty,
                anchor: None,
                states: ab.states,
                trace,
                violation: inherited_violation,
                label,
            });
            return Ok(());
        }
        if !matches!(fb.ty, Type::Arrow(..) | Type::Forall(..)) {
            return Err(EngineError::NotAFunction(fb.ty.clone()));
        }

        // Mismatch: search the argument occurrence for a repairing coercion.
        let occurrence = ab.anchor.and_then(|a| ab.states.get(&a)).cloned();
        let entry = occurrence
            .as_ref()
            .and_then(|s| self.lex.lookup(&s.word).ok());
        let candidates: Vec<Transformation> = match &fb.ty {
            Type::Arrow(dom, _) => {
                candidate_coercions(entry, &self.lex.ontology, &ab.ty, dom)
            }
            _ => {
                // Polymorphic function: keep entry coercions whose target the
                // function can actually consume.
                let mut found = Vec::new();
                if let Some(entry) = entry {
                    for tr in &entry.transformations {
                        if !tr.is_identity()
                            && tr.source.alpha_eq(&ab.ty)
                            && try_apply(&fb.term, &fb.ty, &tr.target)?.is_some()
                        {
                            found.push(tr.clone());
                        }
                    }
                }
                found
            }
        };

        if candidates.is_empty() {
            out.misses.push(MissingTransformation {
                word: occurrence
                    .as_ref()
                    .map(|s| s.word.clone())
                    .unwrap_or_else(|| "<expression>".to_string()),
                source: ab.ty.clone(),
                target: domain_hint(&fb.ty),
                selected_by: head_word(fun_node),
            });
            return Ok(());
        }

        let state = occurrence.ok_or(EngineError::ConjShared)?;
        for cand in candidates {
            let violation = self.check_candidate(&state, entry, &cand);
            let new_state = update_unchecked(&state, &cand, self.index);
            let mut states = ab.states.clone();
            states.insert(state.anchor, new_state);
            let coerced = Term::app(cand.term.clone(), ab.term.clone());
            let Some((fun_inst, result_ty)) = try_apply(&fb.term, &fb.ty, &cand.target)? else {
                continue;
            };
            let mut trace = trace.clone();
            trace.push(TraceStep {
                anchor: state.anchor,
                word: state.word.clone(),
                name: cand.name.clone(),
                position: path_str(path),
                source: cand.source.clone(),
                target: cand.target.clone(),
                degree: cand.degree,
                origin: cand.origin,
            });
            out.branches.push(Branch {
                term: Term::app(fun_inst, coerced),
                ty: result_ty,
                anchor: None,
                states,
                trace,
                violation: inherited_violation.clone().or(violation),
                label,
            });
        }
        Ok(())
    }

    /// Candidates for one side of a conjunction: the identity when the
    /// occurrence already has the needed sort, declared coercions, then
    /// accommodation.
    fn side_candidates(
        &self,
        entry: Option<&LexicalEntry>,
        xi: &Type,
        side_sort: &Type,
    ) -> Vec<Transformation> {
        let mut out = Vec::new();
        if xi.alpha_eq(side_sort) {
            out.push(Transformation {
                name: "Id".to_string(),
                term: Term::abs("z", xi.clone(), Term::var("z", xi.clone())),
                source: xi.clone(),
                target: xi.clone(),
                degree: Degree::Flexible,
                origin: Origin::Identity,
            });
        }
        out.extend(candidate_coercions(entry, &self.lex.ontology, xi, side_sort));
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn conjoin_branches(
        &self,
        lb: &Branch,
        rb: &Branch,
        sb: Branch,
        left_node: &DerivationNode,
        right_node: &DerivationNode,
        path: &[String],
        out: &mut Outcome,
    ) -> Result<(), EngineError> {
        let inherited_violation = lb
            .violation
            .clone()
            .or_else(|| rb.violation.clone())
            .or_else(|| sb.violation.clone());
        let inherited_label = lb.label.max(rb.label).max(sb.label);
        let mut base_trace = lb.trace.clone();
        base_trace.extend(rb.trace.iter().cloned());
        base_trace.extend(sb.trace.iter().cloned());

        let side_sort = |ty: &Type| -> Result<Type, EngineError> {
            match ty {
                Type::Arrow(d, c) if matches!(**c, Type::Truth) && matches!(**d, Type::Base(_)) => {
                    Ok((**d).clone())
                }
                other => Err(EngineError::ConjSide(other.clone())),
            }
        };
        let alpha = side_sort(&lb.ty)?;
        let beta = side_sort(&rb.ty)?;
        let anchor = sb.anchor.ok_or(EngineError::ConjShared)?;
        let state = sb.states.get(&anchor).cloned().ok_or(EngineError::ConjShared)?;
        let entry = self.lex.lookup(&state.word).ok();
        let xi = state.current_type.clone();

        let f_cands = self.side_candidates(entry, &xi, &alpha);
        let g_cands = self.side_candidates(entry, &xi, &beta);
        if f_cands.is_empty() {
            out.misses.push(MissingTransformation {
                word: state.word.clone(),
                source: xi.clone(),
                target: alpha.clone(),
                selected_by: head_word(left_node),
            });
        }
        if g_cands.is_empty() {
            out.misses.push(MissingTransformation {
                word: state.word.clone(),
                source: xi.clone(),
                target: beta.clone(),
                selected_by: head_word(right_node),
            });
        }
        if f_cands.is_empty() || g_cands.is_empty() {
            return Ok(());
        }

        for f in &f_cands {
            for g in &g_cands {
                let violation = self
                    .check_pair(&state, entry, f, g)
                    .or_else(|| self.check_candidate(&state, entry, f))
                    .or_else(|| self.check_candidate(&state, entry, g));
                let joined = join_degrees((&f.name, f.degree), (&g.name, g.degree));

                let mut states = sb.states.clone();
                let mid = update_unchecked(&state, f, self.index);
                let updated = update_unchecked(&mid, g, self.index);
                states.insert(anchor, updated);

                let term =
                    self.conjunction_term(&lb.term, &rb.term, &sb.term, &alpha, &beta, &xi, f, g)?;

                let mut trace = base_trace.clone();
                for (tr, slot) in [(f, "left"), (g, "right")] {
                    if tr.origin == Origin::Identity {
                        continue;
                    }
                    trace.push(TraceStep {
                        anchor,
                        word: state.word.clone(),
                        name: tr.name.clone(),
                        position: path_str(&child_path(path, slot)),
                        source: tr.source.clone(),
                        target: tr.target.clone(),
                        degree: tr.degree,
                        origin: tr.origin,
                    });
                }

                out.branches.push(Branch {
                    term,
                    ty: Type::Truth,
                    anchor: None,
                    states,
                    trace,
                    violation: inherited_violation.clone().or(violation),
                    label: inherited_label.max(joined),
                });
            }
        }
        Ok(())
    }

    /// The pairwise compatibility judgement for a conjunction: declared
    /// subsets rule when present, the degree table otherwise.
    fn check_pair(
        &self,
        state: &AnchorState,
        entry: Option<&LexicalEntry>,
        f: &Transformation,
        g: &Transformation,
    ) -> Option<InfelicityReason> {
        let subsets = entry.and_then(|e| e.compatible_subsets.as_ref());
        if let Some(sets) = subsets {
            if f.origin != Origin::Ontology && g.origin != Origin::Ontology {
                let mut joint: BTreeSet<String> = state
                    .applied
                    .iter()
                    .filter(|r| r.sentence == self.index && r.origin != Origin::Ontology)
                    .map(|r| r.name.clone())
                    .collect();
                joint.insert(f.name.clone());
                joint.insert(g.name.clone());
                if !sets.iter().any(|set| joint.is_subset(set)) {
                    return Some(InfelicityReason::SubsetRejected { names: joint });
                }
                return None;
            }
        }
        if join_degrees((&f.name, f.degree), (&g.name, g.degree)).is_none() {
            return Some(InfelicityReason::PairRejected {
                left: (f.name.clone(), f.degree),
                right: (g.name.clone(), g.degree),
            });
        }
        None
    }

    /// Builds the conjunction term.  Distinct side sorts go through the
    /// polymorphic operator; equal sorts use plain `and` directly, which
    /// normalises to the same form.
    #[allow(clippy::too_many_arguments)]
    fn conjunction_term(
        &self,
        left: &Term,
        right: &Term,
        shared: &Term,
        alpha: &Type,
        beta: &Type,
        xi: &Type,
        f: &Transformation,
        g: &Transformation,
    ) -> Result<Term, EngineError> {
        if alpha.alpha_eq(beta) {
            let and_ty = Type::arrow(Type::Truth, Type::arrow(Type::Truth, Type::Truth));
            return Ok(Term::apps(
                Term::cnst("and", and_ty),
                vec![
                    Term::app(left.clone(), Term::app(f.term.clone(), shared.clone())),
                    Term::app(right.clone(), Term::app(g.term.clone(), shared.clone())),
                ],
            ));
        }
        let land = land_operator();
        let land_ty = land_type();
        let (inst, inst_ty) =
            infer_type_arguments(&land, &land_ty, &[lifted(alpha), lifted(beta)])?;
        let (_, after_p) = apply_type(&inst_ty)?;
        let (_, after_q) = apply_type(&after_p)?;
        let applied = Term::apps(inst, vec![left.clone(), right.clone()]);
        let (inst2, _) = infer_type_arguments(&applied, &after_q, std::slice::from_ref(xi))?;
        Ok(Term::apps(
            inst2,
            vec![shared.clone(), f.term.clone(), g.term.clone()],
        ))
    }
}

fn lifted(sort: &Type) -> Type {
    Type::arrow(sort.clone(), Type::Truth)
}

fn land_type() -> Type {
    let pred = |v: &str| Type::arrow(Type::var(v), Type::Truth);
    Type::forall(
        "alpha",
        Type::forall(
            "beta",
            Type::arrows(
                vec![pred("alpha"), pred("beta")],
                Type::forall(
                    "xi",
                    Type::arrows(
                        vec![
                            Type::var("xi"),
                            Type::arrow(Type::var("xi"), Type::var("alpha")),
                            Type::arrow(Type::var("xi"), Type::var("beta")),
                        ],
                        Type::Truth,
                    ),
                ),
            ),
        ),
    )
}

fn child_path(path: &[String], seg: &str) -> Vec<String> {
    let mut out = path.to_vec();
    out.push(seg.to_string());
    out
}

// ---------------------------------------------------------------------------
// Composition

/// Analyses a discourse against a lexicon: one list entry per reading, in
/// sentence order.  Later sentences see the occurrence states left behind by
/// the first felicitous reading of each earlier sentence; a sentence with no
/// felicitous reading leaves the discourse state untouched.
pub fn compose(
    discourse: &Discourse,
    lex: &Lexicon,
    cfg: &EngineConfig,
) -> Result<Vec<Reading>, EngineError> {
    if cfg.max_chain_depth < 1 {
        return Err(EngineError::BadConfig);
    }
    let ctx = lex.typing_context();
    let mut states = States::new();
    let mut out = Vec::new();

    for (idx, node) in discourse.sentences.iter().enumerate() {
        let sentence = Sentence { index: idx + 1, lex, cfg };
        let outcome = sentence.elaborate(node, &[], &states)?;

        let mut readings = Vec::new();
        let clean: Vec<&Branch> =
            outcome.branches.iter().filter(|b| b.violation.is_none()).collect();
        if !clean.is_empty() {
            for b in &clean {
                readings.push(finish_branch(
                    b,
                    idx + 1,
                    Verdict::Felicitous { label: b.label },
                    &ctx,
                    cfg,
                )?);
            }
            states = clean[0].states.clone();
        } else {
            for b in &outcome.branches {
                let reason = b.violation.clone().expect("non-clean branch has a violation");
                readings.push(finish_branch(
                    b,
                    idx + 1,
                    Verdict::Infelicitous(reason),
                    &ctx,
                    cfg,
                )?);
            }
            for miss in outcome.misses {
                readings.push(Reading {
                    sentence: idx + 1,
                    formula: None,
                    normal_form: None,
                    assembled: None,
                    trace: Vec::new(),
                    verdict: Verdict::Missing(miss),
                });
            }
        }

        // Distinct coercion choices occasionally collapse to the same
        // observable reading (or the same failure); report each once.
        let mut seen = BTreeSet::new();
        readings.retain(|r| {
            let key = (
                r.verdict.render(),
                r.formula.as_ref().map(|f| f.to_string()),
                r.trace_names(),
            );
            seen.insert(format!("{key:?}"))
        });
        if !cfg.enumerate_all_readings {
            readings.truncate(1);
        }
        out.extend(readings);
    }
    Ok(out)
}

fn finish_branch(
    branch: &Branch,
    sentence: usize,
    verdict: Verdict,
    ctx: &TypingContext,
    cfg: &EngineConfig,
) -> Result<Reading, EngineError> {
    if branch.ty != Type::Truth {
        return Err(EngineError::SentenceNotTruth(branch.ty.clone()));
    }
    let nf = normalize(&branch.term, ctx, cfg.step_budget)?;
    let formula = erase(&nf)?;
    Ok(Reading {
        sentence,
        formula: Some(formula),
        normal_form: Some(nf),
        assembled: Some(branch.term.clone()),
        trace: branch.trace.clone(),
        verdict,
    })
}

/// The beta-reduction snapshots for a reading, from the assembled term down
/// to its normal form, simplifying arguments before the applications that
/// consume them (the order derivations are conventionally displayed in).
pub fn reading_steps(
    reading: &Reading,
    lex: &Lexicon,
    cfg: &EngineConfig,
) -> Result<Vec<Term>, EngineError> {
    match &reading.assembled {
        Some(term) => Ok(crate::reduce::reduction_sequence(
            term,
            &lex.typing_context(),
            cfg.step_budget,
            Strategy::Innermost,
        )?),
        None => Ok(Vec::new()),
    }
}

// ---------------------------------------------------------------------------
// Diagnosis

/// A machine-readable repair hypothesis for a missing transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct Suggestion {
    pub word: String,
    pub name: String,
    pub source: Type,
    pub target: Type,
    /// A self-contained lexicon fragment ready for overlay merging.
    pub overlay: String,
}

fn sort_names(ty: &Type, out: &mut Vec<String>) {
    match ty {
        Type::Base(name) => {
            if name != "e" && !out.contains(name) {
                out.push(name.clone());
            }
        }
        Type::Arrow(a, b) => {
            sort_names(a, out);
            sort_names(b, out);
        }
        Type::Forall(_, b) => sort_names(b, out),
        _ => {}
    }
}

fn constant_names(term: &Term, out: &mut BTreeMap<String, Type>) {
    match term {
        Term::Const(name, ty) => {
            out.entry(name.clone()).or_insert_with(|| ty.clone());
        }
        Term::App(f, a) => {
            constant_names(f, out);
            constant_names(a, out);
        }
        Term::Abs(_, _, b) | Term::TyAbs(_, b) => constant_names(b, out),
        Term::TyApp(f, _) => constant_names(f, out),
        Term::Var(..) => {}
    }
}

fn sanitize(ty: &Type) -> String {
    ty.to_string()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect::<String>()
        .split('_')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// Builds the overlay fragment hypothesising the missing transformation, so
/// a lexicon author can review and merge it.  Nothing is merged automatically.
pub fn diagnose_missing(miss: &MissingTransformation, lex: &Lexicon) -> Suggestion {
    let name = format!("hyp_{}_{}", sanitize(&miss.source), sanitize(&miss.target));
    let mut sorts = Vec::new();
    sort_names(&miss.source, &mut sorts);
    sort_names(&miss.target, &mut sorts);

    let mut lines = Vec::new();
    let entry = lex.lookup(&miss.word).ok();
    if let Some(entry) = entry {
        sort_names(&entry.main_type, &mut sorts);
    }
    for sort in &sorts {
        lines.push(format!("sort {sort}"));
    }
    match entry {
        Some(entry) => {
            // Constants used by the entry's main term must resolve when the
            // fragment is loaded on its own.
            let mut consts = BTreeMap::new();
            constant_names(&entry.main, &mut consts);
            for (cname, cty) in &consts {
                if crate::formula::standard_constants().contains_key(cname)
                    || (cname == &entry.word && cty.alpha_eq(&entry.main_type))
                {
                    continue;
                }
                lines.push(format!("const {cname} : {cty}"));
            }
            lines.push(format!("word {} : {} = {}", entry.word, entry.main_type, entry.main));
        }
        None => {
            lines.push(format!("word {} : {} = {}", miss.word, miss.source, miss.word));
        }
    }
    lines.push(format!(
        "  opt {} : {} -> {} = {} deg F",
        name,
        arrow_safe(&miss.source),
        miss.target,
        name
    ));
    Suggestion {
        word: miss.word.clone(),
        name,
        source: miss.source.clone(),
        target: miss.target.clone(),
        overlay: format!("{}\n", lines.join("\n")),
    }
}

fn arrow_safe(ty: &Type) -> String {
    match ty {
        Type::Arrow(..) | Type::Forall(..) => format!("({ty})"),
        _ => ty.to_string(),
    }
}

/// A stub entry for a word absent from the lexicon, under a fresh sort.
pub fn suggest_word_stub(word: &str, lex: &Lexicon) -> String {
    let mut first = true;
    let mut sort: String = word
        .chars()
        .map(|c| {
            if first {
                first = false;
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect();
    if sort == word || lex.ontology.contains(&sort) {
        sort.push_str("Sort");
    }
    format!("sort {sort}\nword {word} : {sort} = {word}\n")
}

// ---------------------------------------------------------------------------
// Trace replay

/// Rebuilds each sentence's logical form from nothing but the derivation
/// trees and the recorded traces (no coercion search, no constraint logic),
/// following the same canonical reading choice as [`compose`].  Returns one
/// normal form per sentence, `None` where no felicitous reading exists.
pub fn replay_discourse(
    discourse: &Discourse,
    lex: &Lexicon,
    cfg: &EngineConfig,
    readings: &[Reading],
) -> Result<Vec<Option<Term>>, EngineError> {
    let ctx = lex.typing_context();
    let mut vals: BTreeMap<AnchorId, (Term, Type, String)> = BTreeMap::new();
    let mut out = Vec::new();
    for (idx, node) in discourse.sentences.iter().enumerate() {
        let chosen = readings
            .iter()
            .find(|r| r.sentence == idx + 1 && r.verdict.is_felicitous());
        let Some(reading) = chosen else {
            out.push(None);
            continue;
        };
        let steps: BTreeMap<&str, &TraceStep> =
            reading.trace.iter().map(|s| (s.position.as_str(), s)).collect();
        let replayer = Replayer { lex, steps };
        let (term, _, _) = replayer.walk(node, &[], &mut vals)?;
        out.push(Some(normalize(&term, &ctx, cfg.step_budget)?));
    }
    Ok(out)
}

struct Replayer<'a> {
    lex: &'a Lexicon,
    steps: BTreeMap<&'a str, &'a TraceStep>,
}

impl<'a> Replayer<'a> {
    fn resolve(&self, step: &TraceStep) -> Result<Transformation, EngineError> {
        if step.origin == Origin::Ontology {
            if let (Type::Base(a), Type::Base(b)) = (&step.source, &step.target) {
                if let Some(tr) = self.lex.ontology.accommodation_coercion(a, b) {
                    return Ok(tr);
                }
            }
        }
        let entry = self
            .lex
            .lookup(&step.word)
            .map_err(|_| EngineError::UnknownWord(step.word.clone()))?;
        entry
            .transformation(&step.name)
            .cloned()
            .ok_or_else(|| EngineError::UnknownWord(format!("{}.{}", step.word, step.name)))
    }

    fn walk(
        &self,
        node: &DerivationNode,
        path: &[String],
        vals: &mut BTreeMap<AnchorId, (Term, Type, String)>,
    ) -> Result<(Term, Type, Option<AnchorId>), EngineError> {
        match node {
            DerivationNode::Leaf { word, anchor } => {
                let entry = self
                    .lex
                    .lookup(word)
                    .map_err(|_| EngineError::UnknownWord(word.clone()))?;
                vals.insert(
                    *anchor,
                    (entry.main.clone(), entry.main_type.clone(), word.clone()),
                );
                Ok((entry.main.clone(), entry.main_type.clone(), Some(*anchor)))
            }
            DerivationNode::Ref { anchor, antecedent } => {
                let (term, ty, word) = vals
                    .get(antecedent)
                    .cloned()
                    .ok_or(EngineError::DanglingRef(*antecedent))?;
                vals.insert(*anchor, (term.clone(), ty.clone(), word));
                Ok((term, ty, Some(*anchor)))
            }
            DerivationNode::Apply { fun, arg } => {
                let (f, fty, _) = self.walk(fun, &child_path(path, "0"), vals)?;
                let (a, aty, a_anchor) = self.walk(arg, &child_path(path, "1"), vals)?;
                let key = path_str(path);
                let (arg_term, arg_ty) = match self.steps.get(key.as_str()) {
                    Some(step) => {
                        let tr = self.resolve(step)?;
                        let coerced = Term::app(tr.term.clone(), a);
                        if tr.degree == Degree::Rigid && tr.origin == Origin::Lexical {
                            if let Some(anchor) = a_anchor {
                                if let Some(slot) = vals.get_mut(&anchor) {
                                    slot.0 = coerced.clone();
                                    slot.1 = tr.target.clone();
                                }
                            }
                        }
                        (coerced, tr.target.clone())
                    }
                    None => (a, aty),
                };
                let (fun_inst, result_ty) = try_apply(&f, &fty, &arg_ty)?
                    .ok_or_else(|| EngineError::NotAFunction(fty.clone()))?;
                Ok((Term::app(fun_inst, arg_term), result_ty, None))
            }
            DerivationNode::Conj { left, right, shared } => {
                let (l, lty, _) = self.walk(left, &child_path(path, "0"), vals)?;
                let (r, rty, _) = self.walk(right, &child_path(path, "1"), vals)?;
                let (s, sty, _) = self.walk(shared, &child_path(path, "2"), vals)?;
                let alpha = match &lty {
                    Type::Arrow(d, _) => (**d).clone(),
                    other => return Err(EngineError::ConjSide(other.clone())),
                };
                let beta = match &rty {
                    Type::Arrow(d, _) => (**d).clone(),
                    other => return Err(EngineError::ConjSide(other.clone())),
                };
                let side = |slot: &str| -> Result<Transformation, EngineError> {
                    let key = path_str(&child_path(path, slot));
                    match self.steps.get(key.as_str()) {
                        Some(step) => self.resolve(step),
                        None => Ok(Transformation {
                            name: "Id".to_string(),
                            term: Term::abs("z", sty.clone(), Term::var("z", sty.clone())),
                            source: sty.clone(),
                            target: sty.clone(),
                            degree: Degree::Flexible,
                            origin: Origin::Identity,
                        }),
                    }
                };
                let f = side("left")?;
                let g = side("right")?;
                let sentence = Sentence { index: 0, lex: self.lex, cfg: &EngineConfig::default() };
                let term =
                    sentence.conjunction_term(&l, &r, &s, &alpha, &beta, &sty, &f, &g)?;
                Ok((term, Type::Truth, None))
            }
        }
    }
}
