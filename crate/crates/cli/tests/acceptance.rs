//! End-to-end acceptance checks over the shipped corpus, one test per
//! criterion.  Each test prints a single `criterion N: pass` line on success;
//! a failure shows up as the usual failed-test line for that criterion.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;
use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ltyn_core::discourse::parse_discourse;
use ltyn_core::engine::{
    candidate_coercions, compose, join_degrees, land_operator, reading_steps, EngineConfig,
};
use ltyn_core::formula::FormulaStyle;
use ltyn_core::lexicon::{load_lexicon, merge_overlay, Degree, Lexicon};
use ltyn_core::ontology::Ontology;
use ltyn_core::reduce::{normalize_with, step, Strategy};
use ltyn_core::syntax::parse_term;
use ltyn_core::term::{alpha_equal, alpha_equal_types, Term, Type};
use ltyn_core::typing::{type_of, TypingContext};

// ---------------------------------------------------------------------------
// Shared plumbing

fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn corpus(name: &str) -> String {
    let path = corpus_path(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn lex(name: &str) -> Lexicon {
    load_lexicon(&corpus(name)).unwrap()
}

fn disc(name: &str) -> ltyn_core::discourse::Discourse {
    parse_discourse(&corpus(name)).unwrap()
}

fn ascii(reading: &ltyn_core::engine::Reading) -> String {
    reading.formula.as_ref().unwrap().render(FormulaStyle::Ascii)
}

/// Runs the installed binary on corpus files; returns (exit, stdout, stderr).
fn run_cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ltyn"))
        .args(args)
        .env_remove("LTYN_STEP_BUDGET")
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

fn arg(path: &str) -> String {
    corpus_path(path).to_str().unwrap().to_string()
}

/// Collapses every whitespace run to a single space.
fn squash_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------------------
// Criterion 1: the golden quantified derivation, byte-exact, with the
// intermediate reduction displays appearing in order among the step
// snapshots.

#[test]
fn criterion_1_golden_derivation() {
    let started = Instant::now();
    let lex = lex("fig1.lex");
    let cfg = EngineConfig::default();
    let readings = compose(&disc("fig1_some_club.disc"), &lex, &cfg).unwrap();
    assert_eq!(readings.len(), 1);
    let reading = &readings[0];

    let golden = "exists x:e. (club(x) & defeated(x, Leeds))";
    assert_eq!(ascii(reading), golden);
    assert_eq!(squash_ws(&ascii(reading)), squash_ws(golden));

    // The displayed derivation: the assembled application, the state after
    // the subject has combined, and the final normal form.  These three must
    // occur in order among the reduction snapshots.
    let resolver = lex.resolver();
    let displays = [
        "(((lam P:e -> t. lam Q:e -> t. exists{e} (lam x:e. and (P x) (Q x))) \
           (lam x:e. club x)) \
          ((lam y:e. lam x:e. defeated x y) Leeds))",
        "((lam Q:e -> t. exists{e} (lam x:e. and (club x) (Q x))) \
          (lam x:e. defeated x Leeds))",
        "(exists{e} (lam x:e. and (club x) (defeated x Leeds)))",
    ]
    .map(|src| parse_term(src, &resolver).unwrap());

    let steps = reading_steps(reading, &lex, &cfg).unwrap();
    let mut cursor = 0;
    for want in &displays {
        match steps[cursor..].iter().position(|s| alpha_equal(s, want)) {
            Some(at) => cursor += at + 1,
            None => panic!("display missing from the step sequence"),
        }
    }
    assert!(alpha_equal(&displays[0], steps.first().unwrap()), "starts at the assembled term");
    assert!(alpha_equal(&displays[2], steps.last().unwrap()), "ends at the normal form");

    // Same formula through the command line, byte-exact.
    let (code, stdout, _) = run_cli(&[
        "analyze",
        &arg("fig1.lex"),
        &arg("fig1_some_club.disc"),
        "--format",
        "ascii",
        "--trace",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("reading 1: exists x:e. (club(x) & defeated(x, Leeds))\n"));

    assert!(started.elapsed().as_secs() < 1, "golden derivation must finish under a second");
    println!("criterion 1: pass — golden derivation byte-exact with step-for-step displays");
}

// ---------------------------------------------------------------------------
// Criterion 2: a single coercion repairs the application and is the entire
// trace.

#[test]
fn criterion_2_coercion_trace() {
    let readings =
        compose(&disc("won_liverpool.disc"), &lex("demo.lex"), &EngineConfig::default()).unwrap();
    assert_eq!(readings.len(), 1);
    let reading = &readings[0];
    assert!(reading.verdict.is_felicitous());
    assert_eq!(ascii(reading), "won(f_C(Liverpool))");
    assert_eq!(reading.trace_names(), "[f_C]");
    assert_eq!(reading.trace.len(), 1);
    assert_eq!(reading.trace[0].name, "f_C");
    assert_eq!(reading.trace[0].word, "Liverpool");
    println!("criterion 2: pass — won(Liverpool) coerces via exactly [f_C]");
}

// ---------------------------------------------------------------------------
// Criterion 3: the co-predication pair — compatible facets join under label
// F, the flexible/rigid mix is rejected with the offending pair named.

#[test]
fn criterion_3_co_predication_pair() {
    let lex = lex("demo.lex");
    let cfg = EngineConfig::default();

    let good = compose(&disc("city_people.disc"), &lex, &cfg).unwrap();
    assert_eq!(good.len(), 1);
    assert_eq!(ascii(&good[0]), "large(f_L(Liverpool)) & lively(f_P(Liverpool))");
    assert_eq!(good[0].verdict.render(), "felicitous (label F)");

    let bad = compose(&disc("city_club.disc"), &lex, &cfg).unwrap();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].verdict.render(), "infelicitous: label ∅ for pair (f_L:F, f_C:R)");
    println!("criterion 3: pass — co-predication joins at F and rejects (f_L:F, f_C:R)");
}

// ---------------------------------------------------------------------------
// Criterion 4: the polymorphic conjunction operator, applied to the full
// display — two type instantiations, both predicates, the shared-argument
// sort, the argument, and both facet maps — normalizes to the expected
// conjunction α-exactly.

#[test]
fn criterion_4_polymorphic_and_reduction() {
    let lex = lex("demo.lex");
    let ctx = lex.typing_context();
    let konst = |name: &str| Term::cnst(name, lex.constants[name].clone());

    let applied = Term::apps(
        Term::tyapp(
            Term::apps(
                Term::tyapp(Term::tyapp(land_operator(), Type::base("Location")), Type::base("People")),
                vec![konst("large"), konst("lively")],
            ),
            Type::base("City"),
        ),
        vec![konst("Liverpool"), konst("f_L"), konst("f_P")],
    );

    let normal = normalize_with(&applied, &ctx, 10_000, Strategy::LeftmostOutermost).unwrap();
    let expected = parse_term(
        "(and (large (f_L Liverpool)) (lively (f_P Liverpool)))",
        &lex.resolver(),
    )
    .unwrap();
    assert!(alpha_equal(&normal, &expected), "reduct must match α-exactly");
    println!("criterion 4: pass — polymorphic conjunction reduces to the displayed term");
}

// ---------------------------------------------------------------------------
// Criterion 5: semi-flexible facets — blocked in one sentence, fine across a
// sentence boundary, blocked again when boundaries stop resetting.

#[test]
fn criterion_5_semi_flexible_suite() {
    let lex = lex("demo.lex");
    let blocked = "infelicitous: label ∅ for pair (f_a:SF, f_food:SF)";

    let same = compose(&disc("salmon_same.disc"), &lex, &EngineConfig::default()).unwrap();
    assert_eq!(same[0].verdict.render(), blocked);

    let apart = compose(&disc("salmon_anaphora.disc"), &lex, &EngineConfig::default()).unwrap();
    assert!(apart.iter().all(|r| r.verdict.is_felicitous()));
    assert_eq!(ascii(&apart[1]), "delicious(f_food(salmon))");

    let sticky = EngineConfig { sentence_resets_semiflexible: false, ..Default::default() };
    let same = compose(&disc("salmon_same.disc"), &lex, &sticky).unwrap();
    assert_eq!(same[0].verdict.render(), blocked);
    let apart = compose(&disc("salmon_anaphora.disc"), &lex, &sticky).unwrap();
    let second = apart.iter().find(|r| r.sentence == 2).unwrap();
    assert_eq!(second.verdict.render(), blocked);

    println!("criterion 5: pass — semi-flexible pair blocked, licensed across sentences, blocked again without resets");
}

// ---------------------------------------------------------------------------
// Criterion 6: rigid transformation chains respect the depth budget, and the
// budget is configuration, not correctness.

#[test]
fn criterion_6_chain_depth_suite() {
    let lex = lex("demo.lex");
    let d = disc("chain.disc");

    let readings = compose(&d, &lex, &EngineConfig::default()).unwrap();
    let first = |n: usize| readings.iter().find(|r| r.sentence == n).unwrap();
    assert_eq!(ascii(first(1)), "won(f_C(Liverpool))");
    assert_eq!(ascii(first(2)), "hired(f_m(f_C(Liverpool)))");
    assert_eq!(ascii(first(3)), "bankrupt(f_m(f_C(Liverpool)))");
    for n in 1..=3 {
        assert!(first(n).verdict.is_felicitous(), "sentence {n} composes at depth 2");
    }
    assert_eq!(
        first(4).verdict.render(),
        "infelicitous: ChainDepthExceeded on Liverpool: depth 3 > max 2"
    );

    let deeper = EngineConfig { max_chain_depth: 3, ..Default::default() };
    let readings = compose(&d, &lex, &deeper).unwrap();
    let fourth = readings.iter().find(|r| r.sentence == 4).unwrap();
    assert!(fourth.verdict.is_felicitous());
    assert_eq!(ascii(fourth), "resign(f_ag(f_m(f_C(Liverpool))))");

    println!("criterion 6: pass — chain blocked at depth 2 and composing at depth 3");
}

// ---------------------------------------------------------------------------
// Criterion 7: the missing-transformation diagnosis round trip — the
// suggested overlay, merged back in, makes the same corpus compose.

#[test]
fn criterion_7_diagnosis_round_trip() {
    let (code, _, stderr) =
        run_cli(&["analyze", &arg("demo.lex"), &arg("chair_barked.disc")]);
    assert_eq!(code, 3, "missing transformation exits 3");
    assert!(stderr.contains("no transformation Artifact -> Animal"));

    let fragment = stderr
        .split("suggested overlay:\n")
        .nth(1)
        .expect("diagnosis carries an overlay")
        .to_string();
    let merged = merge_overlay(&lex("demo.lex"), &load_lexicon(&fragment).unwrap()).unwrap();

    let readings =
        compose(&disc("chair_barked.disc"), &merged, &EngineConfig::default()).unwrap();
    assert!(readings.iter().any(|r| r.verdict.is_felicitous()));
    let ok = readings.iter().find(|r| r.verdict.is_felicitous()).unwrap();
    assert_eq!(ascii(ok), "barked(hyp_Artifact_Animal(chair))");
    println!("criterion 7: pass — suggested overlay repairs the corpus it diagnosed");
}

// ---------------------------------------------------------------------------
// Criterion 8: the property suites — randomized subject reduction and
// normal-form uniqueness, brute-force coercion-search equivalence,
// join commutativity, and brute-force subsort closure.

/// A seeded generator of closed well-typed terms of bounded depth.
struct TermGen {
    rng: ChaCha8Rng,
    ctx: TypingContext,
    fresh: usize,
}

impl TermGen {
    fn new(seed: u64) -> TermGen {
        let mut ctx = TypingContext::with_sorts(["A".to_string(), "B".to_string()]);
        let e = Type::entity;
        let t = || Type::Truth;
        let a = || Type::base("A");
        let b = || Type::base("B");
        ctx.declare_constant("k_e", e());
        ctx.declare_constant("k_A", a());
        ctx.declare_constant("k_B", b());
        ctx.declare_constant("tt", t());
        ctx.declare_constant("p", Type::arrow(e(), t()));
        ctx.declare_constant("q", Type::arrow(a(), t()));
        ctx.declare_constant("r", Type::arrow(b(), t()));
        ctx.declare_constant("h", Type::arrow(e(), e()));
        ctx.declare_constant("j", Type::arrow(a(), e()));
        ctx.declare_constant("conj", Type::arrow(t(), Type::arrow(t(), t())));
        let quant = Type::forall("a", Type::arrow(Type::arrow(Type::var("a"), t()), t()));
        ctx.declare_constant("exists", quant);
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed), ctx, fresh: 0 }
    }

    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn pool(&mut self) -> Type {
        match self.rng.gen_range(0..7) {
            0 => Type::entity(),
            1 => Type::base("A"),
            2 => Type::base("B"),
            3 => Type::Truth,
            4 => Type::arrow(Type::entity(), Type::Truth),
            5 => Type::arrow(Type::base("A"), Type::Truth),
            _ => Type::arrow(Type::entity(), Type::entity()),
        }
    }

    /// A redex-free term of exactly `target` type: an in-scope variable, a
    /// constant, or an abstraction whose body recurses on the codomain.
    fn leaf(&mut self, target: &Type, env: &[(String, Type)]) -> Term {
        let mut hits: Vec<Term> = env
            .iter()
            .filter(|(_, ty)| ty.alpha_eq(target))
            .map(|(name, ty)| Term::var(name, ty.clone()))
            .collect();
        hits.extend(
            self.ctx
                .constants
                .iter()
                .filter(|(_, ty)| ty.alpha_eq(target))
                .map(|(name, ty)| Term::cnst(name, ty.clone())),
        );
        if !hits.is_empty() {
            let i = self.rng.gen_range(0..hits.len());
            return hits.swap_remove(i);
        }
        match target {
            Type::Arrow(dom, cod) => {
                let x = self.fresh("v");
                let mut env = env.to_vec();
                env.push((x.clone(), (**dom).clone()));
                let body = self.leaf(cod, &env);
                Term::abs(x, (**dom).clone(), body)
            }
            other => unreachable!("no leaf inhabits {other}"),
        }
    }

    fn gen(&mut self, target: &Type, depth: usize, env: &[(String, Type)]) -> Term {
        if depth == 0 {
            return self.leaf(target, env);
        }
        match self.rng.gen_range(0..100) {
            // A beta redex around the same target.
            0..=29 => {
                let dom = self.pool();
                let x = self.fresh("x");
                let mut inner = env.to_vec();
                inner.push((x.clone(), dom.clone()));
                let body = self.gen(target, depth - 1, &inner);
                let arg = self.gen(&dom, depth - 1, env);
                Term::app(Term::abs(x, dom, body), arg)
            }
            // Plain abstraction when the target is an arrow.
            30..=49 => match target {
                Type::Arrow(dom, cod) => {
                    let x = self.fresh("y");
                    let mut inner = env.to_vec();
                    inner.push((x.clone(), (**dom).clone()));
                    let body = self.gen(cod, depth - 1, &inner);
                    Term::abs(x, (**dom).clone(), body)
                }
                _ => self.gen(target, depth - 1, env),
            },
            // An application of a generated function.
            50..=69 => {
                let dom = self.pool();
                let fun = self.gen(&Type::arrow(dom.clone(), target.clone()), depth - 1, env);
                let arg = self.gen(&dom, depth - 1, env);
                Term::app(fun, arg)
            }
            // A type-level redex: the bound variable is never mentioned, so
            // the instantiation is pure bookkeeping for the reducer.
            70..=79 => {
                let alpha = self.fresh("phantom");
                let at = self.pool();
                let body = self.gen(target, depth - 1, env);
                Term::tyapp(Term::tyabs(alpha, body), at)
            }
            // A genuine quantifier instantiation when truth is wanted.
            80..=89 if *target == Type::Truth => {
                let sort = match self.rng.gen_range(0..3) {
                    0 => Type::entity(),
                    1 => Type::base("A"),
                    _ => Type::base("B"),
                };
                let pred = self.gen(&Type::arrow(sort.clone(), Type::Truth), depth - 1, env);
                let exists = Term::cnst("exists", self.ctx.constants["exists"].clone());
                Term::app(Term::tyapp(exists, sort), pred)
            }
            _ => self.leaf(target, env),
        }
    }
}

/// Iterated-expansion reachability: the oracle the ontology must agree with.
fn closure_oracle(decls: &[(String, Vec<String>)]) -> Vec<BTreeSet<usize>> {
    let index: std::collections::BTreeMap<&str, usize> =
        decls.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let mut reach: Vec<BTreeSet<usize>> =
        (0..decls.len()).map(|i| BTreeSet::from([i])).collect();
    loop {
        let mut changed = false;
        for (i, (_, parents)) in decls.iter().enumerate() {
            for p in parents {
                let up: BTreeSet<usize> = reach[index[p.as_str()]].clone();
                for j in up {
                    changed |= reach[i].insert(j);
                }
            }
        }
        if !changed {
            return reach;
        }
    }
}

#[test]
fn criterion_8_property_suites() {
    let started = Instant::now();

    // 8a: subject reduction and normal-form uniqueness over ≥ 10⁴ random
    // well-typed terms of depth ≤ 7, under both reduction orders.
    let mut gen = TermGen::new(0xacce97);
    let ctx = gen.ctx.clone();
    for i in 0..10_000 {
        let depth = 1 + (i % 7);
        let target = match i % 5 {
            0 => Type::Truth,
            1 => Type::entity(),
            2 => Type::arrow(Type::entity(), Type::Truth),
            3 => Type::arrow(Type::base("A"), Type::Truth),
            _ => Type::arrow(Type::entity(), Type::entity()),
        };
        let term = gen.gen(&target, depth, &[]);
        let ty = type_of(&term, &ctx).expect("generated term is well-typed");
        assert!(alpha_equal_types(&ty, &target), "generator hits its target type");

        let mut current = term.clone();
        let mut guard = 0;
        while let Some(next) = step(&current, Strategy::LeftmostOutermost) {
            let next_ty = type_of(&next, &ctx).expect("reduction preserves typability");
            assert!(alpha_equal_types(&next_ty, &ty), "reduction preserves the type");
            current = next;
            guard += 1;
            assert!(guard < 100_000, "terms of bounded depth normalize quickly");
        }
        let inner = normalize_with(&term, &ctx, 100_000, Strategy::Innermost).unwrap();
        assert!(alpha_equal(&current, &inner), "both orders reach the same normal form");
    }

    // 8b: the coercion search agrees with brute force — insert every
    // declared transformation (and the accommodation coercion) and keep
    // exactly those the typechecker accepts.
    for file in ["fig1.lex", "demo.lex"] {
        let lexicon = lex(file);
        let ctx = lexicon.typing_context();
        let sorts: Vec<String> =
            lexicon.ontology.sorts().into_iter().filter(|s| s != "t").collect();
        for entry in lexicon.entries() {
            for src in &sorts {
                for dom in &sorts {
                    if src == dom {
                        continue;
                    }
                    let source = Type::base(src.clone());
                    let domain = Type::base(dom.clone());
                    let searched: BTreeSet<String> =
                        candidate_coercions(Some(entry), &lexicon.ontology, &source, &domain)
                            .into_iter()
                            .map(|tr| tr.name)
                            .collect();

                    let probe_fun = Term::abs(
                        "probe",
                        domain.clone(),
                        Term::cnst("tt_probe", Type::Truth),
                    );
                    let probe_arg = Term::cnst("arg_probe", source.clone());
                    let mut brute = BTreeSet::new();
                    let mut pool = entry.transformations.clone();
                    pool.extend(lexicon.ontology.accommodation_coercion(src, dom));
                    for tr in pool {
                        if tr.is_identity() {
                            continue;
                        }
                        let candidate = Term::app(
                            probe_fun.clone(),
                            Term::app(tr.term.clone(), probe_arg.clone()),
                        );
                        if type_of(&candidate, &ctx).is_ok() {
                            brute.insert(tr.name.clone());
                        }
                    }
                    assert_eq!(
                        searched, brute,
                        "{file}/{}: search vs brute force at {src} -> {dom}",
                        entry.word
                    );
                }
            }
        }
    }
    // The pairs the corpus actually exercises, pinned.
    let demo = lex("demo.lex");
    let names = |word: &str, s: &str, d: &str| -> Vec<String> {
        candidate_coercions(
            Some(demo.lookup(word).unwrap()),
            &demo.ontology,
            &Type::base(s),
            &Type::base(d),
        )
        .into_iter()
        .map(|tr| tr.name)
        .collect()
    };
    assert_eq!(names("Liverpool", "City", "Club"), vec!["f_C".to_string()]);
    assert_eq!(names("chair", "Artifact", "Animal"), Vec::<String>::new());
    assert_eq!(names("carrot", "Vegetable", "Food"), vec!["sub_Vegetable_Food".to_string()]);

    // 8c: the flexibility join is commutative over every label pair, for
    // both shared and distinct transformation names.
    let degrees = [Degree::Flexible, Degree::SemiFlexible, Degree::Rigid];
    for &dl in &degrees {
        for &dr in &degrees {
            for (nl, nr) in [("f", "f"), ("f", "g"), ("g", "f")] {
                assert_eq!(
                    join_degrees((nl, dl), (nr, dr)),
                    join_degrees((nr, dr), (nl, dl)),
                    "join commutes on ({nl}:{dl}, {nr}:{dr})"
                );
            }
            assert_eq!(join_degrees(("f", dl), ("f", dr)), Some(dl.max(dr)));
        }
    }

    // 8d: subsort closure agrees with brute-force reachability on random
    // acyclic hierarchies of up to 50 sorts.
    let mut rng = ChaCha8Rng::seed_from_u64(0x50_D465);
    for round in 0..20 {
        let n = rng.gen_range(2..=50);
        let e_top = rng.gen_bool(0.5);
        let mut decls: Vec<(String, Vec<String>)> = Vec::new();
        for i in 0..n {
            let mut parents = BTreeSet::new();
            for _ in 0..rng.gen_range(0..=3usize.min(i)) {
                parents.insert(format!("S{}", rng.gen_range(0..i)));
            }
            decls.push((format!("S{i}"), parents.into_iter().collect()));
        }
        let onto = Ontology::from_declarations(&decls, e_top).unwrap();
        let reach = closure_oracle(&decls);
        for (i, row) in reach.iter().enumerate() {
            for j in 0..n {
                assert_eq!(
                    onto.is_subsort(&format!("S{i}"), &format!("S{j}")),
                    row.contains(&j),
                    "round {round}: S{i} <= S{j}"
                );
            }
            let si = format!("S{i}");
            assert_eq!(onto.is_subsort(&si, "e"), e_top);
            assert!(!onto.is_subsort(&si, "t"));
            assert!(!onto.is_subsort("t", &si));
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "property suites must finish under a minute");
    println!(
        "criterion 8: pass — property suites clean in {:.1}s",
        elapsed.as_secs_f64()
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: with a single sort, the machinery is invisible — plain
// composition, an empty trace, and no constraint bookkeeping in the report.

#[test]
fn criterion_9_single_sort_regression() {
    let readings =
        compose(&disc("fig1_some_club.disc"), &lex("fig1.lex"), &EngineConfig::default())
            .unwrap();
    assert_eq!(readings.len(), 1);
    let reading = &readings[0];
    assert_eq!(ascii(reading), "exists x:e. (club(x) & defeated(x, Leeds))");
    assert!(reading.trace.is_empty());
    assert_eq!(reading.trace_names(), "[]");
    assert_eq!(reading.verdict.render(), "felicitous");

    let (code, stdout, stderr) = run_cli(&[
        "analyze",
        &arg("fig1.lex"),
        &arg("fig1_some_club.disc"),
        "--format",
        "ascii",
    ]);
    assert_eq!(code, 0);
    for word in ["label", "infelicitous", "missing", "trace"] {
        assert!(
            !stdout.contains(word) && !stderr.contains(word),
            "single-sort report must not mention `{word}`"
        );
    }
    println!("criterion 9: pass — one sort collapses to plain composition");
}
