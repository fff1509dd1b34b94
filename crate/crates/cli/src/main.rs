//! `ltyn` — batch front end for the composition engine.
//!
//! Three commands: `analyze` runs a discourse against a lexicon and prints
//! readings with felicity verdicts; `check` validates a lexicon (plus
//! overlays); `typecheck` types a single term against a lexicon's constants.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};

use ltyn_core::discourse::parse_discourse;
use ltyn_core::engine::{compose, suggest_word_stub, EngineConfig, EngineError};
use ltyn_core::lexicon::{load_lexicon, merge_overlay, Lexicon};
use ltyn_core::reduce::normalize;
use ltyn_core::syntax::parse_term;
use ltyn_core::typing::type_of;

use report::{build_report, render, OutputFormat};

#[derive(Parser)]
#[command(name = "ltyn", version, about = "Semantic composition with coercions and felicity checking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a discourse file against a lexicon.
    Analyze(AnalyzeArgs),
    /// Validate a lexicon file (and overlays) without running anything.
    Check(CheckArgs),
    /// Type a term written in the core syntax against a lexicon's constants.
    Typecheck(TypecheckArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Lexicon file.
    lexicon: PathBuf,
    /// Discourse file (one derivation tree per line).
    discourse: PathBuf,
    /// Additional lexicon fragments merged over the base, in order.
    #[arg(long = "overlay", value_name = "PATH")]
    overlays: Vec<PathBuf>,
    /// Report every reading (pass false for the first reading only).
    #[arg(
        long = "all-readings",
        value_name = "BOOL",
        default_value_t = true,
        default_missing_value = "true",
        num_args = 0..=1,
        action = ArgAction::Set
    )]
    all_readings: bool,
    /// Longest admissible chain of lexical coercions per occurrence.
    #[arg(long = "max-chain-depth", value_name = "N", default_value_t = 2)]
    max_chain_depth: usize,
    /// Keep semi-flexible constraints alive across sentence boundaries.
    #[arg(long = "no-sentence-reset")]
    no_sentence_reset: bool,
    /// Output format.
    #[arg(long = "format", value_name = "FMT", default_value = "unicode", value_parser = OutputFormat::parse)]
    format: OutputFormat,
    /// Print coercion traces and beta-reduction snapshots.
    #[arg(long = "trace")]
    trace: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Lexicon file.
    lexicon: PathBuf,
    /// Additional lexicon fragments merged over the base, in order.
    #[arg(long = "overlay", value_name = "PATH")]
    overlays: Vec<PathBuf>,
}

#[derive(Args)]
struct TypecheckArgs {
    /// The term, in core syntax (e.g. `lam x:e. x`).
    term: String,
    /// Optional lexicon whose constants the term may mention.
    lexicon: Option<PathBuf>,
    /// Normalize first and print `<normal form> : <type>`.
    #[arg(long = "normalize")]
    normalize: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Typecheck(args) => cmd_typecheck(&args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_with_overlays(base: &Path, overlays: &[PathBuf]) -> Result<Lexicon> {
    let src = fs::read_to_string(base)
        .with_context(|| format!("cannot read lexicon {}", base.display()))?;
    let mut lex = load_lexicon(&src)
        .map_err(|e| anyhow!("{}: {e}", base.display()))?;
    for path in overlays {
        let src = fs::read_to_string(path)
            .with_context(|| format!("cannot read overlay {}", path.display()))?;
        let overlay = load_lexicon(&src)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        lex = merge_overlay(&lex, &overlay)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
    }
    Ok(lex)
}

fn engine_config(args: &AnalyzeArgs) -> Result<EngineConfig> {
    let mut cfg = EngineConfig {
        max_chain_depth: args.max_chain_depth,
        enumerate_all_readings: args.all_readings,
        sentence_resets_semiflexible: !args.no_sentence_reset,
        ..EngineConfig::default()
    };
    if let Ok(raw) = std::env::var("LTYN_STEP_BUDGET") {
        cfg.step_budget = raw
            .parse()
            .map_err(|_| anyhow!("LTYN_STEP_BUDGET must be a positive integer, got `{raw}`"))?;
    }
    Ok(cfg)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8> {
    let lex = load_with_overlays(&args.lexicon, &args.overlays)?;
    let src = fs::read_to_string(&args.discourse)
        .with_context(|| format!("cannot read discourse {}", args.discourse.display()))?;
    let discourse = parse_discourse(&src)
        .map_err(|e| anyhow!("{}: {e}", args.discourse.display()))?;
    let cfg = engine_config(args)?;

    let readings = match compose(&discourse, &lex, &cfg) {
        Ok(readings) => readings,
        Err(EngineError::UnknownWord(word)) => {
            eprintln!("error: unknown word `{word}`");
            eprintln!("suggested stub entry:");
            eprint!("{}", suggest_word_stub(&word, &lex));
            return Ok(1);
        }
        Err(other) => return Err(other.into()),
    };

    let report = build_report(&discourse, readings, &lex);
    let (stdout_text, stderr_text) = render(&report, args.format, args.trace, &lex, &cfg);
    print!("{stdout_text}");
    eprint!("{stderr_text}");
    Ok(report.exit_code as u8)
}

fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let lex = load_with_overlays(&args.lexicon, &args.overlays)?;
    let words = lex.entries().len();
    let sorts = lex.ontology.declared().count();
    println!("ok: {words} words, {sorts} declared sorts");
    Ok(0)
}

fn cmd_typecheck(args: &TypecheckArgs) -> Result<u8> {
    let lex = match &args.lexicon {
        Some(path) => Some(load_with_overlays(path, &[])?),
        None => None,
    };
    let resolver = match &lex {
        Some(lex) => lex.resolver(),
        None => ltyn_core::syntax::Resolver::new(ltyn_core::formula::standard_constants()),
    };
    let term = parse_term(&args.term, &resolver).map_err(|e| anyhow!("{e}"))?;
    let ctx = match &lex {
        Some(lex) => lex.typing_context(),
        None => ltyn_core::typing::TypingContext::new(),
    };
    let ty = type_of(&term, &ctx).map_err(|e| anyhow!("{e}"))?;
    if args.normalize {
        let budget = std::env::var("LTYN_STEP_BUDGET")
            .ok()
            .and_then(|raw| raw.parse().ok())
            .unwrap_or(ltyn_core::reduce::DEFAULT_STEP_BUDGET);
        let nf = normalize(&term, &ctx, budget)?;
        println!("{nf} : {ty}");
    } else {
        println!("{ty}");
    }
    Ok(0)
}
