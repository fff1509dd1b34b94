//! Rendering of analysis results: human-readable text and schema-stable
//! JSON.  Results go to standard output; diagnostics (missing-transformation
//! suggestions and the like) go to standard error in the text formats and
//! into the JSON document itself otherwise.

use serde::Serialize;

use ltyn_core::discourse::Discourse;
use ltyn_core::engine::{diagnose_missing, EngineConfig, Reading, Verdict};
use ltyn_core::formula::FormulaStyle;
use ltyn_core::lexicon::Lexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Unicode,
    Ascii,
    Sexpr,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<OutputFormat, String> {
        match s {
            "unicode" => Ok(OutputFormat::Unicode),
            "ascii" => Ok(OutputFormat::Ascii),
            "sexpr" => Ok(OutputFormat::Sexpr),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!(
                "unknown format `{other}` (expected unicode, ascii, sexpr or json)"
            )),
        }
    }

    fn formula_style(self) -> FormulaStyle {
        match self {
            OutputFormat::Unicode => FormulaStyle::Unicode,
            OutputFormat::Ascii | OutputFormat::Json => FormulaStyle::Ascii,
            OutputFormat::Sexpr => FormulaStyle::Sexpr,
        }
    }
}

/// Everything one `analyze` run produced, ready for rendering.
pub struct RunReport {
    pub sentences: Vec<SentenceReport>,
    pub exit_code: i32,
}

pub struct SentenceReport {
    pub sentence: usize,
    pub rendered_tree: String,
    pub readings: Vec<Reading>,
    pub diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct SentenceJson {
    sentence: usize,
    readings: Vec<ReadingJson>,
    diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct ReadingJson {
    formula: Option<String>,
    trace: Vec<TraceJson>,
    verdict: String,
}

#[derive(Serialize)]
struct TraceJson {
    anchor: u32,
    word: String,
    name: String,
    position: String,
}

/// Groups readings by sentence, attaches diagnostics, and derives the exit
/// code: 0 when every sentence has a felicitous reading, otherwise 3 if any
/// failure is a missing transformation and 2 for constraint infelicity.
pub fn build_report(discourse: &Discourse, readings: Vec<Reading>, lex: &Lexicon) -> RunReport {
    let mut sentences = Vec::new();
    let mut any_infelicitous = false;
    let mut any_missing = false;
    for (idx, node) in discourse.sentences.iter().enumerate() {
        let number = idx + 1;
        let mine: Vec<Reading> =
            readings.iter().filter(|r| r.sentence == number).cloned().collect();
        let felicitous = mine.iter().any(|r| r.verdict.is_felicitous());
        let mut diagnostics = Vec::new();
        if !felicitous {
            if mine.iter().any(|r| r.verdict.is_missing()) {
                any_missing = true;
            } else {
                any_infelicitous = true;
            }
            for reading in &mine {
                if let Verdict::Missing(miss) = &reading.verdict {
                    let suggestion = diagnose_missing(miss, lex);
                    diagnostics.push(format!(
                        "diagnosis: {miss}\nsuggested overlay:\n{}",
                        suggestion.overlay
                    ));
                }
            }
        }
        sentences.push(SentenceReport {
            sentence: number,
            rendered_tree: node.to_string(),
            readings: mine,
            diagnostics,
        });
    }
    let exit_code = if any_missing {
        3
    } else if any_infelicitous {
        2
    } else {
        0
    };
    RunReport { sentences, exit_code }
}

/// Renders the report to (stdout text, stderr text).
pub fn render(
    report: &RunReport,
    format: OutputFormat,
    show_trace: bool,
    lex: &Lexicon,
    cfg: &EngineConfig,
) -> (String, String) {
    if format == OutputFormat::Json {
        return (render_json(report), String::new());
    }
    let style = format.formula_style();
    let mut out = String::new();
    let mut err = String::new();
    for sentence in &report.sentences {
        out.push_str(&format!("sentence {}: {}\n", sentence.sentence, sentence.rendered_tree));
        for (ridx, reading) in sentence.readings.iter().enumerate() {
            let formula = match &reading.formula {
                Some(f) => f.render(style),
                None => "—".to_string(),
            };
            out.push_str(&format!("  reading {}: {}\n", ridx + 1, formula));
            out.push_str(&format!("    verdict: {}\n", reading.verdict.render()));
            if show_trace {
                out.push_str(&format!("    trace: {}\n", reading.trace_names()));
                if let Ok(steps) = ltyn_core::engine::reading_steps(reading, lex, cfg) {
                    if !steps.is_empty() {
                        out.push_str("    steps:\n");
                        for step in steps {
                            out.push_str(&format!("      {step}\n"));
                        }
                    }
                }
            }
        }
        for diagnostic in &sentence.diagnostics {
            err.push_str(diagnostic);
            if !diagnostic.ends_with('\n') {
                err.push('\n');
            }
        }
    }
    (out, err)
}

fn render_json(report: &RunReport) -> String {
    let doc: Vec<SentenceJson> = report
        .sentences
        .iter()
        .map(|s| SentenceJson {
            sentence: s.sentence,
            readings: s
                .readings
                .iter()
                .map(|r| ReadingJson {
                    formula: r.formula.as_ref().map(|f| f.render(FormulaStyle::Ascii)),
                    trace: r
                        .trace
                        .iter()
                        .map(|t| TraceJson {
                            anchor: t.anchor,
                            word: t.word.clone(),
                            name: t.name.clone(),
                            position: t.position.clone(),
                        })
                        .collect(),
                    verdict: r.verdict.render(),
                })
                .collect(),
            diagnostics: s.diagnostics.clone(),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}
