// SPDX-License-Identifier: MIT OR Apache-2.0
//! Command-line surface. Every command is a pure function from inputs to
//! (exit code, report text) so the binary stays a two-line shim and tests
//! can drive the real paths.
//!
//! Exit codes are a stable contract: 0 the property holds, 1 it fails
//! with a certificate, 2 input error, 3 precondition error.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};

use crate::ci::CIStatement;
use crate::corpus;
use crate::doc::{digest, parse_document, render_document, Document};
use crate::error::Error;
use crate::faithfulness::check_faithfulness;
use crate::graph::{d_separated, DSepQuery, Dag};
use crate::model::CausalModel;
use crate::polytope::{
    enumerate_strategies, is_factorisable, InequalityFunctional, DEFAULT_STRATEGY_CAP,
};
use crate::rational::format_q;
use crate::scenario::{check_no_disturbance, pad_scenario, Phenomenon, Scenario};
use crate::verify::{verify_lemma_chain, verify_theorem, CandidateBudget, CorollaryVerdict};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser)]
#[command(name = "ccx", version = crate::VERSION, about = "Exact causal analysis of contextuality and nonlocality", disable_help_flag = false)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a phenomenon for no-disturbance.
    CheckNd {
        /// Phenomenon document: a file path or corpus:<name>.
        phenomenon: String,
    },
    /// Decide membership in the deterministic-strategy polytope.
    Factorisable {
        /// Phenomenon document: a file path or corpus:<name>.
        phenomenon: String,
        /// Run the membership test even if no-disturbance fails. The
        /// result is then polytope membership only.
        #[arg(long)]
        allow_disturbing: bool,
    },
    /// Answer a d-separation query against a graph document.
    Dsep {
        /// Graph document: a file path or corpus:<name>.
        graph: String,
        /// Query "X,Y|Z": two node sets and an optional conditioning
        /// set, members separated by spaces.
        query: String,
    },
    /// Check a model for faithfulness against a phenomenon.
    Faithful {
        /// Model document: a file path or corpus:<name>.
        model: String,
        /// Phenomenon document: a file path or corpus:<name>.
        phenomenon: String,
    },
    /// Run the mechanical graph-class verifications.
    Verify(VerifyArgs),
    /// Classify a phenomenon: fine-tuning required, faithful candidate
    /// model constructed, or no-disturbance fails.
    Corollary {
        /// Phenomenon document: a file path or corpus:<name>.
        phenomenon: String,
    },
    /// Inspect the bundled documents.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Sweep the four-layer chained graphs.
    #[arg(long, conflicts_with = "theorem")]
    lemma: bool,
    /// Sweep candidate causal structures for the n-party binary scenario.
    #[arg(long)]
    theorem: bool,
    /// Largest layer size in the lemma sweep.
    #[arg(long, default_value_t = 2)]
    max_set_size: usize,
    /// Number of parties in the theorem sweep.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Random strictly positive models sampled per surviving structure.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Most latent common causes per candidate.
    #[arg(long, default_value_t = 2)]
    max_latents: usize,
    /// Largest observable subset a latent may feed.
    #[arg(long, default_value_t = 4)]
    max_subset: usize,
    /// Cardinality of latents in sampled models.
    #[arg(long, default_value_t = 4)]
    latent_card: usize,
    /// Hard cap on the candidate count.
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List the bundled document names.
    List,
    /// Print a bundled document.
    Show { name: String },
}

/// Runs one invocation; `args` excludes the program name.
pub fn run(args: &[String]) -> (i32, String) {
    let mut argv = vec!["ccx".to_string()];
    argv.extend(args.iter().cloned());
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            // clap renders --help and --version as "errors" with exit 0.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_HOLDS };
            return (code, e.to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(pair) => pair,
        Err(e) => {
            let code = match e {
                Error::Validation(_) | Error::Parse(_) | Error::Resource(_) => EXIT_INPUT,
                Error::Precondition(_)
                | Error::Conditioning(_)
                | Error::Reproduction(_) => EXIT_PRECONDITION,
            };
            (code, format!("error: {e}\n"))
        }
    }
}

struct Input {
    label: String,
    text: String,
    doc: Document,
}

fn load(reference: &str) -> Result<Input, Error> {
    let text = if let Some(name) = reference.strip_prefix("corpus:") {
        corpus::text(name)?
    } else {
        std::fs::read_to_string(reference)
            .map_err(|e| Error::Parse(format!("cannot read {reference}: {e}")))?
    };
    let doc = parse_document(&text)?;
    Ok(Input { label: reference.to_string(), text, doc })
}

fn load_phenomenon(reference: &str) -> Result<(Input, Phenomenon), Error> {
    let input = load(reference)?;
    match &input.doc {
        Document::Phenomenon(p) => {
            let p = p.clone();
            Ok((input, p))
        }
        other => Err(Error::Parse(format!(
            "{reference} is a {} document, expected a phenomenon",
            other.kind()
        ))),
    }
}

fn load_graph(reference: &str) -> Result<(Input, Dag), Error> {
    let input = load(reference)?;
    let g = match &input.doc {
        Document::Graph(g) => g.clone(),
        Document::Model(m) => m.dag.clone(),
        other => {
            return Err(Error::Parse(format!(
                "{reference} is a {} document, expected a graph or model",
                other.kind()
            )))
        }
    };
    Ok((input, g))
}

fn load_model(reference: &str) -> Result<(Input, CausalModel), Error> {
    let input = load(reference)?;
    match &input.doc {
        Document::Model(m) => {
            let m = m.clone();
            Ok((input, m))
        }
        other => Err(Error::Parse(format!(
            "{reference} is a {} document, expected a model",
            other.kind()
        ))),
    }
}

fn header(out: &mut String, inputs: &[&Input]) {
    let _ = writeln!(out, "tool: ccx {}", crate::VERSION);
    for i in inputs {
        let _ = writeln!(out, "input: {} sha256={}", i.label, digest(&i.text));
    }
}

fn summary(out: &mut String, pairs: &[(&str, String)]) {
    let _ = writeln!(out, "```summary");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k}: {v}");
    }
    let _ = writeln!(out, "```");
}

fn render_functional(out: &mut String, f: &InequalityFunctional) {
    let _ = writeln!(out, "functional (classical bound {}):", format_q(&f.classical_bound));
    for (&(c, idx), coef) in &f.coefficients {
        let _ = writeln!(out, "  {} * P(context {c}, entry {idx})", format_q(coef));
    }
}

fn render_weights(out: &mut String, p: &Phenomenon, weights: &[crate::Q]) {
    use num_traits::Zero;
    let padded = &p.scenario;
    let strategies =
        enumerate_strategies(padded, DEFAULT_STRATEGY_CAP).expect("already enumerated");
    let _ = writeln!(out, "strategy weights (zero entries omitted):");
    for (i, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let assignment: Vec<String> = padded
            .base
            .measurements
            .iter()
            .enumerate()
            .map(|(m, name)| {
                format!("{name}={}", padded.base.outcomes[strategies[i].assignment[m]])
            })
            .collect();
        let _ = writeln!(out, "  {}  [{}]", format_q(w), assignment.join(" "));
    }
}

fn dispatch(cmd: Command) -> Result<(i32, String), Error> {
    match cmd {
        Command::CheckNd { phenomenon } => {
            let (input, p) = load_phenomenon(&phenomenon)?;
            let report = check_no_disturbance(&p);
            let mut out = String::new();
            header(&mut out, &[&input]);
            if report.holds() {
                let _ = writeln!(out, "no-disturbance: holds");
                summary(&mut out, &[("verdict", "holds".into()), ("violations", "0".into())]);
                Ok((EXIT_HOLDS, out))
            } else {
                let _ = writeln!(
                    out,
                    "no-disturbance: fails with {} marginal mismatches",
                    report.violations.len()
                );
                for v in &report.violations {
                    let gamma: Vec<String> =
                        v.gamma.iter().map(|s| format!("slot{}", s + 1)).collect();
                    let _ = writeln!(
                        out,
                        "  contexts {} vs {} on [{}], outcomes {:?}: {} != {}",
                        v.ctx_a,
                        v.ctx_b,
                        gamma.join(" "),
                        v.outcomes,
                        format_q(&v.lhs),
                        format_q(&v.rhs)
                    );
                }
                summary(
                    &mut out,
                    &[
                        ("verdict", "fails".into()),
                        ("violations", report.violations.len().to_string()),
                    ],
                );
                Ok((EXIT_FAILS, out))
            }
        }
        Command::Factorisable { phenomenon, allow_disturbing } => {
            let (input, p) = load_phenomenon(&phenomenon)?;
            let cert = is_factorisable(&p, allow_disturbing)?;
            let mut out = String::new();
            header(&mut out, &[&input]);
            if allow_disturbing {
                let _ = writeln!(
                    out,
                    "note: no-disturbance not enforced; this is polytope membership only"
                );
            }
            if cert.feasible {
                let _ = writeln!(out, "factorisable: yes");
                render_weights(&mut out, &p, cert.weights.as_ref().expect("weights"));
                summary(&mut out, &[("verdict", "factorisable".into())]);
                Ok((EXIT_HOLDS, out))
            } else {
                let (witness, value) = cert.witness.expect("witness");
                let _ = writeln!(out, "factorisable: no");
                let _ = writeln!(
                    out,
                    "separating functional reaches {} against classical bound {}:",
                    format_q(&value),
                    format_q(&witness.classical_bound)
                );
                render_functional(&mut out, &witness);
                summary(
                    &mut out,
                    &[
                        ("verdict", "not-factorisable".into()),
                        ("witness-value", format_q(&value)),
                        ("classical-bound", format_q(&witness.classical_bound)),
                    ],
                );
                Ok((EXIT_FAILS, out))
            }
        }
        Command::Dsep { graph, query } => {
            let (input, g) = load_graph(&graph)?;
            let stmt = parse_query(&query)?;
            let mask = |set: &BTreeSet<String>| -> Result<u64, Error> {
                let mut m = 0u64;
                for name in set {
                    m |= 1 << g.node(name)?;
                }
                Ok(m)
            };
            let q = DSepQuery::new(&g, mask(&stmt.x)?, mask(&stmt.y)?, mask(&stmt.z)?)?;
            let sep = d_separated(&g, &q);
            let mut out = String::new();
            header(&mut out, &[&input]);
            let _ = writeln!(out, "query: {}", stmt.render());
            let _ = writeln!(out, "d-separated: {sep}");
            summary(&mut out, &[("d-separated", sep.to_string())]);
            Ok((EXIT_HOLDS, out))
        }
        Command::Faithful { model, phenomenon } => {
            let (m_input, m) = load_model(&model)?;
            let (p_input, p) = load_phenomenon(&phenomenon)?;
            let report = check_faithfulness(&m, &p)?;
            let mut out = String::new();
            header(&mut out, &[&m_input, &p_input]);
            let _ = writeln!(
                out,
                "conditional independences examined: {}",
                report.checked_count
            );
            if report.uniform_weights_note {
                let _ = writeln!(
                    out,
                    "note: uniform context weights assumed for the observable joint"
                );
            }
            if report.faithful {
                let _ = writeln!(out, "faithful: yes");
                summary(&mut out, &[("verdict", "faithful".into())]);
                Ok((EXIT_HOLDS, out))
            } else {
                let _ = writeln!(
                    out,
                    "faithful: no; {} fine-tuning witnesses",
                    report.witnesses.len()
                );
                for w in &report.witnesses {
                    let _ = writeln!(
                        out,
                        "  {} holds operationally but the graph connects them: {}",
                        w.statement.render(),
                        w.evidence.render(&m.dag)
                    );
                }
                summary(
                    &mut out,
                    &[
                        ("verdict", "fine-tuned".into()),
                        ("witnesses", report.witnesses.len().to_string()),
                    ],
                );
                Ok((EXIT_FAILS, out))
            }
        }
        Command::Verify(args) => {
            if args.lemma == args.theorem {
                return Err(Error::Validation(
                    "pass exactly one of --lemma or --theorem".into(),
                ));
            }
            let mut out = String::new();
            let _ = writeln!(out, "tool: ccx {}", crate::VERSION);
            if args.lemma {
                let report = verify_lemma_chain(args.max_set_size);
                let _ = write!(out, "{report}");
                let ok = report.passed();
                summary(
                    &mut out,
                    &[
                        ("verdict", if ok { "pass".into() } else { "fail".into() }),
                        ("counterexamples", report.counterexamples.len().to_string()),
                    ],
                );
                Ok((if ok { EXIT_HOLDS } else { EXIT_FAILS }, out))
            } else {
                let scenario = binary_bell_scenario(args.n)?;
                let padded = pad_scenario(&scenario)?;
                let budget = CandidateBudget {
                    max_latents: args.max_latents,
                    max_subset: args.max_subset,
                    latent_card: args.latent_card,
                    cap: args.cap,
                };
                let report = verify_theorem(&padded, &budget, args.trials, args.seed)?;
                let _ = write!(out, "{report}");
                let ok = report.passed();
                let failures = report.structural_failures.len()
                    + report.dsep_failures.len()
                    + report.trial_failures.len();
                summary(
                    &mut out,
                    &[
                        ("verdict", if ok { "pass".into() } else { "fail".into() }),
                        ("survivors", report.survivors.to_string()),
                        ("failures", failures.to_string()),
                        ("seed", report.seed.to_string()),
                    ],
                );
                Ok((if ok { EXIT_HOLDS } else { EXIT_FAILS }, out))
            }
        }
        Command::Corollary { phenomenon } => {
            let (input, p) = load_phenomenon(&phenomenon)?;
            let verdict = crate::verify::corollary_report(&p)?;
            let mut out = String::new();
            header(&mut out, &[&input]);
            match verdict {
                CorollaryVerdict::NdFails { violations } => {
                    let _ = writeln!(
                        out,
                        "verdict: no-disturbance fails ({violations} marginal mismatches); the screen does not apply"
                    );
                    summary(&mut out, &[("verdict", "nd-fails".into())]);
                }
                CorollaryVerdict::FineTuningRequired { witness, value } => {
                    let _ = writeln!(
                        out,
                        "verdict: fine-tuning required; no faithful classical causal model exists"
                    );
                    let _ = writeln!(
                        out,
                        "no-disturbance holds but the phenomenon lies outside the deterministic-strategy polytope:"
                    );
                    let _ = writeln!(
                        out,
                        "value {} exceeds classical bound {}",
                        format_q(&value),
                        format_q(&witness.classical_bound)
                    );
                    render_functional(&mut out, &witness);
                    summary(
                        &mut out,
                        &[
                            ("verdict", "fine-tuning-required".into()),
                            ("witness-value", format_q(&value)),
                            ("classical-bound", format_q(&witness.classical_bound)),
                        ],
                    );
                }
                CorollaryVerdict::Factorisable { weights, model } => {
                    let _ = writeln!(
                        out,
                        "verdict: factorisable; a faithful candidate common-cause model exists"
                    );
                    render_weights(&mut out, &p, &weights);
                    let _ = writeln!(out, "constructed model:");
                    let text = render_document(&Document::Model(model))?;
                    for line in text.lines() {
                        let _ = writeln!(out, "  {line}");
                    }
                    summary(&mut out, &[("verdict", "factorisable".into())]);
                }
            }
            Ok((EXIT_HOLDS, out))
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => {
                let mut out = String::new();
                for name in corpus::NAMES {
                    let doc = corpus::document(name)?;
                    let _ = writeln!(out, "{name}  ({})", doc.kind());
                }
                Ok((EXIT_HOLDS, out))
            }
            CorpusAction::Show { name } => Ok((EXIT_HOLDS, corpus::text(&name)?)),
        },
    }
}

/// Parses "X,Y|Z" with space-separated set members; the "|Z" part is
/// optional.
fn parse_query(s: &str) -> Result<CIStatement, Error> {
    let (lhs, z) = match s.split_once('|') {
        Some((l, z)) => (l, z.trim()),
        None => (s, ""),
    };
    let (x, y) = lhs
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("query {s:?} is not of the form \"X,Y|Z\"")))?;
    let words = |part: &str| -> Vec<String> {
        part.split_whitespace().map(|w| w.to_string()).collect()
    };
    let (x, y, z) = (words(x), words(y), words(z));
    if x.is_empty() || y.is_empty() {
        return Err(Error::Parse(format!("query {s:?} has an empty side")));
    }
    CIStatement::new(x, y, z)
}

/// The n-party Bell scenario with two binary measurements per party and
/// every joint choice as a context.
pub fn binary_bell_scenario(n: usize) -> Result<Scenario, Error> {
    if n == 0 || n > 6 {
        return Err(Error::Validation(format!("party count {n} out of range 1..=6")));
    }
    let mut measurements = Vec::new();
    let mut partition = Vec::new();
    for i in 1..=n {
        measurements.push(format!("x{i}"));
        measurements.push(format!("y{i}"));
        partition.push(vec![format!("x{i}"), format!("y{i}")]);
    }
    let mut contexts = Vec::new();
    for choice in 0..(1u32 << n) {
        let ctx: Vec<String> = (0..n)
            .map(|i| {
                if choice >> i & 1 == 0 {
                    format!("x{}", i + 1)
                } else {
                    format!("y{}", i + 1)
                }
            })
            .collect();
        contexts.push(ctx);
    }
    Scenario::new(measurements, vec!["0".into(), "1".into()], contexts, Some(partition))
}
