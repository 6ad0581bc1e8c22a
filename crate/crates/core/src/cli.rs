//! `ssc` command line.
//!
//! Every subcommand reads one document (text or JSON envelope, `-` for
//! stdin) and prints a JSON report that embeds the tool version, the SHA-256
//! of the input and the seed, so identical invocations give identical bytes.
//!
//! Exit codes: 0 the property holds (colorable, nonsingular, controllable);
//! 2 the sufficient condition failed with no counterexample; 3 a concrete
//! counterexample was found; 1 input, usage or budget error.

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::color_rule::{is_colorable_with, Colorability, SearchOptions};
use crate::error::{Error, Result};
use crate::matching::is_nonsingular_with;
use crate::pattern::{build_barred, instantiate, lint_document, PatternDocument};
use crate::symbolic::{
    find_singular_assignment, single_solid_monomial, symbolic_determinant, SingularSearch,
};
use crate::verification::{decide, refute_fullrank_by_sampling, SamplePlan, Side, VerdictStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ssc",
    version,
    about = "Strong structural controllability of colored structured systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every sampled realization.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of sampled realizations.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Limit on perfect matchings and on colorability search states.
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Greedy colorability search; only positive answers are conclusive.
    #[arg(long, global = true)]
    greedy: bool,

    /// State dimension, overriding the document header.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// JSON report (default).
    #[arg(long, global = true, conflicts_with = "human")]
    json: bool,

    /// Plain-text summary instead of JSON.
    #[arg(long, global = true)]
    human: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report every invariant the document violates.
    Validate { file: PathBuf },
    /// Print the barred matrix [Ā B] and its coloring.
    Bar { file: PathBuf },
    /// Matching test for nonsingularity of a square matrix.
    Nonsingular { file: PathBuf },
    /// Symbolic determinant of a square matrix in the color variables.
    Det { file: PathBuf },
    /// Colorability of the matrix graph, with a derivation trace.
    Colorable { file: PathBuf },
    /// Colorability plus sampling for a rank-deficient member.
    Fullrank { file: PathBuf },
    /// Graph test on [A B] and [Ā B], plus sampling when inconclusive.
    Controllable { file: PathBuf },
    /// Emit seeded members of the colored pattern class.
    Sample { file: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Bar { .. } => "bar",
            Command::Nonsingular { .. } => "nonsingular",
            Command::Det { .. } => "det",
            Command::Colorable { .. } => "colorable",
            Command::Fullrank { .. } => "fullrank",
            Command::Controllable { .. } => "controllable",
            Command::Sample { .. } => "sample",
        }
    }

    fn file(&self) -> &PathBuf {
        match self {
            Command::Validate { file }
            | Command::Bar { file }
            | Command::Nonsingular { file }
            | Command::Det { file }
            | Command::Colorable { file }
            | Command::Fullrank { file }
            | Command::Controllable { file }
            | Command::Sample { file } => file,
        }
    }
}

pub const COMMANDS: [&str; 8] = [
    "validate",
    "bar",
    "nonsingular",
    "det",
    "colorable",
    "fullrank",
    "controllable",
    "sample",
];

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReportOptions {
    pub seed: u64,
    pub trials: Option<usize>,
    pub budget: Option<usize>,
    pub greedy: bool,
    /// Overrides the state dimension in the document header.
    pub state_dim: Option<usize>,
}

/// A finished subcommand: the exit code, the JSON report and the plain-text
/// summary printed under `--human`.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub exit_code: i32,
    pub json: Value,
    pub human: String,
}

impl Report {
    /// The report as printed by the command line, without the final newline.
    pub fn json_text(&self) -> String {
        serde_json::to_string_pretty(&self.json).expect("report serializes")
    }
}

/// Outcome of one subcommand before it is wrapped in the report envelope.
struct Outcome {
    exit: i32,
    result: Value,
    human: String,
}

/// Runs `command` on the document text `input`. The JSON is what the
/// command line prints.
pub fn report(command: &str, input: &str, opts: &ReportOptions) -> Result<Report> {
    let outcome = execute(command, input, opts)?;
    Ok(Report {
        exit_code: outcome.exit,
        json: json!({
            "tool": "ssc",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "input_sha256": hex::encode(Sha256::digest(input.as_bytes())),
            "seed": opts.seed,
            "exit_code": outcome.exit,
            "result": outcome.result,
        }),
        human: outcome.human,
    })
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let input = match read_input(cli.command.file()) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", cli.command.file().display());
            return EXIT_ERROR;
        }
    };
    let opts = ReportOptions {
        seed: cli.seed,
        trials: cli.trials,
        budget: cli.budget,
        greedy: cli.greedy,
        state_dim: cli.n,
    };
    match report(cli.command.name(), &input, &opts) {
        Ok(r) => {
            let _ = if cli.human {
                write!(stdout, "{}", r.human)
            } else {
                writeln!(stdout, "{}", r.json_text())
            };
            r.exit_code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn read_input(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn search_options(ro: &ReportOptions) -> SearchOptions {
    let mut opts = SearchOptions {
        greedy: ro.greedy,
        ..SearchOptions::default()
    };
    if let Some(b) = ro.budget {
        opts.state_budget = b;
        opts.matching_budget = b;
    }
    opts
}

fn parse(opts: &ReportOptions, input: &str) -> Result<PatternDocument> {
    let mut doc = PatternDocument::parse(input)?;
    if let Some(n) = opts.state_dim {
        doc.state_dim = Some(n);
        doc.system()?;
    }
    Ok(doc)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn execute(command: &str, input: &str, ro: &ReportOptions) -> Result<Outcome> {
    let opts = search_options(ro);
    match command {
        "validate" => {
            let diags = lint_document(input);
            let human = if diags.is_empty() {
                "valid\n".to_string()
            } else {
                diags.iter().map(|d| format!("{d}\n")).collect()
            };
            Ok(Outcome {
                exit: if diags.is_empty() {
                    EXIT_OK
                } else {
                    EXIT_ERROR
                },
                result: json!({ "valid": diags.is_empty(), "diagnostics": diags }),
                human,
            })
        }
        "bar" => {
            let doc = parse(ro, input)?;
            let barred = build_barred(&doc.system()?);
            let out = PatternDocument {
                matrix: barred.system.matrix().clone(),
                state_dim: Some(barred.system.state_dim()),
            };
            Ok(Outcome {
                exit: EXIT_OK,
                result: json!({
                    "document": out.to_json(),
                    "renumbering": barred.renumbering,
                    "fresh_star_diagonal": barred.fresh_star,
                    "fresh_question_diagonal": barred.system.state_dim() - barred.fresh_star,
                }),
                human: out.to_text(),
            })
        }
        "nonsingular" => {
            let doc = parse(ro, input)?;
            let cert = is_nonsingular_with(&doc.matrix, opts.matching_budget)?;
            let mut exit = if cert.verdict {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            };
            let mut search = Value::Null;
            if !cert.verdict {
                match find_singular_assignment(&doc.matrix, ro.trials.unwrap_or(200), ro.seed) {
                    Ok(s) => {
                        if matches!(s, SingularSearch::Witness { .. }) {
                            exit = EXIT_REFUTED;
                        }
                        search = to_value(&s);
                    }
                    Err(Error::BudgetExceeded { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            let human = match &cert.witness.failed_condition() {
                None => format!("nonsingular ({} perfect matchings)\n", cert.matching_count),
                Some(k) => format!("not nonsingular: condition {k} fails\n"),
            };
            Ok(Outcome {
                exit,
                result: json!({ "certificate": cert, "singular_search": search }),
                human,
            })
        }
        "det" => {
            let doc = parse(ro, input)?;
            let det = symbolic_determinant(&doc.matrix)?;
            Ok(Outcome {
                exit: EXIT_OK,
                human: format!("{det}\n"),
                result: json!({
                    "determinant": det,
                    "text": det.to_string(),
                    "single_solid_monomial": single_solid_monomial(&det),
                }),
            })
        }
        "colorable" => {
            let doc = parse(ro, input)?;
            let c = is_colorable_with(&doc.matrix, &opts)?;
            Ok(Outcome {
                exit: if c.colorable {
                    EXIT_OK
                } else {
                    EXIT_INCONCLUSIVE
                },
                human: human_colorability(&c),
                result: json!({ "colorability": c }),
            })
        }
        "fullrank" => {
            let doc = parse(ro, input)?;
            let c = is_colorable_with(&doc.matrix, &opts)?;
            let plan = SamplePlan::new(ro.seed, ro.trials.unwrap_or(1000));
            let sampling = refute_fullrank_by_sampling(&doc.matrix, &plan)?;
            let exit = if c.colorable {
                EXIT_OK
            } else if sampling.counterexample.is_some() {
                EXIT_REFUTED
            } else {
                EXIT_INCONCLUSIVE
            };
            let mut human = human_colorability(&c);
            match &sampling.counterexample {
                Some(cx) => human.push_str(&format!(
                    "rank-deficient member (rank {}) at trial {}:\n{}",
                    cx.rank, cx.trial, cx.matrix
                )),
                None => human.push_str(&format!(
                    "no rank-deficient member in {} trials\n",
                    sampling.trials_run
                )),
            }
            Ok(Outcome {
                exit,
                human,
                result: json!({ "colorability": c, "sampling": sampling }),
            })
        }
        "controllable" => {
            let doc = parse(ro, input)?;
            let sys = doc.system()?;
            let plan = SamplePlan::new(ro.seed, ro.trials.unwrap_or(1000));
            let v = decide(&sys, &opts, &plan)?;
            let exit = match v.status {
                VerdictStatus::SufficientControllable => EXIT_OK,
                VerdictStatus::Inconclusive => EXIT_INCONCLUSIVE,
                VerdictStatus::RefutedBySample => EXIT_REFUTED,
            };
            let human = match v.status {
                VerdictStatus::SufficientControllable => {
                    "controllable: both graphs are colorable\n".to_string()
                }
                VerdictStatus::Inconclusive => {
                    let sides: Vec<&str> = v
                        .failed_sides
                        .iter()
                        .map(|s| match s {
                            Side::Original => "[A B]",
                            Side::Barred => "barred [A B]",
                        })
                        .collect();
                    format!(
                        "inconclusive: graph of {} not colorable; no counterexample sampled\n",
                        sides.join(" and ")
                    )
                }
                VerdictStatus::RefutedBySample => {
                    "not controllable: sampled member fails the Kalman test\n".to_string()
                }
            };
            Ok(Outcome {
                exit,
                human,
                result: json!({ "verdict": v }),
            })
        }
        "sample" => {
            let doc = parse(ro, input)?;
            let plan = SamplePlan::new(ro.seed, ro.trials.unwrap_or(5));
            let mut samples = Vec::new();
            let mut human = String::new();
            for (trial, a) in plan
                .assignments(&doc.matrix.colors())
                .into_iter()
                .enumerate()
            {
                let m = instantiate(&doc.matrix, &a)?;
                human.push_str(&format!("# trial {trial}\n{m}"));
                samples.push(json!({
                    "trial": trial,
                    "assignment": a,
                    "matrix": m,
                    "rank": m.rank(),
                }));
            }
            Ok(Outcome {
                exit: EXIT_OK,
                human,
                result: json!({ "samples": samples }),
            })
        }
        other => Err(Error::UnknownCommand(other.to_string())),
    }
}

fn human_colorability(c: &Colorability) -> String {
    let mut out = String::new();
    if c.colorable {
        out.push_str("colorable\n");
    } else if c.exhaustive {
        out.push_str("not colorable\n");
    } else {
        out.push_str("greedy search stuck (inconclusive)\n");
    }
    for step in &c.trace.steps {
        let x: Vec<String> = step.x.iter().map(|v| (v + 1).to_string()).collect();
        let y: Vec<String> = step.y.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&format!("  {{{}}} -> {{{}}}\n", x.join(","), y.join(",")));
    }
    out
}
