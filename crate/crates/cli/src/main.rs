//! `multreward` command-line front end. Every invocation prints one JSON
//! document on standard output; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 analysis error, 2 usage error, 3 threshold
//! answered "no".

mod render;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use multreward::exactnum::{csri_compare_with, parse_rational};
use multreward::mdp::{mdp_min_values_with, mdp_values_with, Budgets};
use multreward::{
    mc_values, mssp_with, parse_model, simulate_absorbing, AnalysisMode, ExtendedValue,
    MdScheduler, Model,
};

#[derive(Parser)]
#[command(name = "multreward", version, about = "Exact expected multiplicative rewards of Markov models")]
struct Cli {
    #[command(flatten)]
    budget: BudgetArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest number of memoryless schedulers enumerated per end component.
    #[arg(long = "budget-schedulers", global = true, value_name = "N")]
    schedulers: Option<u128>,

    /// Largest integer, in bits, materialized by exact product comparisons.
    #[arg(long = "budget-bits", global = true, value_name = "N")]
    bits: Option<u64>,
}

impl BudgetArgs {
    fn budgets(&self) -> Budgets {
        let mut b = Budgets::default();
        if let Some(n) = self.schedulers {
            b.max_schedulers = n;
        }
        if let Some(n) = self.bits {
            b.csri.max_bits = n;
        }
        b
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Sup,
    Inf,
}

impl From<Mode> for AnalysisMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sup => AnalysisMode::Sup,
            Mode::Inf => AnalysisMode::Inf,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Values of every state; optimal values and a scheduler for MDPs.
    Analyze {
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Minimize instead of maximize: the reciprocal of the maximal value
        /// under reciprocal rewards, with the mode swapped. Chains have a
        /// single value and ignore the flag.
        #[arg(long)]
        minimize: bool,
    },
    /// Best value over schedulers reaching `target` almost surely.
    Ssp {
        model: PathBuf,
        #[arg(long)]
        target: String,
    },
    /// Whether the optimal value of the initial state is at least theta.
    Threshold {
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        theta: String,
    },
    /// Monte Carlo estimate of the product collected until absorption.
    Simulate {
        model: PathBuf,
        /// JSON object mapping state names to action labels.
        #[arg(long)]
        scheduler: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        episodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
    },
    /// Compares two products written as "b^e*b^e*...".
    Compare { lhs: String, rhs: String },
}

enum Failure {
    Usage(String),
    Analysis(multreward::Error),
}

impl From<multreward::Error> for Failure {
    fn from(e: multreward::Error) -> Self {
        Failure::Analysis(e)
    }
}

struct Outcome {
    doc: Value,
    code: u8,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Model, Failure> {
    Ok(parse_model(&read(path)?)?)
}

fn analyze(m: &Model, mode: AnalysisMode, minimize: bool, budgets: &Budgets) -> Result<Value, Failure> {
    if m.is_markov_chain() {
        let a = mc_values(m, mode)?;
        return Ok(json!({
            "kind": "markov-chain",
            "values": render::values(m, &a.values),
            "initial_value": a.initial_value(m).to_text(),
            "report": render::mc_report(m, &a.report),
            "witness": a.report.witness.as_ref().map(|w| render::witness(m, w)),
            "scheduler": Value::Null,
        }));
    }
    let r = if minimize {
        mdp_min_values_with(m, mode, budgets)?
    } else {
        mdp_values_with(m, mode, budgets)?
    };
    Ok(json!({
        "kind": "mdp",
        "values": render::values(m, &r.values),
        "initial_value": r.initial_value(m).to_text(),
        "report": serde_json::to_value(&r.report).expect("report serializes"),
        "witness": r.witness.as_ref().map(|w| render::witness(m, w)),
        "scheduler": r.scheduler.as_ref().map(|s| s.to_named(m)),
    }))
}

fn initial_value(m: &Model, mode: AnalysisMode, budgets: &Budgets) -> Result<ExtendedValue, Failure> {
    Ok(if m.is_markov_chain() {
        mc_values(m, mode)?.initial_value(m).clone()
    } else {
        mdp_values_with(m, mode, budgets)?.initial_value(m).clone()
    })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let budgets = cli.budget.budgets();
    let ok = |doc| Outcome { doc, code: 0 };
    match cli.command {
        Command::Analyze { model, mode, minimize } => {
            let m = load(&model)?;
            let mut doc = analyze(&m, mode.into(), minimize, &budgets)?;
            doc["mode"] = json!(AnalysisMode::from(mode).to_string());
            doc["minimize"] = json!(minimize);
            Ok(ok(doc))
        }
        Command::Ssp { model, target } => {
            let m = load(&model)?;
            let t = m
                .state_by_name(&target)
                .ok_or_else(|| Failure::Usage(format!("unknown target state `{target}`")))?;
            let r = mssp_with(&m, t, &budgets)?;
            Ok(ok(json!({
                "target": target,
                "initial_value": r.value.to_text(),
                "scheduler": r.scheduler.as_ref().map(|s| s.to_named(&m)),
                "witness": r.witness.as_ref().map(|w| render::witness(&m, w)),
                "removed_states": r.removed_states.iter().map(|&s| m.name(s)).collect::<Vec<_>>(),
                "report": serde_json::to_value(&r.report).expect("report serializes"),
            })))
        }
        Command::Threshold { model, mode, theta } => {
            let m = load(&model)?;
            let theta_q = parse_rational(&theta).map_err(|e| Failure::Usage(format!("--theta: {e}")))?;
            let v = initial_value(&m, mode.into(), &budgets)?;
            let yes = v >= ExtendedValue::Finite(theta_q);
            Ok(Outcome {
                doc: json!({
                    "mode": AnalysisMode::from(mode).to_string(),
                    "theta": theta,
                    "initial_value": v.to_text(),
                    "answer": yes,
                }),
                code: if yes { 0 } else { 3 },
            })
        }
        Command::Simulate {
            model,
            scheduler,
            episodes,
            seed,
            horizon,
        } => {
            let m = load(&model)?;
            let sched = match scheduler {
                Some(p) => {
                    let named: BTreeMap<String, String> = serde_json::from_str(&read(&p)?)
                        .map_err(|e| Failure::Usage(format!("scheduler file {}: {e}", p.display())))?;
                    MdScheduler::from_named(&m, &named)?
                }
                None if m.is_markov_chain() => MdScheduler::first(&m),
                None => return Err(Failure::Usage("--scheduler is required for models with choices".into())),
            };
            let st = simulate_absorbing(&m, &sched, episodes, horizon, seed)?;
            Ok(ok(json!({
                "episodes": st.episodes,
                "seed": seed,
                "horizon": horizon,
                "mean": st.mean,
                "std_error": st.std_error,
                "truncated": st.truncated,
            })))
        }
        Command::Compare { lhs, rhs } => {
            let l = lhs.parse().map_err(|e| Failure::Usage(format!("lhs: {e}")))?;
            let r = rhs.parse().map_err(|e| Failure::Usage(format!("rhs: {e}")))?;
            let ord = csri_compare_with(&l, &r, &budgets.csri)?;
            Ok(ok(json!({
                "lhs": lhs,
                "rhs": rhs,
                "result": match ord {
                    std::cmp::Ordering::Less => "less",
                    std::cmp::Ordering::Equal => "equal",
                    std::cmp::Ordering::Greater => "greater",
                },
            })))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let (mut doc, code) = match run(cli) {
        Ok(o) => (o.doc, o.code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            (json!({ "error": { "kind": "usage", "message": msg } }), 2)
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("error: {e}");
            (json!({ "error": { "kind": e.kind(), "message": e.to_string() } }), 1)
        }
    };
    doc["timing"] = json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 });
    println!("{}", serde_json::to_string_pretty(&doc).expect("document serializes"));
    ExitCode::from(code)
}
