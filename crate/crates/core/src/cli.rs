//! The `portstrat` command line.
//!
//! Exit codes: 0 when the strategy ends in `Id`, 1 when it ends in `Fail`,
//! 2 for unreadable or invalid input, 3 when the step budget runs out.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Parser};

use crate::export::export_snapshots;
use crate::graph::{validate, Designation, PSignature};
use crate::strategy::{check_strategy, parse_strategy, run, EngineConfig, EngineError, RunOutcome};
use crate::text::{parse_graph_with, parse_rules_with, print_graph};

pub const EXIT_ID: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Run a strategy over a port graph.
#[derive(Debug, Parser)]
#[command(name = "portstrat", version)]
#[command(group(ArgGroup::new("strat").required(true).args(["strategy", "strategy_file"])))]
pub struct Args {
    /// Initial located graph.
    #[arg(long)]
    pub graph: PathBuf,
    /// Rule file; may be given more than once.
    #[arg(long = "rules", required = true)]
    pub rules: Vec<PathBuf>,
    /// Strategy text.
    #[arg(long)]
    pub strategy: Option<String>,
    /// File holding the strategy text.
    #[arg(long)]
    pub strategy_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Where to write the final graph; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the trace.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Directory for DOT snapshots of every step.
    #[arg(long)]
    pub export_dir: Option<PathBuf>,
    /// Check the inputs and stop.
    #[arg(long)]
    pub validate_only: bool,
}

struct Failure(i32, String);

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EXIT_INVALID, msg.into())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn execute(args: &Args, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let mut sig = PSignature::new();
    let mut rules = Vec::new();
    let mut designation = Designation::new();
    for path in &args.rules {
        let rf = parse_rules_with(&read(path)?, &sig).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        sig = (*rf.signature).clone();
        designation.extend(rf.agents.iter().map(|a| (a.symbol.clone(), a.principal.clone())));
        rules.extend(rf.rules);
    }
    let mut seen = BTreeSet::new();
    for r in &rules {
        if !seen.insert(r.name().clone()) {
            return Err(invalid(format!("rule `{}` is defined twice", r.name())));
        }
    }
    let graph = parse_graph_with(&read(&args.graph)?, &sig)
        .map_err(|e| invalid(format!("{}: {e}", args.graph.display())))?;
    let problems = validate(&graph.graph);
    if let Some(p) = problems.first() {
        return Err(invalid(format!("{}: {p}", args.graph.display())));
    }
    let text = match (&args.strategy, &args.strategy_file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => return Err(invalid("no strategy given")),
    };
    let known: BTreeSet<String> = seen.iter().map(|n| n.to_string()).collect();
    let strategy = parse_strategy(&text, &known).map_err(|e| invalid(format!("strategy: {e}")))?;
    let cfg = EngineConfig::new(rules).with_seed(args.seed).with_max_steps(args.max_steps).with_designation(designation);
    check_strategy(&strategy, &cfg, &graph.graph).map_err(|e| invalid(format!("strategy: {e}")))?;
    if args.validate_only {
        let _ = writeln!(err, "inputs are valid");
        return Ok(EXIT_ID);
    }
    let result = match run(&strategy, &graph, &cfg) {
        Ok(r) => r,
        Err(EngineError::StepBudgetExhausted(n)) => {
            return Err(Failure(EXIT_BUDGET, format!("step budget of {n} exhausted")));
        }
        Err(e) => return Err(invalid(e.to_string())),
    };
    let printed = print_graph(&result.graph);
    match &args.out {
        Some(p) => write(p, &printed)?,
        None => {
            let _ = out.write_all(printed.as_bytes());
        }
    }
    if let Some(p) = &args.trace {
        write(p, &result.trace.to_string())?;
    }
    if let Some(dir) = &args.export_dir {
        export_snapshots(&result.trace, &graph, &cfg.rules, dir).map_err(|e| invalid(e.to_string()))?;
    }
    let _ = writeln!(err, "outcome {} after {} steps", result.outcome, result.steps);
    Ok(match result.outcome {
        RunOutcome::Id => EXIT_ID,
        RunOutcome::Fail => EXIT_FAIL,
    })
}

/// Runs the command line with explicit arguments and streams; returns the
/// exit code.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_ID };
        }
    };
    match execute(&args, out, err) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}
