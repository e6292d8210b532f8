//! Example programs: rule sets, initial graphs, strategies and oracles.
//!
//! The bundled cases live in `corpus/` next to this crate and are listed in
//! `corpus/manifest.toml`. [`run_case`] runs one and checks its result
//! against an oracle that does not use the rewriting engine.

pub mod arithmetic;
pub mod labyrinth;
pub mod pacman;
pub mod vonkoch;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::graph::{validate, LocatedGraph, NodeId, PortGraph, PortRef};
use crate::strategy::{parse_strategy, replay, run, EngineConfig, EngineError, RunOutcome, Strategy};
use crate::text::{parse_graph_with, parse_rules, ParseError, RuleFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Arithmetic,
    VonKoch,
    Pacman,
    Labyrinth,
}

/// What a case should produce. Unset fields are not checked.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// "Id" or "Fail".
    pub outcome: Option<String>,
    /// Decoded integer of an arithmetic net.
    pub value: Option<i64>,
    /// Number of von Koch rule applications.
    pub iterations: Option<usize>,
    /// The run must hit the step budget.
    #[serde(default)]
    pub exhausts: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    kind: Kind,
    rules: String,
    graph: String,
    strategy: String,
    seeds: Vec<u64>,
    max_steps: Option<u64>,
    #[serde(default)]
    expect: Expect,
}

#[derive(Deserialize)]
struct Manifest {
    case: Vec<Entry>,
}

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub name: String,
    pub kind: Kind,
    pub rules: RuleFile,
    pub graph: LocatedGraph,
    pub strategy: Strategy,
    pub strategy_text: String,
    pub seeds: Vec<u64>,
    pub max_steps: u64,
    pub expect: Expect,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("manifest: {0}")]
    Manifest(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("case `{case}`: {message}")]
    Strategy { case: String, message: String },
    #[error("case `{case}`: {source}")]
    Engine { case: String, source: EngineError },
}

/// Directory holding the bundled corpus.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn read(path: PathBuf) -> Result<String, CorpusError> {
    std::fs::read_to_string(&path).map_err(|source| CorpusError::Io { path, source })
}

/// Loads every case listed in `<dir>/manifest.toml`.
pub fn load_manifest(dir: &Path) -> Result<Vec<CorpusCase>, CorpusError> {
    let manifest: Manifest = toml::from_str(&read(dir.join("manifest.toml"))?)?;
    let mut out = Vec::new();
    for e in manifest.case {
        let rules_path = dir.join(&e.rules);
        let rules = parse_rules(&read(rules_path.clone())?)
            .map_err(|source| CorpusError::Parse { path: rules_path, source })?;
        let graph_path = dir.join(&e.graph);
        let graph = parse_graph_with(&read(graph_path.clone())?, &rules.signature)
            .map_err(|source| CorpusError::Parse { path: graph_path, source })?;
        let strategy_text = read(dir.join(&e.strategy))?;
        let known: BTreeSet<String> = rules.rules.iter().map(|r| r.name().to_string()).collect();
        let strategy = parse_strategy(&strategy_text, &known)
            .map_err(|err| CorpusError::Strategy { case: e.name.clone(), message: err.to_string() })?;
        out.push(CorpusCase {
            name: e.name,
            kind: e.kind,
            rules,
            graph,
            strategy,
            strategy_text,
            seeds: e.seeds,
            max_steps: e.max_steps.unwrap_or(1_000_000),
            expect: e.expect,
        });
    }
    Ok(out)
}

/// The bundled cases.
pub fn bundled() -> Result<Vec<CorpusCase>, CorpusError> {
    load_manifest(&bundled_dir())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub case: String,
    pub seed: u64,
    /// `None` when the run hit the step budget.
    pub outcome: Option<RunOutcome>,
    pub steps: u64,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcome = self.outcome.map_or("budget exhausted".to_string(), |o| o.to_string());
        writeln!(f, "{} seed={} outcome={} steps={}", self.case, self.seed, outcome, self.steps)?;
        for c in &self.checks {
            writeln!(f, "  {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name, passed, detail: detail.into() }
}

/// Cells on a shortest path from the Pather's cell to the exit cell, read
/// straight off a labyrinth graph.
pub fn maze_shortest_path(g: &PortGraph) -> Option<usize> {
    let pather = g.nodes_named("Pather").next()?;
    let start = g.partner(&PortRef::new(pather.id, "pa_pos"))?.node;
    let mut dist: BTreeMap<NodeId, usize> = BTreeMap::from([(start, 1)]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        let node = g.node(c)?;
        if node.state("lp").is_some_and(|s| &**s == "exit") {
            return Some(dist[&c]);
        }
        for p in ["ln", "le", "ls", "lw"] {
            if let Some(q) = g.partner(&PortRef::new(c, p)) {
                if !dist.contains_key(&q.node) {
                    dist.insert(q.node, dist[&c] + 1);
                    queue.push_back(q.node);
                }
            }
        }
    }
    None
}

/// Runs a case with one seed and checks the result.
pub fn run_case(case: &CorpusCase, seed: u64) -> Result<Report, CorpusError> {
    let cfg = EngineConfig::new(case.rules.rules.iter().cloned()).with_seed(seed).with_max_steps(case.max_steps);
    let mut report = Report { case: case.name.clone(), seed, outcome: None, steps: 0, checks: Vec::new() };
    let result = match run(&case.strategy, &case.graph, &cfg) {
        Ok(r) => r,
        Err(EngineError::StepBudgetExhausted(n)) => {
            report.steps = n;
            report.checks.push(check("step budget", case.expect.exhausts, format!("exhausted after {n} steps")));
            return Ok(report);
        }
        Err(source) => return Err(CorpusError::Engine { case: case.name.clone(), source }),
    };
    report.outcome = Some(result.outcome);
    report.steps = result.steps;
    let g = &result.graph.graph;
    if case.expect.exhausts {
        report.checks.push(check("step budget", false, "finished within the budget"));
    }
    if let Some(want) = &case.expect.outcome {
        report.checks.push(check("outcome", result.outcome.to_string() == *want, format!("want {want}")));
    }
    let problems = validate(g);
    report.checks.push(check("well formed", problems.is_empty(), format!("{} violations", problems.len())));
    let replayed = replay(&result.trace, &case.graph, &cfg.rules);
    let same = replayed.as_ref().is_ok_and(|r| *r == result.graph);
    report.checks.push(check("replay", same, replayed.err().map_or("same final graph".into(), |e| e.to_string())));
    match case.kind {
        Kind::Arithmetic => {
            let got = arithmetic::decode(g);
            if let Some(want) = case.expect.value {
                report.checks.push(check("value", got.as_ref() == Ok(&want), format!("want {want}, got {got:?}")));
            }
        }
        Kind::VonKoch => {
            if let Some(m) = case.expect.iterations {
                let want = case.graph.graph.node_count() + 3 * m;
                report.checks.push(check(
                    "node count",
                    g.node_count() == want,
                    format!("want {want}, got {}", g.node_count()),
                ));
            }
            report.checks.push(check(
                "single position",
                result.graph.position.len() == 1,
                format!("{} nodes in P", result.graph.position.len()),
            ));
            let depths = vonkoch::segment_depths(&case.graph, &result.trace);
            report.checks.push(check("balanced", vonkoch::balanced(&depths), format!("{} segments", depths.len())));
        }
        Kind::Pacman => match pacman::audit(&case.graph, &result.trace, &cfg.rules) {
            Ok(a) => {
                report.checks.push(check("game over", a.game_over, format!("{} rounds", a.rounds)));
                report.checks.push(check(
                    "actors in position",
                    a.bad_positions.is_empty(),
                    format!("rounds {:?} differ", a.bad_positions),
                ));
                report.checks.push(check(
                    "one ghost action per round",
                    a.max_ghost_actions <= 1,
                    format!("max {}", a.max_ghost_actions),
                ));
            }
            Err(e) => report.checks.push(check("audit", false, e.to_string())),
        },
        Kind::Labyrinth => {
            let want = maze_shortest_path(&case.graph.graph);
            let got = labyrinth::path_cells(g);
            report.checks.push(check("shortest path", want == Some(got), format!("want {want:?}, got {got}")));
        }
    }
    Ok(report)
}
