//! Strategy interpreter.
//!
//! Conditions of `if`/`while` and the branches of `+` run on copies of the
//! located graph; graph values are persistent, so a copy is a cheap clone.
//! Every evaluation step draws from a global budget, which turns runaway
//! strategies into [`EngineError::StepBudgetExhausted`] instead of a hang.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::ast::{AppExpr, PositionExpr, Pred, Scope, Strategy};
use super::trace::{RewriteKind, Trace, TraceEntry};
use crate::graph::{
    designated_successors, has_free_port, successors, Designation, IdSource, LocatedGraph, MissingDesignation,
    Name, Node, PortGraph, Position,
};
use crate::rewrite::{apply_multi, apply_parallel, rewrite_once, Outcome, ParallelMode, RewriteError, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Id,
    Fail,
}

impl std::fmt::Display for RunOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunOutcome::Id => "Id",
            RunOutcome::Fail => "Fail",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("step budget of {0} exhausted")]
    StepBudgetExhausted(u64),
    #[error("unknown rule `{0}`")]
    UnknownRule(Name),
    #[error("predicate refers to port `{0}`, which no node name declares")]
    UnknownPort(Name),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Designation(#[from] MissingDesignation),
    #[error("max_steps must be positive")]
    ZeroBudget,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub rules: BTreeMap<Name, Rule>,
    /// Designated port per node name, used by `nextsuc`.
    pub designation: Designation,
}

impl EngineConfig {
    pub fn new<I: IntoIterator<Item = Rule>>(rules: I) -> Self {
        EngineConfig {
            seed: 0,
            max_steps: 1_000_000,
            rules: rules.into_iter().map(|r| (r.name().clone(), r)).collect(),
            designation: Designation::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_designation(mut self, designation: Designation) -> Self {
        self.designation = designation;
        self
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: RunOutcome,
    pub graph: LocatedGraph,
    pub trace: Trace,
    /// Evaluation steps consumed.
    pub steps: u64,
}

#[derive(Clone)]
struct State {
    graph: LocatedGraph,
    ids: IdSource,
}

struct Engine<'a> {
    cfg: &'a EngineConfig,
    rng: ChaCha8Rng,
    steps: u64,
}

/// Whether `node` satisfies `pred`.
pub fn eval_pred(pred: &Pred, graph: &PortGraph, node: &Node) -> bool {
    match pred {
        Pred::Name(n) => node.name == *n,
        Pred::PortState(p, s) => node.state(p) == Some(s),
        Pred::Interface => has_free_port(graph, node),
        Pred::And(a, b) => eval_pred(a, graph, node) && eval_pred(b, graph, node),
        Pred::Or(a, b) => eval_pred(a, graph, node) || eval_pred(b, graph, node),
        Pred::Not(a) => !eval_pred(a, graph, node),
    }
}

/// Evaluates a position expression. Returns the new position, the random
/// draw if one was made, and the ids `setpos` had to drop.
pub fn eval_position<R: Rng + ?Sized>(
    t: &PositionExpr,
    host: &LocatedGraph,
    designation: &Designation,
    rng: &mut R,
) -> Result<(Position, Option<(usize, usize)>, Vec<crate::graph::NodeId>), MissingDesignation> {
    let mut draw = None;
    let mut dropped = Vec::new();
    fn go<R: Rng + ?Sized>(
        t: &PositionExpr,
        host: &LocatedGraph,
        designation: &Designation,
        rng: &mut R,
        draw: &mut Option<(usize, usize)>,
        dropped: &mut Vec<crate::graph::NodeId>,
    ) -> Result<Position, MissingDesignation> {
        let g = &host.graph;
        Ok(match t {
            PositionExpr::CrtPos => host.position.clone(),
            PositionExpr::AllSuc => successors(g, &host.position),
            PositionExpr::OneSuc => {
                let all: Vec<_> = successors(g, &host.position).into_iter().collect();
                if all.is_empty() {
                    Position::new()
                } else {
                    let k = rng.gen_range(0..all.len());
                    *draw = Some((k, all.len()));
                    Position::from([all[k]])
                }
            }
            PositionExpr::NextSuc => designated_successors(g, &host.position, designation)?,
            PositionExpr::SetPos(ids) => {
                let mut out = Position::new();
                for id in ids {
                    if g.contains_node(*id) {
                        out.insert(*id);
                    } else {
                        dropped.push(*id);
                    }
                }
                out
            }
            PositionExpr::Property(p, scope) => {
                let keep = |n: &&Node| eval_pred(p, g, n);
                match scope {
                    Scope::Graph => g.nodes().filter(keep).map(|n| n.id).collect(),
                    Scope::Pos => host
                        .position
                        .iter()
                        .filter_map(|id| g.node(*id))
                        .filter(keep)
                        .map(|n| n.id)
                        .collect(),
                }
            }
            PositionExpr::Union(a, b) => {
                let mut x = go(a, host, designation, rng, draw, dropped)?;
                x.extend(go(b, host, designation, rng, draw, dropped)?);
                x
            }
            PositionExpr::Inter(a, b) => {
                let x = go(a, host, designation, rng, draw, dropped)?;
                let y = go(b, host, designation, rng, draw, dropped)?;
                x.intersection(&y).copied().collect()
            }
            PositionExpr::Minus(a, b) => {
                let x = go(a, host, designation, rng, draw, dropped)?;
                let y = go(b, host, designation, rng, draw, dropped)?;
                x.difference(&y).copied().collect()
            }
            PositionExpr::Compl(a) => {
                let x = go(a, host, designation, rng, draw, dropped)?;
                g.node_ids().filter(|id| !x.contains(id)).collect()
            }
        })
    }
    let pos = go(t, host, designation, rng, &mut draw, &mut dropped)?;
    Ok((pos, draw, dropped))
}

impl Engine<'_> {
    fn tick(&mut self) -> Result<(), EngineError> {
        self.steps += 1;
        if self.steps > self.cfg.max_steps {
            return Err(EngineError::StepBudgetExhausted(self.cfg.max_steps));
        }
        Ok(())
    }

    fn rule_of<'c>(cfg: &'c EngineConfig, a: &AppExpr) -> Result<&'c Rule, EngineError> {
        match a {
            AppExpr::Rule(n) => cfg.rules.get(n).ok_or_else(|| EngineError::UnknownRule(n.clone())),
            // The parser only builds compound applications over rule names.
            other => Err(EngineError::UnknownRule(crate::graph::name(&other.to_string()))),
        }
    }

    fn application(
        &mut self,
        a: &AppExpr,
        st: &mut State,
        trace: &mut Vec<TraceEntry>,
    ) -> Result<RunOutcome, EngineError> {
        let cfg = self.cfg;
        let (kind, outcome) = match a {
            AppExpr::Id => return Ok(RunOutcome::Id),
            AppExpr::Fail => return Ok(RunOutcome::Fail),
            AppExpr::Rule(_) => {
                let rule = Self::rule_of(cfg, a)?;
                (RewriteKind::Single, rewrite_once(&st.graph, rule, &mut self.rng, &mut st.ids)?)
            }
            AppExpr::Par(x, y) | AppExpr::IPar(x, y) => {
                let rules = [Self::rule_of(cfg, x)?, Self::rule_of(cfg, y)?];
                let (kind, mode) = match a {
                    AppExpr::Par(..) => (RewriteKind::Parallel, ParallelMode::All),
                    _ => (RewriteKind::Interleave, ParallelMode::AtLeastOne),
                };
                (kind, apply_parallel(&st.graph, &rules, mode, &mut self.rng, &mut st.ids)?)
            }
            AppExpr::Multi(x, m, n) => {
                let rule = Self::rule_of(cfg, x)?;
                (RewriteKind::Multi, apply_multi(&st.graph, rule, *m, *n, &mut self.rng, &mut st.ids)?)
            }
        };
        match outcome {
            Outcome::Fail => Ok(RunOutcome::Fail),
            Outcome::Applied(step) => {
                trace.push(TraceEntry::Rewrite {
                    kind,
                    records: step.records,
                    draw: step.draw,
                    note: step.note,
                    before: st.graph.position.clone(),
                    after: step.graph.position.clone(),
                });
                st.graph = step.graph;
                Ok(RunOutcome::Id)
            }
        }
    }

    /// Runs `s` on a copy of `st`; returns the outcome with the copy and its trace.
    fn probe(&mut self, s: &Strategy, st: &State) -> Result<(RunOutcome, State, Vec<TraceEntry>), EngineError> {
        let mut copy = st.clone();
        let mut scratch = Vec::new();
        let out = self.eval(s, &mut copy, &mut scratch)?;
        Ok((out, copy, scratch))
    }

    fn eval(&mut self, s: &Strategy, st: &mut State, trace: &mut Vec<TraceEntry>) -> Result<RunOutcome, EngineError> {
        self.tick()?;
        match s {
            Strategy::Pos(t) => {
                let (after, draw, dropped) =
                    eval_position(t, &st.graph, &self.cfg.designation, &mut self.rng)?;
                if !dropped.is_empty() {
                    let ids: Vec<String> = dropped.iter().map(|i| i.to_string()).collect();
                    trace.push(TraceEntry::Note(format!("setpos dropped unknown ids {}", ids.join(","))));
                }
                trace.push(TraceEntry::Position {
                    expr: t.to_string(),
                    draw,
                    before: st.graph.position.clone(),
                    after: after.clone(),
                });
                st.graph.position = after;
                Ok(RunOutcome::Id)
            }
            Strategy::App(a) => self.application(a, st, trace),
            Strategy::Seq(a, b) => match self.eval(a, st, trace)? {
                RunOutcome::Fail => Ok(RunOutcome::Fail),
                RunOutcome::Id => self.eval(b, st, trace),
            },
            Strategy::Amb(a, b) => {
                for branch in [a, b] {
                    let (out, copy, scratch) = self.probe(branch, st)?;
                    if out == RunOutcome::Id {
                        *st = copy;
                        trace.extend(scratch);
                        return Ok(RunOutcome::Id);
                    }
                }
                Ok(RunOutcome::Fail)
            }
            Strategy::PPick(items) => {
                if items.is_empty() {
                    return Ok(RunOutcome::Fail);
                }
                let k = self.rng.gen_range(0..items.len());
                trace.push(TraceEntry::Choice { construct: "ppick", picked: k, of: items.len() });
                self.eval(&items[k], st, trace)
            }
            Strategy::If { cond, then, els } => {
                let (out, copy, scratch) = self.probe(cond, st)?;
                if out == RunOutcome::Id && then == cond {
                    // `then` is the condition itself: keep the probe's run
                    // rather than drawing a second, possibly failing, one.
                    *st = copy;
                    trace.extend(scratch);
                    Ok(RunOutcome::Id)
                } else if out == RunOutcome::Id {
                    self.eval(then, st, trace)
                } else {
                    self.eval(els, st, trace)
                }
            }
            Strategy::While { cond, body, min, max } => {
                let mut count: i64 = 0;
                loop {
                    if *max >= 0 && count >= *max {
                        break;
                    }
                    let word = self.rng.get_word_pos();
                    let (out, copy, scratch) = self.probe(cond, st)?;
                    if out == RunOutcome::Fail {
                        break;
                    }
                    let saved = st.clone();
                    let mark = trace.len();
                    if body == cond {
                        *st = copy;
                        trace.extend(scratch);
                    } else if self.eval(body, st, trace)? == RunOutcome::Fail {
                        *st = saved;
                        trace.truncate(mark);
                        break;
                    }
                    count += 1;
                    // Idling on an empty position: nothing changed and nothing was
                    // drawn, so every further iteration would be the same.
                    if *max < 0
                        && st.graph.position.is_empty()
                        && self.rng.get_word_pos() == word
                        && st.graph == saved.graph
                    {
                        trace.truncate(mark);
                        count = count.max(*min);
                        break;
                    }
                }
                Ok(if *min >= 0 && count < *min { RunOutcome::Fail } else { RunOutcome::Id })
            }
            Strategy::PNotEmpty => {
                Ok(if st.graph.position.is_empty() { RunOutcome::Fail } else { RunOutcome::Id })
            }
            Strategy::Atomic(inner) => {
                let mut sub = Vec::new();
                let out = self.eval(inner, st, &mut sub)?;
                if !sub.is_empty() {
                    trace.push(TraceEntry::Atomic(sub));
                }
                Ok(out)
            }
        }
    }
}

/// Checks rule names and predicate ports before a run.
pub fn check_strategy(s: &Strategy, cfg: &EngineConfig, graph: &PortGraph) -> Result<(), EngineError> {
    for n in s.rule_names() {
        if !cfg.rules.contains_key(&n) {
            return Err(EngineError::UnknownRule(n));
        }
    }
    let known_port = |p: &Name| {
        graph.signature().owner(p).is_some() || cfg.rules.values().any(|r| r.signature().owner(p).is_some())
    };
    fn preds<'a>(s: &'a Strategy, out: &mut Vec<&'a Pred>) {
        fn pos<'a>(t: &'a PositionExpr, out: &mut Vec<&'a Pred>) {
            match t {
                PositionExpr::Property(p, _) => out.push(p),
                PositionExpr::Union(a, b) | PositionExpr::Inter(a, b) | PositionExpr::Minus(a, b) => {
                    pos(a, out);
                    pos(b, out);
                }
                PositionExpr::Compl(a) => pos(a, out),
                _ => {}
            }
        }
        match s {
            Strategy::Pos(t) => pos(t, out),
            Strategy::Seq(a, b) | Strategy::Amb(a, b) => {
                preds(a, out);
                preds(b, out);
            }
            Strategy::PPick(v) => v.iter().for_each(|x| preds(x, out)),
            Strategy::While { cond, body, .. } => {
                preds(cond, out);
                preds(body, out);
            }
            Strategy::If { cond, then, els } => {
                preds(cond, out);
                preds(then, out);
                preds(els, out);
            }
            Strategy::Atomic(a) => preds(a, out),
            Strategy::App(_) | Strategy::PNotEmpty => {}
        }
    }
    fn ports<'a>(p: &'a Pred, out: &mut Vec<&'a Name>) {
        match p {
            Pred::PortState(port, _) => out.push(port),
            Pred::And(a, b) | Pred::Or(a, b) => {
                ports(a, out);
                ports(b, out);
            }
            Pred::Not(a) => ports(a, out),
            Pred::Name(_) | Pred::Interface => {}
        }
    }
    let mut ps = Vec::new();
    preds(s, &mut ps);
    for p in ps {
        let mut names = Vec::new();
        ports(p, &mut names);
        if let Some(bad) = names.into_iter().find(|n| !known_port(n)) {
            return Err(EngineError::UnknownPort(bad.clone()));
        }
    }
    Ok(())
}

/// Runs `strategy` on `host`.
pub fn run(strategy: &Strategy, host: &LocatedGraph, cfg: &EngineConfig) -> Result<RunResult, EngineError> {
    if cfg.max_steps == 0 {
        return Err(EngineError::ZeroBudget);
    }
    check_strategy(strategy, cfg, &host.graph)?;
    let mut engine = Engine { cfg, rng: ChaCha8Rng::seed_from_u64(cfg.seed), steps: 0 };
    let mut st = State { graph: host.clone(), ids: IdSource::after(&host.graph) };
    let mut entries = Vec::new();
    let outcome = engine.eval(strategy, &mut st, &mut entries)?;
    Ok(RunResult { outcome, graph: st.graph, trace: Trace { seed: cfg.seed, entries }, steps: engine.steps })
}
