//! Derivation traces and their replay.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{IdSource, LocatedGraph, Name, Position};
use crate::rewrite::{apply_all, RewriteError, RewriteRecord, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewriteKind {
    Single,
    Parallel,
    Interleave,
    Multi,
}

impl fmt::Display for RewriteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewriteKind::Single => "single",
            RewriteKind::Parallel => "parallel",
            RewriteKind::Interleave => "interleave",
            RewriteKind::Multi => "multi",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEntry {
    Rewrite {
        kind: RewriteKind,
        records: Vec<RewriteRecord>,
        /// (index drawn, number of candidates)
        draw: Option<(usize, usize)>,
        note: Option<String>,
        before: Position,
        after: Position,
    },
    Position { expr: String, draw: Option<(usize, usize)>, before: Position, after: Position },
    Choice { construct: &'static str, picked: usize, of: usize },
    Note(String),
    Atomic(Vec<TraceEntry>),
}

impl TraceEntry {
    /// Number of rule applications recorded here, including nested ones.
    pub fn rewrite_count(&self) -> usize {
        match self {
            TraceEntry::Rewrite { records, .. } => records.len(),
            TraceEntry::Atomic(v) => v.iter().map(TraceEntry::rewrite_count).sum(),
            _ => 0,
        }
    }

    /// True for entries that change the located graph.
    pub fn changes_graph(&self) -> bool {
        match self {
            TraceEntry::Rewrite { .. } | TraceEntry::Position { .. } => true,
            TraceEntry::Atomic(v) => v.iter().any(TraceEntry::changes_graph),
            _ => false,
        }
    }
}

/// Steps of one run, in execution order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub seed: u64,
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn rewrite_count(&self) -> usize {
        self.entries.iter().map(TraceEntry::rewrite_count).sum()
    }

    /// Applied rule names, in order, flattening atomic groups.
    pub fn applied_rules(&self) -> Vec<Name> {
        fn walk(es: &[TraceEntry], out: &mut Vec<Name>) {
            for e in es {
                match e {
                    TraceEntry::Rewrite { records, .. } => out.extend(records.iter().map(|r| r.rule.clone())),
                    TraceEntry::Atomic(v) => walk(v, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.entries, &mut out);
        out
    }
}

fn set(p: &Position) -> String {
    let v: Vec<String> = p.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", v.join(","))
}

fn ids<I: IntoIterator<Item = crate::graph::NodeId>>(it: I) -> String {
    let v: Vec<String> = it.into_iter().map(|i| i.to_string()).collect();
    format!("[{}]", v.join(","))
}

fn draw(d: &Option<(usize, usize)>) -> String {
    match d {
        Some((k, n)) => format!("{k}/{n}"),
        None => "-".into(),
    }
}

fn write_entries(f: &mut fmt::Formatter<'_>, prefix: &str, es: &[TraceEntry]) -> fmt::Result {
    for (i, e) in es.iter().enumerate() {
        let label = format!("{prefix}{}", i + 1);
        match e {
            TraceEntry::Rewrite { kind, records, draw: d, note, before, after } => {
                writeln!(f, "step {label} rewrite kind={kind} draw={} pos_before={} pos_after={}", draw(d), set(before), set(after))?;
                for r in records {
                    writeln!(
                        f,
                        "  apply rule={} match={} created={} deleted={} kept={}",
                        r.rule,
                        r.matching,
                        ids(r.created_ids()),
                        ids(r.deleted.iter().copied()),
                        ids(r.kept.iter().copied())
                    )?;
                }
                if let Some(n) = note {
                    writeln!(f, "  note {n}")?;
                }
            }
            TraceEntry::Position { expr, draw: d, before, after } => {
                writeln!(f, "step {label} position expr={expr} draw={} pos_before={} pos_after={}", draw(d), set(before), set(after))?;
            }
            TraceEntry::Choice { construct, picked, of } => {
                writeln!(f, "step {label} choice construct={construct} draw={picked}/{of}")?;
            }
            TraceEntry::Note(n) => writeln!(f, "step {label} note {n}")?,
            TraceEntry::Atomic(v) => {
                writeln!(f, "step {label} atomic begin")?;
                write_entries(f, &format!("{label}."), v)?;
                writeln!(f, "step {label} atomic end")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trace seed={} steps={}", self.seed, self.entries.len())?;
        write_entries(f, "", &self.entries)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("step {step}: unknown rule `{rule}`")]
    UnknownRule { step: String, rule: Name },
    #[error("step {step}: {source}")]
    Rewrite { step: String, source: RewriteError },
    #[error("step {step}: replay diverged ({what})")]
    Diverged { step: String, what: String },
}

fn replay_entry(
    e: &TraceEntry,
    label: &str,
    g: &mut LocatedGraph,
    ids: &mut IdSource,
    rules: &BTreeMap<Name, Rule>,
) -> Result<(), ReplayError> {
    let diverged = |what: String| ReplayError::Diverged { step: label.to_string(), what };
    match e {
        TraceEntry::Rewrite { records, before, after, .. } => {
            if g.position != *before {
                return Err(diverged("position before the step differs".into()));
            }
            let mut apps = Vec::with_capacity(records.len());
            for r in records {
                let rule = rules
                    .get(&r.rule)
                    .ok_or_else(|| ReplayError::UnknownRule { step: label.to_string(), rule: r.rule.clone() })?;
                apps.push((rule, r.matching.clone()));
            }
            let (next, got) = apply_all(g, &apps, ids)
                .map_err(|source| ReplayError::Rewrite { step: label.to_string(), source })?;
            for (want, have) in records.iter().zip(&got) {
                if want.created != have.created {
                    return Err(diverged(format!("rule `{}` created different node ids", want.rule)));
                }
            }
            if next.position != *after {
                return Err(diverged("position after the step differs".into()));
            }
            *g = next;
        }
        TraceEntry::Position { before, after, .. } => {
            if g.position != *before {
                return Err(diverged("position before the step differs".into()));
            }
            if !after.iter().all(|id| g.graph.contains_node(*id)) {
                return Err(diverged("position names a missing node".into()));
            }
            g.position = after.clone();
        }
        TraceEntry::Atomic(v) => {
            for (i, sub) in v.iter().enumerate() {
                replay_entry(sub, &format!("{label}.{}", i + 1), g, ids, rules)?;
            }
        }
        TraceEntry::Choice { .. } | TraceEntry::Note(_) => {}
    }
    Ok(())
}

/// Located graphs after each top-level graph-changing step, starting with
/// `initial` itself.
pub fn replay_snapshots(
    trace: &Trace,
    initial: &LocatedGraph,
    rules: &BTreeMap<Name, Rule>,
) -> Result<Vec<LocatedGraph>, ReplayError> {
    let mut g = initial.clone();
    let mut ids = IdSource::after(&initial.graph);
    let mut out = vec![g.clone()];
    for (i, e) in trace.entries.iter().enumerate() {
        replay_entry(e, &(i + 1).to_string(), &mut g, &mut ids, rules)?;
        if e.changes_graph() {
            out.push(g.clone());
        }
    }
    Ok(out)
}

/// Re-applies the recorded matches to `initial` and returns the final graph.
pub fn replay(
    trace: &Trace,
    initial: &LocatedGraph,
    rules: &BTreeMap<Name, Rule>,
) -> Result<LocatedGraph, ReplayError> {
    let mut g = initial.clone();
    let mut ids = IdSource::after(&initial.graph);
    for (i, e) in trace.entries.iter().enumerate() {
        replay_entry(e, &(i + 1).to_string(), &mut g, &mut ids, rules)?;
    }
    Ok(g)
}
