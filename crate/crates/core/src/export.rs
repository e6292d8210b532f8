//! Graphviz DOT snapshots of a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::graph::{LocatedGraph, Name};
use crate::rewrite::Rule;
use crate::strategy::{replay_snapshots, ReplayError, Trace};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One node statement per line, then one edge statement per line. Nodes
/// in the position are filled.
pub fn to_dot(g: &LocatedGraph, title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {{", quote(title));
    let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
    for n in g.graph.nodes() {
        let mut lines = vec![quote(&n.name)];
        for p in &n.ports {
            if let Some(s) = &p.state {
                lines.push(quote(&format!("{}={}", p.name, s)));
            }
        }
        let label: Vec<&str> = lines.iter().map(|l| &l[1..l.len() - 1]).collect();
        let style = if g.position.contains(&n.id) { ", style=filled, fillcolor=\"#9ecae1\"" } else { "" };
        let _ = writeln!(out, "  n{} [label=\"{}\"{}];", n.id, label.join("\\n"), style);
    }
    for e in g.graph.edges() {
        let (a, b) = e.ends();
        let _ = writeln!(
            out,
            "  n{} -- n{} [taillabel={}, headlabel={}];",
            a.node,
            b.node,
            quote(&a.port),
            quote(&b.port)
        );
    }
    out.push_str("}\n");
    out
}

/// Writes `step-0000.dot` for the initial graph and one more file for each
/// graph-changing step of the trace. An atomic group gives a single file.
pub fn export_snapshots(
    trace: &Trace,
    initial: &LocatedGraph,
    rules: &BTreeMap<Name, Rule>,
    outdir: &Path,
) -> Result<Vec<PathBuf>, ExportError> {
    let snaps = replay_snapshots(trace, initial, rules)?;
    std::fs::create_dir_all(outdir).map_err(|source| ExportError::Io { path: outdir.to_path_buf(), source })?;
    let mut written = Vec::with_capacity(snaps.len());
    for (i, g) in snaps.iter().enumerate() {
        let path = outdir.join(format!("step-{i:04}.dot"));
        std::fs::write(&path, to_dot(g, &format!("step {i}")))
            .map_err(|source| ExportError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{parse_strategy_unchecked, run, EngineConfig};
    use crate::text::{parse_graph_with, parse_rules};

    const RULES: &str = "SIGNATURE\nA : a\nB : b\nRULE ab\nLHS\n1 : A\nRHS\n2 : B\nM\n2\n";

    fn setup(strategy: &str) -> (LocatedGraph, Trace, BTreeMap<Name, Rule>) {
        let rf = parse_rules(RULES).unwrap();
        let g = parse_graph_with("NODES\n1 : A\n2 : A\n3 : A\nPOSITION\n1, 2, 3\n", &rf.signature).unwrap();
        let rules: BTreeMap<Name, Rule> = rf.rules.into_iter().map(|r| (r.name().clone(), r)).collect();
        let cfg = EngineConfig::new(rules.values().cloned());
        let r = run(&parse_strategy_unchecked(strategy).unwrap(), &g, &cfg).unwrap();
        (g, r.trace, rules)
    }

    fn count(strategy: &str) -> usize {
        let (g, t, rules) = setup(strategy);
        let dir = tempfile::tempdir().unwrap();
        export_snapshots(&t, &g, &rules, dir.path()).unwrap().len()
    }

    #[test]
    fn one_file_per_step_plus_the_start() {
        assert_eq!(count("id"), 1);
        assert_eq!(count("ab; ab; ab"), 4);
        assert_eq!(count("atomic(ab; ab; ab)"), 2);
    }

    #[test]
    fn dot_lists_nodes_then_edges() {
        let rf = parse_rules(RULES).unwrap();
        let g = parse_graph_with("SIGNATURE\nC : c1, c2\nNODES\n1 : A a=on\n2 : C\nEDGES\n1.a -- 2.c1\nPOSITION\n1\n", &rf.signature)
            .unwrap();
        let dot = to_dot(&g, "x");
        assert!(dot.contains("n1 [label=\"A\\na=on\", style=filled"));
        assert!(dot.contains("n1 -- n2 [taillabel=\"a\", headlabel=\"c1\"];"));
    }
}
