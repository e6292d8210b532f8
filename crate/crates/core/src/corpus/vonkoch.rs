//! The Von Koch curve drawn on a triangle. The rule walks round the
//! triangle one segment at a time, so every segment of one level is split
//! before any segment of the next.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{LocatedGraph, NodeId};
use crate::rewrite::{RewriteRecord, Rule};
use crate::strategy::{Trace, TraceEntry};
use crate::text::{parse_graph_with, parse_rules, RuleFile};

pub const RULES: &str = include_str!("../../corpus/vonkoch.rules");
pub const GRAPH: &str = include_str!("../../corpus/vonkoch.graph");

pub fn strategy(iterations: u32) -> String {
    format!("while(vonKoch)do(vonKoch)min(0)max({iterations})")
}

pub fn rule_file() -> RuleFile {
    parse_rules(RULES).expect("bundled von Koch rules parse")
}

/// The triangle with one agent in the position.
pub fn triangle() -> LocatedGraph {
    parse_graph_with(GRAPH, &rule_file().signature).expect("bundled triangle parses")
}

/// The same rule with every right-hand-side agent kept in the position.
pub fn control_rule() -> Rule {
    let rule = rule_file().rules.remove(0);
    let all: BTreeSet<NodeId> = rule.rhs().node_ids().collect();
    rule.with_keep(all).expect("right-hand-side ids")
}

/// The triangle with every agent in the position.
pub fn control_triangle() -> LocatedGraph {
    LocatedGraph::everywhere(triangle().graph)
}

fn records(entries: &[TraceEntry], out: &mut Vec<RewriteRecord>) {
    for e in entries {
        match e {
            TraceEntry::Rewrite { records: rs, .. } => out.extend(rs.iter().cloned()),
            TraceEntry::Atomic(v) => records(v, out),
            _ => {}
        }
    }
}

/// Depth of every segment after the run, keyed by the agent at its left
/// end. The triangle's sides have depth 0 and each split yields four
/// segments one level deeper.
pub fn segment_depths(initial: &LocatedGraph, trace: &Trace) -> BTreeMap<NodeId, u32> {
    let mut depth: BTreeMap<NodeId, u32> = initial.graph.node_ids().map(|id| (id, 0)).collect();
    let mut rs = Vec::new();
    records(&trace.entries, &mut rs);
    for r in rs {
        let x = r.matching.get(NodeId(1)).expect("left end");
        let y = r.matching.get(NodeId(2)).expect("right end");
        let d = depth.remove(&x).unwrap_or(0);
        let rest = depth.remove(&y).unwrap_or(0);
        for (rid, host) in &r.created {
            if rid.0 == 7 {
                depth.insert(*host, rest);
            } else {
                depth.insert(*host, d + 1);
            }
        }
    }
    depth
}

/// True when no two segments differ by more than one level.
pub fn balanced(depths: &BTreeMap<NodeId, u32>) -> bool {
    match (depths.values().min(), depths.values().max()) {
        (Some(lo), Some(hi)) => hi - lo <= 1,
        _ => true,
    }
}
