//! Injective port-graph morphisms from a left-hand side into a located host.
//!
//! Search is anchored on the host position: every match must send at least
//! one left-hand-side node into the position, so the backtracking starts from
//! position members and grows along left-hand-side edges. Results are
//! deduplicated and returned in canonical order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::graph::{LocatedGraph, Name, NodeId, PortGraph, PortRef};

/// Reserved state token in a pattern meaning "the host port carries no state".
pub const NO_STATE: &str = "_none";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PortConstraint {
    MustBeConnected,
    MustBeFree,
    #[default]
    Any,
}

/// A left-hand side: a port graph plus per-port connectivity constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    graph: PortGraph,
    constraints: BTreeMap<PortRef, PortConstraint>,
    /// Nodes sorted by (name, id).
    order: Vec<NodeId>,
    /// Ports that carry an edge inside the pattern.
    internal: BTreeSet<PortRef>,
}

impl Pattern {
    pub fn new(graph: PortGraph, constraints: BTreeMap<PortRef, PortConstraint>) -> Self {
        let mut order: Vec<(Name, NodeId)> = graph.nodes().map(|n| (n.name.clone(), n.id)).collect();
        order.sort();
        let internal = graph
            .edges()
            .flat_map(|e| {
                let (a, b) = e.ends();
                [a.clone(), b.clone()]
            })
            .collect();
        let constraints = constraints
            .into_iter()
            .filter(|(_, c)| *c != PortConstraint::Any)
            .collect();
        Pattern { graph, constraints, order: order.into_iter().map(|(_, id)| id).collect(), internal }
    }

    pub fn unconstrained(graph: PortGraph) -> Self {
        Self::new(graph, BTreeMap::new())
    }

    pub fn graph(&self) -> &PortGraph {
        &self.graph
    }

    pub fn constraint(&self, port: &PortRef) -> PortConstraint {
        self.constraints.get(port).copied().unwrap_or_default()
    }

    pub fn constraints(&self) -> &BTreeMap<PortRef, PortConstraint> {
        &self.constraints
    }

    /// Canonical node order: by name, then id.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    /// True when `port` is an endpoint of a pattern edge.
    pub fn is_internal(&self, port: &PortRef) -> bool {
        self.internal.contains(port)
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// An injective node map from a pattern into a host, listed in the
/// pattern's canonical node order. Ports map to equally-named ports.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pairs: Vec<(NodeId, NodeId)>,
}

impl Match {
    pub fn from_pairs(pairs: Vec<(NodeId, NodeId)>) -> Self {
        Match { pairs }
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn get(&self, lhs: NodeId) -> Option<NodeId> {
        self.pairs.iter().find(|(l, _)| *l == lhs).map(|(_, h)| *h)
    }

    pub fn image(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.pairs.iter().map(|(_, h)| *h)
    }

    /// Host ids in canonical pattern order; the sort key for match lists.
    pub fn host_tuple(&self) -> Vec<NodeId> {
        self.image().collect()
    }

    pub fn overlaps(&self, other: &Match) -> bool {
        let mine: BTreeSet<NodeId> = self.image().collect();
        other.image().any(|h| mine.contains(&h))
    }
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (l, h)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}->{h}")?;
        }
        write!(f, "]")
    }
}

/// Per-node compatibility: name, states and port constraints.
pub(crate) fn node_compatible(pattern: &Pattern, lhs: NodeId, host: &PortGraph, cand: NodeId) -> bool {
    let (Some(l), Some(h)) = (pattern.graph.node(lhs), host.node(cand)) else {
        return false;
    };
    if l.name != h.name {
        return false;
    }
    for lp in &l.ports {
        let Some(hp) = h.port(&lp.name) else { return false };
        match lp.state.as_deref() {
            None => {}
            Some(NO_STATE) => {
                if hp.state.is_some() {
                    return false;
                }
            }
            Some(s) => {
                if hp.state.as_deref() != Some(s) {
                    return false;
                }
            }
        }
        let here = PortRef { node: cand, port: lp.name.clone() };
        match pattern.constraint(&PortRef { node: lhs, port: lp.name.clone() }) {
            PortConstraint::Any => {}
            PortConstraint::MustBeFree => {
                if !host.is_free(&here) {
                    return false;
                }
            }
            PortConstraint::MustBeConnected => {
                if host.is_free(&here) {
                    return false;
                }
            }
        }
    }
    true
}

struct Search<'a> {
    pattern: &'a Pattern,
    host: &'a PortGraph,
    by_name: BTreeMap<&'a str, Vec<NodeId>>,
    assigned: BTreeMap<NodeId, NodeId>,
    used: BTreeSet<NodeId>,
    found: BTreeSet<Vec<NodeId>>,
    stop_at_first: bool,
}

impl<'a> Search<'a> {
    fn new(pattern: &'a Pattern, host: &'a PortGraph, stop_at_first: bool) -> Self {
        let mut by_name: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
        for n in host.nodes() {
            by_name.entry(&n.name).or_default().push(n.id);
        }
        Search {
            pattern,
            host,
            by_name,
            assigned: BTreeMap::new(),
            used: BTreeSet::new(),
            found: BTreeSet::new(),
            stop_at_first,
        }
    }

    /// Pattern nodes in search order: breadth-first from `anchor`, then the
    /// remaining components in canonical order.
    fn search_order(&self, anchor: NodeId) -> Vec<NodeId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let starts = std::iter::once(anchor).chain(self.pattern.order.iter().copied());
        for start in starts {
            if !seen.insert(start) {
                continue;
            }
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                out.push(u);
                let node = self.pattern.graph.node(u).expect("pattern node");
                for p in &node.ports {
                    for other in self.pattern.graph.partners(&PortRef { node: u, port: p.name.clone() }) {
                        if seen.insert(other.node) {
                            queue.push_back(other.node);
                        }
                    }
                }
            }
        }
        out
    }

    /// Every pattern edge incident to `lhs` whose other end is assigned must
    /// exist in the host.
    fn edges_consistent(&self, lhs: NodeId, cand: NodeId) -> bool {
        let node = self.pattern.graph.node(lhs).expect("pattern node");
        for p in &node.ports {
            let lp = PortRef { node: lhs, port: p.name.clone() };
            for other in self.pattern.graph.partners(&lp) {
                let mapped = if other.node == lhs { Some(cand) } else { self.assigned.get(&other.node).copied() };
                if let Some(h) = mapped {
                    let hp = PortRef { node: cand, port: p.name.clone() };
                    let want = PortRef { node: h, port: other.port.clone() };
                    if !self.host.partners(&hp).contains(&want) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Host candidates for `lhs`, narrowed through an already-assigned neighbour when possible.
    fn candidates(&self, lhs: NodeId) -> Vec<NodeId> {
        let node = self.pattern.graph.node(lhs).expect("pattern node");
        for p in &node.ports {
            for other in self.pattern.graph.partners(&PortRef { node: lhs, port: p.name.clone() }) {
                if let Some(h) = self.assigned.get(&other.node) {
                    let hp = PortRef { node: *h, port: other.port.clone() };
                    return self
                        .host
                        .partners(&hp)
                        .iter()
                        .filter(|q| q.port == p.name)
                        .map(|q| q.node)
                        .collect();
                }
            }
        }
        self.by_name.get(&*node.name).cloned().unwrap_or_default()
    }

    fn extend(&mut self, order: &[NodeId], depth: usize) {
        if self.stop_at_first && !self.found.is_empty() {
            return;
        }
        if depth == order.len() {
            let tuple = self.pattern.order.iter().map(|l| self.assigned[l]).collect();
            self.found.insert(tuple);
            return;
        }
        let lhs = order[depth];
        for cand in self.candidates(lhs) {
            if self.try_assign(lhs, cand) {
                self.extend(order, depth + 1);
                self.unassign(lhs, cand);
            }
        }
    }

    fn try_assign(&mut self, lhs: NodeId, cand: NodeId) -> bool {
        if self.used.contains(&cand)
            || !node_compatible(self.pattern, lhs, self.host, cand)
            || !self.edges_consistent(lhs, cand)
        {
            return false;
        }
        self.assigned.insert(lhs, cand);
        self.used.insert(cand);
        true
    }

    fn unassign(&mut self, lhs: NodeId, cand: NodeId) {
        self.assigned.remove(&lhs);
        self.used.remove(&cand);
    }

    fn run(mut self, position: &BTreeSet<NodeId>) -> BTreeSet<Vec<NodeId>> {
        if self.pattern.is_empty() {
            return self.found;
        }
        let anchors: Vec<NodeId> = self.pattern.order.clone();
        for anchor in anchors {
            let order = self.search_order(anchor);
            let anchor_name = self.pattern.graph.node(anchor).expect("pattern node").name.clone();
            for &h in position {
                if self.host.node(h).map(|n| &n.name) != Some(&anchor_name) {
                    continue;
                }
                if self.try_assign(anchor, h) {
                    self.extend(&order, 1);
                    self.unassign(anchor, h);
                }
                if self.stop_at_first && !self.found.is_empty() {
                    return self.found;
                }
            }
        }
        self.found
    }
}

fn to_match(pattern: &Pattern, tuple: Vec<NodeId>) -> Match {
    Match { pairs: pattern.order.iter().copied().zip(tuple).collect() }
}

/// All injective matches of `lhs` overlapping the host position, in canonical order.
pub fn find_matches(lhs: &Pattern, host: &LocatedGraph) -> Vec<Match> {
    Search::new(lhs, &host.graph, false)
        .run(&host.position)
        .into_iter()
        .map(|t| to_match(lhs, t))
        .collect()
}

pub fn match_exists(lhs: &Pattern, host: &LocatedGraph) -> bool {
    !Search::new(lhs, &host.graph, true).run(&host.position).is_empty()
}

/// Tuples of pairwise node-disjoint matches, one per pattern, each
/// overlapping the position; lexicographic canonical order.
pub fn find_disjoint_tuples(lhss: &[&Pattern], host: &LocatedGraph) -> Vec<Vec<Match>> {
    let per: Vec<Vec<Match>> = lhss.iter().map(|p| find_matches(p, host)).collect();
    let mut out = Vec::new();
    let mut current: Vec<Match> = Vec::new();
    let mut used: BTreeSet<NodeId> = BTreeSet::new();
    fn rec(
        per: &[Vec<Match>],
        i: usize,
        current: &mut Vec<Match>,
        used: &mut BTreeSet<NodeId>,
        out: &mut Vec<Vec<Match>>,
    ) {
        if i == per.len() {
            out.push(current.clone());
            return;
        }
        for m in &per[i] {
            if m.image().any(|h| used.contains(&h)) {
                continue;
            }
            used.extend(m.image());
            current.push(m.clone());
            rec(per, i + 1, current, used, out);
            current.pop();
            for h in m.image() {
                used.remove(&h);
            }
        }
    }
    if !per.is_empty() {
        rec(&per, 0, &mut current, &mut used, &mut out);
    }
    out
}
