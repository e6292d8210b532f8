//! Port graphs: nodes with named, stateful ports and edges attached port to port.
//!
//! A [`PortGraph`] is a persistent value. Cloning is cheap (the node and edge
//! maps share structure), so the engine can probe a strategy on a copy of the
//! graph without paying for a deep copy up front.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Interned name used for node names, port names and state tokens.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// Node identifier, unique within one graph and never reused during a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A port of a specific node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub node: NodeId,
    pub port: Name,
}

impl PortRef {
    pub fn new(node: NodeId, port: &str) -> Self {
        PortRef { node, port: name(port) }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("node name `{0}` declared with an empty port set")]
    EmptyPortSet(Name),
    #[error("port `{port}` of `{node}` is already owned by `{owner}`")]
    PortClash { node: Name, port: Name, owner: Name },
    #[error("node name `{0}` declared twice with different port sets")]
    Redeclared(Name),
}

/// Assignment of a finite port-name set to every node name. Port names of
/// distinct node names are pairwise disjoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PSignature {
    entries: BTreeMap<Name, BTreeSet<Name>>,
    owners: BTreeMap<Name, Name>,
}

impl PSignature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `node` with `ports`. Re-declaring an identical entry is a no-op.
    pub fn declare<I, S>(&mut self, node: &str, ports: I) -> Result<(), SignatureError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let node = name(node);
        let ports: BTreeSet<Name> = ports.into_iter().map(|p| name(p.as_ref())).collect();
        if ports.is_empty() {
            return Err(SignatureError::EmptyPortSet(node));
        }
        if let Some(existing) = self.entries.get(&node) {
            return if *existing == ports {
                Ok(())
            } else {
                Err(SignatureError::Redeclared(node))
            };
        }
        for p in &ports {
            if let Some(owner) = self.owners.get(p) {
                return Err(SignatureError::PortClash {
                    node: node.clone(),
                    port: p.clone(),
                    owner: owner.clone(),
                });
            }
        }
        for p in &ports {
            self.owners.insert(p.clone(), node.clone());
        }
        self.entries.insert(node, ports);
        Ok(())
    }

    /// Adds every entry of `other`, failing on clashes.
    pub fn merge(&mut self, other: &PSignature) -> Result<(), SignatureError> {
        for (node, ports) in &other.entries {
            self.declare(node, ports.iter())?;
        }
        Ok(())
    }

    pub fn ports(&self, node: &str) -> Option<&BTreeSet<Name>> {
        self.entries.get(node)
    }

    pub fn owner(&self, port: &str) -> Option<&Name> {
        self.owners.get(port)
    }

    pub fn contains(&self, node: &str) -> bool {
        self.entries.contains_key(node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &BTreeSet<Name>)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every entry of `self` also appears, identically, in `other`.
    pub fn is_subset_of(&self, other: &PSignature) -> bool {
        self.entries.iter().all(|(n, ps)| other.entries.get(n) == Some(ps))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Port {
    pub name: Name,
    /// Uninterpreted token; `None` is distinct from every token.
    pub state: Option<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub id: NodeId,
    pub name: Name,
    pub ports: Vec<Port>,
}

impl Node {
    pub fn port(&self, port: &str) -> Option<&Port> {
        self.ports.iter().find(|p| &*p.name == port)
    }

    pub fn state(&self, port: &str) -> Option<&Name> {
        self.port(port).and_then(|p| p.state.as_ref())
    }

    pub fn has_port(&self, port: &str) -> bool {
        self.port(port).is_some()
    }
}

/// An undirected edge between two ports, stored with its endpoints ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: PortRef,
    b: PortRef,
}

impl Edge {
    pub fn new(x: PortRef, y: PortRef) -> Self {
        if x <= y {
            Edge { a: x, b: y }
        } else {
            Edge { a: y, b: x }
        }
    }

    pub fn ends(&self) -> (&PortRef, &PortRef) {
        (&self.a, &self.b)
    }

    /// The endpoint opposite to `end`, if `end` is one of the endpoints.
    pub fn other(&self, end: &PortRef) -> Option<&PortRef> {
        if &self.a == end {
            Some(&self.b)
        } else if &self.b == end {
            Some(&self.a)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -- {}", self.a, self.b)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node name `{0}` is not in the signature")]
    UnknownName(Name),
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("node {0} does not exist")]
    MissingNode(NodeId),
    #[error("port {0} does not exist")]
    MissingPort(PortRef),
    #[error("port {0} is already connected")]
    PortBusy(PortRef),
}

/// A port graph over a shared p-signature.
///
/// Edges are a multiset so that ill-formed inputs (a port carrying two edges)
/// can still be represented and reported by [`validate`].
#[derive(Clone, Debug)]
pub struct PortGraph {
    signature: Arc<PSignature>,
    nodes: im::OrdMap<NodeId, Node>,
    edges: im::OrdMap<Edge, usize>,
    adjacency: im::OrdMap<PortRef, Vec<PortRef>>,
}

impl PartialEq for PortGraph {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for PortGraph {}

impl PortGraph {
    pub fn new(signature: Arc<PSignature>) -> Self {
        PortGraph {
            signature,
            nodes: im::OrdMap::new(),
            edges: im::OrdMap::new(),
            adjacency: im::OrdMap::new(),
        }
    }

    pub fn signature(&self) -> &Arc<PSignature> {
        &self.signature
    }

    /// Replaces the signature, e.g. with a merged superset.
    pub fn with_signature(mut self, signature: Arc<PSignature>) -> Self {
        self.signature = signature;
        self
    }

    /// Adds a node carrying exactly the signature's ports for `node_name`.
    pub fn add_node(&mut self, id: NodeId, node_name: &str) -> Result<&Node, GraphError> {
        let ports = self
            .signature
            .ports(node_name)
            .ok_or_else(|| GraphError::UnknownName(name(node_name)))?;
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        let node = Node {
            id,
            name: name(node_name),
            ports: ports.iter().map(|p| Port { name: p.clone(), state: None }).collect(),
        };
        self.nodes.insert(id, node);
        Ok(&self.nodes[&id])
    }

    /// Inserts a node verbatim, without checking it against the signature.
    pub fn insert_node(&mut self, node: Node) {
        self.nodes.insert(node.id, node);
    }

    pub fn set_state(&mut self, port: &PortRef, state: Option<Name>) -> Result<(), GraphError> {
        let node = self
            .nodes
            .get_mut(&port.node)
            .ok_or(GraphError::MissingNode(port.node))?;
        let slot = node
            .ports
            .iter_mut()
            .find(|p| p.name == port.port)
            .ok_or_else(|| GraphError::MissingPort(port.clone()))?;
        slot.state = state;
        Ok(())
    }

    /// Connects two existing, currently free ports.
    pub fn connect(&mut self, x: PortRef, y: PortRef) -> Result<(), GraphError> {
        for end in [&x, &y] {
            let node = self.nodes.get(&end.node).ok_or(GraphError::MissingNode(end.node))?;
            if !node.has_port(&end.port) {
                return Err(GraphError::MissingPort(end.clone()));
            }
            if !self.is_free(end) {
                return Err(GraphError::PortBusy(end.clone()));
            }
        }
        if x == y {
            return Err(GraphError::PortBusy(x));
        }
        self.add_edge(x, y);
        Ok(())
    }

    /// Adds an edge without any checks.
    pub fn add_edge(&mut self, x: PortRef, y: PortRef) {
        *self.edges.entry(Edge::new(x.clone(), y.clone())).or_insert(0) += 1;
        self.adjacency.entry(x.clone()).or_default().push(y.clone());
        if x != y {
            self.adjacency.entry(y).or_default().push(x);
        }
    }

    /// Removes one copy of `edge`; returns false when absent.
    pub fn remove_edge(&mut self, edge: &Edge) -> bool {
        match self.edges.get(edge).copied() {
            None => false,
            Some(count) => {
                if count > 1 {
                    self.edges.insert(edge.clone(), count - 1);
                } else {
                    self.edges.remove(edge);
                }
                let (x, y) = edge.ends();
                self.unlink(x, y);
                if x != y {
                    self.unlink(y, x);
                }
                true
            }
        }
    }

    fn unlink(&mut self, from: &PortRef, to: &PortRef) {
        let now_empty = match self.adjacency.get_mut(from) {
            Some(list) => {
                if let Some(i) = list.iter().position(|p| p == to) {
                    list.remove(i);
                }
                list.is_empty()
            }
            None => false,
        };
        if now_empty {
            self.adjacency.remove(from);
        }
    }

    /// Removes a node together with every incident edge.
    pub fn remove_node(&mut self, id: NodeId) -> Option<Node> {
        let node = self.nodes.remove(&id)?;
        for port in &node.ports {
            let here = PortRef { node: id, port: port.name.clone() };
            while let Some(other) = self.adjacency.get(&here).and_then(|l| l.first().cloned()) {
                self.remove_edge(&Edge::new(here.clone(), other));
            }
        }
        // edges recorded against ports the node does not declare
        let stray: Vec<Edge> = self
            .edges
            .keys()
            .filter(|e| e.a.node == id || e.b.node == id)
            .cloned()
            .collect();
        for e in stray {
            while self.remove_edge(&e) {}
        }
        Some(node)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges with multiplicity, in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges
            .iter()
            .flat_map(|(e, &count)| std::iter::repeat_n(e, count))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.values().sum()
    }

    /// Ports connected to `port` (one entry per incident edge).
    pub fn partners(&self, port: &PortRef) -> &[PortRef] {
        self.adjacency.get(port).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn partner(&self, port: &PortRef) -> Option<&PortRef> {
        self.partners(port).first()
    }

    pub fn is_free(&self, port: &PortRef) -> bool {
        self.partners(port).is_empty()
    }

    pub fn max_node_id(&self) -> Option<NodeId> {
        self.nodes.keys().next_back().copied()
    }

    pub fn nodes_named<'a>(&'a self, node_name: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.nodes.values().filter(move |n| &*n.name == node_name)
    }
}

/// A set of node ids marking where rules may apply.
pub type Position = BTreeSet<NodeId>;

/// A graph paired with its current position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocatedGraph {
    pub graph: PortGraph,
    pub position: Position,
}

impl LocatedGraph {
    pub fn new(graph: PortGraph, position: Position) -> Self {
        LocatedGraph { graph, position }
    }

    /// Located graph whose position covers every node.
    pub fn everywhere(graph: PortGraph) -> Self {
        let position = graph.node_ids().collect();
        LocatedGraph { graph, position }
    }

    pub fn position_is_sound(&self) -> bool {
        self.position.iter().all(|id| self.graph.contains_node(*id))
    }
}

/// Monotone source of fresh node ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IdSource {
    next: u64,
}

impl IdSource {
    pub fn starting_at(next: u64) -> Self {
        IdSource { next }
    }

    /// Source whose first id is above every id currently in `graph`.
    pub fn after(graph: &PortGraph) -> Self {
        IdSource { next: graph.max_node_id().map_or(0, |id| id.0 + 1) }
    }

    pub fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        id
    }

    pub fn peek(&self) -> NodeId {
        NodeId(self.next)
    }
}

/// A single well-formedness problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UnknownNodeName { node: NodeId, name: Name },
    MissingPort { node: NodeId, port: Name },
    UnknownPort { port: PortRef },
    DuplicatePort { node: NodeId, port: Name },
    UnknownNode { node: NodeId },
    PortUsedTwice { port: PortRef },
    LoopOnSinglePort { port: PortRef },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownNodeName { node, name } => {
                write!(f, "unknown node name: node {node} is named `{name}`")
            }
            Violation::MissingPort { node, port } => write!(f, "missing port: node {node} lacks `{port}`"),
            Violation::UnknownPort { port } => write!(f, "unknown port: {port}"),
            Violation::DuplicatePort { node, port } => {
                write!(f, "duplicate port: node {node} lists `{port}` twice")
            }
            Violation::UnknownNode { node } => write!(f, "unknown node: edge endpoint {node}"),
            Violation::PortUsedTwice { port } => write!(f, "port used twice: {port}"),
            Violation::LoopOnSinglePort { port } => write!(f, "edge joins port {port} to itself"),
        }
    }
}

/// Checks every port-graph invariant and reports each violation found.
pub fn validate(graph: &PortGraph) -> Vec<Violation> {
    let sig = graph.signature();
    let mut out = Vec::new();
    for node in graph.nodes() {
        let Some(expected) = sig.ports(&node.name) else {
            out.push(Violation::UnknownNodeName { node: node.id, name: node.name.clone() });
            continue;
        };
        let mut seen = BTreeSet::new();
        for p in &node.ports {
            if !seen.insert(p.name.clone()) {
                out.push(Violation::DuplicatePort { node: node.id, port: p.name.clone() });
            } else if !expected.contains(&p.name) {
                out.push(Violation::UnknownPort { port: PortRef { node: node.id, port: p.name.clone() } });
            }
        }
        for p in expected {
            if !seen.contains(p) {
                out.push(Violation::MissingPort { node: node.id, port: p.clone() });
            }
        }
    }
    let mut usage: BTreeMap<&PortRef, usize> = BTreeMap::new();
    for edge in graph.edges() {
        let (x, y) = edge.ends();
        if x == y {
            out.push(Violation::LoopOnSinglePort { port: x.clone() });
            continue;
        }
        for end in [x, y] {
            match graph.node(end.node) {
                None => out.push(Violation::UnknownNode { node: end.node }),
                Some(n) if !n.has_port(&end.port) => {
                    out.push(Violation::UnknownPort { port: end.clone() })
                }
                Some(_) => *usage.entry(end).or_insert(0) += 1,
            }
        }
    }
    for (port, count) in usage {
        if count > 1 {
            out.push(Violation::PortUsedTwice { port: port.clone() });
        }
    }
    out
}

/// Ports with no incident edge.
pub fn free_ports(graph: &PortGraph) -> BTreeSet<PortRef> {
    graph
        .nodes()
        .flat_map(|n| {
            n.ports.iter().map(move |p| PortRef { node: n.id, port: p.name.clone() })
        })
        .filter(|p| graph.is_free(p))
        .collect()
}

/// Nodes owning at least one free port.
pub fn interface_nodes(graph: &PortGraph) -> Position {
    graph.nodes().filter(|n| has_free_port(graph, n)).map(|n| n.id).collect()
}

pub fn has_free_port(graph: &PortGraph, node: &Node) -> bool {
    node.ports
        .iter()
        .any(|p| graph.is_free(&PortRef { node: node.id, port: p.name.clone() }))
}

/// Nodes connected by some edge to a member of `pos`. Replaces `pos`.
pub fn successors(graph: &PortGraph, pos: &Position) -> Position {
    let mut out = Position::new();
    for id in pos {
        let Some(node) = graph.node(*id) else { continue };
        for p in &node.ports {
            for other in graph.partners(&PortRef { node: *id, port: p.name.clone() }) {
                out.insert(other.node);
            }
        }
    }
    out
}

/// Designated port per node name, e.g. the principal port of each agent.
pub type Designation = BTreeMap<Name, Name>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no designated port for node name `{0}`")]
pub struct MissingDesignation(pub Name);

/// For each member of `pos`, the node attached at its designated port.
pub fn designated_successors(
    graph: &PortGraph,
    pos: &Position,
    designation: &Designation,
) -> Result<Position, MissingDesignation> {
    let mut out = Position::new();
    for id in pos {
        let Some(node) = graph.node(*id) else { continue };
        let port = designation
            .get(&node.name)
            .ok_or_else(|| MissingDesignation(node.name.clone()))?;
        for other in graph.partners(&PortRef { node: *id, port: port.clone() }) {
            out.insert(other.node);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Arc<PSignature> {
        let mut s = PSignature::new();
        s.declare("S", ["aux", "prin"]).unwrap();
        s.declare("T", ["t1", "t2", "t3"]).unwrap();
        s.declare("C", ["c1", "c2"]).unwrap();
        Arc::new(s)
    }

    fn pr(n: u64, p: &str) -> PortRef {
        PortRef::new(NodeId(n), p)
    }

    #[test]
    fn signature_rejects_shared_port_names() {
        let mut s = PSignature::new();
        s.declare("A", ["x"]).unwrap();
        assert!(matches!(s.declare("B", ["x"]), Err(SignatureError::PortClash { .. })));
        assert!(matches!(s.declare("B", Vec::<&str>::new()), Err(SignatureError::EmptyPortSet(_))));
        assert!(s.declare("A", ["x"]).is_ok());
        assert!(matches!(s.declare("A", ["y"]), Err(SignatureError::Redeclared(_))));
    }

    #[test]
    fn single_node_is_valid() {
        let mut g = PortGraph::new(sig());
        g.add_node(NodeId(0), "S").unwrap();
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn unknown_port_is_reported() {
        let mut g = PortGraph::new(sig());
        g.add_node(NodeId(0), "S").unwrap();
        g.add_node(NodeId(1), "S").unwrap();
        g.add_edge(pr(0, "x"), pr(1, "aux"));
        let report = validate(&g);
        assert_eq!(report, vec![Violation::UnknownPort { port: pr(0, "x") }]);
        assert!(report[0].to_string().starts_with("unknown port"));
    }

    #[test]
    fn shared_endpoint_is_reported_once() {
        let mut g = PortGraph::new(sig());
        for i in 0..3 {
            g.add_node(NodeId(i), "S").unwrap();
        }
        g.add_edge(pr(0, "prin"), pr(1, "prin"));
        g.add_edge(pr(0, "prin"), pr(2, "prin"));
        let report = validate(&g);
        assert_eq!(report, vec![Violation::PortUsedTwice { port: pr(0, "prin") }]);
        assert!(report[0].to_string().starts_with("port used twice"));
    }

    #[test]
    fn connect_refuses_busy_ports() {
        let mut g = PortGraph::new(sig());
        g.add_node(NodeId(0), "S").unwrap();
        g.add_node(NodeId(1), "S").unwrap();
        g.connect(pr(0, "prin"), pr(1, "prin")).unwrap();
        assert_eq!(g.connect(pr(0, "prin"), pr(1, "aux")), Err(GraphError::PortBusy(pr(0, "prin"))));
        assert!(g.connect(pr(0, "aux"), pr(0, "aux")).is_err());
        g.connect(pr(0, "aux"), pr(1, "aux")).unwrap();
    }

    #[test]
    fn free_ports_cases() {
        let mut g = PortGraph::new(sig());
        g.add_node(NodeId(0), "T").unwrap();
        assert_eq!(free_ports(&g).len(), 3);

        let mut g = PortGraph::new(sig());
        g.add_node(NodeId(0), "S").unwrap();
        g.add_node(NodeId(1), "S").unwrap();
        g.connect(pr(0, "prin"), pr(1, "prin")).unwrap();
        assert_eq!(free_ports(&g), BTreeSet::from([pr(0, "aux"), pr(1, "aux")]));
        g.connect(pr(0, "aux"), pr(1, "aux")).unwrap();
        assert!(free_ports(&g).is_empty());
    }

    #[test]
    fn interface_of_closed_cycle_is_empty() {
        let mut g = PortGraph::new(sig());
        for i in 0..3 {
            g.add_node(NodeId(i), "C").unwrap();
        }
        for i in 0..3 {
            g.connect(pr(i, "c2"), pr((i + 1) % 3, "c1")).unwrap();
        }
        assert!(interface_nodes(&g).is_empty());
        let mut lone = PortGraph::new(sig());
        lone.add_node(NodeId(9), "C").unwrap();
        assert_eq!(interface_nodes(&lone), Position::from([NodeId(9)]));
    }

    #[test]
    fn successors_of_chain_middle() {
        let mut g = PortGraph::new(sig());
        for i in 0..3 {
            g.add_node(NodeId(i), "C").unwrap();
        }
        g.connect(pr(0, "c2"), pr(1, "c1")).unwrap();
        g.connect(pr(1, "c2"), pr(2, "c1")).unwrap();
        assert_eq!(successors(&g, &Position::from([NodeId(1)])), Position::from([NodeId(0), NodeId(2)]));
        let mut lone = PortGraph::new(sig());
        lone.add_node(NodeId(0), "C").unwrap();
        assert!(successors(&lone, &Position::from([NodeId(0)])).is_empty());
        assert!(successors(&g, &Position::new()).is_empty());
    }

    #[test]
    fn successors_of_complete_graph() {
        // complete 3-node port graph; brute-force adjacency gives every node
        let mut g = PortGraph::new(sig());
        for i in 0..3 {
            g.add_node(NodeId(i), "T").unwrap();
        }
        g.connect(pr(0, "t1"), pr(1, "t1")).unwrap();
        g.connect(pr(1, "t2"), pr(2, "t2")).unwrap();
        g.connect(pr(2, "t3"), pr(0, "t3")).unwrap();
        let all: Position = g.node_ids().collect();
        let mut brute = Position::new();
        for e in g.edges() {
            let (x, y) = e.ends();
            if all.contains(&x.node) {
                brute.insert(y.node);
            }
            if all.contains(&y.node) {
                brute.insert(x.node);
            }
        }
        assert_eq!(successors(&g, &all), brute);
        assert_eq!(brute.len(), 3);
    }

    #[test]
    fn designated_successor_cases() {
        let mut g = PortGraph::new(sig());
        for i in 0..3 {
            g.add_node(NodeId(i), "S").unwrap();
        }
        g.connect(pr(0, "prin"), pr(1, "prin")).unwrap();
        g.connect(pr(2, "prin"), pr(1, "aux")).unwrap();
        let d: Designation = [(name("S"), name("prin"))].into_iter().collect();
        assert_eq!(
            designated_successors(&g, &Position::from([NodeId(0)]), &d).unwrap(),
            Position::from([NodeId(1)])
        );
        // two members pointing at the same node
        assert_eq!(
            designated_successors(&g, &Position::from([NodeId(0), NodeId(2)]), &d).unwrap(),
            Position::from([NodeId(1)])
        );
        let mut free = PortGraph::new(sig());
        free.add_node(NodeId(0), "S").unwrap();
        assert!(designated_successors(&free, &Position::from([NodeId(0)]), &d).unwrap().is_empty());
        assert!(designated_successors(&g, &Position::from([NodeId(0)]), &Designation::new()).is_err());
    }

    #[test]
    fn remove_node_drops_incident_edges() {
        let mut g = PortGraph::new(sig());
        for i in 0..3 {
            g.add_node(NodeId(i), "S").unwrap();
        }
        g.connect(pr(0, "prin"), pr(1, "prin")).unwrap();
        g.connect(pr(1, "aux"), pr(2, "aux")).unwrap();
        g.remove_node(NodeId(1));
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_free(&pr(0, "prin")));
        assert!(validate(&g).is_empty());
    }
}
