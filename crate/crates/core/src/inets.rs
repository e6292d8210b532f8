//! Interaction nets on top of port graphs: agent declarations, the
//! interaction-rule constraints, principal-port designation and the
//! interface-normal-form strategy. Also an isomorphism check used to compare
//! nets up to node ids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{free_ports, name, Designation, Name, NodeId, PSignature, PortGraph, PortRef};
use crate::rewrite::{Rule, Target};
use crate::strategy::{PositionExpr, Pred, Scope, Strategy};

/// An agent symbol with one principal port and `arity` auxiliary ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentDecl {
    pub symbol: Name,
    pub arity: usize,
    pub principal: Name,
    pub auxiliary: Vec<Name>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    #[error("agent `{0}` is not in the signature")]
    Undeclared(Name),
    #[error("agent `{symbol}` has no port `{port}`")]
    NoSuchPort { symbol: Name, port: Name },
    #[error("agent `{symbol}` declares arity {arity} but has {ports} ports")]
    ArityMismatch { symbol: Name, arity: usize, ports: usize },
}

impl AgentDecl {
    /// Reads the ports of `symbol` from `sig`; all but `principal` are auxiliary.
    pub fn from_signature(sig: &PSignature, symbol: &str, arity: usize, principal: &str) -> Result<Self, AgentError> {
        let ports = sig.ports(symbol).ok_or_else(|| AgentError::Undeclared(name(symbol)))?;
        if !ports.iter().any(|p| &**p == principal) {
            return Err(AgentError::NoSuchPort { symbol: name(symbol), port: name(principal) });
        }
        if ports.len() != arity + 1 {
            return Err(AgentError::ArityMismatch { symbol: name(symbol), arity, ports: ports.len() });
        }
        Ok(AgentDecl {
            symbol: name(symbol),
            arity,
            principal: name(principal),
            auxiliary: ports.iter().filter(|p| &***p != principal).cloned().collect(),
        })
    }
}

#[derive(Clone, Debug, Default)]
pub struct INetRuleSet {
    pub agents: Vec<AgentDecl>,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InetViolation {
    NotTwoAgents { rule: Name, nodes: usize },
    UndeclaredAgent { rule: Name, symbol: Name },
    NotActivePair { rule: Name },
    FreePortMismatch { rule: Name, lhs: usize, rhs: usize },
    DuplicatePair { rule: Name, other: Name, pair: (Name, Name) },
}

impl fmt::Display for InetViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InetViolation::NotTwoAgents { rule, nodes } => {
                write!(f, "rule `{rule}`: left-hand side has {nodes} agents, not 2")
            }
            InetViolation::UndeclaredAgent { rule, symbol } => {
                write!(f, "rule `{rule}`: `{symbol}` is not a declared agent")
            }
            InetViolation::NotActivePair { rule } => write!(f, "rule `{rule}`: not an active pair"),
            InetViolation::FreePortMismatch { rule, lhs, rhs } => {
                write!(f, "rule `{rule}`: {lhs} free ports on the left but {rhs} on the right")
            }
            InetViolation::DuplicatePair { rule, other, pair } => {
                write!(f, "rule `{rule}`: duplicate pair ({}, {}) also handled by `{other}`", pair.0, pair.1)
            }
        }
    }
}

/// Free ports of the right-hand side, counting each wire as two.
fn rhs_free_ports(rule: &Rule) -> usize {
    let wires = rule.interface().values().filter(|t| matches!(t, Target::Wire(_))).count();
    free_ports(rule.rhs()).len() + wires
}

/// Checks the interaction-rule constraints; an empty report means the set is valid.
pub fn validate_inet(rs: &INetRuleSet) -> Vec<InetViolation> {
    let decls: BTreeMap<&Name, &AgentDecl> = rs.agents.iter().map(|a| (&a.symbol, a)).collect();
    let mut out = Vec::new();
    let mut pairs: BTreeMap<(Name, Name), Name> = BTreeMap::new();
    for rule in &rs.rules {
        let l = rule.lhs().graph();
        let nodes: Vec<_> = l.nodes().collect();
        if nodes.len() != 2 {
            out.push(InetViolation::NotTwoAgents { rule: rule.name().clone(), nodes: nodes.len() });
            continue;
        }
        let mut declared = true;
        for n in &nodes {
            if !decls.contains_key(&n.name) {
                out.push(InetViolation::UndeclaredAgent { rule: rule.name().clone(), symbol: n.name.clone() });
                declared = false;
            }
        }
        if !declared {
            continue;
        }
        let (a, b) = (nodes[0], nodes[1]);
        let pa = PortRef { node: a.id, port: decls[&a.name].principal.clone() };
        let pb = PortRef { node: b.id, port: decls[&b.name].principal.clone() };
        let edges: Vec<_> = l.edges().collect();
        let active = edges.len() == 1 && edges[0].other(&pa) == Some(&pb);
        if !active {
            out.push(InetViolation::NotActivePair { rule: rule.name().clone() });
        }
        let lhs = free_ports(l).len();
        let rhs = rhs_free_ports(rule);
        if lhs != rhs {
            out.push(InetViolation::FreePortMismatch { rule: rule.name().clone(), lhs, rhs });
        }
        let pair = if a.name <= b.name { (a.name.clone(), b.name.clone()) } else { (b.name.clone(), a.name.clone()) };
        if let Some(other) = pairs.get(&pair) {
            out.push(InetViolation::DuplicatePair { rule: rule.name().clone(), other: other.clone(), pair });
        } else {
            pairs.insert(pair, rule.name().clone());
        }
    }
    out
}

/// Maps every declared agent symbol to its principal port.
pub fn principal_designation(rs: &INetRuleSet) -> Designation {
    rs.agents.iter().map(|a| (a.symbol.clone(), a.principal.clone())).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("interface normal form needs at least one rule")]
pub struct NoRules;

/// `repeat*(((r1 orelse r2 orelse ...); property(interface, graph)) orelse nextsuc)`
pub fn inf_strategy<S: AsRef<str>>(rules: &[S]) -> Result<Strategy, NoRules> {
    let apps: Vec<Strategy> = rules.iter().map(|r| Strategy::rule(r.as_ref())).collect();
    let any = Strategy::orelse_all(apps).ok_or(NoRules)?;
    let int = Strategy::Pos(PositionExpr::Property(Pred::Interface, Scope::Graph));
    let step = Strategy::orelse(Strategy::seq(any, int), Strategy::Pos(PositionExpr::NextSuc));
    Ok(Strategy::repeat_star(step))
}

type Color = usize;

/// Joint color refinement over both graphs so that colors are comparable.
fn refine(a: &PortGraph, b: &PortGraph) -> (BTreeMap<NodeId, Color>, BTreeMap<NodeId, Color>) {
    fn initial(g: &PortGraph) -> BTreeMap<NodeId, Vec<String>> {
        g.nodes()
            .map(|n| {
                let mut key = vec![n.name.to_string()];
                key.extend(n.ports.iter().map(|p| format!("{}={:?}", p.name, p.state)));
                (n.id, key)
            })
            .collect()
    }
    fn number(
        ka: BTreeMap<NodeId, Vec<String>>,
        kb: BTreeMap<NodeId, Vec<String>>,
    ) -> (BTreeMap<NodeId, Color>, BTreeMap<NodeId, Color>, usize) {
        let keys: BTreeSet<&Vec<String>> = ka.values().chain(kb.values()).collect();
        let index: BTreeMap<&Vec<String>, Color> = keys.into_iter().enumerate().map(|(i, k)| (k, i)).collect();
        let ca = ka.iter().map(|(id, k)| (*id, index[k])).collect();
        let cb = kb.iter().map(|(id, k)| (*id, index[k])).collect();
        (ca, cb, index.len())
    }
    fn next(g: &PortGraph, c: &BTreeMap<NodeId, Color>) -> BTreeMap<NodeId, Vec<String>> {
        g.nodes()
            .map(|n| {
                let mut nb: Vec<String> = Vec::new();
                for p in &n.ports {
                    for q in g.partners(&PortRef { node: n.id, port: p.name.clone() }) {
                        nb.push(format!("{}>{}:{}", p.name, q.port, c[&q.node]));
                    }
                }
                nb.sort();
                let mut key = vec![c[&n.id].to_string()];
                key.extend(nb);
                (n.id, key)
            })
            .collect()
    }
    let (mut ca, mut cb, mut count) = number(initial(a), initial(b));
    loop {
        let (na, nb, n) = number(next(a, &ca), next(b, &cb));
        ca = na;
        cb = nb;
        if n == count {
            return (ca, cb);
        }
        count = n;
    }
}

/// True when the graphs are equal up to a renaming of node ids.
pub fn isomorphic(a: &PortGraph, b: &PortGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let (ca, cb) = refine(a, b);
    let hist = |c: &BTreeMap<NodeId, Color>| {
        let mut h: BTreeMap<Color, usize> = BTreeMap::new();
        for v in c.values() {
            *h.entry(*v).or_default() += 1;
        }
        h
    };
    if hist(&ca) != hist(&cb) {
        return false;
    }
    let order: Vec<NodeId> = {
        let mut v: Vec<NodeId> = a.node_ids().collect();
        let h = hist(&ca);
        v.sort_by_key(|id| (h[&ca[id]], *id));
        v
    };
    let mut by_color: BTreeMap<Color, Vec<NodeId>> = BTreeMap::new();
    for (id, c) in &cb {
        by_color.entry(*c).or_default().push(*id);
    }
    let mut map: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut used: BTreeSet<NodeId> = BTreeSet::new();
    fn consistent(a: &PortGraph, b: &PortGraph, map: &BTreeMap<NodeId, NodeId>, x: NodeId, y: NodeId) -> bool {
        let n = a.node(x).expect("node");
        for p in &n.ports {
            let px = PortRef { node: x, port: p.name.clone() };
            let py = PortRef { node: y, port: p.name.clone() };
            let want: Vec<&PortRef> = a.partners(&px).iter().collect();
            let have = b.partners(&py);
            if want.len() != have.len() {
                return false;
            }
            for q in want {
                let target = if q.node == x { Some(y) } else { map.get(&q.node).copied() };
                if let Some(t) = target {
                    if !have.contains(&PortRef { node: t, port: q.port.clone() }) {
                        return false;
                    }
                }
            }
        }
        true
    }
    #[allow(clippy::too_many_arguments)]
    fn search(
        i: usize,
        order: &[NodeId],
        a: &PortGraph,
        b: &PortGraph,
        ca: &BTreeMap<NodeId, Color>,
        by_color: &BTreeMap<Color, Vec<NodeId>>,
        map: &mut BTreeMap<NodeId, NodeId>,
        used: &mut BTreeSet<NodeId>,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        let x = order[i];
        for &y in &by_color[&ca[&x]] {
            if used.contains(&y) || !consistent(a, b, map, x, y) {
                continue;
            }
            map.insert(x, y);
            used.insert(y);
            if search(i + 1, order, a, b, ca, by_color, map, used) {
                return true;
            }
            map.remove(&x);
            used.remove(&y);
        }
        false
    }
    search(0, &order, a, b, &ca, &by_color, &mut map, &mut used)
}
