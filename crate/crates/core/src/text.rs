//! Line-oriented text formats for graphs and rule files, with printers that
//! produce text the parsers accept.
//!
//! Graph files:
//!
//! ```text
//! SIGNATURE
//! A : ap, aa
//! NODES
//! 1 : A aa=on
//! EDGES
//! 1.ap -- 2.bp
//! POSITION
//! 1, 2
//! ```
//!
//! Rule files start with an optional `SIGNATURE` and `AGENTS` block and then
//! hold `RULE <name>` entries, each with `LHS`, `RHS`, `INTERFACE` and `M`
//! sections. Inside `LHS`, a port may carry `!` (must be connected) or `?`
//! (must be free). Inside `RHS`, a state written `@<id>.<port>` copies the
//! state found at the image of that left-hand-side port. Interface lines are
//! `<id>.<port> -> <id>.<port>, ...`, `-> BLACKHOLE`, or `-> WIRE <id>.<port>`
//! joining two left-hand-side ports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{name, LocatedGraph, NodeId, PSignature, PortGraph, PortRef, Position};
use crate::inets::AgentDecl;
use crate::matching::{Pattern, PortConstraint};
use crate::rewrite::{Rule, Target};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Lines with comments stripped, numbered from 1, blank lines dropped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_id(line: usize, s: &str) -> Result<NodeId, ParseError> {
    s.trim().parse::<u64>().map(NodeId).or_else(|_| err(line, format!("bad node id `{}`", s.trim())))
}

fn parse_port_ref(line: usize, s: &str) -> Result<PortRef, ParseError> {
    let s = s.trim();
    let Some((id, port)) = s.split_once('.') else {
        return err(line, format!("expected <id>.<port>, found `{s}`"));
    };
    if port.is_empty() {
        return err(line, format!("missing port name in `{s}`"));
    }
    Ok(PortRef::new(parse_id(line, id)?, port))
}

fn parse_signature_line(line: usize, l: &str, sig: &mut PSignature) -> Result<(), ParseError> {
    let Some((n, ports)) = l.split_once(':') else {
        return err(line, "expected `<name> : <port>, ...`");
    };
    let ports: Vec<&str> = ports.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    sig.declare(n.trim(), ports).or_else(|e| err(line, e.to_string()))
}

#[derive(Default)]
struct RawPort {
    name: String,
    constraint: PortConstraint,
    state: Option<String>,
}

#[derive(Default)]
struct RawGraph {
    nodes: Vec<(usize, NodeId, String, Vec<RawPort>)>,
    edges: Vec<(usize, PortRef, PortRef)>,
    position: Vec<(usize, NodeId)>,
}

impl RawGraph {
    fn node_line(&mut self, line: usize, l: &str) -> Result<(), ParseError> {
        let Some((id, rest)) = l.split_once(':') else {
            return err(line, "expected `<id> : <name> <port>=<state> ...`");
        };
        let id = parse_id(line, id)?;
        let mut words = rest.split_whitespace();
        let Some(n) = words.next() else { return err(line, "missing node name") };
        let mut ports = Vec::new();
        for w in words {
            let (p, state) = match w.split_once('=') {
                Some((p, s)) => (p, Some(s.to_string())),
                None => (w, None),
            };
            let (p, constraint) = if let Some(p) = p.strip_suffix('!') {
                (p, PortConstraint::MustBeConnected)
            } else if let Some(p) = p.strip_suffix('?') {
                (p, PortConstraint::MustBeFree)
            } else {
                (p, PortConstraint::Any)
            };
            ports.push(RawPort { name: p.to_string(), constraint, state });
        }
        self.nodes.push((line, id, n.to_string(), ports));
        Ok(())
    }

    fn edge_line(&mut self, line: usize, l: &str) -> Result<(), ParseError> {
        let Some((a, b)) = l.split_once("--") else {
            return err(line, "expected `<id>.<port> -- <id>.<port>`");
        };
        self.edges.push((line, parse_port_ref(line, a)?, parse_port_ref(line, b)?));
        Ok(())
    }

    fn position_line(&mut self, line: usize, l: &str) -> Result<(), ParseError> {
        for id in l.split(',').filter(|s| !s.trim().is_empty()) {
            self.position.push((line, parse_id(line, id)?));
        }
        Ok(())
    }

    /// Builds the graph, returning per-port constraints and state-copy
    /// annotations alongside; `allow` says which annotations are legal here.
    #[allow(clippy::type_complexity)]
    fn build(
        self,
        sig: &Arc<PSignature>,
        allow_constraints: bool,
        allow_copies: bool,
    ) -> Result<(PortGraph, Position, BTreeMap<PortRef, PortConstraint>, BTreeMap<PortRef, PortRef>), ParseError>
    {
        let mut g = PortGraph::new(sig.clone());
        let mut constraints = BTreeMap::new();
        let mut copies = BTreeMap::new();
        for (line, id, n, ports) in self.nodes {
            g.add_node(id, &n).or_else(|e| err(line, e.to_string()))?;
            for p in ports {
                let at = PortRef::new(id, &p.name);
                if !g.node(id).is_some_and(|node| node.has_port(&p.name)) {
                    return err(line, format!("node `{n}` has no port `{}`", p.name));
                }
                if p.constraint != PortConstraint::Any {
                    if !allow_constraints {
                        return err(line, "port constraints are only allowed in a left-hand side");
                    }
                    constraints.insert(at.clone(), p.constraint);
                }
                match p.state {
                    Some(s) if s.starts_with('@') => {
                        if !allow_copies {
                            return err(line, "state copies are only allowed in a right-hand side");
                        }
                        copies.insert(at, parse_port_ref(line, &s[1..])?);
                    }
                    Some(s) => {
                        if s.is_empty() {
                            return err(line, format!("empty state on port `{}`", p.name));
                        }
                        g.set_state(&at, Some(name(&s))).or_else(|e| err(line, e.to_string()))?;
                    }
                    None => {}
                }
            }
        }
        for (line, a, b) in self.edges {
            g.connect(a, b).or_else(|e| err(line, e.to_string()))?;
        }
        let mut position = Position::new();
        for (line, id) in self.position {
            if !g.contains_node(id) {
                return err(line, format!("position names unknown node {id}"));
            }
            position.insert(id);
        }
        Ok((g, position, constraints, copies))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Signature,
    Agents,
    Nodes,
    Edges,
    Position,
    Interface,
    Keep,
}

/// Parses a graph file. Node names must be declared in its `SIGNATURE`
/// section or in `base`.
pub fn parse_graph_with(text: &str, base: &PSignature) -> Result<LocatedGraph, ParseError> {
    let mut sig = base.clone();
    let mut raw = RawGraph::default();
    let mut section = Section::None;
    for (line, l) in lines(text) {
        let next = match l {
            "SIGNATURE" => Some(Section::Signature),
            "NODES" => Some(Section::Nodes),
            "EDGES" => Some(Section::Edges),
            "POSITION" => Some(Section::Position),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        match section {
            Section::Signature => parse_signature_line(line, l, &mut sig)?,
            Section::Nodes => raw.node_line(line, l)?,
            Section::Edges => raw.edge_line(line, l)?,
            Section::Position => raw.position_line(line, l)?,
            _ => return err(line, format!("unexpected `{l}` outside a section")),
        }
    }
    let (g, position, _, _) = raw.build(&Arc::new(sig), false, false)?;
    Ok(LocatedGraph::new(g, position))
}

pub fn parse_graph(text: &str) -> Result<LocatedGraph, ParseError> {
    parse_graph_with(text, &PSignature::new())
}

/// Contents of a rule file.
#[derive(Clone, Debug, Default)]
pub struct RuleFile {
    pub signature: Arc<PSignature>,
    pub agents: Vec<AgentDecl>,
    pub rules: Vec<Rule>,
}

struct RawRule {
    line: usize,
    name: String,
    lhs: RawGraph,
    rhs: RawGraph,
    interface: Vec<(usize, PortRef, Target)>,
    keep: Vec<(usize, NodeId)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Lhs,
    Rhs,
    Other,
}

fn parse_interface_line(line: usize, l: &str) -> Result<(PortRef, Target), ParseError> {
    let Some((k, v)) = l.split_once("->") else {
        return err(line, "expected `<id>.<port> -> ...`");
    };
    let key = parse_port_ref(line, k)?;
    let v = v.trim();
    if v == "BLACKHOLE" {
        return Ok((key, Target::black_hole()));
    }
    if let Some(w) = v.strip_prefix("WIRE") {
        return Ok((key, Target::Wire(parse_port_ref(line, w)?)));
    }
    let ts = v.split(',').map(|t| parse_port_ref(line, t)).collect::<Result<Vec<_>, _>>()?;
    Ok((key, Target::Ports(ts)))
}

fn parse_agent_block(
    lines: &[(usize, &str)],
    sig: &PSignature,
) -> Result<Vec<AgentDecl>, ParseError> {
    let mut out: Vec<AgentDecl> = Vec::new();
    let mut pending: Option<(usize, String, Option<usize>, Option<String>)> = None;
    let finish = |p: (usize, String, Option<usize>, Option<String>)| -> Result<AgentDecl, ParseError> {
        let (line, symbol, arity, principal) = p;
        let Some(arity) = arity else { return err(line, format!("agent `{symbol}` lacks `arity`")) };
        let Some(principal) = principal else {
            return err(line, format!("agent `{symbol}` lacks `principal`"));
        };
        AgentDecl::from_signature(sig, &symbol, arity, &principal).or_else(|e| err(line, e.to_string()))
    };
    for &(line, l) in lines {
        if let Some(n) = l.strip_prefix("arity ") {
            let Some(p) = pending.as_mut() else { return err(line, "`arity` before an agent symbol") };
            p.2 = Some(n.trim().parse().or_else(|_| err(line, format!("bad arity `{}`", n.trim())))?);
        } else if let Some(n) = l.strip_prefix("principal ") {
            let Some(p) = pending.as_mut() else { return err(line, "`principal` before an agent symbol") };
            p.3 = Some(n.trim().to_string());
        } else {
            if let Some(p) = pending.take() {
                out.push(finish(p)?);
            }
            pending = Some((line, l.to_string(), None, None));
        }
    }
    if let Some(p) = pending {
        out.push(finish(p)?);
    }
    Ok(out)
}

/// Parses a rule file on top of an existing signature.
pub fn parse_rules_with(text: &str, base: &PSignature) -> Result<RuleFile, ParseError> {
    let mut sig = base.clone();
    let mut agent_lines: Vec<(usize, &str)> = Vec::new();
    let mut rules: Vec<RawRule> = Vec::new();
    let mut section = Section::None;
    let mut side = Side::Other;
    for (line, l) in lines(text) {
        if let Some(n) = l.strip_prefix("RULE ") {
            rules.push(RawRule {
                line,
                name: n.trim().to_string(),
                lhs: RawGraph::default(),
                rhs: RawGraph::default(),
                interface: Vec::new(),
                keep: Vec::new(),
            });
            section = Section::None;
            side = Side::Other;
            continue;
        }
        let (next_section, next_side) = match l {
            "SIGNATURE" => (Some(Section::Signature), Side::Other),
            "AGENTS" => (Some(Section::Agents), Side::Other),
            "LHS" => (Some(Section::Nodes), Side::Lhs),
            "RHS" => (Some(Section::Nodes), Side::Rhs),
            "NODES" => (Some(Section::Nodes), side),
            "EDGES" => (Some(Section::Edges), side),
            "INTERFACE" => (Some(Section::Interface), Side::Other),
            "M" => (Some(Section::Keep), Side::Other),
            _ => (None, side),
        };
        if let Some(s) = next_section {
            if matches!(s, Section::Signature | Section::Agents) && !rules.is_empty() {
                return err(line, format!("`{l}` must come before the first RULE"));
            }
            if !matches!(s, Section::Signature | Section::Agents) && rules.is_empty() {
                return err(line, format!("`{l}` outside a RULE"));
            }
            if matches!(s, Section::Nodes | Section::Edges) && next_side == Side::Other {
                return err(line, format!("`{l}` must follow LHS or RHS"));
            }
            section = s;
            side = next_side;
            continue;
        }
        let rule = rules.last_mut();
        match (section, rule) {
            (Section::Signature, _) => parse_signature_line(line, l, &mut sig)?,
            (Section::Agents, _) => agent_lines.push((line, l)),
            (Section::Nodes, Some(r)) => {
                if side == Side::Lhs { r.lhs.node_line(line, l)? } else { r.rhs.node_line(line, l)? }
            }
            (Section::Edges, Some(r)) => {
                if side == Side::Lhs { r.lhs.edge_line(line, l)? } else { r.rhs.edge_line(line, l)? }
            }
            (Section::Interface, Some(r)) => {
                let (k, t) = parse_interface_line(line, l)?;
                r.interface.push((line, k, t));
            }
            (Section::Keep, Some(r)) => {
                for id in l.split(',').filter(|s| !s.trim().is_empty()) {
                    r.keep.push((line, parse_id(line, id)?));
                }
            }
            _ => return err(line, format!("unexpected `{l}`")),
        }
    }
    let agents = parse_agent_block(&agent_lines, &sig)?;
    let sig = Arc::new(sig);
    let mut out = Vec::new();
    let mut names = BTreeSet::new();
    for r in rules {
        if !names.insert(r.name.clone()) {
            return err(r.line, format!("rule `{}` defined twice", r.name));
        }
        let (lg, _, constraints, _) = r.lhs.build(&sig, true, false)?;
        let (rg, _, _, copies) = r.rhs.build(&sig, false, true)?;
        let mut interface = BTreeMap::new();
        for (line, k, t) in r.interface {
            if interface.insert(k.clone(), t).is_some() {
                return err(line, format!("interface lists {k} twice"));
            }
        }
        // A wire written once applies in both directions.
        let mirrored: Vec<(PortRef, PortRef)> = interface
            .iter()
            .filter_map(|(k, t)| match t {
                Target::Wire(o) if !interface.contains_key(o) => Some((o.clone(), k.clone())),
                _ => None,
            })
            .collect();
        for (o, k) in mirrored {
            interface.insert(o, Target::Wire(k));
        }
        let keep = r.keep.into_iter().map(|(_, id)| id).collect();
        let rule = Rule::new(&r.name, Pattern::new(lg, constraints), rg, interface, keep, copies)
            .or_else(|e| err(r.line, e.to_string()))?;
        out.push(rule);
    }
    Ok(RuleFile { signature: sig, agents, rules: out })
}

pub fn parse_rules(text: &str) -> Result<RuleFile, ParseError> {
    parse_rules_with(text, &PSignature::new())
}

fn print_signature(out: &mut String, sig: &PSignature) {
    if sig.is_empty() {
        return;
    }
    out.push_str("SIGNATURE\n");
    for (n, ports) in sig.iter() {
        let ports: Vec<&str> = ports.iter().map(|p| &**p).collect();
        let _ = writeln!(out, "{n} : {}", ports.join(", "));
    }
}

fn print_nodes(
    out: &mut String,
    g: &PortGraph,
    constraints: &BTreeMap<PortRef, PortConstraint>,
    copies: &BTreeMap<PortRef, PortRef>,
) {
    out.push_str("NODES\n");
    for n in g.nodes() {
        let _ = write!(out, "{} : {}", n.id, n.name);
        for p in &n.ports {
            let at = PortRef { node: n.id, port: p.name.clone() };
            let mark = match constraints.get(&at) {
                Some(PortConstraint::MustBeConnected) => "!",
                Some(PortConstraint::MustBeFree) => "?",
                _ => "",
            };
            let state = match (copies.get(&at), &p.state) {
                (Some(src), _) => format!("=@{src}"),
                (None, Some(s)) => format!("={s}"),
                (None, None) => String::new(),
            };
            if !mark.is_empty() || !state.is_empty() {
                let _ = write!(out, " {}{mark}{state}", p.name);
            }
        }
        out.push('\n');
    }
    if g.edge_count() > 0 {
        out.push_str("EDGES\n");
        for e in g.edges() {
            let _ = writeln!(out, "{e}");
        }
    }
}

fn join_ids<I: IntoIterator<Item = NodeId>>(ids: I) -> String {
    ids.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

/// Prints a located graph in the graph file format.
pub fn print_graph(g: &LocatedGraph) -> String {
    let mut out = String::new();
    print_signature(&mut out, g.graph.signature());
    print_nodes(&mut out, &g.graph, &BTreeMap::new(), &BTreeMap::new());
    if !g.position.is_empty() {
        let _ = writeln!(out, "POSITION\n{}", join_ids(g.position.iter().copied()));
    }
    out
}

/// Prints one `RULE` entry (without the signature).
pub fn print_rule(rule: &Rule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "RULE {}", rule.name());
    out.push_str("LHS\n");
    print_nodes(&mut out, rule.lhs().graph(), rule.lhs().constraints(), &BTreeMap::new());
    out.push_str("RHS\n");
    print_nodes(&mut out, rule.rhs(), &BTreeMap::new(), rule.state_copies());
    out.push_str("INTERFACE\n");
    for (k, t) in rule.interface() {
        match t {
            Target::Ports(ps) if ps.is_empty() => {
                let _ = writeln!(out, "{k} -> BLACKHOLE");
            }
            Target::Ports(ps) => {
                let ps: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                let _ = writeln!(out, "{k} -> {}", ps.join(", "));
            }
            Target::Wire(o) => {
                let _ = writeln!(out, "{k} -> WIRE {o}");
            }
        }
    }
    out.push_str("M\n");
    if !rule.keep().is_empty() {
        let _ = writeln!(out, "{}", join_ids(rule.keep().iter().copied()));
    }
    out
}

/// Prints a whole rule file.
pub fn print_rule_file(file: &RuleFile) -> String {
    let mut out = String::new();
    print_signature(&mut out, &file.signature);
    if !file.agents.is_empty() {
        out.push_str("AGENTS\n");
        for a in &file.agents {
            let _ = writeln!(out, "{}\narity {}\nprincipal {}", a.symbol, a.arity, a.principal);
        }
    }
    for r in &file.rules {
        out.push_str(&print_rule(r));
    }
    out
}
