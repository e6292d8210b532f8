//! Rules and the one-step rewrite relation on located graphs.
//!
//! A rule replaces the matched image of its left-hand side by a fresh copy of
//! its right-hand side. Edges that crossed the boundary of the old image are
//! reattached according to the rule interface: every left-hand-side port maps
//! to a (possibly empty) set of right-hand-side ports, or is wired through to
//! another left-hand-side port so that its two outer neighbours end up joined.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::{
    name, Edge, GraphError, IdSource, LocatedGraph, Name, NodeId, PSignature, PortGraph, PortRef,
};
use crate::matching::{find_disjoint_tuples, find_matches, Match, Pattern, PortConstraint};

/// Where a left-hand-side port sends its outer edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    /// Fan out to these right-hand-side ports. Empty is the black hole.
    Ports(Vec<PortRef>),
    /// Join the outer neighbour with the outer neighbour of another
    /// left-hand-side port.
    Wire(PortRef),
}

impl Target {
    pub fn black_hole() -> Self {
        Target::Ports(Vec::new())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule `{rule}`: left and right sides use different signatures")]
    SignatureMismatch { rule: Name },
    #[error("rule `{rule}`: left-hand side is empty")]
    EmptyLhs { rule: Name },
    #[error("rule `{rule}`: interface key {port} is not a left-hand-side port")]
    BadInterfaceKey { rule: Name, port: PortRef },
    #[error("rule `{rule}`: interface target {port} is not a right-hand-side port")]
    BadInterfaceTarget { rule: Name, port: PortRef },
    #[error("rule `{rule}`: wire {from} -> {to} must join two distinct left-hand-side ports")]
    BadWire { rule: Name, from: PortRef, to: PortRef },
    #[error("rule `{rule}`: node {node} in M is not a right-hand-side node")]
    BadKeep { rule: Name, node: NodeId },
    #[error("rule `{rule}`: state copy {from} -> {to} refers to a missing port")]
    BadStateCopy { rule: Name, from: PortRef, to: PortRef },
    #[error("rule `{rule}`: {source}")]
    Graph { rule: Name, source: GraphError },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("rule `{rule}` would attach a second edge to port {port}")]
    PortConflict { rule: Name, port: PortRef },
    #[error("rule `{rule}`: match {matching} no longer fits the host")]
    StaleMatch { rule: Name, matching: Match },
}

/// A rewrite rule `L => R` with its interface and the M subgraph of R that
/// joins the position after each application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    name: Name,
    lhs: Pattern,
    rhs: PortGraph,
    interface: BTreeMap<PortRef, Target>,
    keep: BTreeSet<NodeId>,
    /// Right-hand-side port -> left-hand-side port whose host state it copies.
    state_copies: BTreeMap<PortRef, PortRef>,
}

impl Rule {
    pub fn new(
        rule_name: &str,
        lhs: Pattern,
        rhs: PortGraph,
        interface: BTreeMap<PortRef, Target>,
        keep: BTreeSet<NodeId>,
        state_copies: BTreeMap<PortRef, PortRef>,
    ) -> Result<Self, RuleError> {
        let rule = name(rule_name);
        if lhs.graph().signature() != rhs.signature() {
            return Err(RuleError::SignatureMismatch { rule });
        }
        if lhs.is_empty() {
            return Err(RuleError::EmptyLhs { rule });
        }
        let is_l = |p: &PortRef| lhs.graph().node(p.node).is_some_and(|n| n.has_port(&p.port));
        let is_r = |p: &PortRef| rhs.node(p.node).is_some_and(|n| n.has_port(&p.port));
        for (k, t) in &interface {
            if !is_l(k) {
                return Err(RuleError::BadInterfaceKey { rule, port: k.clone() });
            }
            match t {
                Target::Ports(ps) => {
                    if let Some(bad) = ps.iter().find(|p| !is_r(p)) {
                        return Err(RuleError::BadInterfaceTarget { rule, port: bad.clone() });
                    }
                }
                Target::Wire(other) => {
                    let back_ok = match interface.get(other) {
                        None => true,
                        Some(Target::Wire(b)) => b == k,
                        Some(Target::Ports(_)) => false,
                    };
                    if !is_l(other) || other == k || !back_ok {
                        return Err(RuleError::BadWire { rule, from: k.clone(), to: other.clone() });
                    }
                }
            }
        }
        if let Some(bad) = keep.iter().find(|n| !rhs.contains_node(**n)) {
            return Err(RuleError::BadKeep { rule, node: *bad });
        }
        for (to, from) in &state_copies {
            if !is_r(to) || !is_l(from) {
                return Err(RuleError::BadStateCopy { rule, from: from.clone(), to: to.clone() });
            }
        }
        Ok(Rule { name: rule, lhs, rhs, interface, keep, state_copies })
    }

    pub fn name(&self) -> &Name {
        &self.name
    }

    pub fn lhs(&self) -> &Pattern {
        &self.lhs
    }

    pub fn rhs(&self) -> &PortGraph {
        &self.rhs
    }

    pub fn interface(&self) -> &BTreeMap<PortRef, Target> {
        &self.interface
    }

    /// Interface target of an L port; unlisted ports are black-holed.
    pub fn target(&self, port: &PortRef) -> Target {
        self.interface.get(port).cloned().unwrap_or_else(Target::black_hole)
    }

    /// The M subgraph: right-hand-side nodes added to the position.
    pub fn keep(&self) -> &BTreeSet<NodeId> {
        &self.keep
    }

    pub fn state_copies(&self) -> &BTreeMap<PortRef, PortRef> {
        &self.state_copies
    }

    pub fn signature(&self) -> &Arc<PSignature> {
        self.rhs.signature()
    }

    /// Same rule with a different M subgraph.
    pub fn with_keep(mut self, keep: BTreeSet<NodeId>) -> Result<Self, RuleError> {
        if let Some(bad) = keep.iter().find(|n| !self.rhs.contains_node(**n)) {
            return Err(RuleError::BadKeep { rule: self.name, node: *bad });
        }
        self.keep = keep;
        Ok(self)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::text::print_rule(self))
    }
}

/// Incremental construction of a [`Rule`] without going through text.
pub struct RuleBuilder {
    name: String,
    lhs: PortGraph,
    rhs: PortGraph,
    constraints: BTreeMap<PortRef, PortConstraint>,
    interface: BTreeMap<PortRef, Target>,
    keep: BTreeSet<NodeId>,
    state_copies: BTreeMap<PortRef, PortRef>,
    next: u64,
    error: Option<RuleError>,
}

impl RuleBuilder {
    pub fn new(rule_name: &str, signature: Arc<PSignature>) -> Self {
        RuleBuilder {
            name: rule_name.to_string(),
            lhs: PortGraph::new(signature.clone()),
            rhs: PortGraph::new(signature),
            constraints: BTreeMap::new(),
            interface: BTreeMap::new(),
            keep: BTreeSet::new(),
            state_copies: BTreeMap::new(),
            next: 1,
            error: None,
        }
    }

    fn record(&mut self, r: Result<(), GraphError>) {
        if let (Err(source), None) = (r, &self.error) {
            self.error = Some(RuleError::Graph { rule: name(&self.name), source });
        }
    }

    fn fresh(&mut self) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        id
    }

    /// Adds a left-hand-side node.
    pub fn lhs(&mut self, node_name: &str) -> NodeId {
        let id = self.fresh();
        let r = self.lhs.add_node(id, node_name).map(|_| ());
        self.record(r);
        id
    }

    /// Adds a right-hand-side node.
    pub fn rhs(&mut self, node_name: &str) -> NodeId {
        let id = self.fresh();
        let r = self.rhs.add_node(id, node_name).map(|_| ());
        self.record(r);
        id
    }

    pub fn lhs_edge(&mut self, a: NodeId, pa: &str, b: NodeId, pb: &str) -> &mut Self {
        let r = self.lhs.connect(PortRef::new(a, pa), PortRef::new(b, pb));
        self.record(r);
        self
    }

    pub fn rhs_edge(&mut self, a: NodeId, pa: &str, b: NodeId, pb: &str) -> &mut Self {
        let r = self.rhs.connect(PortRef::new(a, pa), PortRef::new(b, pb));
        self.record(r);
        self
    }

    pub fn lhs_state(&mut self, n: NodeId, port: &str, state: &str) -> &mut Self {
        let r = self.lhs.set_state(&PortRef::new(n, port), Some(name(state)));
        self.record(r);
        self
    }

    pub fn rhs_state(&mut self, n: NodeId, port: &str, state: &str) -> &mut Self {
        let r = self.rhs.set_state(&PortRef::new(n, port), Some(name(state)));
        self.record(r);
        self
    }

    pub fn constrain(&mut self, n: NodeId, port: &str, c: PortConstraint) -> &mut Self {
        self.constraints.insert(PortRef::new(n, port), c);
        self
    }

    /// The R port `to` takes the host state found at the image of L port `from`.
    pub fn copy_state(&mut self, to: NodeId, to_port: &str, from: NodeId, from_port: &str) -> &mut Self {
        self.state_copies.insert(PortRef::new(to, to_port), PortRef::new(from, from_port));
        self
    }

    /// Maps an L port to one or more R ports.
    pub fn map(&mut self, l: NodeId, lp: &str, targets: &[(NodeId, &str)]) -> &mut Self {
        let ts = targets.iter().map(|(n, p)| PortRef::new(*n, p)).collect();
        self.interface.insert(PortRef::new(l, lp), Target::Ports(ts));
        self
    }

    /// Joins the outer neighbours of two L ports.
    pub fn wire(&mut self, a: NodeId, pa: &str, b: NodeId, pb: &str) -> &mut Self {
        self.interface.insert(PortRef::new(a, pa), Target::Wire(PortRef::new(b, pb)));
        self.interface.insert(PortRef::new(b, pb), Target::Wire(PortRef::new(a, pa)));
        self
    }

    /// Adds an R node to M.
    pub fn keep(&mut self, r: NodeId) -> &mut Self {
        self.keep.insert(r);
        self
    }

    pub fn build(self) -> Result<Rule, RuleError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Rule::new(
            &self.name,
            Pattern::new(self.lhs, self.constraints),
            self.rhs,
            self.interface,
            self.keep,
            self.state_copies,
        )
    }
}

/// What one rule application did; enough to replay it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRecord {
    pub rule: Name,
    pub matching: Match,
    /// (R node, fresh host node), in R id order.
    pub created: Vec<(NodeId, NodeId)>,
    pub deleted: Vec<NodeId>,
    pub kept: Vec<NodeId>,
}

impl RewriteRecord {
    pub fn created_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.created.iter().map(|(_, h)| *h)
    }
}

/// A successful step: the new located graph and one record per applied match.
#[derive(Clone, Debug)]
pub struct Step {
    pub graph: LocatedGraph,
    pub records: Vec<RewriteRecord>,
    /// Index drawn among the candidates, and how many there were.
    pub draw: Option<(usize, usize)>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Applied(Step),
    Fail,
}

impl Outcome {
    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail)
    }

    pub fn step(self) -> Option<Step> {
        match self {
            Outcome::Applied(s) => Some(s),
            Outcome::Fail => None,
        }
    }
}

/// Resolves where an edge end lands after the rewrite: itself if external,
/// the fresh interface targets if matched (empty when black-holed).
fn resolve(
    end: &PortRef,
    back: &BTreeMap<NodeId, NodeId>,
    rule: &Rule,
    fresh: &BTreeMap<NodeId, NodeId>,
) -> Vec<PortRef> {
    match back.get(&end.node) {
        None => vec![end.clone()],
        Some(l) => match rule.target(&PortRef { node: *l, port: end.port.clone() }) {
            Target::Ports(ps) => ps.iter().map(|p| PortRef { node: fresh[&p.node], port: p.port.clone() }).collect(),
            Target::Wire(_) => Vec::new(),
        },
    }
}

/// Applies `rule` at match `m`, drawing fresh ids from `ids`.
pub fn apply_match(
    host: &LocatedGraph,
    rule: &Rule,
    m: &Match,
    ids: &mut IdSource,
) -> Result<(LocatedGraph, RewriteRecord), RewriteError> {
    let stale = || RewriteError::StaleMatch { rule: rule.name.clone(), matching: m.clone() };
    let back: BTreeMap<NodeId, NodeId> = m.pairs().iter().map(|(l, h)| (*h, *l)).collect();
    if back.len() != m.pairs().len() || m.image().any(|h| !host.graph.contains_node(h)) {
        return Err(stale());
    }
    let lgraph = rule.lhs.graph();

    // Host edges at matched ports that are not images of L edges.
    let mut l_edges: BTreeMap<Edge, usize> = BTreeMap::new();
    for e in lgraph.edges() {
        let (a, b) = e.ends();
        let img = |p: &PortRef| m.get(p.node).map(|h| PortRef { node: h, port: p.port.clone() });
        let (Some(ha), Some(hb)) = (img(a), img(b)) else { return Err(stale()) };
        *l_edges.entry(Edge::new(ha, hb)).or_default() += 1;
    }
    let mut boundary: Vec<Edge> = Vec::new();
    let mut seen: BTreeSet<Edge> = BTreeSet::new();
    for (l, h) in m.pairs() {
        let lnode = lgraph.node(*l).ok_or_else(stale)?;
        for p in &lnode.ports {
            let hp = PortRef { node: *h, port: p.name.clone() };
            for q in host.graph.partners(&hp) {
                let e = Edge::new(hp.clone(), q.clone());
                if seen.contains(&e) {
                    continue;
                }
                // An edge between two matched ports is visited from both ends.
                let both_matched = back.contains_key(&q.node);
                match l_edges.get_mut(&e) {
                    Some(c) if *c > 0 => {
                        *c -= 1;
                        if both_matched {
                            seen.insert(e);
                        }
                    }
                    _ => {
                        boundary.push(e.clone());
                        if both_matched {
                            seen.insert(e);
                        }
                    }
                }
            }
        }
    }
    if l_edges.values().any(|c| *c > 0) {
        return Err(stale());
    }

    // Wire links between host images of L ports.
    let mut wire: BTreeMap<PortRef, PortRef> = BTreeMap::new();
    for (k, t) in &rule.interface {
        if let Target::Wire(o) = t {
            let hk = PortRef { node: m.get(k.node).ok_or_else(stale)?, port: k.port.clone() };
            let ho = PortRef { node: m.get(o.node).ok_or_else(stale)?, port: o.port.clone() };
            wire.insert(hk.clone(), ho.clone());
            wire.insert(ho, hk);
        }
    }

    // Fresh copy of R.
    let mut graph = host.graph.clone();
    for h in m.image() {
        graph.remove_node(h);
    }
    let mut fresh: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for n in rule.rhs.nodes() {
        let id = ids.fresh();
        fresh.insert(n.id, id);
        let mut copy = n.clone();
        copy.id = id;
        for port in &mut copy.ports {
            if let Some(src) = rule.state_copies.get(&PortRef { node: n.id, port: port.name.clone() }) {
                let hn = host.graph.node(m.get(src.node).ok_or_else(stale)?).ok_or_else(stale)?;
                port.state = hn.state(&src.port).cloned();
            }
        }
        graph.insert_node(copy);
    }
    for e in rule.rhs.edges() {
        let (a, b) = e.ends();
        graph.add_edge(
            PortRef { node: fresh[&a.node], port: a.port.clone() },
            PortRef { node: fresh[&b.node], port: b.port.clone() },
        );
    }

    // Chains: boundary edges joined end to end through wire links.
    let mut new_edges: Vec<(PortRef, PortRef)> = Vec::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut edge_at: BTreeMap<PortRef, Vec<usize>> = BTreeMap::new();
    for (i, e) in boundary.iter().enumerate() {
        let (a, b) = e.ends();
        edge_at.entry(a.clone()).or_default().push(i);
        if a != b {
            edge_at.entry(b.clone()).or_default().push(i);
        }
    }
    // Follows a chain from `from` leaving through boundary edge `via`; returns
    // the terminal port, or None if the chain dead-ends or loops.
    let walk = |start: &PortRef, used: &mut BTreeSet<usize>| -> Option<PortRef> {
        let mut at = start.clone();
        loop {
            let Some(next) = wire.get(&at) else { return Some(at) };
            let Some(&i) = edge_at.get(next).and_then(|v| v.iter().find(|i| !used.contains(i))) else {
                return None;
            };
            used.insert(i);
            at = boundary[i].other(next).expect("edge end").clone();
        }
    };
    for (i, e) in boundary.iter().enumerate() {
        if used.contains(&i) {
            continue;
        }
        used.insert(i);
        let (a, b) = e.ends();
        let ta = walk(a, &mut used);
        let tb = walk(b, &mut used);
        let (Some(ta), Some(tb)) = (ta, tb) else { continue };
        for x in resolve(&ta, &back, rule, &fresh) {
            for y in resolve(&tb, &back, rule, &fresh) {
                new_edges.push((x.clone(), y));
            }
        }
    }
    let mut touched: BTreeSet<PortRef> = BTreeSet::new();
    for (x, y) in new_edges {
        for end in [&x, &y] {
            if !graph.is_free(end) || !touched.insert(end.clone()) || x == y {
                return Err(RewriteError::PortConflict { rule: rule.name.clone(), port: end.clone() });
            }
        }
        graph.add_edge(x, y);
    }

    let deleted: Vec<NodeId> = m.image().collect();
    let kept: Vec<NodeId> = rule.keep.iter().map(|r| fresh[r]).collect();
    let mut position = host.position.clone();
    for h in &deleted {
        position.remove(h);
    }
    position.extend(kept.iter().copied());
    let record = RewriteRecord {
        rule: rule.name.clone(),
        matching: m.clone(),
        created: fresh.into_iter().collect(),
        deleted,
        kept,
    };
    Ok((LocatedGraph::new(graph, position), record))
}

/// Applies a list of pairwise-disjoint matches one after another, as one step.
pub fn apply_all(
    host: &LocatedGraph,
    apps: &[(&Rule, Match)],
    ids: &mut IdSource,
) -> Result<(LocatedGraph, Vec<RewriteRecord>), RewriteError> {
    let mut g = host.clone();
    let mut records = Vec::with_capacity(apps.len());
    // Every match contributes its own M, and removes its own image, against
    // the position as it was before the step.
    let mut removed: BTreeSet<NodeId> = BTreeSet::new();
    let mut added: BTreeSet<NodeId> = BTreeSet::new();
    for (rule, m) in apps {
        let (next, rec) = apply_match(&g, rule, m, ids)?;
        removed.extend(rec.deleted.iter().copied());
        added.extend(rec.kept.iter().copied());
        records.push(rec);
        g = next;
    }
    let mut position: BTreeSet<NodeId> = host.position.difference(&removed).copied().collect();
    position.extend(added);
    Ok((LocatedGraph::new(g.graph, position), records))
}

/// Applies `rule` once at a uniformly chosen match overlapping the position.
pub fn rewrite_once<R: Rng + ?Sized>(
    host: &LocatedGraph,
    rule: &Rule,
    rng: &mut R,
    ids: &mut IdSource,
) -> Result<Outcome, RewriteError> {
    let matches = find_matches(&rule.lhs, host);
    if matches.is_empty() {
        return Ok(Outcome::Fail);
    }
    let k = if matches.len() == 1 { 0 } else { rng.gen_range(0..matches.len()) };
    let (graph, record) = apply_match(host, rule, &matches[k], ids)?;
    Ok(Outcome::Applied(Step { graph, records: vec![record], draw: Some((k, matches.len())), note: None }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParallelMode {
    /// Every operand must apply, on pairwise-disjoint subgraphs.
    All,
    /// As many operands as possible; fails only if none applies.
    AtLeastOne,
}

fn apply_tuple<R: Rng + ?Sized>(
    host: &LocatedGraph,
    rules: &[&Rule],
    rng: &mut R,
    ids: &mut IdSource,
) -> Result<Option<Step>, RewriteError> {
    let pats: Vec<&Pattern> = rules.iter().map(|r| &r.lhs).collect();
    let tuples = find_disjoint_tuples(&pats, host);
    if tuples.is_empty() {
        return Ok(None);
    }
    let k = if tuples.len() == 1 { 0 } else { rng.gen_range(0..tuples.len()) };
    let apps: Vec<(&Rule, Match)> = rules.iter().copied().zip(tuples[k].iter().cloned()).collect();
    let (graph, records) = apply_all(host, &apps, ids)?;
    Ok(Some(Step { graph, records, draw: Some((k, tuples.len())), note: None }))
}

/// Simultaneous application of several rules on disjoint subgraphs.
///
/// In `AtLeastOne` mode, subsets of operands are tried from largest to
/// smallest and, within one size, leftmost first.
pub fn apply_parallel<R: Rng + ?Sized>(
    host: &LocatedGraph,
    rules: &[&Rule],
    mode: ParallelMode,
    rng: &mut R,
    ids: &mut IdSource,
) -> Result<Outcome, RewriteError> {
    if rules.is_empty() {
        return Ok(Outcome::Fail);
    }
    if let Some(step) = apply_tuple(host, rules, rng, ids)? {
        return Ok(Outcome::Applied(step));
    }
    if mode == ParallelMode::All {
        return Ok(Outcome::Fail);
    }
    let k = rules.len();
    let applicable: Vec<usize> = (0..k).filter(|&i| crate::matching::match_exists(&rules[i].lhs, host)).collect();
    for size in (1..k).rev() {
        for subset in subsets_of_size(k, size) {
            let picked: Vec<&Rule> = subset.iter().map(|&i| rules[i]).collect();
            if let Some(mut step) = apply_tuple(host, &picked, rng, ids)? {
                let skipped: Vec<&str> =
                    applicable.iter().filter(|i| !subset.contains(i)).map(|&i| &*rules[i].name).collect();
                if !skipped.is_empty() {
                    step.note = Some(format!(
                        "interleave: {} applicable but overlapping, applied leftmost subset only",
                        skipped.join(", ")
                    ));
                }
                return Ok(Outcome::Applied(step));
            }
        }
    }
    Ok(Outcome::Fail)
}

/// Index subsets of `0..k` with `size` elements, in lexicographic order.
fn subsets_of_size(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    rec(0, k, size, &mut cur, &mut out);
    out
}

/// Applies `rule` at least `min` and at most `max` times simultaneously
/// (no maximum when `max` is negative). Matches are packed greedily in
/// random order; a negative minimum counts as zero.
pub fn apply_multi<R: Rng + ?Sized>(
    host: &LocatedGraph,
    rule: &Rule,
    min: i64,
    max: i64,
    rng: &mut R,
    ids: &mut IdSource,
) -> Result<Outcome, RewriteError> {
    let mut matches = find_matches(&rule.lhs, host);
    matches.shuffle(rng);
    let mut used: BTreeSet<NodeId> = BTreeSet::new();
    let mut chosen: Vec<Match> = Vec::new();
    for m in matches {
        if max >= 0 && chosen.len() as i64 >= max {
            break;
        }
        if m.image().any(|h| used.contains(&h)) {
            continue;
        }
        used.extend(m.image());
        chosen.push(m);
    }
    if (chosen.len() as i64) < min.max(0) {
        return Ok(Outcome::Fail);
    }
    chosen.sort_by_key(|m| m.host_tuple());
    let apps: Vec<(&Rule, Match)> = chosen.into_iter().map(|m| (rule, m)).collect();
    let (graph, records) = apply_all(host, &apps, ids)?;
    Ok(Outcome::Applied(Step { graph, records, draw: None, note: None }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{validate, Position};
    use crate::text::{parse_graph_with, parse_rules};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RULES: &str = "
SIGNATURE
X : x1, x2
S : s_p, s_a
W : w
RULE same
LHS
1 : X
RHS
2 : X
INTERFACE
1.x1 -> 2.x1
1.x2 -> 2.x2
M
2
RULE reduce
LHS
1 : S
2 : S
EDGES
1.s_p -- 2.s_p
RHS
INTERFACE
1.s_a -> WIRE 2.s_a
M
RULE vanish
LHS
1 : X
RHS
INTERFACE
M
RULE split
LHS
1 : X
RHS
2 : X
3 : X
INTERFACE
1.x1 -> 2.x1, 3.x1
M
";

    fn rules() -> BTreeMap<String, Rule> {
        parse_rules(RULES).unwrap().rules.into_iter().map(|r| (r.name().to_string(), r)).collect()
    }

    fn host(text: &str) -> LocatedGraph {
        let file = parse_rules(RULES).unwrap();
        parse_graph_with(text, &file.signature).unwrap()
    }

    fn only(g: &LocatedGraph, rule: &Rule) -> Match {
        // Symmetric left-hand sides match the same nodes more than once.
        let ms = find_matches(rule.lhs(), g);
        let images: BTreeSet<BTreeSet<NodeId>> = ms.iter().map(|m| m.image().collect()).collect();
        assert_eq!(images.len(), 1);
        ms.into_iter().next().unwrap()
    }

    #[test]
    fn identity_like_rule_preserves_shape() {
        let rules = rules();
        let g = host("NODES\n1 : X\n2 : W\n3 : W\nEDGES\n1.x1 -- 2.w\n1.x2 -- 3.w\nPOSITION\n1");
        let r = &rules["same"];
        let mut ids = IdSource::after(&g.graph);
        let (out, rec) = apply_match(&g, r, &only(&g, r), &mut ids).unwrap();
        assert!(validate(&out.graph).is_empty());
        assert!(crate::inets::isomorphic(&g.graph, &out.graph));
        assert_eq!(out.position, Position::from([NodeId(4)]));
        assert_eq!(rec.created, vec![(NodeId(2), NodeId(4))]);
        assert_eq!(rec.deleted, vec![NodeId(1)]);
    }

    #[test]
    fn wire_rhs_joins_outer_neighbours() {
        let rules = rules();
        let g = host(
            "NODES\n1 : S\n2 : S\n3 : W\n4 : W\nEDGES\n1.s_p -- 2.s_p\n1.s_a -- 3.w\n2.s_a -- 4.w\nPOSITION\n1, 2",
        );
        let r = &rules["reduce"];
        let (out, _) = apply_match(&g, r, &only(&g, r), &mut IdSource::after(&g.graph)).unwrap();
        assert_eq!(out.graph.node_count(), 2);
        assert_eq!(out.graph.partner(&PortRef::new(NodeId(3), "w")), Some(&PortRef::new(NodeId(4), "w")));
        assert!(out.position.is_empty());
    }

    #[test]
    fn wire_through_chain_of_redexes() {
        // W - S1 = S2 - S3 = S4 - W : reducing the first pair joins W to S3.
        let rules = rules();
        let g = host(
            "NODES\n1 : S\n2 : S\n3 : S\n4 : S\n5 : W\n6 : W\nEDGES\n1.s_p -- 2.s_p\n3.s_p -- 4.s_p\n\
             5.w -- 1.s_a\n2.s_a -- 3.s_a\n4.s_a -- 6.w",
        );
        let g = LocatedGraph::everywhere(g.graph);
        let r = &rules["reduce"];
        let pats = [r.lhs(), r.lhs()];
        let tuples = find_disjoint_tuples(&pats, &g);
        assert!(!tuples.is_empty());
        let apps: Vec<(&Rule, Match)> = tuples[0].iter().map(|m| (r, m.clone())).collect();
        let (out, _) = apply_all(&g, &apps, &mut IdSource::after(&g.graph)).unwrap();
        assert_eq!(out.graph.node_count(), 2);
        assert_eq!(out.graph.partner(&PortRef::new(NodeId(5), "w")), Some(&PortRef::new(NodeId(6), "w")));
    }

    #[test]
    fn black_hole_drops_edges() {
        let rules = rules();
        let g = host("NODES\n1 : X\n2 : W\nEDGES\n1.x1 -- 2.w\nPOSITION\n1, 2");
        let r = &rules["vanish"];
        let (out, rec) = apply_match(&g, r, &only(&g, r), &mut IdSource::after(&g.graph)).unwrap();
        assert_eq!(out.graph.edge_count(), 0);
        assert!(out.graph.is_free(&PortRef::new(NodeId(2), "w")));
        // empty M: the matched node leaves the position and nothing enters
        assert_eq!(out.position, Position::from([NodeId(2)]));
        assert!(rec.kept.is_empty());
    }

    #[test]
    fn fan_out_onto_busy_port_is_an_error() {
        let rules = rules();
        let g = host("NODES\n1 : X\n2 : W\nEDGES\n1.x1 -- 2.w\nPOSITION\n1");
        let r = &rules["split"];
        let err = apply_match(&g, r, &only(&g, r), &mut IdSource::after(&g.graph)).unwrap_err();
        assert!(matches!(err, RewriteError::PortConflict { .. }));
    }

    #[test]
    fn non_induced_edge_between_matched_nodes_is_rewired() {
        let rules = rules();
        let g = host(
            "NODES\n1 : S\n2 : S\nEDGES\n1.s_p -- 2.s_p\n1.s_a -- 2.s_a\nPOSITION\n1",
        );
        let r = &rules["reduce"];
        let (out, _) = apply_match(&g, r, &only(&g, r), &mut IdSource::after(&g.graph)).unwrap();
        // The auxiliary ports were joined to each other; the wire closes a loop and vanishes.
        assert_eq!(out.graph.node_count(), 0);
        assert_eq!(out.graph.edge_count(), 0);
    }

    #[test]
    fn rewrite_once_fails_without_touching_the_host() {
        let rules = rules();
        let g = host("NODES\n1 : W\nPOSITION\n1");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let before = g.clone();
        let out = rewrite_once(&g, &rules["same"], &mut rng, &mut IdSource::after(&g.graph)).unwrap();
        assert!(out.is_fail());
        assert_eq!(g, before);
    }

    #[test]
    fn rewrite_once_picks_uniformly() {
        let rules = rules();
        let g = host("NODES\n1 : X\n2 : X\nPOSITION\n1, 2");
        let r = &rules["vanish"];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut first = 0;
        let trials = 10_000;
        for _ in 0..trials {
            let step = rewrite_once(&g, r, &mut rng, &mut IdSource::after(&g.graph)).unwrap().step().unwrap();
            if step.records[0].deleted == vec![NodeId(1)] {
                first += 1;
            }
        }
        let freq = first as f64 / trials as f64;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    fn redexes(n: u64) -> LocatedGraph {
        let mut text = String::from("NODES\n");
        for i in 0..n {
            text += &format!("{} : S\n{} : S\n", 2 * i, 2 * i + 1);
        }
        text += "EDGES\n";
        for i in 0..n {
            text += &format!("{}.s_p -- {}.s_p\n", 2 * i, 2 * i + 1);
        }
        LocatedGraph::everywhere(host(&text).graph)
    }

    #[test]
    fn parallel_modes() {
        let rules = rules();
        let g = host("NODES\n1 : X\n2 : S\n3 : S\nEDGES\n2.s_p -- 3.s_p\nPOSITION\n1, 2, 3");
        let (x, s) = (&rules["vanish"], &rules["reduce"]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let both = apply_parallel(&g, &[x, s], ParallelMode::All, &mut rng, &mut IdSource::after(&g.graph))
            .unwrap()
            .step()
            .unwrap();
        assert_eq!(both.records.len(), 2);
        assert_eq!(both.graph.graph.node_count(), 0);

        let only_x = host("NODES\n1 : X\nPOSITION\n1");
        let ids = &mut IdSource::after(&only_x.graph);
        assert!(apply_parallel(&only_x, &[x, s], ParallelMode::All, &mut rng, ids).unwrap().is_fail());
        let step = apply_parallel(&only_x, &[x, s], ParallelMode::AtLeastOne, &mut rng, ids).unwrap().step().unwrap();
        assert_eq!(step.records.len(), 1);
        assert_eq!(&*step.records[0].rule, "vanish");
    }

    #[test]
    fn interleave_prefers_left_when_operands_overlap() {
        let rules = rules();
        let g = host("NODES\n1 : X\nPOSITION\n1");
        let (a, b) = (&rules["vanish"], &rules["same"]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let step = apply_parallel(&g, &[a, b], ParallelMode::AtLeastOne, &mut rng, &mut IdSource::after(&g.graph))
            .unwrap()
            .step()
            .unwrap();
        assert_eq!(&*step.records[0].rule, "vanish");
        assert!(step.note.is_some());
    }

    /// Largest set of pairwise-disjoint matches, by exhaustive search.
    fn max_disjoint(ms: &[Match]) -> usize {
        (0u32..(1 << ms.len()))
            .filter(|mask| {
                let picked: Vec<&Match> = (0..ms.len()).filter(|i| mask & (1 << i) != 0).map(|i| &ms[i]).collect();
                picked.iter().enumerate().all(|(i, a)| picked[i + 1..].iter().all(|b| !a.overlaps(b)))
            })
            .map(|mask| mask.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn multi_bounds() {
        let rules = rules();
        let r = &rules["reduce"];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = redexes(5);
        let step = apply_multi(&g, r, 2, 3, &mut rng, &mut IdSource::after(&g.graph)).unwrap().step().unwrap();
        assert_eq!(step.records.len(), 3);

        let g = redexes(1);
        assert!(apply_multi(&g, r, 2, -1, &mut rng, &mut IdSource::after(&g.graph)).unwrap().is_fail());

        let g = redexes(4);
        let want = max_disjoint(&find_matches(r.lhs(), &g));
        let step = apply_multi(&g, r, 0, -1, &mut rng, &mut IdSource::after(&g.graph)).unwrap().step().unwrap();
        assert_eq!(step.records.len(), want);
        assert_eq!(want, 4);
        assert_eq!(step.graph.graph.node_count(), 0);
    }

    #[test]
    fn negative_minimum_counts_as_zero() {
        let rules = rules();
        let g = host("NODES\n1 : W\nPOSITION\n1");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_multi(&g, &rules["reduce"], -1, -1, &mut rng, &mut IdSource::after(&g.graph)).unwrap();
        assert!(!out.is_fail());
    }

    #[test]
    fn rule_validation() {
        let sig = parse_rules(RULES).unwrap().signature;
        let mut b = RuleBuilder::new("bad", sig.clone());
        let l = b.lhs("X");
        b.map(l, "x1", &[(NodeId(99), "x1")]);
        assert!(matches!(b.build(), Err(RuleError::BadInterfaceTarget { .. })));

        let mut b = RuleBuilder::new("bad", sig.clone());
        let l = b.lhs("X");
        b.keep(l);
        assert!(matches!(b.build(), Err(RuleError::BadKeep { .. })));

        let b = RuleBuilder::new("empty", sig);
        assert!(matches!(b.build(), Err(RuleError::EmptyLhs { .. })));
    }
}
