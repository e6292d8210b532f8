//! Random hosts, rules and strategies, plus oracles that do not go through
//! the matcher or the engine.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use portstrat::graph::{
    name, validate, Designation, LocatedGraph, NodeId, PSignature, PortGraph, PortRef, Position,
};
use portstrat::matching::{Match, Pattern, PortConstraint, NO_STATE};
use portstrat::rewrite::{Rule, RuleBuilder};
use portstrat::strategy::{
    parse_strategy_unchecked, replay, run, EngineConfig, EngineError, RunOutcome, RunResult, Trace, TraceEntry,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const KINDS: [(&str, &[&str]); 3] = [("A", &["a1", "a2"]), ("B", &["b1", "b2", "b3"]), ("C", &["c"])];
pub const STATES: [&str; 2] = ["x", "y"];

pub fn signature() -> Arc<PSignature> {
    let mut sig = PSignature::new();
    for (n, ports) in KINDS {
        sig.declare(n, ports.iter().copied()).unwrap();
    }
    Arc::new(sig)
}

pub fn designation() -> Designation {
    KINDS.iter().map(|(n, ports)| (name(n), name(ports[0]))).collect()
}

fn ports_of(kind: &str) -> &'static [&'static str] {
    KINDS.iter().find(|(n, _)| *n == kind).unwrap().1
}

fn all_ports(g: &PortGraph) -> Vec<PortRef> {
    g.nodes().flat_map(|n| n.ports.iter().map(move |p| PortRef { node: n.id, port: p.name.clone() })).collect()
}

/// Adds up to `tries` random edges between free ports.
fn sprinkle_edges<R: Rng>(rng: &mut R, g: &mut PortGraph, tries: usize) {
    let ports = all_ports(g);
    if ports.len() < 2 {
        return;
    }
    for _ in 0..tries {
        let a = ports.choose(rng).unwrap().clone();
        let b = ports.choose(rng).unwrap().clone();
        if a != b && g.is_free(&a) && g.is_free(&b) {
            g.connect(a, b).unwrap();
        }
    }
}

/// A valid graph of 1 to `max_nodes` nodes with random states, edges and
/// position.
pub fn random_host<R: Rng>(rng: &mut R, max_nodes: usize) -> LocatedGraph {
    let mut g = PortGraph::new(signature());
    let n = rng.gen_range(1..=max_nodes);
    for i in 1..=n as u64 {
        let kind = KINDS.choose(rng).unwrap().0;
        g.add_node(NodeId(i), kind).unwrap();
        for p in ports_of(kind) {
            if rng.gen_bool(0.4) {
                let s = STATES.choose(rng).unwrap();
                g.set_state(&PortRef::new(NodeId(i), p), Some(name(s))).unwrap();
            }
        }
    }
    let tries = rng.gen_range(0..=2 * n);
    sprinkle_edges(rng, &mut g, tries);
    let position: Position = g.node_ids().filter(|_| rng.gen_bool(0.5)).collect();
    LocatedGraph::new(g, position)
}

/// A left-hand side of 1 to `max_nodes` nodes with states, `_none` marks,
/// edges and port constraints.
pub fn random_pattern<R: Rng>(rng: &mut R, max_nodes: usize) -> Pattern {
    let mut g = PortGraph::new(signature());
    let n = rng.gen_range(1..=max_nodes);
    for i in 1..=n as u64 {
        let kind = KINDS.choose(rng).unwrap().0;
        g.add_node(NodeId(i), kind).unwrap();
        for p in ports_of(kind) {
            let roll: f64 = rng.gen();
            let s = if roll < 0.15 {
                Some(STATES.choose(rng).unwrap().to_string())
            } else if roll < 0.22 {
                Some(NO_STATE.to_string())
            } else {
                None
            };
            if let Some(s) = s {
                g.set_state(&PortRef::new(NodeId(i), p), Some(name(&s))).unwrap();
            }
        }
    }
    let tries = rng.gen_range(0..=n);
    sprinkle_edges(rng, &mut g, tries);
    let mut constraints = BTreeMap::new();
    for p in all_ports(&g) {
        if g.is_free(&p) {
            let roll: f64 = rng.gen();
            if roll < 0.12 {
                constraints.insert(p, PortConstraint::MustBeFree);
            } else if roll < 0.24 {
                constraints.insert(p, PortConstraint::MustBeConnected);
            }
        }
    }
    Pattern::new(g, constraints)
}

/// A pattern cut out of `host`: up to `max_nodes` of its nodes with the
/// edges among them and some of their states, so that it matches at least
/// once when the cut touches the position.
pub fn pattern_from_host<R: Rng>(rng: &mut R, host: &LocatedGraph, max_nodes: usize) -> Pattern {
    let ids: Vec<NodeId> = host.graph.node_ids().collect();
    let k = rng.gen_range(1..=max_nodes.min(ids.len()));
    let picked: BTreeSet<NodeId> = ids.choose_multiple(rng, k).copied().collect();
    let mut g = PortGraph::new(signature());
    for id in &picked {
        let n = host.graph.node(*id).unwrap();
        g.add_node(*id, &n.name).unwrap();
        for p in &n.ports {
            if p.state.is_some() && rng.gen_bool(0.5) {
                g.set_state(&PortRef { node: *id, port: p.name.clone() }, p.state.clone()).unwrap();
            }
        }
    }
    for e in host.graph.edges() {
        let (a, b) = e.ends();
        if picked.contains(&a.node) && picked.contains(&b.node) && rng.gen_bool(0.8) {
            g.connect(a.clone(), b.clone()).unwrap();
        }
    }
    let mut constraints = BTreeMap::new();
    for p in all_ports(&g) {
        if g.is_free(&p) && rng.gen_bool(0.2) {
            let c = if host.graph.is_free(&p) { PortConstraint::MustBeFree } else { PortConstraint::MustBeConnected };
            constraints.insert(p, c);
        }
    }
    Pattern::new(g, constraints)
}

/// A random rule whose right-hand side never attaches two edges to one port.
pub fn random_rule<R: Rng>(rng: &mut R, rule_name: &str) -> Rule {
    let mut b = RuleBuilder::new(rule_name, signature());
    let l_n = rng.gen_range(1..=2);
    let mut l_ids = Vec::new();
    for _ in 0..l_n {
        let kind = KINDS.choose(rng).unwrap().0;
        let id = b.lhs(kind);
        for p in ports_of(kind) {
            if rng.gen_bool(0.15) {
                b.lhs_state(id, p, STATES.choose(rng).unwrap());
            }
        }
        l_ids.push((id, kind));
    }
    let mut l_free: Vec<(NodeId, &str)> =
        l_ids.iter().flat_map(|(id, k)| ports_of(k).iter().map(move |p| (*id, *p))).collect();
    if l_n == 2 && rng.gen_bool(0.6) {
        let x = l_free.remove(rng.gen_range(0..l_free.len()));
        let candidates: Vec<usize> = (0..l_free.len()).filter(|&i| l_free[i].0 != x.0).collect();
        let y = l_free.remove(*candidates.choose(rng).unwrap());
        b.lhs_edge(x.0, x.1, y.0, y.1);
    }
    for (id, p) in &l_free {
        if rng.gen_bool(0.1) {
            b.constrain(*id, p, PortConstraint::MustBeFree);
        }
    }
    let r_n = rng.gen_range(0..=2);
    let mut r_free: Vec<(NodeId, &str)> = Vec::new();
    let mut r_blank: Vec<(NodeId, &str)> = Vec::new();
    for _ in 0..r_n {
        let kind = KINDS.choose(rng).unwrap().0;
        let id = b.rhs(kind);
        for p in ports_of(kind) {
            if rng.gen_bool(0.2) {
                b.rhs_state(id, p, STATES.choose(rng).unwrap());
            } else {
                r_blank.push((id, p));
            }
            r_free.push((id, p));
        }
        if rng.gen_bool(0.5) {
            b.keep(id);
        }
    }
    if r_free.len() >= 2 && rng.gen_bool(0.4) {
        let x = r_free.remove(rng.gen_range(0..r_free.len()));
        let y = r_free.remove(rng.gen_range(0..r_free.len()));
        b.rhs_edge(x.0, x.1, y.0, y.1);
    }
    r_free.shuffle(rng);
    l_free.shuffle(rng);
    let mut l_left = l_free.clone();
    while let Some((id, p)) = l_left.pop() {
        let roll: f64 = rng.gen();
        if roll < 0.4 {
            if let Some((rid, rp)) = r_free.pop() {
                b.map(id, p, &[(rid, rp)]);
            }
        } else if roll < 0.55 {
            if let Some((oid, op)) = l_left.pop() {
                b.wire(id, p, oid, op);
            }
        }
    }
    if let (Some(&(rid, rp)), Some(&(lid, lp))) = (r_blank.first(), l_free.first()) {
        if rng.gen_bool(0.2) {
            b.copy_state(rid, rp, lid, lp);
        }
    }
    b.build().unwrap()
}

pub fn random_rules<R: Rng>(rng: &mut R) -> Vec<Rule> {
    let n = rng.gen_range(1..=3);
    (0..n).map(|i| random_rule(rng, &format!("r{i}"))).collect()
}

fn position_text<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..9) {
        0 => "crtpos".into(),
        1 => "allsuc".into(),
        2 => "onesuc".into(),
        3 => "nextsuc".into(),
        4 => format!("setpos({}, {})", rng.gen_range(1..=8), rng.gen_range(1..=9)),
        5 => format!("property(name==\"{}\", graph)", KINDS.choose(rng).unwrap().0),
        6 => format!("property(portstate(a1)==\"x\" or interface, {})", if rng.gen() { "graph" } else { "pos" }),
        7 => "compl(crtpos)".into(),
        _ => "union(allsuc, minus(crtpos, property(name==\"C\", graph)))".into(),
    }
}

fn rule_text<R: Rng>(rng: &mut R, rules: &[String]) -> String {
    let r = |rng: &mut R| rules.choose(rng).unwrap().clone();
    match rng.gen_range(0..10) {
        0 => format!("par({}, {})", r(rng), r(rng)),
        1 => format!("ipar({}, {})", r(rng), r(rng)),
        2 => format!("multi({}, {}, {})", r(rng), rng.gen_range(0..2), [-1, 2].choose(rng).unwrap()),
        _ => r(rng),
    }
}

/// Strategy text of nesting depth at most `depth`.
pub fn random_strategy<R: Rng>(rng: &mut R, depth: u32, rules: &[String]) -> String {
    if depth <= 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..7) {
            0 => "id".into(),
            1 => "fail".into(),
            2 => "pnotempty".into(),
            3 | 4 => position_text(rng),
            _ => rule_text(rng, rules),
        };
    }
    let s = |rng: &mut R| random_strategy(rng, depth - 1, rules);
    match rng.gen_range(0..12) {
        0 | 1 => format!("({}; {})", s(rng), s(rng)),
        2 => format!("({} + {})", s(rng), s(rng)),
        3 => format!("ppick({}, {})", s(rng), s(rng)),
        4 => {
            let min = rng.gen_range(-1..=2);
            let max = [-1, 0, 1, 3].choose(rng).copied().unwrap();
            format!("while({})do({})min({min})max({max})", s(rng), s(rng))
        }
        5 => format!("if({})then({})else({})", s(rng), s(rng), s(rng)),
        6 => format!("atomic({})", s(rng)),
        7 => format!("try({})", s(rng)),
        8 => format!("not({})", s(rng)),
        9 => format!("({} orelse {})", s(rng), s(rng)),
        10 => format!("repeat*({})", s(rng)),
        _ => format!("repeat+({})", s(rng)),
    }
}

/// Strategies that leave the graph as they found it whenever they fail.
pub fn pure_strategy<R: Rng>(rng: &mut R, depth: u32, rules: &[String]) -> String {
    if depth <= 1 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..4) {
            0 => "fail".into(),
            1 => "pnotempty".into(),
            _ => rule_text(rng, rules),
        };
    }
    match rng.gen_range(0..5) {
        0 => format!("({} + {})", random_strategy(rng, depth - 1, rules), random_strategy(rng, depth - 1, rules)),
        1 => format!("ppick({}, {})", pure_strategy(rng, depth - 1, rules), pure_strategy(rng, depth - 1, rules)),
        2 => format!(
            "if({})then({})else({})",
            random_strategy(rng, depth - 1, rules),
            pure_strategy(rng, depth - 1, rules),
            pure_strategy(rng, depth - 1, rules)
        ),
        3 => format!("atomic({})", pure_strategy(rng, depth - 1, rules)),
        _ => format!("not({})", random_strategy(rng, depth - 1, rules)),
    }
}

/// Every injective map from pattern nodes to host nodes that keeps names,
/// states, constraints and edges and touches the position.
pub fn brute_force_matches(lhs: &Pattern, host: &LocatedGraph) -> Vec<Match> {
    let l = lhs.graph();
    let lnodes: Vec<NodeId> = lhs.order().to_vec();
    let hnodes: Vec<NodeId> = host.graph.node_ids().collect();
    let mut out = Vec::new();
    let k = lnodes.len();
    let total = hnodes.len().pow(k as u32);
    'maps: for code in 0..total {
        let mut c = code;
        let mut image = Vec::with_capacity(k);
        for _ in 0..k {
            image.push(hnodes[c % hnodes.len()]);
            c /= hnodes.len();
        }
        let distinct: BTreeSet<NodeId> = image.iter().copied().collect();
        if distinct.len() != k || !image.iter().any(|h| host.position.contains(h)) {
            continue;
        }
        let map: BTreeMap<NodeId, NodeId> = lnodes.iter().copied().zip(image.iter().copied()).collect();
        for (lid, hid) in &map {
            let (ln, hn) = (l.node(*lid).unwrap(), host.graph.node(*hid).unwrap());
            if ln.name != hn.name {
                continue 'maps;
            }
            for lp in &ln.ports {
                let hs = hn.state(&lp.name);
                let ok = match lp.state.as_deref() {
                    None => true,
                    Some(NO_STATE) => hs.is_none(),
                    Some(s) => hs.map(|x| &**x) == Some(s),
                };
                let here = PortRef { node: *hid, port: lp.name.clone() };
                let ok = ok
                    && match lhs.constraint(&PortRef { node: *lid, port: lp.name.clone() }) {
                        PortConstraint::Any => true,
                        PortConstraint::MustBeFree => host.graph.partners(&here).is_empty(),
                        PortConstraint::MustBeConnected => !host.graph.partners(&here).is_empty(),
                    };
                if !ok {
                    continue 'maps;
                }
            }
        }
        for e in l.edges() {
            let (a, b) = e.ends();
            let ha = PortRef { node: map[&a.node], port: a.port.clone() };
            let hb = PortRef { node: map[&b.node], port: b.port.clone() };
            if !host.graph.partners(&ha).contains(&hb) {
                continue 'maps;
            }
        }
        out.push(Match::from_pairs(lnodes.iter().map(|l| (*l, map[l])).collect()));
    }
    out.sort_by_key(|m| m.host_tuple());
    out
}

fn flatten(entries: &[TraceEntry], out: &mut Vec<TraceEntry>) {
    for e in entries {
        match e {
            TraceEntry::Atomic(v) => flatten(v, out),
            other => out.push(other.clone()),
        }
    }
}

/// Checks P' = (P minus the matched images) union the images of M on every
/// rewrite, and that consecutive entries hand the position on unchanged.
pub fn check_position_law(
    trace: &Trace,
    rules: &BTreeMap<portstrat::graph::Name, Rule>,
    start: &Position,
    end: &Position,
) -> Result<(), String> {
    let mut flat = Vec::new();
    flatten(&trace.entries, &mut flat);
    let mut current = start.clone();
    for (i, e) in flat.iter().enumerate() {
        let (before, after) = match e {
            TraceEntry::Rewrite { records, before, after, .. } => {
                let mut want = before.clone();
                for r in records {
                    for h in r.matching.image() {
                        want.remove(&h);
                    }
                }
                for r in records {
                    let keep = rules[&r.rule].keep();
                    want.extend(r.created.iter().filter(|(rid, _)| keep.contains(rid)).map(|(_, h)| *h));
                }
                if want != *after {
                    return Err(format!("entry {i}: want P' {want:?}, trace says {after:?}"));
                }
                (before, after)
            }
            TraceEntry::Position { before, after, .. } => (before, after),
            _ => continue,
        };
        if *before != current {
            return Err(format!("entry {i}: starts from {before:?}, previous left {current:?}"));
        }
        current = after.clone();
    }
    if current != *end {
        return Err(format!("trace ends at {current:?}, run ends at {end:?}"));
    }
    Ok(())
}

/// Outcome of one randomized engine-law case.
#[derive(Debug, PartialEq, Eq)]
pub enum LawCase {
    Checked,
    /// The main run hit its step budget; nothing else was checked.
    Exhausted,
}

struct Runner {
    cfg: EngineConfig,
    host: LocatedGraph,
}

impl Runner {
    fn go(&self, text: &str) -> Result<Option<RunResult>, String> {
        let s = parse_strategy_unchecked(text).map_err(|e| format!("{text}: {e}"))?;
        match run(&s, &self.host, &self.cfg) {
            Ok(r) => Ok(Some(r)),
            Err(EngineError::StepBudgetExhausted(_)) => Ok(None),
            Err(e) => Err(format!("{text}: {e}")),
        }
    }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

/// Draws a host of at most 8 nodes, a rule set and a strategy of depth at
/// most 4 from `seed`, then checks well-formedness, seed determinism,
/// replay, the position law, copy discipline, sugar expansion and Fail
/// purity.
pub fn engine_laws(seed: u64) -> Result<LawCase, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let host = random_host(&mut rng, 8);
    let rules = random_rules(&mut rng);
    let names: Vec<String> = rules.iter().map(|r| r.name().to_string()).collect();
    let cfg = EngineConfig::new(rules).with_seed(seed).with_max_steps(3_000).with_designation(designation());
    let text = random_strategy(&mut rng, 4, &names);
    let ctx = |e: String| format!("seed {seed}, strategy {text}: {e}");
    let runner = Runner { cfg, host: host.clone() };

    let Some(r) = runner.go(&text).map_err(ctx)? else {
        return Ok(LawCase::Exhausted);
    };
    let problems = validate(&r.graph.graph);
    ensure(problems.is_empty() && r.graph.position_is_sound(), || ctx(format!("invalid result {problems:?}")))?;

    let again = runner.go(&text).map_err(ctx)?.ok_or_else(|| ctx("second run exhausted".into()))?;
    ensure(again.trace == r.trace && again.graph == r.graph && again.outcome == r.outcome, || {
        ctx("two runs with one seed differ".into())
    })?;

    let replayed = replay(&r.trace, &host, &runner.cfg.rules).map_err(|e| ctx(e.to_string()))?;
    ensure(replayed == r.graph, || ctx("replay differs".into()))?;

    check_position_law(&r.trace, &runner.cfg.rules, &host.position, &r.graph.position).map_err(ctx)?;

    for probe in [format!("if({text})then(id)else(id)"), format!("while({text})do(fail)")] {
        if let Some(p) = runner.go(&probe).map_err(ctx)? {
            ensure(p.outcome == RunOutcome::Id && p.graph == host && p.trace.entries.is_empty(), || {
                ctx(format!("{probe} touched the graph"))
            })?;
        }
    }

    let other = random_strategy(&mut rng, 3, &names);
    let (sugar, expansion) = match rng.gen_range(0..5) {
        0 => (format!("try({text})"), format!("if({text})then({text})else(id)")),
        1 => (format!("not({text})"), format!("if({text})then(fail)else(id)")),
        2 => (format!("({text}) orelse ({other})"), format!("if({text})then({text})else({other})")),
        3 => (format!("repeat*({text})"), format!("while({text})do({text})min(-1)max(-1)")),
        _ => (format!("repeat+({text})"), format!("{text}; while({text})do({text})")),
    };
    ensure(
        parse_strategy_unchecked(&sugar).ok() == parse_strategy_unchecked(&expansion).ok(),
        || ctx(format!("{sugar} does not parse as {expansion}")),
    )?;
    match (runner.go(&sugar).map_err(ctx)?, runner.go(&expansion).map_err(ctx)?) {
        (Some(a), Some(b)) => ensure(a.outcome == b.outcome && a.graph == b.graph && a.trace == b.trace, || {
            ctx(format!("{sugar} and {expansion} differ"))
        })?,
        (None, None) => {}
        _ => return Err(ctx(format!("only one of {sugar} and {expansion} exhausted"))),
    }
    if let Some(t) = runner.go(&format!("try({text})")).map_err(ctx)? {
        ensure(t.outcome == RunOutcome::Id, || ctx("try failed".into()))?;
    }
    if let (Some(a), Some(b)) = (
        runner.go(&format!("not(not({text}))")).map_err(ctx)?,
        runner.go(&format!("if({text})then(id)else(fail)")).map_err(ctx)?,
    ) {
        ensure(a.outcome == b.outcome && a.graph == host && b.graph == host, || ctx("not(not(S)) differs".into()))?;
    }

    let pure = pure_strategy(&mut rng, 3, &names);
    if let Some(p) = runner.go(&pure).map_err(ctx)? {
        ensure(p.outcome == RunOutcome::Id || p.graph == host, || ctx(format!("failing {pure} changed the graph")))?;
    }
    if let Some(p) = runner.go(&format!("{text}; {pure}")).map_err(ctx)? {
        ensure(p.outcome == RunOutcome::Id || p.graph == r.graph, || {
            ctx(format!("failing {text}; {pure} kept changes from its second half"))
        })?;
    }
    Ok(LawCase::Checked)
}
