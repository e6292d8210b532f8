//! A one-row pac-man game. Pac-man flees ghosts, eats dots and explores;
//! ghosts chase him. Each round the game loop puts pac-man and every ghost
//! in the position, and ghost rules keep nothing there, so a ghost acts at
//! most once per round.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{name, LocatedGraph, NodeId, PortGraph, PortRef, Position};
use crate::rewrite::Rule;
use crate::strategy::{replay_snapshots, ReplayError, Trace, TraceEntry};
use crate::text::{parse_rules, RuleFile};

pub const RULES: &str = include_str!("../../corpus/pacman.rules");
pub const GRAPH: &str = include_str!("../../corpus/pacman.graph");

const PAC_AI: &str = "if(nearGhost1 orelse nearGhost2)then(FLEE)else(MOVE)";
const FLEE: &str = "if(flee1a orelse flee1b)then(flee1a orelse flee1b)else(try(flee2a orelse flee2b))";
const MOVE: &str = "if(getPacDot)then(getPacDot)else(try(explore))";
const GHOST_AI: &str = "if(kill1 orelse kill2)then(kill1 orelse kill2)else(GMOVE)";
const GMOVE: &str = "if(moveE1 orelse moveE2)then(moveE1 orelse moveE2)else(moveP1 orelse moveP2)";
const ACTORS: &str = "property(name==\"ghost\" or name==\"pac-man\" or name==\"End\", graph)";
const GAME_OVER: &str = "property(name==\"End\", graph); pnotempty";

/// Rules that move or kill with a ghost.
pub const GHOST_RULES: [&str; 6] = ["kill1", "kill2", "moveE1", "moveE2", "moveP1", "moveP2"];

pub fn pac_ai() -> String {
    PAC_AI.replace("FLEE", FLEE).replace("MOVE", MOVE)
}

pub fn ghost_ai() -> String {
    GHOST_AI.replace("GMOVE", GMOVE)
}

/// The whole game.
pub fn game_loop() -> String {
    format!("repeat*({ACTORS}; if({GAME_OVER})then(fail)else({}; repeat*({})))", pac_ai(), ghost_ai())
}

pub fn rule_file() -> RuleFile {
    parse_rules(RULES).expect("bundled pac-man rules parse")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Square {
    Pac,
    /// A ghost standing on a dot (`true`) or on an empty square.
    Ghost(bool),
    Dot,
    Empty,
}

/// Lays out a row from west to east. The position holds pac-man and the
/// ghosts.
pub fn board(row: &[Square]) -> LocatedGraph {
    let mut g = PortGraph::new(rule_file().signature);
    let mut prev: Option<PortRef> = None;
    let mut pos = Position::new();
    for (i, sq) in row.iter().enumerate() {
        let id = NodeId(i as u64 + 1);
        let (n, east, west) = match sq {
            Square::Pac => ("pac-man", "pm_e", "pm_w"),
            Square::Ghost(_) => ("ghost", "g_e", "g_w"),
            Square::Dot | Square::Empty => ("Cell", "c_e", "c_w"),
        };
        g.add_node(id, n).expect("declared node");
        let state = match sq {
            Square::Ghost(true) | Square::Dot => Some(("dot", "g_n")),
            Square::Ghost(false) | Square::Empty => Some(("empty", "g_n")),
            Square::Pac => None,
        };
        if let Some((s, p)) = state {
            let port = if n == "Cell" { "c_n" } else { p };
            g.set_state(&PortRef::new(id, port), Some(name(s))).expect("port");
        }
        if matches!(sq, Square::Pac | Square::Ghost(_)) {
            pos.insert(id);
        }
        if let Some(p) = prev.take() {
            g.connect(p, PortRef::new(id, west)).expect("free ports");
        }
        prev = Some(PortRef::new(id, east));
    }
    LocatedGraph::new(g, pos)
}

/// A ghost on the west end right behind pac-man, then dots up to the east
/// end.
pub fn chase_row(len: usize) -> Vec<Square> {
    assert!(len >= 2, "a row needs room for pac-man and a ghost");
    let mut row = vec![Square::Ghost(false), Square::Pac];
    row.extend(std::iter::repeat_n(Square::Dot, len - 2));
    row
}

/// Pac-man on the west end, dots in between and a ghost on a dot at the
/// east end. Under the game loop the ghost ends up pacing back and forth
/// beside pac-man for ever, because `orelse` always sends it east first.
pub fn facing_row(len: usize) -> Vec<Square> {
    assert!(len >= 2, "a row needs room for pac-man and a ghost");
    let mut row = vec![Square::Pac];
    row.extend(std::iter::repeat_n(Square::Dot, len - 2));
    row.push(Square::Ghost(true));
    row
}

/// What a finished game looked like round by round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Audit {
    pub rounds: usize,
    /// Rounds whose position, right after collecting the actors, was not
    /// exactly the set of actors.
    pub bad_positions: Vec<usize>,
    /// Most kill or move rules fired by one ghost in one round.
    pub max_ghost_actions: usize,
    pub game_over: bool,
}

fn actors(g: &PortGraph) -> Position {
    g.nodes()
        .filter(|n| matches!(&*n.name, "ghost" | "pac-man" | "End"))
        .map(|n| n.id)
        .collect()
}

fn ghost_node(g: &PortGraph) -> Option<NodeId> {
    g.nodes().find(|n| &*n.name == "ghost").map(|n| n.id)
}

/// Replays a game trace and checks the round structure. Ghosts are followed
/// through the rules that recreate them, so each keeps one identity for the
/// whole game.
pub fn audit(initial: &LocatedGraph, trace: &Trace, rules: &BTreeMap<crate::graph::Name, Rule>) -> Result<Audit, ReplayError> {
    let snaps = replay_snapshots(trace, initial, rules)?;
    let mut audit = Audit::default();
    let mut lineage: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut acted: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut snap = 0;
    for e in &trace.entries {
        if e.changes_graph() {
            snap += 1;
        }
        match e {
            TraceEntry::Position { after, .. } => {
                audit.rounds += 1;
                if *after != actors(&snaps[snap].graph) {
                    audit.bad_positions.push(audit.rounds);
                }
                acted.clear();
            }
            TraceEntry::Rewrite { records, .. } => {
                for r in records {
                    let rule = &rules[&r.rule];
                    let (Some(l), Some(rg)) = (ghost_node(rule.lhs().graph()), ghost_node(rule.rhs())) else {
                        continue;
                    };
                    let host = r.matching.get(l).expect("matched ghost");
                    let id = lineage.remove(&host).unwrap_or(host);
                    if let Some((_, new)) = r.created.iter().find(|(rid, _)| *rid == rg) {
                        lineage.insert(*new, id);
                    }
                    if GHOST_RULES.contains(&&*r.rule) {
                        let n = acted.entry(id).or_default();
                        *n += 1;
                        audit.max_ghost_actions = audit.max_ghost_actions.max(*n);
                    }
                }
            }
            _ => {}
        }
    }
    audit.game_over = snaps.last().is_some_and(|g| g.graph.nodes_named("End").next().is_some());
    Ok(audit)
}

/// Dots still on the board, counting those under ghosts.
pub fn dots_left(g: &PortGraph) -> usize {
    g.nodes().filter(|n| n.state("c_n").is_some_and(|s| &**s == "dot")).count()
        + g.nodes().filter(|n| n.state("g_n").is_some_and(|s| &**s == "dot")).count()
}

pub fn rule_map() -> BTreeMap<crate::graph::Name, Rule> {
    rule_file().rules.into_iter().map(|r| (r.name().clone(), r)).collect()
}

pub fn rule_names() -> BTreeSet<String> {
    rule_map().keys().map(|k| k.to_string()).collect()
}
