//! Integers as interaction nets. A number is an `I` agent whose two
//! auxiliary ports hold a left list of `p` agents `S` and a right list of `q`
//! agents `S`, joined head to head; its value is `p - q`.

use thiserror::Error;

use crate::graph::{LocatedGraph, NodeId, PortGraph, PortRef};
use crate::text::{parse_rules, RuleFile};

pub const RULES: &str = include_str!("../../corpus/arithmetic.rules");

/// Normalises any of the nets built here.
pub const STRATEGY: &str = "repeat*(repeat*(reduce); (negate orelse open)); repeat*(reduce)";

/// The three-rule loop with `try` on the last two rules. It never stops,
/// since its body always succeeds.
pub const LOOPING_STRATEGY: &str = "repeat*(repeat*(reduce); try(negate); try(open))";

pub fn rule_file() -> RuleFile {
    parse_rules(RULES).expect("bundled arithmetic rules parse")
}

/// A number written as a pair of list lengths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Number {
    pub pos: u32,
    pub neg: u32,
}

impl Number {
    pub fn new(pos: u32, neg: u32) -> Self {
        Number { pos, neg }
    }

    /// Shortest representation of `z`.
    pub fn of(z: i64) -> Self {
        if z >= 0 {
            Number::new(z as u32, 0)
        } else {
            Number::new(0, (-z) as u32)
        }
    }

    pub fn value(self) -> i64 {
        self.pos as i64 - self.neg as i64
    }
}

struct Net {
    g: PortGraph,
    next: u64,
}

impl Net {
    fn new() -> Self {
        Net { g: PortGraph::new(rule_file().signature), next: 1 }
    }

    fn node(&mut self, n: &str) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        self.g.add_node(id, n).expect("declared agent");
        id
    }

    fn join(&mut self, a: PortRef, b: PortRef) {
        self.g.connect(a, b).expect("free ports");
    }

    /// Adds a number and returns its `I` agent, whose head port is left free.
    fn number(&mut self, n: Number) -> NodeId {
        let i = self.node("I");
        let mut end = PortRef::new(i, "i_l");
        for _ in 0..n.pos {
            let s = self.node("S");
            self.join(end, PortRef::new(s, "s_a"));
            end = PortRef::new(s, "s_p");
        }
        for _ in 0..n.neg {
            let s = self.node("S");
            self.join(end, PortRef::new(s, "s_p"));
            end = PortRef::new(s, "s_a");
        }
        self.join(end, PortRef::new(i, "i_r"));
        i
    }

    fn done(self) -> LocatedGraph {
        LocatedGraph::everywhere(self.g)
    }
}

pub fn number_net(n: Number) -> LocatedGraph {
    let mut net = Net::new();
    net.number(n);
    net.done()
}

/// `a + b`, or `a - b` when `subtract` is set. The result heads at a fresh
/// `I` agent whose lists are spliced from the operands by two openers.
fn binary(a: Number, b: Number, subtract: bool) -> LocatedGraph {
    let mut net = Net::new();
    let result = net.node("I");
    let op1 = net.node("I");
    let op2 = net.node("I");
    net.join(PortRef::new(op1, "i_l"), PortRef::new(result, "i_l"));
    net.join(PortRef::new(op1, "i_r"), PortRef::new(op2, "i_l"));
    net.join(PortRef::new(op2, "i_r"), PortRef::new(result, "i_r"));
    let x = net.number(a);
    let y = net.number(b);
    net.join(PortRef::new(op1, "i_h"), PortRef::new(x, "i_h"));
    if subtract {
        let s = net.node("S");
        net.join(PortRef::new(op2, "i_h"), PortRef::new(s, "s_a"));
        net.join(PortRef::new(s, "s_p"), PortRef::new(y, "i_h"));
    } else {
        net.join(PortRef::new(op2, "i_h"), PortRef::new(y, "i_h"));
    }
    net.done()
}

pub fn addition_net(a: Number, b: Number) -> LocatedGraph {
    binary(a, b, false)
}

pub fn subtraction_net(a: Number, b: Number) -> LocatedGraph {
    binary(a, b, true)
}

/// An `S` agent on the head of `a`.
pub fn negation_net(a: Number) -> LocatedGraph {
    let mut net = Net::new();
    let x = net.number(a);
    let s = net.node("S");
    net.join(PortRef::new(s, "s_p"), PortRef::new(x, "i_h"));
    net.done()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("expected one I agent, found {0}")]
    Heads(usize),
    #[error("the list walk left the number at {0}")]
    Broken(PortRef),
}

/// Reads the value of a net holding a single number by walking from the
/// left port of its `I` agent to the right one.
pub fn decode(g: &PortGraph) -> Result<i64, DecodeError> {
    let heads: Vec<NodeId> = g.nodes_named("I").map(|n| n.id).collect();
    if heads.len() != 1 {
        return Err(DecodeError::Heads(heads.len()));
    }
    let i = heads[0];
    let stop = PortRef::new(i, "i_r");
    let start = PortRef::new(i, "i_l");
    let mut at = g.partner(&start).cloned().ok_or(DecodeError::Broken(start))?;
    let mut value = 0i64;
    for _ in 0..=g.node_count() {
        if at == stop {
            return Ok(value);
        }
        let is_s = g.node(at.node).is_some_and(|n| &*n.name == "S");
        let out = match &*at.port {
            "s_a" if is_s => {
                value += 1;
                PortRef::new(at.node, "s_p")
            }
            "s_p" if is_s => {
                value -= 1;
                PortRef::new(at.node, "s_a")
            }
            _ => return Err(DecodeError::Broken(at)),
        };
        at = g.partner(&out).cloned().ok_or(DecodeError::Broken(out))?;
    }
    Err(DecodeError::Broken(at))
}
