//! Abstract syntax of strategy expressions.
//!
//! `Display` prints text the parser reads back to an equal tree. Sugar forms
//! are not kept: they are expanded on construction.

use std::fmt;

use crate::graph::{Name, NodeId};

/// Node predicate used by `property(..)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pred {
    Name(Name),
    PortState(Name, Name),
    /// The node has at least one free port.
    Interface,
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Not(Box<Pred>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Graph,
    Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PositionExpr {
    CrtPos,
    AllSuc,
    OneSuc,
    NextSuc,
    SetPos(Vec<NodeId>),
    Property(Pred, Scope),
    Union(Box<PositionExpr>, Box<PositionExpr>),
    Inter(Box<PositionExpr>, Box<PositionExpr>),
    Compl(Box<PositionExpr>),
    Minus(Box<PositionExpr>, Box<PositionExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AppExpr {
    Id,
    Fail,
    Rule(Name),
    Par(Box<AppExpr>, Box<AppExpr>),
    IPar(Box<AppExpr>, Box<AppExpr>),
    Multi(Box<AppExpr>, i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    Pos(PositionExpr),
    App(AppExpr),
    Seq(Box<Strategy>, Box<Strategy>),
    Amb(Box<Strategy>, Box<Strategy>),
    PPick(Vec<Strategy>),
    While { cond: Box<Strategy>, body: Box<Strategy>, min: i64, max: i64 },
    If { cond: Box<Strategy>, then: Box<Strategy>, els: Box<Strategy> },
    PNotEmpty,
    Atomic(Box<Strategy>),
}

impl Strategy {
    pub fn id() -> Self {
        Strategy::App(AppExpr::Id)
    }

    pub fn fail() -> Self {
        Strategy::App(AppExpr::Fail)
    }

    pub fn rule(n: &str) -> Self {
        Strategy::App(AppExpr::Rule(crate::graph::name(n)))
    }

    pub fn seq(a: Strategy, b: Strategy) -> Self {
        Strategy::Seq(Box::new(a), Box::new(b))
    }

    pub fn amb(a: Strategy, b: Strategy) -> Self {
        Strategy::Amb(Box::new(a), Box::new(b))
    }

    pub fn if_then_else(cond: Strategy, then: Strategy, els: Strategy) -> Self {
        Strategy::If { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) }
    }

    pub fn while_do(cond: Strategy, body: Strategy, min: i64, max: i64) -> Self {
        Strategy::While { cond: Box::new(cond), body: Box::new(body), min, max }
    }

    /// `repeat*(s)`: while(s) do(s) min(-1) max(-1).
    pub fn repeat_star(s: Strategy) -> Self {
        Self::while_do(s.clone(), s, -1, -1)
    }

    /// `repeat+(s)`: s; repeat*(s).
    pub fn repeat_plus(s: Strategy) -> Self {
        Self::seq(s.clone(), Self::repeat_star(s))
    }

    /// `not(s)`: if(s) then(fail) else(id).
    pub fn not(s: Strategy) -> Self {
        Self::if_then_else(s, Self::fail(), Self::id())
    }

    /// `s orelse t`: if(s) then(s) else(t).
    pub fn orelse(s: Strategy, t: Strategy) -> Self {
        Self::if_then_else(s.clone(), s, t)
    }

    /// `try(s)`: if(s) then(s) else(id).
    pub fn try_(s: Strategy) -> Self {
        Self::if_then_else(s.clone(), s, Self::id())
    }

    /// Right-nested `orelse` over a nonempty list.
    pub fn orelse_all(mut items: Vec<Strategy>) -> Option<Self> {
        let mut acc = items.pop()?;
        while let Some(s) = items.pop() {
            acc = Self::orelse(s, acc);
        }
        Some(acc)
    }

    /// Right-nested `;` over a nonempty list.
    pub fn seq_all(mut items: Vec<Strategy>) -> Option<Self> {
        let mut acc = items.pop()?;
        while let Some(s) = items.pop() {
            acc = Self::seq(s, acc);
        }
        Some(acc)
    }

    /// Rule names mentioned anywhere in the tree.
    pub fn rule_names(&self) -> Vec<Name> {
        fn app(a: &AppExpr, out: &mut Vec<Name>) {
            match a {
                AppExpr::Rule(n) => out.push(n.clone()),
                AppExpr::Par(x, y) | AppExpr::IPar(x, y) => {
                    app(x, out);
                    app(y, out);
                }
                AppExpr::Multi(x, _, _) => app(x, out),
                AppExpr::Id | AppExpr::Fail => {}
            }
        }
        fn walk(s: &Strategy, out: &mut Vec<Name>) {
            match s {
                Strategy::App(a) => app(a, out),
                Strategy::Seq(a, b) | Strategy::Amb(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Strategy::PPick(v) => v.iter().for_each(|x| walk(x, out)),
                Strategy::While { cond, body, .. } => {
                    walk(cond, out);
                    walk(body, out);
                }
                Strategy::If { cond, then, els } => {
                    walk(cond, out);
                    walk(then, out);
                    walk(els, out);
                }
                Strategy::Atomic(a) => walk(a, out),
                Strategy::Pos(_) | Strategy::PNotEmpty => {}
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pred::Name(n) => write!(f, "name=={}", quote(n)),
            Pred::PortState(p, s) => write!(f, "portstate({p})=={}", quote(s)),
            Pred::Interface => write!(f, "interface"),
            Pred::And(a, b) => write!(f, "({a} and {b})"),
            Pred::Or(a, b) => write!(f, "({a} or {b})"),
            Pred::Not(a) => write!(f, "not {a}"),
        }
    }
}

impl fmt::Display for PositionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionExpr::CrtPos => write!(f, "crtpos"),
            PositionExpr::AllSuc => write!(f, "allsuc"),
            PositionExpr::OneSuc => write!(f, "onesuc"),
            PositionExpr::NextSuc => write!(f, "nextsuc"),
            PositionExpr::SetPos(ids) => {
                let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                write!(f, "setpos({})", ids.join(", "))
            }
            PositionExpr::Property(p, s) => {
                let scope = match s {
                    Scope::Graph => "graph",
                    Scope::Pos => "pos",
                };
                write!(f, "property({p}, {scope})")
            }
            PositionExpr::Union(a, b) => write!(f, "union({a}, {b})"),
            PositionExpr::Inter(a, b) => write!(f, "inter({a}, {b})"),
            PositionExpr::Compl(a) => write!(f, "compl({a})"),
            PositionExpr::Minus(a, b) => write!(f, "minus({a}, {b})"),
        }
    }
}

impl fmt::Display for AppExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppExpr::Id => write!(f, "id"),
            AppExpr::Fail => write!(f, "fail"),
            AppExpr::Rule(n) => write!(f, "{n}"),
            AppExpr::Par(a, b) => write!(f, "par({a}, {b})"),
            AppExpr::IPar(a, b) => write!(f, "ipar({a}, {b})"),
            AppExpr::Multi(a, m, n) => write!(f, "multi({a}, {m}, {n})"),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Pos(t) => write!(f, "{t}"),
            Strategy::App(a) => write!(f, "{a}"),
            Strategy::Seq(a, b) => write!(f, "({a}; {b})"),
            Strategy::Amb(a, b) => write!(f, "({a} + {b})"),
            Strategy::PPick(v) => {
                let v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
                write!(f, "ppick({})", v.join(", "))
            }
            Strategy::While { cond, body, min, max } => {
                write!(f, "while({cond})do({body})min({min})max({max})")
            }
            Strategy::If { cond, then, els } => write!(f, "if({cond})then({then})else({els})"),
            Strategy::PNotEmpty => write!(f, "pnotempty"),
            Strategy::Atomic(s) => write!(f, "atomic({s})"),
        }
    }
}
