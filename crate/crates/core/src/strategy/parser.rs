//! Recursive-descent parser for strategy expressions.
//!
//! `;` binds tighter than `orelse` and `+`; all three associate to the right.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::{AppExpr, PositionExpr, Pred, Scope, Strategy};
use crate::graph::{name, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unknown rule `{rule}`")]
    UnknownRule { line: usize, col: usize, rule: String },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Plus,
    EqEq,
    RepeatStar,
    RepeatPlus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Plus => "`+`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::RepeatStar => "`repeat*`".into(),
            Tok::RepeatPlus => "`repeat+`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Lexed>, StrategyParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let syntax = |line, col, message: String| StrategyParseError::Syntax { line, col, message };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = |i: &mut usize, n: usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            adv(&mut i, 1);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                adv(&mut i, 1);
            }
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '=' if chars.get(i + 1) == Some(&'=') => {
                adv(&mut i, 2);
                out.push(Lexed { tok: Tok::EqEq, line: l0, col: c0 });
                continue;
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None => return Err(syntax(l0, c0, "unterminated string".into())),
                        Some('"') => break,
                        Some('\\') if j + 1 < chars.len() => {
                            s.push(chars[j + 1]);
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                let n = j + 1 - i;
                adv(&mut i, n);
                out.push(Lexed { tok: Tok::Str(s), line: l0, col: c0 });
                continue;
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let value = s.parse().map_err(|_| syntax(l0, c0, format!("bad integer `{s}`")))?;
                let n = j - i;
                adv(&mut i, n);
                out.push(Lexed { tok: Tok::Int(value), line: l0, col: c0 });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '-') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let tok = match (s.as_str(), chars.get(j)) {
                    ("repeat", Some('*')) => {
                        j += 1;
                        Tok::RepeatStar
                    }
                    ("repeat", Some('+')) => {
                        j += 1;
                        Tok::RepeatPlus
                    }
                    _ => Tok::Ident(s),
                };
                let n = j - i;
                adv(&mut i, n);
                out.push(Lexed { tok, line: l0, col: c0 });
                continue;
            }
            other => return Err(syntax(l0, c0, format!("unexpected character `{other}`"))),
        };
        adv(&mut i, 1);
        out.push(Lexed { tok, line: l0, col: c0 });
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "crtpos", "allsuc", "onesuc", "nextsuc", "setpos", "property", "union", "inter", "compl", "minus", "id",
    "fail", "par", "ipar", "multi", "ppick", "while", "do", "min", "max", "if", "then", "else", "pnotempty",
    "atomic", "not", "try", "orelse",
];

struct Parser<'a> {
    toks: Vec<Lexed>,
    at: usize,
    known: Option<&'a BTreeSet<String>>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn error<T>(&self, message: String) -> Result<T, StrategyParseError> {
        let t = &self.toks[self.at];
        Err(StrategyParseError::Syntax { line: t.line, col: t.col, message })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), StrategyParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", want.describe(), self.peek().describe()))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), StrategyParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            t => self.error(format!("expected `{kw}`, found {}", t.describe())),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn int(&mut self) -> Result<i64, StrategyParseError> {
        match self.bump() {
            Tok::Int(n) => Ok(n),
            t => {
                self.at -= 1;
                self.error(format!("expected an integer, found {}", t.describe()))
            }
        }
    }

    /// Alternatives: `a orelse b`, `a + b`.
    fn strategy(&mut self) -> Result<Strategy, StrategyParseError> {
        let left = self.sequence()?;
        if self.is_kw("orelse") {
            self.bump();
            let right = self.strategy()?;
            return Ok(Strategy::orelse(left, right));
        }
        if *self.peek() == Tok::Plus {
            self.bump();
            let right = self.strategy()?;
            return Ok(Strategy::amb(left, right));
        }
        Ok(left)
    }

    fn sequence(&mut self) -> Result<Strategy, StrategyParseError> {
        let left = self.primary()?;
        if *self.peek() == Tok::Semi {
            self.bump();
            let right = self.sequence()?;
            return Ok(Strategy::seq(left, right));
        }
        Ok(left)
    }

    fn parenthesized(&mut self) -> Result<Strategy, StrategyParseError> {
        self.expect(Tok::LParen)?;
        let s = self.strategy()?;
        self.expect(Tok::RParen)?;
        Ok(s)
    }

    fn primary(&mut self) -> Result<Strategy, StrategyParseError> {
        match self.peek().clone() {
            Tok::LParen => self.parenthesized(),
            Tok::RepeatStar => {
                self.bump();
                Ok(Strategy::repeat_star(self.parenthesized()?))
            }
            Tok::RepeatPlus => {
                self.bump();
                Ok(Strategy::repeat_plus(self.parenthesized()?))
            }
            Tok::Ident(kw) => match kw.as_str() {
                "not" => {
                    self.bump();
                    Ok(Strategy::not(self.parenthesized()?))
                }
                "try" => {
                    self.bump();
                    Ok(Strategy::try_(self.parenthesized()?))
                }
                "atomic" => {
                    self.bump();
                    Ok(Strategy::Atomic(Box::new(self.parenthesized()?)))
                }
                "pnotempty" => {
                    self.bump();
                    Ok(Strategy::PNotEmpty)
                }
                "ppick" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let mut items = vec![self.strategy()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        items.push(self.strategy()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Strategy::PPick(items))
                }
                "while" => {
                    self.bump();
                    let cond = self.parenthesized()?;
                    self.keyword("do")?;
                    let body = self.parenthesized()?;
                    let (mut min, mut max) = (-1, -1);
                    if self.is_kw("min") {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        min = self.int()?;
                        self.expect(Tok::RParen)?;
                    }
                    if self.is_kw("max") {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        max = self.int()?;
                        self.expect(Tok::RParen)?;
                    }
                    Ok(Strategy::while_do(cond, body, min, max))
                }
                "if" => {
                    self.bump();
                    let cond = self.parenthesized()?;
                    self.keyword("then")?;
                    let then = self.parenthesized()?;
                    self.keyword("else")?;
                    let els = self.parenthesized()?;
                    Ok(Strategy::if_then_else(cond, then, els))
                }
                "crtpos" | "allsuc" | "onesuc" | "nextsuc" | "setpos" | "property" | "union" | "inter"
                | "compl" | "minus" => Ok(Strategy::Pos(self.position()?)),
                _ => Ok(Strategy::App(self.application()?)),
            },
            t => self.error(format!("expected a strategy, found {}", t.describe())),
        }
    }

    fn application(&mut self) -> Result<AppExpr, StrategyParseError> {
        let (line, col) = (self.toks[self.at].line, self.toks[self.at].col);
        match self.bump() {
            Tok::Ident(kw) => match kw.as_str() {
                "id" => Ok(AppExpr::Id),
                "fail" => Ok(AppExpr::Fail),
                "par" | "ipar" => {
                    self.expect(Tok::LParen)?;
                    let a = self.rule_app()?;
                    self.expect(Tok::Comma)?;
                    let b = self.rule_app()?;
                    self.expect(Tok::RParen)?;
                    let (a, b) = (Box::new(a), Box::new(b));
                    Ok(if kw == "par" { AppExpr::Par(a, b) } else { AppExpr::IPar(a, b) })
                }
                "multi" => {
                    self.expect(Tok::LParen)?;
                    let a = self.rule_app()?;
                    self.expect(Tok::Comma)?;
                    let m = self.int()?;
                    self.expect(Tok::Comma)?;
                    let n = self.int()?;
                    self.expect(Tok::RParen)?;
                    Ok(AppExpr::Multi(Box::new(a), m, n))
                }
                k if KEYWORDS.contains(&k) => {
                    self.at -= 1;
                    self.error(format!("unexpected keyword `{k}`"))
                }
                rule => {
                    if let Some(known) = self.known {
                        if !known.contains(rule) {
                            return Err(StrategyParseError::UnknownRule { line, col, rule: rule.to_string() });
                        }
                    }
                    Ok(AppExpr::Rule(name(rule)))
                }
            },
            t => {
                self.at -= 1;
                self.error(format!("expected an application, found {}", t.describe()))
            }
        }
    }

    /// Operand of par/ipar/multi: a single rule name.
    fn rule_app(&mut self) -> Result<AppExpr, StrategyParseError> {
        let a = self.application()?;
        match a {
            AppExpr::Rule(_) => Ok(a),
            _ => self.error("par, ipar and multi take rule names as operands".into()),
        }
    }

    fn position(&mut self) -> Result<PositionExpr, StrategyParseError> {
        let Tok::Ident(kw) = self.bump() else {
            self.at -= 1;
            return self.error(format!("expected a position expression, found {}", self.peek().describe()));
        };
        let binary = |p: &mut Self| -> Result<(Box<PositionExpr>, Box<PositionExpr>), StrategyParseError> {
            p.expect(Tok::LParen)?;
            let a = p.position()?;
            p.expect(Tok::Comma)?;
            let b = p.position()?;
            p.expect(Tok::RParen)?;
            Ok((Box::new(a), Box::new(b)))
        };
        match kw.as_str() {
            "crtpos" => Ok(PositionExpr::CrtPos),
            "allsuc" => Ok(PositionExpr::AllSuc),
            "onesuc" => Ok(PositionExpr::OneSuc),
            "nextsuc" => Ok(PositionExpr::NextSuc),
            "setpos" => {
                self.expect(Tok::LParen)?;
                let mut ids = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        let n = self.int()?;
                        if n < 0 {
                            self.at -= 1;
                            return self.error("node ids are non-negative".into());
                        }
                        ids.push(NodeId(n as u64));
                        if *self.peek() != Tok::Comma {
                            break;
                        }
                        self.bump();
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(PositionExpr::SetPos(ids))
            }
            "property" => {
                self.expect(Tok::LParen)?;
                let p = self.pred_or()?;
                self.expect(Tok::Comma)?;
                let scope = match self.bump() {
                    Tok::Ident(s) if s == "graph" || s == "G" => Scope::Graph,
                    Tok::Ident(s) if s == "pos" || s == "P" => Scope::Pos,
                    t => {
                        self.at -= 1;
                        return self.error(format!("expected `graph` or `pos`, found {}", t.describe()));
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(PositionExpr::Property(p, scope))
            }
            "union" => binary(self).map(|(a, b)| PositionExpr::Union(a, b)),
            "inter" => binary(self).map(|(a, b)| PositionExpr::Inter(a, b)),
            "minus" => binary(self).map(|(a, b)| PositionExpr::Minus(a, b)),
            "compl" => {
                self.expect(Tok::LParen)?;
                let a = self.position()?;
                self.expect(Tok::RParen)?;
                Ok(PositionExpr::Compl(Box::new(a)))
            }
            other => {
                self.at -= 1;
                self.error(format!("expected a position expression, found `{other}`"))
            }
        }
    }

    fn pred_or(&mut self) -> Result<Pred, StrategyParseError> {
        let left = self.pred_and()?;
        if self.is_kw("or") {
            self.bump();
            return Ok(Pred::Or(Box::new(left), Box::new(self.pred_or()?)));
        }
        Ok(left)
    }

    fn pred_and(&mut self) -> Result<Pred, StrategyParseError> {
        let left = self.pred_not()?;
        if self.is_kw("and") {
            self.bump();
            return Ok(Pred::And(Box::new(left), Box::new(self.pred_and()?)));
        }
        Ok(left)
    }

    fn pred_not(&mut self) -> Result<Pred, StrategyParseError> {
        if self.is_kw("not") {
            self.bump();
            return Ok(Pred::Not(Box::new(self.pred_not()?)));
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let p = self.pred_or()?;
            self.expect(Tok::RParen)?;
            return Ok(p);
        }
        self.pred_atom()
    }

    fn string(&mut self) -> Result<String, StrategyParseError> {
        match self.bump() {
            Tok::Str(s) | Tok::Ident(s) => Ok(s),
            t => {
                self.at -= 1;
                self.error(format!("expected a string, found {}", t.describe()))
            }
        }
    }

    fn pred_atom(&mut self) -> Result<Pred, StrategyParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "interface" => {
                self.bump();
                Ok(Pred::Interface)
            }
            Tok::Ident(s) if (s == "name" || s == "type") && *self.peek_at(1) == Tok::EqEq => {
                self.bump();
                self.bump();
                Ok(Pred::Name(name(&self.string()?)))
            }
            Tok::Ident(s) if s == "portstate" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let port = match self.bump() {
                    Tok::Ident(p) => p,
                    t => {
                        self.at -= 1;
                        return self.error(format!("expected a port name, found {}", t.describe()));
                    }
                };
                self.expect(Tok::RParen)?;
                self.expect(Tok::EqEq)?;
                Ok(Pred::PortState(name(&port), name(&self.string()?)))
            }
            t => self.error(format!("expected a predicate, found {}", t.describe())),
        }
    }
}

fn parse(text: &str, known: Option<&BTreeSet<String>>) -> Result<Strategy, StrategyParseError> {
    let mut p = Parser { toks: lex(text)?, at: 0, known };
    let s = p.strategy()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {} after strategy", p.peek().describe()));
    }
    Ok(s)
}

/// Parses a strategy, rejecting rule names outside `known`.
pub fn parse_strategy(text: &str, known: &BTreeSet<String>) -> Result<Strategy, StrategyParseError> {
    parse(text, Some(known))
}

/// Parses a strategy without checking rule names.
pub fn parse_strategy_unchecked(text: &str) -> Result<Strategy, StrategyParseError> {
    parse(text, None)
}
