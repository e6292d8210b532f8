//! The strategy language: syntax, parser, interpreter and derivation traces.

pub mod ast;
pub mod engine;
pub mod parser;
pub mod trace;

pub use ast::{AppExpr, PositionExpr, Pred, Scope, Strategy};
pub use engine::{check_strategy, eval_position, eval_pred, run, EngineConfig, EngineError, RunOutcome, RunResult};
pub use parser::{parse_strategy, parse_strategy_unchecked, StrategyParseError};
pub use trace::{replay, replay_snapshots, ReplayError, RewriteKind, Trace, TraceEntry};
