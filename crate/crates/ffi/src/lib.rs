//! C interface to the rewriting engine.
//!
//! A [`PortstratSession`] owns rules, a current graph and the trace of the
//! last run. Every call returns a [`PortstratStatus`]; on anything but
//! `Ok`, `portstrat_session_last_error` describes the problem. Strings
//! returned to the caller are freed with [`portstrat_string_free`].

use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use portstrat::graph::{validate, Designation, LocatedGraph, PSignature};
use portstrat::rewrite::Rule;
use portstrat::strategy::{check_strategy, parse_strategy, run, EngineConfig, EngineError, RunOutcome, Trace};
use portstrat::text::{parse_graph_with, parse_rules_with, print_graph};
use thiserror::Error;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PortstratStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidGraph = 4,
    StrategyError = 5,
    BudgetExhausted = 6,
    EngineError = 7,
    NoGraph = 8,
    Panic = 9,
}

/// How a run ended.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PortstratOutcome {
    Id = 0,
    Fail = 1,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("null argument `{0}`")]
    Null(&'static str),
    #[error("argument `{0}` is not UTF-8")]
    Utf8(&'static str),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Graph(String),
    #[error("{0}")]
    Strategy(String),
    #[error("step budget of {0} exhausted")]
    Budget(u64),
    #[error("{0}")]
    Engine(String),
    #[error("no graph loaded")]
    NoGraph,
}

impl FfiError {
    fn status(&self) -> PortstratStatus {
        match self {
            FfiError::Null(_) => PortstratStatus::NullArgument,
            FfiError::Utf8(_) => PortstratStatus::InvalidUtf8,
            FfiError::Parse(_) => PortstratStatus::ParseError,
            FfiError::Graph(_) => PortstratStatus::InvalidGraph,
            FfiError::Strategy(_) => PortstratStatus::StrategyError,
            FfiError::Budget(_) => PortstratStatus::BudgetExhausted,
            FfiError::Engine(_) => PortstratStatus::EngineError,
            FfiError::NoGraph => PortstratStatus::NoGraph,
        }
    }
}

/// Opaque session handle.
pub struct PortstratSession {
    signature: PSignature,
    designation: Designation,
    rules: Vec<Rule>,
    graph: Option<LocatedGraph>,
    trace: Option<Trace>,
    last_error: Option<CString>,
}

impl PortstratSession {
    fn new() -> Self {
        PortstratSession {
            signature: PSignature::new(),
            designation: Designation::new(),
            rules: Vec::new(),
            graph: None,
            trace: None,
            last_error: None,
        }
    }

    fn add_rules(&mut self, text: &str) -> Result<(), FfiError> {
        let rf = parse_rules_with(text, &self.signature).map_err(|e| FfiError::Parse(e.to_string()))?;
        let known: BTreeSet<_> = self.rules.iter().map(|r| r.name().clone()).collect();
        if let Some(dup) = rf.rules.iter().find(|r| known.contains(r.name())) {
            return Err(FfiError::Parse(format!("rule `{}` is defined twice", dup.name())));
        }
        self.signature = (*rf.signature).clone();
        self.designation.extend(rf.agents.iter().map(|a| (a.symbol.clone(), a.principal.clone())));
        self.rules.extend(rf.rules);
        Ok(())
    }

    fn set_graph(&mut self, text: &str) -> Result<(), FfiError> {
        let g = parse_graph_with(text, &self.signature).map_err(|e| FfiError::Parse(e.to_string()))?;
        if let Some(v) = validate(&g.graph).first() {
            return Err(FfiError::Graph(v.to_string()));
        }
        self.graph = Some(g);
        self.trace = None;
        Ok(())
    }

    fn run(&mut self, strategy: &str, seed: u64, max_steps: u64) -> Result<RunOutcome, FfiError> {
        let graph = self.graph.as_ref().ok_or(FfiError::NoGraph)?;
        let known: BTreeSet<String> = self.rules.iter().map(|r| r.name().to_string()).collect();
        let s = parse_strategy(strategy, &known).map_err(|e| FfiError::Strategy(e.to_string()))?;
        let cfg = EngineConfig::new(self.rules.iter().cloned())
            .with_seed(seed)
            .with_max_steps(max_steps)
            .with_designation(self.designation.clone());
        check_strategy(&s, &cfg, &graph.graph).map_err(|e| FfiError::Strategy(e.to_string()))?;
        let r = run(&s, graph, &cfg).map_err(|e| match e {
            EngineError::StepBudgetExhausted(n) => FfiError::Budget(n),
            e => FfiError::Engine(e.to_string()),
        })?;
        self.graph = Some(r.graph);
        self.trace = Some(r.trace);
        Ok(r.outcome)
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8(what))
}

/// Runs `f` on the session, records any error and turns it into a status.
unsafe fn with_session(
    s: *mut PortstratSession,
    f: impl FnOnce(&mut PortstratSession) -> Result<(), FfiError>,
) -> PortstratStatus {
    let Some(session) = s.as_mut() else {
        return PortstratStatus::NullArgument;
    };
    let result = catch_unwind(AssertUnwindSafe(|| f(session)));
    let (status, message) = match result {
        Ok(Ok(())) => (PortstratStatus::Ok, None),
        Ok(Err(e)) => (e.status(), Some(e.to_string())),
        Err(_) => (PortstratStatus::Panic, Some("internal panic".to_string())),
    };
    session.last_error = message.map(|m| CString::new(m.replace('\0', " ")).expect("no interior nul"));
    status
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Creates an empty session. Free it with `portstrat_session_free`.
#[no_mangle]
pub extern "C" fn portstrat_session_new() -> *mut PortstratSession {
    Box::into_raw(Box::new(PortstratSession::new()))
}

/// Frees a session; null is ignored.
///
/// # Safety
/// `s` must come from `portstrat_session_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_free(s: *mut PortstratSession) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Adds the rules, signature and agent declarations of a rule file.
///
/// # Safety
/// `s` is a live session and `rules` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_add_rules(s: *mut PortstratSession, rules: *const c_char) -> PortstratStatus {
    with_session(s, |session| session.add_rules(text(rules, "rules")?))
}

/// Replaces the current graph. The graph may use the signature of rules
/// added earlier.
///
/// # Safety
/// `s` is a live session and `graph` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_set_graph(s: *mut PortstratSession, graph: *const c_char) -> PortstratStatus {
    with_session(s, |session| session.set_graph(text(graph, "graph")?))
}

/// Runs a strategy on the current graph, which becomes the result. On
/// success `*outcome` receives how the run ended; `outcome` may be null.
///
/// # Safety
/// `s` is a live session, `strategy` a nul-terminated string and `outcome`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_run(
    s: *mut PortstratSession,
    strategy: *const c_char,
    seed: u64,
    max_steps: u64,
    outcome: *mut PortstratOutcome,
) -> PortstratStatus {
    with_session(s, |session| {
        let o = session.run(text(strategy, "strategy")?, seed, max_steps)?;
        if !outcome.is_null() {
            *outcome = match o {
                RunOutcome::Id => PortstratOutcome::Id,
                RunOutcome::Fail => PortstratOutcome::Fail,
            };
        }
        Ok(())
    })
}

/// The current graph in the text format, or null when none is loaded.
///
/// # Safety
/// `s` is a live session. Free the result with `portstrat_string_free`.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_graph_text(s: *const PortstratSession) -> *mut c_char {
    match s.as_ref().and_then(|s| s.graph.as_ref()) {
        Some(g) => to_c(print_graph(g)),
        None => ptr::null_mut(),
    }
}

/// The trace of the last run, or null before the first run.
///
/// # Safety
/// `s` is a live session. Free the result with `portstrat_string_free`.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_trace_text(s: *const PortstratSession) -> *mut c_char {
    match s.as_ref().and_then(|s| s.trace.as_ref()) {
        Some(t) => to_c(t.to_string()),
        None => ptr::null_mut(),
    }
}

/// Message for the last failed call, or null. Owned by the session and
/// valid until the next call on it.
///
/// # Safety
/// `s` is a live session.
#[no_mangle]
pub unsafe extern "C" fn portstrat_session_last_error(s: *const PortstratSession) -> *const c_char {
    s.as_ref().and_then(|s| s.last_error.as_ref()).map_or(ptr::null(), |e| e.as_ptr())
}

/// Frees a string returned by this library; null is ignored.
///
/// # Safety
/// `p` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn portstrat_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn portstrat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
