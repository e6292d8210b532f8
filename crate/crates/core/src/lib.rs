//! Strategic port graph rewriting.
//!
//! Graphs are built from nodes with named ports ([`graph`]), rewritten by
//! rules ([`rewrite`]) whose application is steered by a small strategy
//! language ([`strategy`]). [`inets`] checks that a rule set is an interaction
//! net system, and [`corpus`] bundles ready-made models.

pub mod cli;
pub mod corpus;
pub mod export;
pub mod graph;
pub mod inets;
pub mod matching;
pub mod rewrite;
pub mod strategy;
pub mod text;
