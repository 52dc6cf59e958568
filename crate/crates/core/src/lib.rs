//! A term-rewriting engine with an explicit strategy language.
//!
//! The library works on canonical terms over exact rational arithmetic:
//! `plus` and `times` are flattened and argument-sorted (associativity and
//! commutativity are built into term identity), everything else is plain
//! first-order structure. On top of that sit:
//!
//! * deterministic AC pattern matching ([`matching`]),
//! * polynomial expansion and like-term collection ([`algebra`]),
//! * rewrite rules with guards, linearity schemata, and contextual
//!   embedding ([`rules`], [`contextual`]),
//! * a strategy language for composing rewrites into proofs ([`strategy`]),
//! * a terminating calculus for `O(ε)` error-term bookkeeping
//!   ([`convergence`]),
//! * a text syntax for terms, rule files, and proof scripts ([`dsl`],
//!   [`script`]), and a script runner with machine-readable traces
//!   ([`runner`]).
//!
//! The `st` binary exposes the runner on the command line.

pub mod algebra;
pub mod contextual;
pub mod convergence;
pub mod dsl;
pub mod matching;
pub mod rules;
pub mod runner;
pub mod script;
pub mod strategy;
pub mod term;
