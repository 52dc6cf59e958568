//! The `O(ε)` convergence calculus: evaluation sessions with a fresh-index
//! counter, boundedness declarations, guard predicates, and the terminating
//! rule system that collapses error terms.
//!
//! An `Oeps(i)` term stands for *some* quantity of order ε; the index `i`
//! records which one. Two occurrences of `Oeps(1)` are the same quantity
//! and may cancel; `Oeps(1)` and `Oeps(2)` are a priori different. Rules
//! that introduce an error term therefore carry `Oeps(FreshIndexMarker)` on
//! their right-hand side, and every successful application draws a fresh
//! index from the session — never earlier (a rule is a value and may be
//! stored or printed) and never later (two applications must not share an
//! index).

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use thiserror::Error;

use crate::matching::Substitution;
use crate::rules::{make_rule, Guard, Rule};
use crate::strategy::Strategy;
use crate::term::{Head, Term, OEPS};

/// The distinguished small-parameter symbol. It is the one constant that can
/// never be declared bounded: the whole calculus exists to track quantities
/// that blow up or vanish with it.
pub const EPSILON: &str = "epsilon";

/// A guard predicate: receives the session and the matched argument terms.
pub type GuardFn = fn(&Session, &[Term]) -> bool;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("`{EPSILON}` cannot be declared bounded")]
    EpsilonBounded,
}

/// Mutable evaluation state. The fresh-index counter is the only state a
/// strategy evaluation mutates; everything else is configuration.
pub struct Session {
    next_index: u64,
    bounded: BTreeSet<String>,
    guards: BTreeMap<String, GuardFn>,
    deadline: Option<Instant>,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    pub fn new() -> Session {
        let mut guards: BTreeMap<String, GuardFn> = BTreeMap::new();
        guards.insert("bounded".to_string(), |s, args| {
            args.len() == 1 && s.is_bounded(&args[0])
        });
        Session {
            next_index: 0,
            bounded: BTreeSet::new(),
            guards,
            deadline: None,
        }
    }

    /// Returns the next fresh index and advances the counter. Indexes are
    /// never reused within a session.
    pub fn fresh_index(&mut self) -> u64 {
        let i = self.next_index;
        self.next_index += 1;
        i
    }

    /// The index the next [`Self::fresh_index`] call would return.
    pub fn peek_index(&self) -> u64 {
        self.next_index
    }

    /// Rewinds the counter after a speculative evaluation whose result was
    /// discarded. Only traversal probes may use this.
    pub(crate) fn restore_index(&mut self, index: u64) {
        self.next_index = index;
    }

    /// Ensures the counter will never emit `used` again: input terms may
    /// mention concrete indexes, and fresh ones must stay distinct from
    /// them.
    pub fn reserve_index(&mut self, used: u64) {
        self.next_index = self.next_index.max(used + 1);
    }

    /// Declares a leaf symbol bounded with respect to ε.
    pub fn declare_bounded(
        &mut self,
        name: impl Into<String>,
    ) -> Result<(), SessionError> {
        let name = name.into();
        if name == EPSILON {
            return Err(SessionError::EpsilonBounded);
        }
        self.bounded.insert(name);
        Ok(())
    }

    /// True when a guard predicate with this name exists.
    pub fn has_guard(&self, name: &str) -> bool {
        self.guards.contains_key(name)
    }

    /// Registers (or replaces) a guard predicate.
    pub fn register_guard(&mut self, name: impl Into<String>, f: GuardFn) {
        self.guards.insert(name.into(), f);
    }

    /// Evaluates a rule guard against a match. `None` means the predicate
    /// is unknown, which callers treat as a refusal.
    pub fn check_guard(&self, g: &Guard, subst: &Substitution) -> Option<bool> {
        let f = self.guards.get(&g.pred)?;
        let args: Vec<Term> = g
            .args
            .iter()
            .map(|n| {
                subst
                    .get(n)
                    .cloned()
                    .expect("guard arguments are bound by the match")
            })
            .collect();
        Some(f(self, &args))
    }

    /// Structural boundedness: every leaf of `t` must be a number, an
    /// `Oeps` application (an order-ε quantity is in particular bounded),
    /// or a declared-bounded constant. Declaring a symbol asserts that the
    /// operations applied to it in scope preserve boundedness; `epsilon`
    /// can never be declared, so any ε or ε⁻¹ occurrence yields false.
    pub fn is_bounded(&self, t: &Term) -> bool {
        match t {
            Term::Num(_) => true,
            Term::Var(_) => false,
            Term::App { head, args } => {
                if t.is_app_of(OEPS) {
                    return true;
                }
                match head {
                    Head::Var(_) => false,
                    Head::Sym(name) if args.is_empty() => {
                        self.bounded.contains(name)
                    }
                    Head::Sym(_) => args.iter().all(|a| self.is_bounded(a)),
                }
            }
        }
    }

    /// Installs a wall-clock deadline; strategy evaluation checks it and
    /// aborts with a time-limit interrupt once passed.
    pub fn set_deadline(&mut self, deadline: Instant) {
        self.deadline = Some(deadline);
    }

    pub fn time_exceeded(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Wraps an error-term-introducing rule so that markers are concretized on
/// application: the transform runs first, then a top-down pass replaces
/// every `Oeps(FreshIndexMarker)` in the result with `Oeps(fresh)`.
/// [`Strategy::Transform`] performs this lift automatically whenever
/// `rule.is_oeps`, so this constructor mainly documents the contract.
pub fn lift_oeps_rule(rule: Rule) -> Strategy {
    debug_assert!(rule.is_oeps, "only marker-bearing rules need the lift");
    Strategy::Transform(rule)
}

/// The terminating rule system for error terms, in application order:
///
/// 1. `-1*Oeps(i_)` → `Oeps` — a negated error term is an error term;
/// 2. `Oeps(i_) + Oeps(j_)` → `Oeps` — two error terms sum to one;
/// 3. `Oeps(i_) + Oeps(j_) + R_` → `Oeps + R` — the same inside a wider
///    sum, which flattening makes a single n-ary node;
/// 4. `Integral(D_, Oeps(i_), M_)` → `Oeps` — integration over a fixed
///    domain preserves the order;
/// 5. `Z_*Oeps(i_)` → `Oeps` where `bounded(Z)` — bounded scaling preserves
///    the order.
///
/// Every rule replaces at least two Oeps-side symbols with a two-symbol
/// `Oeps` node, so each application strictly shrinks the term: the system
/// terminates.
pub fn convergence_rules() -> Vec<Rule> {
    let p = |s: &str| {
        crate::dsl::parse_term(s).expect("built-in rule sides parse")
    };
    let bounded_z = Guard { pred: "bounded".to_string(), args: vec!["Z".to_string()] };
    vec![
        make_rule("OepsMinus", p("-1*Oeps(i_)"), p("Oeps"), None),
        make_rule("OepsSum", p("Oeps(i_) + Oeps(j_)"), p("Oeps"), None),
        make_rule("OepsSumRest", p("Oeps(i_) + Oeps(j_) + R_"), p("Oeps + R"), None),
        make_rule("OepsIntegral", p("Integral(D_, Oeps(i_), M_)"), p("Oeps"), None),
        make_rule("OepsScale", p("Z_*Oeps(i_)"), p("Oeps"), Some(bounded_z)),
    ]
    .into_iter()
    .map(|r| r.expect("built-in rules are well-formed"))
    .collect()
}

/// Normalizes every error-term redex anywhere in the term, to a fixed
/// point. Total and terminating.
///
/// The composition wraps the rule choice in a progress check: `LeftChoice`
/// returns its input unchanged when no rule fires, and `TopDown` stops
/// descending on any success, so without `IdentityAsFail` the traversal
/// would treat "nothing applied" at the root as success and never look
/// inside. Progress-as-failure restores the descent.
pub fn convergence_strategy() -> Strategy {
    let choice = Strategy::LeftChoice(
        convergence_rules().into_iter().map(Strategy::Transform).collect(),
    );
    Strategy::Normalizer(Box::new(Strategy::TopDown(Box::new(
        Strategy::IdentityAsFail(Box::new(choice)),
    ))))
}
