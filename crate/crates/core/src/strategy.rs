//! The strategy language: deterministic partial transformations of terms,
//! closed under traversal and control combinators.
//!
//! A strategy applied to a term either produces a term or signals `Fail`.
//! Failure is data, not an error: combinators inspect it (`LeftChoice`
//! tries the next alternative, `FailAsIdentity` substitutes the input, the
//! traversals use it to decide where to descend). A second interrupt kind,
//! `TimeLimit`, reports that the session's wall-clock deadline passed; no
//! combinator catches it.
//!
//! Evaluation threads a [`Session`]: the only mutable state is the fresh
//! `Oeps` index counter, consumed when a marker-bearing rule fires.

use std::fmt;

use crate::algebra;
use crate::convergence::Session;
use crate::matching::contains_match;
use crate::rules::{apply_with, Rule};
use crate::term::Term;

/// Why an evaluation did not return a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interrupt {
    /// The strategy does not apply to this term. Combinators may catch it.
    Fail,
    /// The session deadline passed. Always propagates to the caller.
    TimeLimit,
}

pub type Outcome = Result<Term, Interrupt>;

/// A strategy expression. Evaluation is deterministic: the same strategy,
/// session state, and term always produce the same outcome.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Returns the input unchanged.
    Identity,
    /// Always signals `Fail`.
    Fail,
    /// Applies a rewrite rule at the root, or fails. When the rule
    /// introduces error terms (`rule.is_oeps`), a successful application is
    /// followed by `TopDown(EvalFresh)` on the result, concretizing every
    /// marker with a fresh session index.
    Transform(Rule),
    /// Rewrites exactly `Oeps(FreshIndexMarker)` at the root to a
    /// fresh-indexed `Oeps`; fails on anything else.
    EvalFresh,
    /// Total algebraic normalization (expand + collect); never fails.
    Simplify,
    /// Success without progress becomes failure: fails when the inner
    /// strategy returns the input unchanged.
    IdentityAsFail(Box<Strategy>),
    /// Failure becomes identity: returns the input when the inner strategy
    /// fails.
    FailAsIdentity(Box<Strategy>),
    /// Applies the inner strategy to every immediate child, keeping
    /// children it fails on. Never fails.
    All(Box<Strategy>),
    /// Tries the inner strategy at the root; on success the result is
    /// final (no descent into it), on failure recurses into the children.
    /// Never fails.
    TopDown(Box<Strategy>),
    /// Rewrites the deepest applicable positions: while any proper subterm
    /// admits the inner strategy, recurses into all children; otherwise
    /// tries the strategy here, keeping the term on failure. The root is
    /// not retried after children rewrite. Never fails.
    BottomUp(Box<Strategy>),
    /// First alternative that succeeds; the input itself when all fail (or
    /// when the list is empty). Never fails.
    LeftChoice(Vec<Strategy>),
    /// Sequential composition; any stage's failure aborts the whole chain.
    /// The empty composition is the identity.
    Comp(Vec<Strategy>),
    /// Iterates the inner strategy until it returns its input unchanged;
    /// its failure at any iteration propagates.
    Normalizer(Box<Strategy>),
    /// Applies the inner strategy only when some subterm (at any depth)
    /// matches the pattern; fails otherwise.
    InnerContext(Term, Box<Strategy>),
}

impl Strategy {
    /// Evaluates the strategy on a canonical term.
    pub fn eval(&self, session: &mut Session, t: &Term) -> Outcome {
        if session.time_exceeded() {
            return Err(Interrupt::TimeLimit);
        }
        match self {
            Strategy::Identity => Ok(t.clone()),
            Strategy::Fail => Err(Interrupt::Fail),
            Strategy::Transform(rule) => transform(session, rule, t),
            Strategy::EvalFresh => {
                if t.is_oeps_marker() {
                    Ok(Term::oeps(session.fresh_index()))
                } else {
                    Err(Interrupt::Fail)
                }
            }
            Strategy::Simplify => Ok(algebra::simplify(t)),
            Strategy::IdentityAsFail(s) => {
                let out = s.eval(session, t)?;
                if out == *t {
                    Err(Interrupt::Fail)
                } else {
                    Ok(out)
                }
            }
            Strategy::FailAsIdentity(s) => {
                catch_fail(s.eval(session, t), || t.clone())
            }
            Strategy::All(s) => all(session, s, t),
            Strategy::TopDown(s) => top_down(session, s, t),
            Strategy::BottomUp(s) => bottom_up(session, s, t),
            Strategy::LeftChoice(ss) => {
                for s in ss {
                    match s.eval(session, t) {
                        Ok(out) => return Ok(out),
                        Err(Interrupt::Fail) => continue,
                        Err(Interrupt::TimeLimit) => {
                            return Err(Interrupt::TimeLimit)
                        }
                    }
                }
                Ok(t.clone())
            }
            Strategy::Comp(ss) => {
                let mut cur = t.clone();
                for s in ss {
                    cur = s.eval(session, &cur)?;
                }
                Ok(cur)
            }
            Strategy::Normalizer(s) => {
                let mut cur = t.clone();
                loop {
                    let next = s.eval(session, &cur)?;
                    if next == cur {
                        return Ok(cur);
                    }
                    cur = next;
                }
            }
            Strategy::InnerContext(pattern, s) => {
                if contains_match(pattern, t) {
                    s.eval(session, t)
                } else {
                    Err(Interrupt::Fail)
                }
            }
        }
    }
}

fn catch_fail(outcome: Outcome, fallback: impl FnOnce() -> Term) -> Outcome {
    match outcome {
        Err(Interrupt::Fail) => Ok(fallback()),
        other => other,
    }
}

fn transform(session: &mut Session, rule: &Rule, t: &Term) -> Outcome {
    let applied = apply_with(rule, t, |g, subst| {
        session.check_guard(g, subst).unwrap_or(false)
    });
    match applied {
        None => Err(Interrupt::Fail),
        Some(out) if rule.is_oeps => {
            Strategy::TopDown(Box::new(Strategy::EvalFresh)).eval(session, &out)
        }
        Some(out) => Ok(out),
    }
}

fn all(session: &mut Session, s: &Strategy, t: &Term) -> Outcome {
    match t {
        Term::Num(_) | Term::Var(_) => Ok(t.clone()),
        Term::App { head, args } => {
            let mut out = Vec::with_capacity(args.len());
            for a in args {
                out.push(catch_fail(s.eval(session, a), || a.clone())?);
            }
            Ok(Term::apply(head.clone(), out))
        }
    }
}

fn top_down(session: &mut Session, s: &Strategy, t: &Term) -> Outcome {
    match s.eval(session, t) {
        Ok(out) => Ok(out),
        Err(Interrupt::TimeLimit) => Err(Interrupt::TimeLimit),
        Err(Interrupt::Fail) => match t {
            Term::Num(_) | Term::Var(_) => Ok(t.clone()),
            Term::App { head, args } => {
                let mut out = Vec::with_capacity(args.len());
                for a in args {
                    out.push(top_down(session, s, a)?);
                }
                Ok(Term::apply(head.clone(), out))
            }
        },
    }
}

fn bottom_up(session: &mut Session, s: &Strategy, t: &Term) -> Outcome {
    if exist_child(session, s, t)? {
        match t {
            Term::Num(_) | Term::Var(_) => unreachable!("leaves have no children"),
            Term::App { head, args } => {
                let mut out = Vec::with_capacity(args.len());
                for a in args {
                    out.push(bottom_up(session, s, a)?);
                }
                Ok(Term::apply(head.clone(), out))
            }
        }
    } else {
        catch_fail(s.eval(session, t), || t.clone())
    }
}

/// True when `s` succeeds on some proper subterm of `t`. The probes are
/// speculative: any fresh indexes they would consume are rolled back.
pub fn exist_child(
    session: &mut Session,
    s: &Strategy,
    t: &Term,
) -> Result<bool, Interrupt> {
    for sub in t.subterms().skip(1) {
        let snapshot = session.peek_index();
        match s.eval(session, sub) {
            Ok(_) => {
                session.restore_index(snapshot);
                return Ok(true);
            }
            Err(Interrupt::Fail) => session.restore_index(snapshot),
            Err(Interrupt::TimeLimit) => return Err(Interrupt::TimeLimit),
        }
    }
    Ok(false)
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Identity => write!(f, "Identity"),
            Strategy::Fail => write!(f, "Fail"),
            Strategy::Transform(r) => write!(f, "Transform({})", r.name),
            Strategy::EvalFresh => write!(f, "EvalFresh"),
            Strategy::Simplify => write!(f, "Simplify"),
            Strategy::IdentityAsFail(s) => write!(f, "IdentityAsFail({s})"),
            Strategy::FailAsIdentity(s) => write!(f, "FailAsIdentity({s})"),
            Strategy::All(s) => write!(f, "All({s})"),
            Strategy::TopDown(s) => write!(f, "TopDown({s})"),
            Strategy::BottomUp(s) => write!(f, "BottomUp({s})"),
            Strategy::LeftChoice(ss) => write_list(f, "LeftChoice", ss),
            Strategy::Comp(ss) => write_list(f, "Comp", ss),
            Strategy::Normalizer(s) => write!(f, "Normalizer({s})"),
            Strategy::InnerContext(p, s) => {
                write!(f, "InnerContext({p}, {s})")
            }
        }
    }
}

fn write_list(
    f: &mut fmt::Formatter<'_>,
    name: &str,
    ss: &[Strategy],
) -> fmt::Result {
    write!(f, "{name}([")?;
    for (i, s) in ss.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{s}")?;
    }
    write!(f, "])")
}
