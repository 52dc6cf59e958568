//! Proof-script execution: drives a parsed [`Script`] through a
//! [`Session`], emitting one trace event per `apply` and stopping at the
//! first failed expectation.

use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::simplify;
use crate::convergence::{Session, SessionError};
use crate::dsl::render_term;
use crate::script::{self, Action, Env, Script, ScriptError};
use crate::strategy::{Interrupt, Strategy};
use crate::term::{equiv_mod_oeps, Term, OEPS};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Wall-clock budget for the whole run; exceeding it aborts the
    /// current strategy evaluation.
    pub time_limit: Option<Duration>,
}

/// One `apply` step as recorded by the runner. Replaying `strategy` on
/// `input` in an equally seeded session reproduces `output` and `fresh`;
/// only `elapsed_us` varies between runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    /// 1-based position among the script's `apply` actions.
    pub step: usize,
    /// The strategy expression as written in the script.
    pub strategy: String,
    pub input: String,
    pub output: String,
    /// `Oeps` indexes drawn while this step ran.
    pub fresh: Vec<u64>,
    pub elapsed_us: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("{0}")]
    Script(#[from] ScriptError),
    #[error("{0}")]
    Session(#[from] SessionError),
    #[error("step {step}: strategy `{strategy}` failed")]
    StrategyFailed { step: usize, strategy: String },
    #[error(
        "step {step}: expectation failed\n  expected: {expected}\n  actual:   {actual}"
    )]
    ExpectationFailed { step: usize, expected: String, actual: String },
    #[error("step {step}: time limit exceeded")]
    TimeLimitExceeded { step: usize },
}

/// Runs a parsed script. `trace` observes each `apply` as it completes;
/// the final current term is returned.
pub fn run_script(
    script: &Script,
    env: &Env,
    options: &RunOptions,
    trace: &mut dyn FnMut(&TraceEvent),
) -> Result<Term, RunError> {
    let mut session = Session::new();
    for name in &env.bounded {
        session.declare_bounded(name.clone())?;
    }
    if let Some(limit) = options.time_limit {
        session.set_deadline(Instant::now() + limit);
    }

    let mut current: Option<Term> = None;
    let mut step = 0;
    for action in &script.actions {
        match action {
            Action::Apply { strategy, source, input } => {
                step += 1;
                if let Some(t) = input {
                    reserve_oeps_indexes(&mut session, t);
                    current = Some(t.clone());
                }
                let subject = current
                    .as_ref()
                    .expect("parser guarantees a current term")
                    .clone();
                let fresh_from = session.peek_index();
                let started = Instant::now();
                let out = match strategy.eval(&mut session, &subject) {
                    Ok(out) => out,
                    Err(Interrupt::Fail) => {
                        return Err(RunError::StrategyFailed {
                            step,
                            strategy: source.clone(),
                        })
                    }
                    Err(Interrupt::TimeLimit) => {
                        return Err(RunError::TimeLimitExceeded { step })
                    }
                };
                trace(&TraceEvent {
                    step,
                    strategy: source.clone(),
                    input: render_term(&subject),
                    output: render_term(&out),
                    fresh: (fresh_from..session.peek_index()).collect(),
                    elapsed_us: started.elapsed().as_micros(),
                });
                current = Some(out);
            }
            Action::Expect { expected } => {
                let actual = simplify(
                    current.as_ref().expect("parser guarantees a current term"),
                );
                let want = simplify(expected);
                if !equiv_mod_oeps(&actual, &want) {
                    return Err(RunError::ExpectationFailed {
                        step,
                        expected: render_term(&want),
                        actual: render_term(&actual),
                    });
                }
                // The checked normal form becomes the next step's input, so
                // each proof step starts from the simplified shape it was
                // verified against.
                current = Some(actual);
            }
            Action::ExpectExact { expected } => {
                let actual = current
                    .as_ref()
                    .expect("parser guarantees a current term");
                if actual != expected {
                    return Err(RunError::ExpectationFailed {
                        step,
                        expected: render_term(expected),
                        actual: render_term(actual),
                    });
                }
            }
        }
    }
    Ok(current.unwrap_or_else(|| Term::int(0)))
}

/// Parses rule packages and a proof script, then runs the script. This is
/// the whole-file entry point used by the command line and by tests.
pub fn run_sources(
    rule_sources: &[&str],
    proof_source: &str,
    options: &RunOptions,
    trace: &mut dyn FnMut(&TraceEvent),
) -> Result<Term, RunError> {
    let mut env = Env::new();
    for src in rule_sources {
        script::load_rules(src, &mut env)?;
    }
    let parsed = script::parse_script(proof_source, &mut env)?;
    run_script(&parsed, &env, options, trace)
}

/// Evaluates one strategy on one term in a fresh session. `Ok(None)`
/// reports a strategy failure (distinct from an error).
pub fn apply_once(
    env: &Env,
    strategy: &Strategy,
    t: &Term,
    options: &RunOptions,
) -> Result<Option<Term>, RunError> {
    let mut session = Session::new();
    for name in &env.bounded {
        session.declare_bounded(name.clone())?;
    }
    if let Some(limit) = options.time_limit {
        session.set_deadline(Instant::now() + limit);
    }
    reserve_oeps_indexes(&mut session, t);
    match strategy.eval(&mut session, t) {
        Ok(out) => Ok(Some(out)),
        Err(Interrupt::Fail) => Ok(None),
        Err(Interrupt::TimeLimit) => {
            Err(RunError::TimeLimitExceeded { step: 1 })
        }
    }
}

/// Moves the session's fresh counter past every concrete `Oeps` index in
/// `t`, keeping hand-written indexes distinct from drawn ones.
fn reserve_oeps_indexes(session: &mut Session, t: &Term) {
    for sub in t.subterms() {
        if let Some([ix]) = sub.args_of(OEPS) {
            if let Some(n) = ix.as_num().and_then(|r| {
                r.is_integer().then(|| r.to_integer()).and_then(|i| i.to_u64())
            }) {
                session.reserve_index(n);
            }
        }
    }
}
