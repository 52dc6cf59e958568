//! Pattern matching and substitution.
//!
//! Matching is one-way: a pattern (term with pattern variables) is matched
//! against a subject, producing a substitution `σ` with `σ(pattern)` equal
//! to the subject up to canonical form. For AC heads (`plus`, `times`) the
//! matcher enumerates argument assignments deterministically:
//!
//! * pattern arguments are taken in canonical order, which places pattern
//!   variables last;
//! * every non-trailing pattern argument is assigned exactly one subject
//!   argument, candidates tried in ascending subject position with full
//!   backtracking;
//! * a trailing pattern variable absorbs all remaining subject arguments as
//!   a single argument (or an AC node when more than one remains).
//!
//! The first solution in this enumeration order is the match result, which
//! makes rewriting reproducible run to run.

use std::collections::BTreeMap;
use std::rc::Rc;

use thiserror::Error;

use crate::term::{is_ac, Head, Term};

/// A finite map from pattern-variable names to closed terms.
pub type Substitution = BTreeMap<String, Term>;

/// Errors surfaced by strict substitution.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    /// The template contains a pattern variable the substitution does not
    /// bind.
    #[error("unbound pattern variable `{0}_`")]
    UnboundVariable(String),
    /// A head-position variable is bound to something other than a bare
    /// symbol.
    #[error("head variable `{0}_` is bound to a non-symbol term")]
    HeadBinding(String),
}

/// First match of `pattern` against `subject`, or `None`.
pub fn match_first(pattern: &Term, subject: &Term) -> Option<Substitution> {
    match_with(pattern, subject, &Substitution::new())
}

/// Like [`match_first`] but extending an existing substitution (shared
/// variables must agree with the prior bindings).
pub fn match_with(
    pattern: &Term,
    subject: &Term,
    init: &Substitution,
) -> Option<Substitution> {
    match_all_limit(pattern, subject, init, 1).pop()
}

/// All matches in enumeration order, up to `limit`.
pub fn match_all_limit(
    pattern: &Term,
    subject: &Term,
    init: &Substitution,
    limit: usize,
) -> Vec<Substitution> {
    let mut out = Vec::new();
    let goals = Goals::Pair {
        p: pattern,
        s: subject,
        rest: Rc::new(Goals::Nil),
    };
    run(&goals, init.clone(), &mut out, limit);
    out
}

/// True when any subterm of `t` (including `t` itself) matches `pattern`.
pub fn contains_match(pattern: &Term, t: &Term) -> bool {
    t.subterms().any(|s| match_first(pattern, s).is_some())
}

/// Matching work list. `Pair` goals are structural comparisons; `Assign`
/// goals enumerate AC argument assignments. The list is persistent so that
/// branches of the search can share their continuation.
enum Goals<'a> {
    Nil,
    Pair {
        p: &'a Term,
        s: &'a Term,
        rest: Rc<Goals<'a>>,
    },
    Assign {
        head: &'a str,
        singles: Vec<&'a Term>,
        next: usize,
        subject_args: &'a [Term],
        used: Vec<bool>,
        absorber: Option<&'a str>,
        rest: Rc<Goals<'a>>,
    },
}

fn bind(
    mut subst: Substitution,
    name: &str,
    value: Term,
) -> Option<Substitution> {
    match subst.get(name) {
        Some(prev) => (*prev == value).then_some(subst),
        None => {
            subst.insert(name.to_string(), value);
            Some(subst)
        }
    }
}

fn run(
    goals: &Goals<'_>,
    subst: Substitution,
    out: &mut Vec<Substitution>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    match goals {
        Goals::Nil => out.push(subst),
        Goals::Pair { p, s, rest } => pair(p, s, rest, subst, out, limit),
        Goals::Assign {
            head,
            singles,
            next,
            subject_args,
            used,
            absorber,
            rest,
        } => {
            if *next == singles.len() {
                let remaining: Vec<Term> = subject_args
                    .iter()
                    .zip(used)
                    .filter(|(_, u)| !**u)
                    .map(|(t, _)| t.clone())
                    .collect();
                match absorber {
                    Some(var) => {
                        if remaining.is_empty() {
                            return;
                        }
                        let value = if remaining.len() == 1 {
                            remaining.into_iter().next().unwrap()
                        } else {
                            Term::app(head.to_string(), remaining)
                        };
                        if let Some(s2) = bind(subst, var, value) {
                            run(rest, s2, out, limit);
                        }
                    }
                    None => {
                        debug_assert!(remaining.is_empty());
                        run(rest, subst, out, limit);
                    }
                }
            } else {
                let p = singles[*next];
                for j in 0..subject_args.len() {
                    if used[j] || out.len() >= limit {
                        continue;
                    }
                    let mut used2 = used.clone();
                    used2[j] = true;
                    let cont = Goals::Assign {
                        head,
                        singles: singles.clone(),
                        next: next + 1,
                        subject_args,
                        used: used2,
                        absorber: *absorber,
                        rest: rest.clone(),
                    };
                    let goal = Goals::Pair {
                        p,
                        s: &subject_args[j],
                        rest: Rc::new(cont),
                    };
                    run(&goal, subst.clone(), out, limit);
                }
            }
        }
    }
}

fn pair(
    p: &Term,
    s: &Term,
    rest: &Rc<Goals<'_>>,
    subst: Substitution,
    out: &mut Vec<Substitution>,
    limit: usize,
) {
    match p {
        Term::Var(x) => {
            if let Some(s2) = bind(subst, x, s.clone()) {
                run(rest, s2, out, limit);
            }
        }
        Term::Num(n) => {
            if matches!(s, Term::Num(m) if m == n) {
                run(rest, subst, out, limit);
            }
        }
        Term::App { head: Head::Var(f), args: pargs } => {
            // A head variable matches any application of the same arity and
            // binds to the subject's head symbol.
            let Term::App { head: Head::Sym(sh), args: sargs } = s else {
                return;
            };
            if pargs.len() != sargs.len() {
                return;
            }
            let Some(s2) = bind(subst, f, Term::sym(sh.clone())) else {
                return;
            };
            run(&chain(pargs, sargs, rest.clone()), s2, out, limit);
        }
        Term::App { head: Head::Sym(ph), args: pargs } => {
            let Term::App { head: Head::Sym(sh), args: sargs } = s else {
                return;
            };
            if ph != sh {
                return;
            }
            if is_ac(ph) {
                let (singles, absorber) = split_ac_pattern(pargs);
                let enough = match absorber {
                    Some(_) => sargs.len() >= pargs.len(),
                    None => sargs.len() == pargs.len(),
                };
                if !enough {
                    return;
                }
                let goal = Goals::Assign {
                    head: ph,
                    singles,
                    next: 0,
                    subject_args: sargs,
                    used: vec![false; sargs.len()],
                    absorber,
                    rest: rest.clone(),
                };
                run(&goal, subst, out, limit);
            } else {
                if pargs.len() != sargs.len() {
                    return;
                }
                run(&chain(pargs, sargs, rest.clone()), subst, out, limit);
            }
        }
    }
}

/// Splits canonical AC pattern arguments into per-argument goals and the
/// optional trailing absorbing variable.
fn split_ac_pattern(pargs: &[Term]) -> (Vec<&Term>, Option<&str>) {
    match pargs.last() {
        Some(Term::Var(v)) => {
            (pargs[..pargs.len() - 1].iter().collect(), Some(v.as_str()))
        }
        _ => (pargs.iter().collect(), None),
    }
}

fn chain<'a>(
    ps: &'a [Term],
    ss: &'a [Term],
    rest: Rc<Goals<'a>>,
) -> Rc<Goals<'a>> {
    debug_assert_eq!(ps.len(), ss.len());
    let mut goals = rest;
    for (p, s) in ps.iter().zip(ss).rev() {
        goals = Rc::new(Goals::Pair { p, s, rest: goals });
    }
    goals
}

/// Applies a substitution strictly: every pattern variable (argument or head
/// position) must be bound. Zero-ary constants whose name is bound are also
/// replaced — right-hand sides of rules reference their matched variables by
/// bare name. The result is canonical.
pub fn substitute(subst: &Substitution, t: &Term) -> Result<Term, SubstError> {
    apply_subst(subst, t, true)
}

/// Applies a substitution leniently: unbound variables are left in place.
/// Used by rule constructors that instantiate templates containing variables
/// of their own.
pub fn substitute_partial(subst: &Substitution, t: &Term) -> Term {
    apply_subst(subst, t, false).expect("lenient substitution cannot fail")
}

fn apply_subst(
    subst: &Substitution,
    t: &Term,
    strict: bool,
) -> Result<Term, SubstError> {
    match t {
        Term::Num(_) => Ok(t.clone()),
        Term::Var(x) => match subst.get(x) {
            Some(v) => Ok(v.clone()),
            None if strict => Err(SubstError::UnboundVariable(x.clone())),
            None => Ok(t.clone()),
        },
        Term::App { head, args } => {
            // Bare-name reference: a zero-ary constant named like a binding.
            if args.is_empty() {
                if let Head::Sym(name) = head {
                    if let Some(v) = subst.get(name) {
                        return Ok(v.clone());
                    }
                }
            }
            let head = match head {
                Head::Var(f) => match subst.get(f) {
                    Some(Term::App { head: Head::Sym(sym), args: a })
                        if a.is_empty() =>
                    {
                        Head::Sym(sym.clone())
                    }
                    Some(_) => return Err(SubstError::HeadBinding(f.clone())),
                    None if strict => {
                        return Err(SubstError::UnboundVariable(f.clone()))
                    }
                    None => head.clone(),
                },
                Head::Sym(_) => head.clone(),
            };
            let args = args
                .iter()
                .map(|a| apply_subst(subst, a, strict))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::apply(head, args))
        }
    }
}
