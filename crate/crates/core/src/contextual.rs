//! Contextual rewriting: gating a strategy on the presence of an inner
//! pattern, and transplanting a rule into surrounding term structure.
//!
//! `inner_context` restricts *where* a strategy may fire: only on subjects
//! that contain a match of a witness pattern somewhere inside. Combined
//! with `TopDown` this selects, say, the one summand of an integral whose
//! integrand mentions `div(y, v)` while leaving structurally identical
//! siblings alone.
//!
//! `outer_context` rewrites a *rule* instead of a term: given a context —
//! a rule whose left-hand side is a single pattern variable, such as
//! `[X_, (1/epsilon)*X*Y_]` — it embeds both sides of a rule into the
//! context's right-hand side and algebraically simplifies the result. The
//! extra context variables (`Y_` above) stay pattern variables, so the
//! derived rule still applies amid unrelated factors.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::algebra::simplify;
use crate::matching::{substitute_partial, Substitution};
use crate::rules::Rule;
use crate::strategy::Strategy;
use crate::term::{Head, Term, HOLE, OEPS};

/// Gates `s` on the presence of a `pattern` match anywhere inside the
/// subject (the subject itself counts).
pub fn inner_context(pattern: Term, s: Strategy) -> Strategy {
    Strategy::InnerContext(pattern, Box::new(s))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("context `{0}`: left-hand side must be a single pattern variable")]
    BadContext(String),
    #[error("context `{0}`: `{1}` is both a context variable and a name in rule `{2}`")]
    VariableClash(String, String, String),
    #[error("context `{0}`: `{OEPS}` must be applied to exactly one index")]
    BadOeps(String),
    #[error("context `{0}`: the template hole `_` may only appear in a linearity template")]
    HoleOutsideContext(String),
}

/// Validates and constructs a context: a rule-shaped pair whose left-hand
/// side is a single pattern variable and whose right-hand side may
/// introduce additional pattern variables. Contexts are consumed by
/// [`outer_context`]; applying one directly never rewrites anything,
/// because its extra variables have no binding.
pub fn make_context(
    name: impl Into<String>,
    lhs: Term,
    rhs: Term,
) -> Result<Rule, ContextError> {
    let name = name.into();
    if !matches!(lhs, Term::Var(_)) {
        return Err(ContextError::BadContext(name));
    }
    for t in rhs.subterms() {
        if let Some(args) = t.args_of(OEPS) {
            if args.len() != 1 {
                return Err(ContextError::BadOeps(name));
            }
        }
        if t.is_app_of(HOLE) {
            return Err(ContextError::HoleOutsideContext(name));
        }
    }
    let is_oeps = rhs.subterms().any(|t| t.is_oeps_marker());
    Ok(Rule { name, lhs, rhs, guard: None, is_oeps })
}

/// Embeds `r` in `context`, producing the rule that rewrites a `r.lhs`
/// redex *inside* the context shape. Both sides of the context's
/// right-hand side are instantiated — the context binding by the
/// corresponding side of `r`, and on the result's right-hand side the
/// context's extra variables by references to their own names — then
/// algebraically simplified. The guard and the fresh-index behavior of
/// `r` carry over.
pub fn outer_context(r: &Rule, context: &Rule) -> Result<Rule, ContextError> {
    let binder = match &context.lhs {
        Term::Var(x) => x.clone(),
        _ => return Err(ContextError::BadContext(context.name.clone())),
    };
    let fresh: Vec<String> = context
        .rhs
        .free_vars()
        .into_iter()
        .filter(|v| *v != binder)
        .collect();
    let taken = rule_names(r);
    for v in &fresh {
        if taken.contains(v.as_str()) {
            return Err(ContextError::VariableClash(
                context.name.clone(),
                v.clone(),
                r.name.clone(),
            ));
        }
    }

    let mut on_lhs = Substitution::new();
    on_lhs.insert(binder.clone(), r.lhs.clone());
    let lhs = simplify(&substitute_partial(&on_lhs, &context.rhs));

    let mut on_rhs = Substitution::new();
    on_rhs.insert(binder, r.rhs.clone());
    for v in &fresh {
        on_rhs.insert(v.clone(), Term::sym(v.clone()));
    }
    let rhs = simplify(&substitute_partial(&on_rhs, &context.rhs));

    Ok(Rule {
        name: format!("{}[{}]", context.name, r.name),
        lhs,
        rhs,
        guard: r.guard.clone(),
        is_oeps: r.is_oeps,
    })
}

/// Pattern variables and zero-argument constant names mentioned by either
/// side of `r`. A context variable shadowing any of these would silently
/// rebind the rule's own references.
fn rule_names(r: &Rule) -> BTreeSet<&str> {
    let mut names = BTreeSet::new();
    for side in [&r.lhs, &r.rhs] {
        for t in side.subterms() {
            match t {
                Term::Var(v) => {
                    names.insert(v.as_str());
                }
                Term::App { head: Head::Sym(s), args } if args.is_empty() => {
                    names.insert(s.as_str());
                }
                _ => {}
            }
        }
    }
    names
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::Session;
    use crate::dsl::parse_term;
    use crate::rules::make_rule;

    fn p(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    fn rule(name: &str, lhs: &str, rhs: &str) -> Rule {
        make_rule(name, p(lhs), p(rhs), None).unwrap()
    }

    fn ctx(name: &str, lhs: &str, rhs: &str) -> Rule {
        make_context(name, p(lhs), p(rhs)).unwrap()
    }

    #[test]
    fn identity_context_returns_the_rule() {
        let r = rule("r", "a", "b");
        let out = outer_context(&r, &ctx("id", "X_", "X")).unwrap();
        assert_eq!(out.lhs, r.lhs);
        assert_eq!(out.rhs, r.rhs);
        assert!(!out.is_oeps);
    }

    #[test]
    fn wrapping_context_embeds_both_sides() {
        let r = rule("r", "a", "b");
        let out = outer_context(&r, &ctx("wrap", "X_", "f(X)")).unwrap();
        assert_eq!(out.lhs, p("f(a)"));
        assert_eq!(out.rhs, p("f(b)"));
        // Independent check: the constructed rule rewrites f(a) to f(b).
        let s = Strategy::Transform(out);
        let mut session = Session::new();
        assert_eq!(s.eval(&mut session, &p("f(a)")), Ok(p("f(b)")));
    }

    #[test]
    fn context_variables_stay_patterns_and_become_references() {
        let r = rule("r", "B(w_)", "Tstar(w)");
        let scale = ctx("scale", "X_", "1/epsilon * X * Y_");
        let out = outer_context(&r, &scale).unwrap();
        assert_eq!(out.lhs, p("1/epsilon * B(w_) * Y_"));
        assert_eq!(out.rhs, p("1/epsilon * Tstar(w) * Y"));
        // Y_ absorbs the unrelated factors of the subject.
        let s = Strategy::Transform(out);
        let mut session = Session::new();
        assert_eq!(
            s.eval(&mut session, &p("1/epsilon * B(q) * u * v")),
            Ok(p("1/epsilon * Tstar(q) * u * v"))
        );
    }

    #[test]
    fn sides_are_simplified_and_oeps_carries_over() {
        let r = rule(
            "approx",
            "B(w_)",
            "Tstar(w) + epsilon*dot(y, Tstar(grad(x, w))) + epsilon*Oeps",
        );
        assert!(r.is_oeps);
        let out =
            outer_context(&r, &ctx("scale", "X_", "1/epsilon * X * Y_"))
                .unwrap();
        assert_eq!(out.lhs, p("1/epsilon * B(w_) * Y_"));
        // The epsilon factors cancel during simplification.
        assert_eq!(
            out.rhs,
            simplify(&p(
                "(1/epsilon * Tstar(w) + dot(y, Tstar(grad(x, w))) + Oeps) * Y"
            ))
        );
        assert!(out.is_oeps);
        // Applying it draws a fresh index for the residual error term.
        let s = Strategy::Transform(out);
        let mut session = Session::new();
        let applied =
            s.eval(&mut session, &p("1/epsilon * B(q) * u")).unwrap();
        assert_eq!(
            applied,
            simplify(&p(
                "(1/epsilon * Tstar(q) + dot(y, Tstar(grad(x, q))) + Oeps(0)) * u"
            ))
        );
    }

    #[test]
    fn guards_carry_over() {
        use crate::rules::Guard;
        let guarded = make_rule(
            "g",
            p("h(Z_)"),
            p("Z"),
            Some(Guard { pred: "bounded".into(), args: vec!["Z".into()] }),
        )
        .unwrap();
        let out =
            outer_context(&guarded, &ctx("wrap", "X_", "f(X)")).unwrap();
        let g = out.guard.expect("guard should survive the embedding");
        assert_eq!(g.pred, "bounded");
        assert_eq!(g.args, vec!["Z".to_string()]);
    }

    #[test]
    fn non_variable_context_is_rejected() {
        let r = rule("r", "a", "b");
        let bad = make_context("bad", p("f(X_)"), p("g(X)"));
        assert_eq!(bad, Err(ContextError::BadContext("bad".into())));
        // outer_context re-checks rules that were not built as contexts.
        let not_ctx = rule("nc", "f(X_)", "g(X)");
        assert_eq!(
            outer_context(&r, &not_ctx),
            Err(ContextError::BadContext("nc".into()))
        );
    }

    #[test]
    fn clashing_context_variables_are_rejected() {
        let r = rule("r", "B(w_)", "Tstar(w)");
        let clash = ctx("clash", "X_", "X * w_");
        assert_eq!(
            outer_context(&r, &clash),
            Err(ContextError::VariableClash(
                "clash".into(),
                "w".into(),
                "r".into()
            ))
        );
    }

    #[test]
    fn misapplied_context_rules_fail_quietly() {
        // A context matches anything but its extra variables are unbound,
        // so direct application is a non-match, not a crash.
        let scale = ctx("scale", "X_", "1/epsilon * X * Y_");
        let s = Strategy::Transform(scale);
        let mut session = Session::new();
        assert_eq!(
            s.eval(&mut session, &p("f(a)")),
            Err(crate::strategy::Interrupt::Fail)
        );
    }

    #[test]
    fn inner_context_selects_the_matching_summand() {
        let green = rule(
            "green",
            "Integral(D_, u_ * div(y, v), M_)",
            "-1 * Integral(D, dot(grad(y, u), v), M)",
        );
        let s = Strategy::TopDown(Box::new(inner_context(
            p("div(y, v)"),
            Strategy::Transform(green),
        )));
        let t1 = "Integral(D, v * div(x, u0), [dx])";
        let t2 = "Integral(D, u1 * div(y, v), [dx])";
        let subject = p(&format!("{t1} + {t2}"));
        let mut session = Session::new();
        let out = s.eval(&mut session, &subject).unwrap();
        assert_eq!(
            out,
            p(&format!(
                "{t1} + -1 * Integral(D, dot(grad(y, u1), v), [dx])"
            ))
        );
    }

    #[test]
    fn inner_context_fails_without_a_witness() {
        let s = inner_context(
            p("a"),
            Strategy::Transform(rule("bc", "b", "c")),
        );
        let mut session = Session::new();
        assert_eq!(
            s.eval(&mut session, &p("f(b)")),
            Err(crate::strategy::Interrupt::Fail)
        );
        // A variable pattern matches any subterm, so the gate always opens.
        let always = inner_context(p("q_"), Strategy::Identity);
        assert_eq!(always.eval(&mut session, &p("f(b)")), Ok(p("f(b)")));
    }
}
