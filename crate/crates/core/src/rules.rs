//! Rewrite rules: validated left/right term pairs with optional guards,
//! plus the linearity schema that manufactures distribution rules from a
//! template.
//!
//! A rule's right-hand side refers to matched variables *by bare name*:
//! `DotLin := [dot(u_ + v_, w_), dot(u, w) + dot(v, w)]`. Substitution
//! therefore replaces both explicit pattern variables and zero-ary
//! constants whose name is bound. Names that are not bound stay ordinary
//! constants, which is what lets right-hand sides mention fixed symbols
//! like `epsilon`.

use thiserror::Error;

use crate::matching::{match_first, substitute, substitute_partial, Substitution};
use crate::term::{Term, HOLE, OEPS};

/// A guard attached to a rule: `where bounded(Z)` names a predicate and the
/// matched variables it inspects. Predicates are resolved by the evaluation
/// session when the rule fires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub pred: String,
    pub args: Vec<String>,
}

/// A named rewrite rule in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    pub guard: Option<Guard>,
    /// True when the right-hand side introduces an `Oeps` error term whose
    /// index must be drawn fresh at application time.
    pub is_oeps: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("rule `{0}`: left-hand side is a bare number and would match nothing else")]
    BareNumberLhs(String),
    #[error("rule `{0}`: right-hand side uses `{1}_` which the left-hand side does not bind")]
    UnboundRhsVar(String, String),
    #[error("rule `{0}`: guard argument `{1}` is not bound by the left-hand side")]
    UnboundGuardArg(String, String),
    #[error("rule `{0}`: `{OEPS}` must be applied to exactly one index")]
    BadOeps(String),
    #[error("rule `{0}`: the template hole `_` may only appear in a linearity template")]
    HoleOutsideTemplate(String),
    #[error("linearity rule `{0}`: {1}")]
    BadTemplate(String, String),
}

/// Validates and constructs a rule.
pub fn make_rule(
    name: impl Into<String>,
    lhs: Term,
    rhs: Term,
    guard: Option<Guard>,
) -> Result<Rule, RuleError> {
    let name = name.into();
    if lhs.is_num() {
        return Err(RuleError::BareNumberLhs(name));
    }
    let bound = lhs.free_vars();
    for v in rhs.free_vars() {
        if !bound.contains(&v) {
            return Err(RuleError::UnboundRhsVar(name, v));
        }
    }
    if let Some(g) = &guard {
        for a in &g.args {
            if !bound.contains(a) {
                return Err(RuleError::UnboundGuardArg(name, a.clone()));
            }
        }
    }
    for side in [&lhs, &rhs] {
        for t in side.subterms() {
            if let Some(args) = t.args_of(OEPS) {
                if args.len() != 1 {
                    return Err(RuleError::BadOeps(name));
                }
            }
            if t.is_app_of(HOLE) {
                return Err(RuleError::HoleOutsideTemplate(name));
            }
        }
    }
    let is_oeps = rhs.subterms().any(|t| t.is_oeps_marker());
    Ok(Rule { name, lhs, rhs, guard, is_oeps })
}

/// Applies `rule` at the top of `t`. `guard_ok` decides guard predicates
/// given the match; rules without guards never consult it. Returns the
/// canonical rewritten term, or `None` when the rule does not apply.
pub fn apply_with<F>(rule: &Rule, t: &Term, guard_ok: F) -> Option<Term>
where
    F: FnOnce(&Guard, &Substitution) -> bool,
{
    let subst = match_first(&rule.lhs, t)?;
    if let Some(g) = &rule.guard {
        if !guard_ok(g, &subst) {
            return None;
        }
    }
    // Rules built by `make_rule` cannot have unbound right-hand-side
    // variables; context-shaped rules (see `contextual::make_context`) can,
    // and applying one directly is a non-match rather than a crash.
    substitute(&subst, &rule.rhs).ok()
}

/// Builds the distribution rule for `op` from a template with a single
/// hole. For a template `C[_]` the result rewrites `C[X_ + Y_]` to
/// `op(C[X], C[Y])`: the hole becomes a sum on the left, and on the right
/// the template is duplicated with each half referenced by name. Template
/// variables other than the hole stay pattern variables on the left and
/// become bare-name references on the right.
pub fn linearity(
    name: impl Into<String>,
    op: impl Into<String>,
    template: &Term,
) -> Result<Rule, RuleError> {
    let name = name.into();
    let op = op.into();
    let holes = template
        .subterms()
        .filter(|t| t.is_app_of(HOLE))
        .count();
    if holes != 1 {
        return Err(RuleError::BadTemplate(
            name,
            format!("template must contain exactly one hole, found {holes}"),
        ));
    }
    if template.is_app_of(HOLE) {
        return Err(RuleError::BadTemplate(
            name,
            "the hole may not be the entire template".into(),
        ));
    }
    let vars = template.free_vars();
    for fresh in ["X", "Y"] {
        if vars.iter().any(|v| v == fresh) {
            return Err(RuleError::BadTemplate(
                name,
                format!("template may not use the reserved variable `{fresh}_`"),
            ));
        }
    }

    let mut lhs_map = Substitution::new();
    lhs_map.insert(
        HOLE.to_string(),
        Term::plus(vec![Term::var("X"), Term::var("Y")]),
    );
    let lhs = substitute_partial(&lhs_map, template);

    // On the right the template's own variables turn into bare-name
    // references, exactly like a hand-written right-hand side.
    let mut base_map = Substitution::new();
    for v in &vars {
        base_map.insert(v.clone(), Term::sym(v.clone()));
    }
    let half = |var: &str| {
        let mut m = base_map.clone();
        m.insert(HOLE.to_string(), Term::sym(var));
        substitute_partial(&m, template)
    };
    let rhs = Term::app(op, vec![half("X"), half("Y")]);

    make_rule(name, lhs, rhs, None)
}
