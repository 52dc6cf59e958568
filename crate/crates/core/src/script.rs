//! Rule-package and proof-script parsing.
//!
//! Two file kinds share one statement grammar:
//!
//! * `.rules` — rule packages: rule declarations (plain, `Linearity`,
//!   `OuterContext`) and `bounded` directives.
//! * `.proof` — scripts: everything above plus strategy declarations and
//!   the actions `apply` / `expect` / `expect-exact`.
//!
//! ```text
//! IntegralLinearity := [Integral(D_, A_ + B_, M_),
//!                       Integral(D, A, M) + Integral(D, B, M)];
//! DotOepsL          := [dot(Z_, Oeps(i_)), Oeps] where bounded(Z);
//! TLin              := Linearity(1, +, T(_));
//! rEpsilon          := OuterContext(ApproximationB2, multContext);
//! bounded u, v;
//!
//! Split := Normalizer(TopDown(Transform(IntegralLinearity)));
//! apply Split to Integral(Omega, u + v, [dx]);
//! expect Integral(Omega, u, [dx]) + Integral(Omega, v, [dx]) modulo oeps;
//! ```
//!
//! Declarations bind names in order; a name must be declared before it is
//! used and may not be declared twice. Strategy declarations are inlined
//! into every later reference, so a [`Script`] is self-contained: its
//! actions carry fully elaborated strategies and no name table.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::contextual::{make_context, outer_context, ContextError};
use crate::convergence::convergence_strategy;
use crate::dsl::lex::{error_at, lex, Tok};
use crate::dsl::parse::Parser;
use crate::dsl::ParseError;
use crate::rules::{linearity, make_rule, Guard, Rule, RuleError};
use crate::strategy::Strategy;
use crate::term::{Term, HOLE, PLUS, TIMES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("unknown name `{name}` at line {line}, column {col}")]
    UnknownName { name: String, line: usize, col: usize },
    #[error("{0}")]
    Rule(#[from] RuleError),
    #[error("{0}")]
    Context(#[from] ContextError),
}

/// One proof-script action, in file order.
#[derive(Debug, Clone)]
pub enum Action {
    /// Rewrites the current term (or the inline `to` term) with a
    /// strategy. `source` is the strategy expression as written, for
    /// traces.
    Apply { strategy: Strategy, source: String, input: Option<Term> },
    /// Normalizes the current term algebraically, then checks it against
    /// `expected` (also normalized) ignoring `Oeps` indexes. The
    /// normalized term becomes the new current term.
    Expect { expected: Term },
    /// Checks the current term against `expected` exactly, without
    /// normalization; the current term is left untouched.
    ExpectExact { expected: Term },
}

/// A parsed proof script: the action sequence of a `.proof` file.
#[derive(Debug, Clone, Default)]
pub struct Script {
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone)]
enum Binding {
    Rule(Rule),
    Strategy(Strategy),
}

/// Names declared by rule packages and scripts, and the accumulated
/// `bounded` directives. One environment is threaded through all files of
/// a run, so later files may reference earlier declarations.
#[derive(Debug, Clone, Default)]
pub struct Env {
    names: BTreeMap<String, Binding>,
    /// Zero-argument symbols declared bounded, in declaration order.
    pub bounded: Vec<String>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        match self.names.get(name) {
            Some(Binding::Rule(r)) => Some(r),
            _ => None,
        }
    }

    /// All declared rules, in name order.
    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.names.values().filter_map(|b| match b {
            Binding::Rule(r) => Some(r),
            Binding::Strategy(_) => None,
        })
    }
}

/// Words with fixed meanings in the statement grammar; none may be
/// declared as a name.
const RESERVED: &[&str] = &[
    "apply", "expect", "exact", "to", "modulo", "oeps", "bounded", "where",
    "Linearity", "Transform", "Identity", "Fail", "IdentityAsFail",
    "FailAsIdentity", "All", "TopDown", "BottomUp", "LeftChoice", "Comp",
    "Normalizer", "InnerContext", "OuterContext", "ConvergenceStrategy",
    "Simplify",
];

/// Guard predicates a `where` clause may name.
const GUARD_PREDS: &[&str] = &["bounded"];

/// Parses a rule package into `env`. Actions and strategy declarations
/// are rejected: packages only declare rules and directives.
pub fn load_rules(src: &str, env: &mut Env) -> Result<(), ScriptError> {
    let script = parse(src, env, false)?;
    debug_assert!(script.actions.is_empty());
    Ok(())
}

/// Parses a proof script against (and extending) `env`.
pub fn parse_script(src: &str, env: &mut Env) -> Result<Script, ScriptError> {
    parse(src, env, true)
}

/// Parses a single strategy expression, e.g. from a command line.
pub fn parse_strategy(
    src: &str,
    env: &Env,
) -> Result<Strategy, ScriptError> {
    let toks = lex(src)?;
    let mut sp = ScriptParser {
        src,
        p: Parser::new(src, &toks),
        env,
        new_names: BTreeMap::new(),
        bounded: Vec::new(),
    };
    let s = sp.strategy()?;
    sp.p.expect_end()?;
    Ok(s)
}

fn parse(
    src: &str,
    env: &mut Env,
    allow_actions: bool,
) -> Result<Script, ScriptError> {
    let toks = lex(src)?;
    let mut sp = ScriptParser {
        src,
        p: Parser::new(src, &toks),
        env,
        new_names: BTreeMap::new(),
        bounded: Vec::new(),
    };
    let mut script = Script::default();
    let mut has_current = false;
    while !sp.p.at_end() {
        match sp.statement(allow_actions)? {
            None => {}
            Some(action) => {
                match &action {
                    Action::Apply { input: Some(_), .. } => {
                        has_current = true;
                    }
                    Action::Apply { input: None, .. }
                    | Action::Expect { .. }
                    | Action::ExpectExact { .. } => {
                        if !has_current {
                            return Err(sp
                                .p
                                .error(
                                    "no current term yet; the first action \
                                     must be `apply <strategy> to <term>;`",
                                )
                                .into());
                        }
                    }
                }
                script.actions.push(action);
            }
        }
    }
    let ScriptParser { new_names, bounded, .. } = sp;
    env.names.extend(new_names);
    env.bounded.extend(bounded);
    Ok(script)
}

struct ScriptParser<'a> {
    src: &'a str,
    p: Parser<'a>,
    env: &'a Env,
    /// Declarations made by this file; merged into the environment when
    /// the whole file has parsed.
    new_names: BTreeMap<String, Binding>,
    bounded: Vec<String>,
}

impl<'a> ScriptParser<'a> {
    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.new_names.get(name).or_else(|| self.env.names.get(name))
    }

    fn unknown(&self, pos: usize, name: &str) -> ScriptError {
        let at = error_at(self.src, pos, "");
        ScriptError::UnknownName {
            name: name.to_string(),
            line: at.line,
            col: at.col,
        }
    }

    /// Parses one statement; returns an action if the statement was one.
    fn statement(
        &mut self,
        allow_actions: bool,
    ) -> Result<Option<Action>, ScriptError> {
        let word = self.p.ident()?;
        match word.as_str() {
            "bounded" => {
                self.bounded_directive()?;
                Ok(None)
            }
            "apply" if allow_actions => Ok(Some(self.apply_action()?)),
            "expect" if allow_actions => Ok(Some(self.expect_action()?)),
            "apply" | "expect" => Err(self
                .p
                .error(format!(
                    "`{word}` is only allowed in proof scripts, not in \
                     rule packages"
                ))
                .into()),
            _ => {
                self.declaration(word, allow_actions)?;
                Ok(None)
            }
        }
    }

    fn bounded_directive(&mut self) -> Result<(), ScriptError> {
        loop {
            self.bounded.push(self.p.ident()?);
            if !self.p.eat(&Tok::Comma) {
                break;
            }
        }
        self.p.expect(&Tok::Semi)?;
        Ok(())
    }

    fn apply_action(&mut self) -> Result<Action, ScriptError> {
        let start = self.p.here();
        let strategy = self.strategy()?;
        let source = self.src[start..self.p.here()].trim_end().to_string();
        let input = if self.p.eat(&Tok::Ident("to".into())) {
            Some(self.p.term()?)
        } else {
            None
        };
        self.p.expect(&Tok::Semi)?;
        Ok(Action::Apply { strategy, source, input })
    }

    fn expect_action(&mut self) -> Result<Action, ScriptError> {
        // `expect-exact t;` — but a plain expectation may itself start
        // with a minus, so only take this branch for the literal word.
        if self.p.peek() == Some(&Tok::Minus)
            && self.p.peek2() == Some(&Tok::Ident("exact".into()))
        {
            self.p.bump();
            self.p.bump();
            let expected = self.p.term()?;
            self.p.expect(&Tok::Semi)?;
            Ok(Action::ExpectExact { expected })
        } else {
            let expected = self.p.term()?;
            self.p.keyword("modulo")?;
            self.p.keyword("oeps")?;
            self.p.expect(&Tok::Semi)?;
            Ok(Action::Expect { expected })
        }
    }

    fn declaration(
        &mut self,
        name: String,
        allow_strategies: bool,
    ) -> Result<(), ScriptError> {
        if RESERVED.contains(&name.as_str()) {
            return Err(self
                .p
                .error(format!("`{name}` is reserved and cannot be declared"))
                .into());
        }
        if self.lookup(&name).is_some() {
            return Err(self
                .p
                .error(format!("`{name}` is already declared"))
                .into());
        }
        self.p.expect(&Tok::Assign)?;
        let binding = match self.p.peek() {
            Some(Tok::LBracket) => Binding::Rule(self.rule_body(&name)?),
            Some(Tok::Ident(w)) if w == "Linearity" => {
                self.p.bump();
                Binding::Rule(self.linearity_body(&name)?)
            }
            Some(Tok::Ident(w)) if w == "OuterContext" => {
                self.p.bump();
                Binding::Rule(self.outer_context_body(&name)?)
            }
            _ if allow_strategies => {
                let s = self.strategy()?;
                Binding::Strategy(s)
            }
            _ => {
                return Err(self
                    .p
                    .error(
                        "expected a rule body: `[lhs, rhs]`, \
                         `Linearity(...)`, or `OuterContext(...)`",
                    )
                    .into());
            }
        };
        self.p.expect(&Tok::Semi)?;
        self.new_names.insert(name, binding);
        Ok(())
    }

    /// `[lhs, rhs]` with an optional `where pred(args)` guard. A pair
    /// whose left-hand side is a bare pattern variable and whose
    /// right-hand side introduces further variables is a context (usable
    /// only with `OuterContext`).
    fn rule_body(&mut self, name: &str) -> Result<Rule, ScriptError> {
        self.p.expect(&Tok::LBracket)?;
        let lhs = self.p.term()?;
        self.p.expect(&Tok::Comma)?;
        let rhs = self.p.term()?;
        self.p.expect(&Tok::RBracket)?;
        let guard = if self.p.eat(&Tok::Ident("where".into())) {
            Some(self.guard()?)
        } else {
            None
        };
        match make_rule(name, lhs.clone(), rhs.clone(), guard.clone()) {
            Ok(r) => Ok(r),
            Err(RuleError::UnboundRhsVar(..))
                if guard.is_none() && matches!(lhs, Term::Var(_)) =>
            {
                Ok(make_context(name, lhs, rhs)?)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn guard(&mut self) -> Result<Guard, ScriptError> {
        let pos = self.p.here();
        let pred = self.p.ident()?;
        if !GUARD_PREDS.contains(&pred.as_str()) {
            let at = error_at(self.src, pos, "");
            return Err(ScriptError::UnknownName {
                name: pred,
                line: at.line,
                col: at.col,
            });
        }
        self.p.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            // Guard arguments name left-hand-side pattern variables; the
            // trailing underscore is optional here.
            args.push(match self.p.bump() {
                Some(Tok::Ident(s)) | Some(Tok::PatVar(s)) => s.clone(),
                _ => {
                    return Err(self
                        .p
                        .error("expected a pattern-variable name")
                        .into())
                }
            });
            if !self.p.eat(&Tok::Comma) {
                break;
            }
        }
        self.p.expect(&Tok::RParen)?;
        Ok(Guard { pred, args })
    }

    /// `Linearity(n, op, template)` — distribution of `template`'s
    /// operator over sums in its `n`-th argument, which the template marks
    /// with the hole `_`.
    fn linearity_body(&mut self, name: &str) -> Result<Rule, ScriptError> {
        self.p.expect(&Tok::LParen)?;
        let n = match self.p.bump() {
            Some(Tok::Int(n)) => n.clone(),
            _ => {
                return Err(self
                    .p
                    .error("expected the hole's argument position")
                    .into())
            }
        };
        self.p.expect(&Tok::Comma)?;
        let op = match self.p.bump() {
            Some(Tok::Plus) => PLUS.to_string(),
            Some(Tok::Star) => TIMES.to_string(),
            Some(Tok::Ident(s)) => s.clone(),
            _ => {
                return Err(self
                    .p
                    .error("expected an operator: `+`, `*`, or a name")
                    .into())
            }
        };
        self.p.expect(&Tok::Comma)?;
        let template = self.p.term()?;
        self.p.expect(&Tok::RParen)?;
        let hole_at = hole_position(&template);
        if hole_at.map(|i| i.to_string()) != Some(n.to_string()) {
            return Err(self
                .p
                .error(match hole_at {
                    Some(i) => format!(
                        "the hole is in argument {i} of the template, not {n}"
                    ),
                    None => "the template has no top-level argument \
                             containing the hole `_`"
                        .into(),
                })
                .into());
        }
        Ok(linearity(name, op, &template)?)
    }

    /// `OuterContext(rule, context)` — the rule embedded in the context.
    fn outer_context_body(&mut self, name: &str) -> Result<Rule, ScriptError> {
        self.p.expect(&Tok::LParen)?;
        let r = self.rule_ref()?;
        self.p.expect(&Tok::Comma)?;
        let ctx = self.rule_ref()?;
        self.p.expect(&Tok::RParen)?;
        let mut derived = outer_context(&r, &ctx)?;
        derived.name = name.to_string();
        Ok(derived)
    }

    fn rule_ref(&mut self) -> Result<Rule, ScriptError> {
        let pos = self.p.here();
        let name = self.p.ident()?;
        match self.lookup(&name) {
            Some(Binding::Rule(r)) => Ok(r.clone()),
            Some(Binding::Strategy(_)) => Err(self
                .p
                .error(format!("`{name}` names a strategy, not a rule"))
                .into()),
            None => Err(self.unknown(pos, &name)),
        }
    }

    fn strategy(&mut self) -> Result<Strategy, ScriptError> {
        let pos = self.p.here();
        let head = self.p.ident().map_err(|_| {
            ScriptError::Parse(self.p.error("expected a strategy expression"))
        })?;
        match head.as_str() {
            "Identity" => {
                self.unit_args()?;
                Ok(Strategy::Identity)
            }
            "Fail" => {
                self.unit_args()?;
                Ok(Strategy::Fail)
            }
            "Simplify" => {
                self.unit_args()?;
                Ok(Strategy::Simplify)
            }
            "ConvergenceStrategy" => {
                self.unit_args()?;
                Ok(convergence_strategy())
            }
            "Transform" => {
                self.p.expect(&Tok::LParen)?;
                let r = self.rule_ref()?;
                self.p.expect(&Tok::RParen)?;
                Ok(Strategy::Transform(r))
            }
            "IdentityAsFail" | "FailAsIdentity" | "All" | "TopDown"
            | "BottomUp" | "Normalizer" => {
                self.p.expect(&Tok::LParen)?;
                let inner = Box::new(self.strategy()?);
                self.p.expect(&Tok::RParen)?;
                Ok(match head.as_str() {
                    "IdentityAsFail" => Strategy::IdentityAsFail(inner),
                    "FailAsIdentity" => Strategy::FailAsIdentity(inner),
                    "All" => Strategy::All(inner),
                    "TopDown" => Strategy::TopDown(inner),
                    "BottomUp" => Strategy::BottomUp(inner),
                    _ => Strategy::Normalizer(inner),
                })
            }
            "LeftChoice" | "Comp" => {
                self.p.expect(&Tok::LParen)?;
                self.p.expect(&Tok::LBracket)?;
                let mut items = Vec::new();
                if self.p.peek() != Some(&Tok::RBracket) {
                    loop {
                        items.push(self.strategy()?);
                        if !self.p.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.p.expect(&Tok::RBracket)?;
                self.p.expect(&Tok::RParen)?;
                Ok(if head == "LeftChoice" {
                    Strategy::LeftChoice(items)
                } else {
                    Strategy::Comp(items)
                })
            }
            "InnerContext" => {
                self.p.expect(&Tok::LParen)?;
                let pattern = self.p.term()?;
                self.p.expect(&Tok::Comma)?;
                let inner = Box::new(self.strategy()?);
                self.p.expect(&Tok::RParen)?;
                Ok(Strategy::InnerContext(pattern, inner))
            }
            "OuterContext" => Err(self
                .p
                .error(
                    "`OuterContext` produces a rule; declare it with \
                     `name := OuterContext(rule, context);` and apply it \
                     with `Transform(name)`",
                )
                .into()),
            _ => match self.lookup(&head) {
                Some(Binding::Strategy(s)) => Ok(s.clone()),
                Some(Binding::Rule(_)) => Err(self
                    .p
                    .error(format!(
                        "`{head}` names a rule; wrap it in `Transform({head})`"
                    ))
                    .into()),
                None => Err(self.unknown(pos, &head)),
            },
        }
    }

    /// Accepts the optional empty argument list of a nullary strategy,
    /// e.g. `Fail()`.
    fn unit_args(&mut self) -> Result<(), ScriptError> {
        if self.p.eat(&Tok::LParen) {
            self.p.expect(&Tok::RParen)?;
        }
        Ok(())
    }
}

/// 1-based index of the template argument containing the hole, if any.
fn hole_position(template: &Term) -> Option<usize> {
    if let Term::App { args, .. } = template {
        for (i, a) in args.iter().enumerate() {
            if a.subterms().any(|t| t.is_app_of(HOLE)) {
                return Some(i + 1);
            }
        }
    }
    None
}
