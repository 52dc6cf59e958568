//! Recursive-descent parser for the term grammar.
//!
//! ```text
//! sum      := product (('+' | '-') product)*
//! product  := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)?
//! exponent := ['-'] int | '(' ['-'] int ')'
//! atom     := int
//!           | name '_' ['(' sum (',' sum)* ')']      pattern variable / head
//!           | name ['(' sum (',' sum)* ')']          constant / application
//!           | '(' sum ')'
//!           | '[' sum (',' sum)* ']'                 list
//! ```
//!
//! The parser produces canonical terms. It performs a few purely syntactic
//! folds so that printed terms read back identically: division becomes a
//! negative power (or an exact rational when both operands are numbers),
//! exponents `0` and `1` collapse, numeric bases are evaluated, and unary
//! minus negates the leading numeric factor of a product instead of
//! multiplying by an extra `-1`.

use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::term::{Head, Term, LIST, OEPS, TIMES};

use super::lex::{error_at, lex, ParseError, Tok, Token};

/// Parses a complete term; trailing input is an error.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser::new(src, &toks);
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

pub(crate) struct Parser<'a> {
    src: &'a str,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, toks: &'a [Token]) -> Self {
        Parser { src, toks, pos: 0 }
    }

    pub(crate) fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    /// The token after the current one, for the rare two-token decisions.
    pub(crate) fn peek2(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.tok)
    }

    pub(crate) fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos).map(|t| &t.tok);
        self.pos += 1;
        t
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// Byte offset of the current token (or end of input).
    pub(crate) fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|t| t.pos)
            .unwrap_or(self.src.len())
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> ParseError {
        error_at(self.src, self.here(), msg)
    }

    pub(crate) fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            let found = self
                .peek()
                .map(|t| t.describe())
                .unwrap_or_else(|| "end of input".into());
            Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                found
            )))
        }
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error(format!(
                "unexpected {} after term",
                self.peek().unwrap().describe()
            )))
        }
    }

    /// Expects a bare identifier and returns it.
    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            other => {
                let found = other
                    .map(|t| t.describe())
                    .unwrap_or_else(|| "end of input".into());
                Err(self.error(format!("expected a name, found {found}")))
            }
        }
    }

    /// Expects the specific identifier `word` (a keyword of the script
    /// grammars).
    pub(crate) fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == word => {
                self.pos += 1;
                Ok(())
            }
            other => {
                let found = other
                    .map(|t| t.describe())
                    .unwrap_or_else(|| "end of input".into());
                Err(self
                    .error(format!("expected `{word}`, found {found}")))
            }
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        self.sum()
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.product()?;
                acc = Term::plus(vec![acc, rhs]);
            } else if self.eat(&Tok::Minus) {
                let rhs = self.product()?;
                acc = Term::plus(vec![acc, smart_negate(rhs)]);
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.unary()?;
                acc = Term::times(vec![acc, rhs]);
            } else if self.eat(&Tok::Slash) {
                let at = self.here();
                let rhs = self.unary()?;
                acc = self.divide(acc, rhs, at)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn divide(
        &self,
        num: Term,
        den: Term,
        at: usize,
    ) -> Result<Term, ParseError> {
        if matches!(&den, Term::Num(n) if n.is_zero()) {
            return Err(error_at(self.src, at, "division by zero"));
        }
        if let (Term::Num(a), Term::Num(b)) = (&num, &den) {
            return Ok(Term::num(a / b));
        }
        let inv = self.invert(den, at)?;
        if matches!(&num, Term::Num(n) if n.is_one()) {
            return Ok(inv);
        }
        Ok(Term::times(vec![num, inv]))
    }

    /// `1/t` as a term: numbers invert exactly, powers negate their
    /// exponent, anything else becomes `t^(-1)`.
    fn invert(&self, t: Term, at: usize) -> Result<Term, ParseError> {
        if let Term::Num(n) = &t {
            if n.is_zero() {
                return Err(error_at(self.src, at, "division by zero"));
            }
            return Ok(Term::num(n.recip()));
        }
        if let Some((base, e)) = as_int_pow(&t) {
            return self.make_pow(base, -e, at);
        }
        self.make_pow(t, -1, at)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.eat(&Tok::Minus) {
            Ok(smart_negate(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Term, ParseError> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            let at = self.here();
            let e = self.exponent()?;
            self.make_pow(base, e, at)
        } else {
            Ok(base)
        }
    }

    fn make_pow(
        &self,
        base: Term,
        e: i64,
        at: usize,
    ) -> Result<Term, ParseError> {
        if e == 0 {
            return Ok(Term::int(1));
        }
        if e == 1 {
            return Ok(base);
        }
        if let Term::Num(n) = &base {
            if n.is_zero() && e < 0 {
                return Err(error_at(self.src, at, "division by zero"));
            }
            return Ok(Term::num(rational_pow(n, e)));
        }
        if let Some((inner, k)) = as_int_pow(&base) {
            let merged = k.checked_mul(e).ok_or_else(|| {
                error_at(self.src, at, "exponent out of range")
            })?;
            return self.make_pow(inner, merged, at);
        }
        Ok(Term::pow(base, e))
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let parens = self.eat(&Tok::LParen);
        let neg = self.eat(&Tok::Minus);
        let e = match self.peek() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                n.to_i64()
                    .ok_or_else(|| self.error("exponent out of range"))?
            }
            _ => return Err(self.error("expected an integer exponent")),
        };
        if parens {
            self.expect(&Tok::RParen)?;
        }
        Ok(if neg { -e } else { e })
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Int(n)) => {
                Ok(Term::num(BigRational::from_integer(n.clone())))
            }
            Some(Tok::PatVar(x)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let args = self.paren_args()?;
                    Ok(Term::apply(Head::Var(x.clone()), args))
                } else {
                    Ok(Term::var(x.clone()))
                }
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    let args = self.paren_args()?;
                    if name == OEPS {
                        return self.oeps_from_args(args, at);
                    }
                    Ok(Term::app(name.clone(), args))
                } else if name == OEPS {
                    Ok(Term::oeps_marker())
                } else {
                    Ok(Term::sym(name.clone()))
                }
            }
            Some(Tok::LParen) => {
                let t = self.term()?;
                self.expect(&Tok::RParen)?;
                Ok(t)
            }
            Some(Tok::LBracket) => {
                let mut args = vec![self.term()?];
                while self.eat(&Tok::Comma) {
                    args.push(self.term()?);
                }
                self.expect(&Tok::RBracket)?;
                Ok(Term::app(LIST, args))
            }
            Some(Tok::Hole) => Ok(Term::sym(crate::term::HOLE)),
            other => {
                let found = other
                    .map(|t| t.describe())
                    .unwrap_or_else(|| "end of input".into());
                Err(error_at(
                    self.src,
                    at,
                    format!("expected a term, found {found}"),
                ))
            }
        }
    }

    fn oeps_from_args(
        &self,
        args: Vec<Term>,
        at: usize,
    ) -> Result<Term, ParseError> {
        if args.len() == 1 {
            match &args[0] {
                Term::Num(n)
                    if n.is_integer() && !n.is_negative() =>
                {
                    if let Some(i) = n.to_integer().to_u64() {
                        return Ok(Term::oeps(i));
                    }
                }
                // `Oeps(i_)`: an index pattern on a rule's left-hand side.
                Term::Var(_) => {
                    return Ok(Term::app(OEPS, args));
                }
                _ => {}
            }
        }
        Err(error_at(
            self.src,
            at,
            format!(
                "`{OEPS}` takes a single nonnegative integer index \
                 or an index pattern like `i_`"
            ),
        ))
    }

    fn paren_args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(&Tok::LParen)?;
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        self.expect(&Tok::RParen)?;
        Ok(args)
    }
}

/// Decomposes `t` as `base^k` with an integer exponent.
fn as_int_pow(t: &Term) -> Option<(Term, i64)> {
    t.as_int_pow().map(|(b, k)| (b.clone(), k))
}

fn rational_pow(n: &BigRational, e: i64) -> BigRational {
    let m = e.unsigned_abs();
    let raised = BigRational::new_raw(
        Pow::pow(n.numer(), m),
        Pow::pow(n.denom(), m),
    );
    if e < 0 {
        raised.recip()
    } else {
        raised
    }
}

/// Negates a parsed term the way a human reads `-t`: numbers flip sign, a
/// product negates its (unique) numeric coefficient, everything else gains
/// a `-1` factor. A `-1` coefficient that negation would turn into `1` is
/// dropped instead so `-(-x)` is `x`, not `1*x`.
pub(crate) fn smart_negate(t: Term) -> Term {
    match t {
        Term::Num(n) => Term::num(-n),
        Term::App { head: Head::Sym(ref h), ref args }
            if h.as_str() == TIMES && args.iter().any(Term::is_num) =>
        {
            let mut args = args.clone();
            let i = args
                .iter()
                .position(Term::is_num)
                .expect("checked above");
            let Term::Num(n) = &args[i] else { unreachable!() };
            let flipped = -n.clone();
            if flipped.is_one() {
                args.remove(i);
            } else {
                args[i] = Term::num(flipped);
            }
            Term::times(args)
        }
        other => Term::times(vec![Term::int(-1), other]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(src: &str) -> Term {
        parse_term(src).unwrap()
    }
    fn sy(n: &str) -> Term {
        Term::sym(n)
    }

    #[test]
    fn parses_sums_and_products_with_precedence() {
        assert_eq!(
            p("a + b*c"),
            Term::plus(vec![
                sy("a"),
                Term::times(vec![sy("b"), sy("c")])
            ])
        );
        assert_eq!(
            p("(a + b)*c"),
            Term::times(vec![Term::plus(vec![sy("a"), sy("b")]), sy("c")])
        );
    }

    #[test]
    fn unit_coefficients_survive_parsing() {
        assert_eq!(p("1*x"), Term::times(vec![Term::int(1), sy("x")]));
        assert_eq!(p("0 + x"), Term::plus(vec![Term::int(0), sy("x")]));
        assert_ne!(p("1*x"), sy("x"));
    }

    #[test]
    fn minus_negates_the_numeric_coefficient() {
        assert_eq!(p("-3"), Term::int(-3));
        assert_eq!(p("-x"), Term::times(vec![Term::int(-1), sy("x")]));
        assert_eq!(
            p("-3/2*x"),
            Term::times(vec![Term::rational(-3, 2), sy("x")])
        );
        assert_eq!(
            p("a - b"),
            Term::plus(vec![
                sy("a"),
                Term::times(vec![Term::int(-1), sy("b")])
            ])
        );
        // Double negation of a bare symbol does not leave a coefficient.
        assert_eq!(p("--x"), sy("x"));
    }

    #[test]
    fn division_becomes_negative_powers() {
        assert_eq!(p("3/2"), Term::rational(3, 2));
        assert_eq!(p("1/x"), Term::pow(sy("x"), -1));
        assert_eq!(
            p("a/x"),
            Term::times(vec![sy("a"), Term::pow(sy("x"), -1)])
        );
        assert_eq!(p("1/x^2"), Term::pow(sy("x"), -2));
        assert!(parse_term("x/0").is_err());
    }

    #[test]
    fn exponent_folds() {
        assert_eq!(p("x^1"), sy("x"));
        assert_eq!(p("x^0"), Term::int(1));
        assert_eq!(p("2^3"), Term::int(8));
        assert_eq!(p("2^(-2)"), Term::rational(1, 4));
        assert_eq!(p("(x^2)^3"), Term::pow(sy("x"), 6));
        assert_eq!(p("x^(-2)"), Term::pow(sy("x"), -2));
        assert_eq!(p("1/(1/x)"), sy("x"));
    }

    #[test]
    fn pattern_variables_and_head_variables() {
        assert_eq!(p("x_"), Term::var("x"));
        assert_eq!(
            p("F_(a, b)"),
            Term::apply(Head::Var("F".into()), vec![sy("a"), sy("b")])
        );
    }

    #[test]
    fn oeps_forms() {
        assert_eq!(p("Oeps"), Term::oeps_marker());
        assert_eq!(p("Oeps(4)"), Term::oeps(4));
        assert_eq!(p("Oeps(i_)"), Term::app(OEPS, vec![Term::var("i")]));
        assert!(parse_term("Oeps(x)").is_err());
        assert!(parse_term("Oeps(-1)").is_err());
        assert!(parse_term("Oeps(1, 2)").is_err());
    }

    #[test]
    fn lists_and_applications() {
        assert_eq!(
            p("Integral(Omega, f(x), [dx, dy])"),
            Term::app(
                "Integral",
                vec![
                    sy("Omega"),
                    Term::app("f", vec![sy("x")]),
                    Term::app(LIST, vec![sy("dx"), sy("dy")]),
                ]
            )
        );
    }

    #[test]
    fn parsed_terms_are_canonical() {
        assert_eq!(p("b + a"), p("a + b"));
        assert_eq!(p("x*2"), p("2*x"));
        assert_eq!(p("(a+b)+c"), p("a+(b+c)"));
    }

    #[test]
    fn reports_useful_errors() {
        assert!(parse_term("a +").is_err());
        assert!(parse_term("f(").is_err());
        assert!(parse_term("a b").is_err());
        assert!(parse_term("x^y").is_err());
    }
}
