//! Term rendering. Printing a canonical term and parsing it back yields the
//! same term, provided the term avoids shapes the parser folds away (numeric
//! power bases, nested powers, exponents `0`/`1`).

use num_rational::BigRational;
use num_traits::Signed;

use crate::term::{Head, Term, FRESH_MARKER, LIST, OEPS, PLUS, POW, TIMES};

/// Context precedence: how tightly the surrounding syntax binds. A term
/// whose own operator binds less tightly than the context gets parentheses.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Product,
    Atom,
}

/// Renders `t` in the surface syntax.
pub fn render_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, Prec::Sum);
    out
}

fn write_term(out: &mut String, t: &Term, ctx: Prec) {
    match t {
        Term::Num(n) => write_num(out, n, ctx),
        Term::Var(x) => {
            out.push_str(x);
            out.push('_');
        }
        Term::App { head, args } => write_app(out, head, args, ctx),
    }
}

fn write_num(out: &mut String, n: &BigRational, ctx: Prec) {
    // A negative or fractional number is not a single token; protect it in
    // atom position (a power base).
    let parens = ctx == Prec::Atom && (n.is_negative() || !n.is_integer());
    if parens {
        out.push('(');
    }
    out.push_str(&n.to_string());
    if parens {
        out.push(')');
    }
}

fn write_app(out: &mut String, head: &Head, args: &[Term], ctx: Prec) {
    match head {
        Head::Sym(name) if name == PLUS => {
            let parens = ctx > Prec::Sum;
            if parens {
                out.push('(');
            }
            write_sum(out, args);
            if parens {
                out.push(')');
            }
        }
        Head::Sym(name) if name == TIMES => {
            let parens = ctx > Prec::Product;
            if parens {
                out.push('(');
            }
            write_product(out, args);
            if parens {
                out.push(')');
            }
        }
        Head::Sym(name) if name == POW && args.len() == 2 => {
            let parens = ctx == Prec::Atom;
            if parens {
                out.push('(');
            }
            write_pow(out, &args[0], &args[1]);
            if parens {
                out.push(')');
            }
        }
        Head::Sym(name) if name == OEPS && args.len() == 1 => {
            if args[0].is_app_of(FRESH_MARKER) {
                out.push_str(OEPS);
            } else {
                out.push_str(OEPS);
                out.push('(');
                write_term(out, &args[0], Prec::Sum);
                out.push(')');
            }
        }
        Head::Sym(name) if name == LIST => {
            out.push('[');
            write_args(out, args);
            out.push(']');
        }
        _ => {
            out.push_str(head.name());
            if head.is_var() {
                out.push('_');
            }
            if !args.is_empty() {
                out.push('(');
                write_args(out, args);
                out.push(')');
            }
        }
    }
}

fn write_args(out: &mut String, args: &[Term]) {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(out, a, Prec::Sum);
    }
}

fn write_sum(out: &mut String, args: &[Term]) {
    write_term(out, &args[0], Prec::Product);
    for a in &args[1..] {
        match negated_summand(a) {
            Some(pos) => {
                out.push_str(" - ");
                write_term(out, &pos, Prec::Product);
            }
            None => {
                out.push_str(" + ");
                write_term(out, a, Prec::Product);
            }
        }
    }
}

/// If `-t` prints and reparses back to `t`, returns `-t`; the sum printer
/// then renders the summand as a subtraction. Products qualify only when
/// their sole numeric factor is negative — with several numeric factors the
/// reparse would negate a different one.
fn negated_summand(t: &Term) -> Option<Term> {
    match t {
        Term::Num(n) if n.is_negative() => Some(Term::num(-n.clone())),
        Term::App { head: Head::Sym(h), args } if h.as_str() == TIMES => {
            let mut nums = args.iter().filter(|a| a.is_num());
            let first = nums.next()?;
            if nums.next().is_some() {
                return None;
            }
            let Term::Num(n) = first else { unreachable!() };
            if !n.is_negative() {
                return None;
            }
            Some(super::parse::smart_negate(t.clone()))
        }
        _ => None,
    }
}

fn write_product(out: &mut String, args: &[Term]) {
    // `-1 * rest` prints as `-rest` unless the next factor is numeric, in
    // which case the reparse would fold the sign into it.
    let mut rest = args;
    if args[0] == Term::int(-1) && args.len() > 1 && !args[1].is_num() {
        out.push('-');
        rest = &args[1..];
    }
    for (i, f) in rest.iter().enumerate() {
        if i > 0 {
            out.push('*');
        }
        // A fractional literal after `*` would reparse as a division of the
        // whole prefix; parentheses keep it a single number.
        let guard = i > 0 && matches!(f, Term::Num(n) if !n.is_integer());
        if guard {
            out.push('(');
        }
        write_term(out, f, Prec::Product);
        if guard {
            out.push(')');
        }
    }
}

fn write_pow(out: &mut String, base: &Term, exp: &Term) {
    write_term(out, base, Prec::Atom);
    out.push('^');
    match exp {
        Term::Num(n) if n.is_integer() && !n.is_negative() => {
            out.push_str(&n.to_string());
        }
        _ => {
            out.push('(');
            write_term(out, exp, Prec::Sum);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_term;

    fn sy(n: &str) -> Term {
        Term::sym(n)
    }

    fn roundtrips(t: &Term) {
        let text = render_term(t);
        let back = parse_term(&text)
            .unwrap_or_else(|e| panic!("reparse of `{text}` failed: {e}"));
        assert_eq!(&back, t, "`{text}` reparsed differently");
    }

    #[test]
    fn renders_infix_operators() {
        assert_eq!(
            render_term(&Term::plus(vec![
                sy("a"),
                Term::times(vec![Term::int(2), sy("b")])
            ])),
            "a + 2*b"
        );
        // Canonical order puts the constant before the sum.
        assert_eq!(
            render_term(&Term::times(vec![
                Term::plus(vec![sy("a"), sy("b")]),
                sy("c")
            ])),
            "c*(a + b)"
        );
    }

    #[test]
    fn renders_negative_coefficients_as_subtraction() {
        let t = Term::plus(vec![
            sy("a"),
            Term::times(vec![Term::int(-1), sy("b")]),
        ]);
        assert_eq!(render_term(&t), "a - b");
        roundtrips(&t);
    }

    #[test]
    fn leading_minus_one_requires_nonnumeric_follower() {
        let t = Term::times(vec![Term::int(-1), Term::rational(3, 2), sy("x")]);
        assert_eq!(render_term(&t), "-1*(3/2)*x");
        roundtrips(&t);
        let u = Term::times(vec![Term::int(-1), sy("x")]);
        assert_eq!(render_term(&u), "-x");
        roundtrips(&u);
    }

    #[test]
    fn renders_powers_with_guarded_exponents() {
        let t = Term::pow(sy("epsilon"), -1);
        assert_eq!(render_term(&t), "epsilon^(-1)");
        roundtrips(&t);
        let u = Term::pow(Term::plus(vec![sy("a"), sy("b")]), 2);
        assert_eq!(render_term(&u), "(a + b)^2");
        roundtrips(&u);
    }

    #[test]
    fn renders_oeps_marker_and_indexed() {
        assert_eq!(render_term(&Term::oeps_marker()), "Oeps");
        assert_eq!(render_term(&Term::oeps(3)), "Oeps(3)");
        roundtrips(&Term::oeps_marker());
        roundtrips(&Term::oeps(3));
    }

    #[test]
    fn renders_lists_and_pattern_variables() {
        let t = Term::app(
            "Integral",
            vec![
                sy("Omega"),
                Term::var("u"),
                Term::app(LIST, vec![sy("dx")]),
            ],
        );
        assert_eq!(render_term(&t), "Integral(Omega, u_, [dx])");
        roundtrips(&t);
    }

    #[test]
    fn tricky_shapes_roundtrip() {
        for text in [
            "1*x",
            "0 + x",
            "-1*3*x",
            "-3*-2*x",
            "a - 3/2*b",
            "x^(-1)*y",
            "f(a + b, [m])",
            "F_(x_)",
            "-x - y",
            "2*2*x",
        ] {
            let t = parse_term(text).unwrap();
            roundtrips(&t);
        }
    }
}
