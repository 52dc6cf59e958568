//! Exact polynomial algebra on terms: expansion into sums of monomials and
//! collection of like terms.
//!
//! [`expand`] distributes products over sums bottom-up, folds numeric
//! factors and summands, merges integer powers of a common base, and drops
//! multiplicative units. [`simplify`] additionally groups summands that
//! share a non-numeric factor part, summing their coefficients exactly, and
//! is idempotent.
//!
//! Both functions treat `Oeps` applications as opaque atoms: they never
//! rewrite below an `Oeps` head. Two syntactically identical `Oeps` atoms
//! still collect like any other factor (`Oeps(1) + Oeps(1)` becomes
//! `2*Oeps(1)`), while distinct indexes stay apart — merging *those* is the
//! business of the convergence rules, which must spend a fresh index to do
//! it.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::term::{Head, Term, OEPS, PLUS, TIMES};

/// Distributes products over sums and normalizes numeric content. The
/// result is a sum of monomials wherever distribution can reach; atoms the
/// algebra cannot see through (applications, reciprocals of sums) are left
/// in place with their arguments expanded.
pub fn expand(t: &Term) -> Term {
    match t {
        Term::Num(_) | Term::Var(_) => t.clone(),
        Term::App { head, args } => {
            if t.is_app_of(OEPS) {
                return t.clone();
            }
            let args: Vec<Term> = args.iter().map(expand).collect();
            match head {
                Head::Sym(h) if h.as_str() == TIMES => expand_product(&args),
                Head::Sym(h) if h.as_str() == PLUS => expand_sum(args),
                _ => {
                    let rebuilt = Term::apply(head.clone(), args);
                    if let Some((base, k)) = rebuilt.as_int_pow() {
                        let base = base.clone();
                        return expand_pow(base, k);
                    }
                    rebuilt
                }
            }
        }
    }
}

/// Expansion followed by like-term collection at every sum node. The
/// canonical non-numeric factor part of each monomial keys the grouping, so
/// `x*y + 2*y*x` becomes `3*x*y` and cancellation yields an exact `0`.
///
/// The pass pair runs to a fixed point: collection can collapse a sum
/// sitting in a position expansion treats as opaque — say the base of a
/// reciprocal, `(-w + -w)^(-2)` — into a product or number that the next
/// expansion folds further. Each round resolves such a position for good,
/// so the loop settles after very few rounds (one, for terms already in
/// normal form).
pub fn simplify(t: &Term) -> Term {
    let mut cur = collect(&expand(t));
    loop {
        let next = collect(&expand(&cur));
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn collect(t: &Term) -> Term {
    match t {
        Term::Num(_) | Term::Var(_) => t.clone(),
        Term::App { head, args } => {
            if t.is_app_of(OEPS) {
                return t.clone();
            }
            let args: Vec<Term> = args.iter().map(collect).collect();
            if matches!(head, Head::Sym(h) if h.as_str() == PLUS) {
                collect_sum(args)
            } else {
                Term::apply(head.clone(), args)
            }
        }
    }
}

/// Splits a monomial into its rational coefficient and remaining factors.
fn coefficient_split(t: &Term) -> (BigRational, Vec<Term>) {
    match t {
        Term::Num(n) => (n.clone(), Vec::new()),
        Term::App { head: Head::Sym(h), args } if h.as_str() == TIMES => {
            let mut coeff = BigRational::one();
            let mut rest = Vec::new();
            for a in args {
                match a {
                    Term::Num(n) => coeff *= n,
                    other => rest.push(other.clone()),
                }
            }
            (coeff, rest)
        }
        other => (BigRational::one(), vec![other.clone()]),
    }
}

fn collect_sum(args: Vec<Term>) -> Term {
    let mut constant = BigRational::zero();
    // Keyed by the factor part; BTreeMap gives a stable grouping order and
    // the AC constructor re-sorts the rebuilt summands anyway.
    let mut groups: BTreeMap<Vec<Term>, BigRational> = BTreeMap::new();
    for a in &args {
        let (coeff, factors) = coefficient_split(a);
        if factors.is_empty() {
            constant += coeff;
        } else {
            *groups.entry(factors).or_insert_with(BigRational::zero) +=
                coeff;
        }
    }
    let mut summands = Vec::new();
    for (factors, coeff) in groups {
        if coeff.is_zero() {
            continue;
        }
        summands.push(monomial(coeff, factors));
    }
    if !constant.is_zero() {
        summands.push(Term::num(constant));
    }
    match summands.len() {
        0 => Term::int(0),
        1 => summands.pop().unwrap(),
        _ => Term::plus(summands),
    }
}

/// `coeff * factors` without unit factors.
fn monomial(coeff: BigRational, mut factors: Vec<Term>) -> Term {
    if factors.is_empty() {
        return Term::num(coeff);
    }
    if !coeff.is_one() {
        factors.push(Term::num(coeff));
    }
    match factors.len() {
        1 => factors.pop().unwrap(),
        _ => Term::times(factors),
    }
}

fn expand_sum(args: Vec<Term>) -> Term {
    // Arguments are expanded; flatten nested sums and fold the numbers.
    let mut constant = BigRational::zero();
    let mut rest = Vec::new();
    for a in args {
        match a {
            Term::Num(n) => constant += n,
            Term::App { head: Head::Sym(h), args: inner }
                if h.as_str() == PLUS =>
            {
                for x in inner {
                    match x {
                        Term::Num(n) => constant += n,
                        other => rest.push(other),
                    }
                }
            }
            other => rest.push(other),
        }
    }
    if !constant.is_zero() {
        rest.push(Term::num(constant));
    }
    match rest.len() {
        0 => Term::int(0),
        1 => rest.pop().unwrap(),
        _ => Term::plus(rest),
    }
}

/// A monomial under construction: exact coefficient times a power product.
struct Monomial {
    coeff: BigRational,
    powers: BTreeMap<Term, i64>,
}

impl Monomial {
    fn new() -> Self {
        Monomial { coeff: BigRational::one(), powers: BTreeMap::new() }
    }

    /// Multiplies `t^e` into the monomial, decomposing numbers, products,
    /// and integer powers.
    fn mul(&mut self, t: &Term, e: i64) {
        if self.coeff.is_zero() {
            return;
        }
        if let Term::Num(n) = t {
            if e >= 0 || !n.is_zero() {
                self.coeff *= rational_int_pow(n, e);
                return;
            }
            // A reciprocal of zero has no value to fold; keep it symbolic.
            let entry = self.powers.entry(t.clone()).or_insert(0);
            *entry = entry.checked_add(e).expect("exponent overflow");
            return;
        }
        if let Some(args) = t.args_of(TIMES) {
            for a in args {
                self.mul(a, e);
            }
            return;
        }
        if let Some((base, k)) = t.as_int_pow() {
            let base = base.clone();
            self.mul(&base, k.checked_mul(e).expect("exponent overflow"));
            return;
        }
        let entry = self.powers.entry(t.clone()).or_insert(0);
        *entry = entry.checked_add(e).expect("exponent overflow");
    }

    fn build(self) -> Term {
        if self.coeff.is_zero() {
            return Term::int(0);
        }
        let mut factors = Vec::new();
        for (base, k) in self.powers {
            match k {
                0 => {}
                1 => factors.push(base),
                _ => factors.push(Term::pow(base, k)),
            }
        }
        monomial(self.coeff, factors)
    }
}

/// `n^e` for a nonzero exponent; `n` must be nonzero when `e < 0`, which
/// expansion preserves (it never invents reciprocals of values that were
/// not already inverted).
fn rational_int_pow(n: &BigRational, e: i64) -> BigRational {
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

fn expand_product(args: &[Term]) -> Term {
    // Cartesian distribution over every sum argument. Each combination
    // multiplies into a monomial; the monomials then sum.
    let choice_lists: Vec<&[Term]> = args
        .iter()
        .map(|a| match a.args_of(PLUS) {
            Some(parts) => parts,
            None => std::slice::from_ref(a),
        })
        .collect();
    let mut summands = Vec::new();
    let mut picks = vec![0usize; choice_lists.len()];
    loop {
        let mut mono = Monomial::new();
        for (list, &i) in choice_lists.iter().zip(&picks) {
            mono.mul(&list[i], 1);
        }
        summands.push(mono.build());
        // Advance the odometer.
        let mut pos = picks.len();
        loop {
            if pos == 0 {
                return expand_sum(summands);
            }
            pos -= 1;
            picks[pos] += 1;
            if picks[pos] < choice_lists[pos].len() {
                break;
            }
            picks[pos] = 0;
        }
    }
}

/// Powers of sums beyond this exponent stay unexpanded; distributing them
/// would blow up the term for no practical gain.
const SUM_POW_LIMIT: i64 = 16;

fn expand_pow(base: Term, k: i64) -> Term {
    if k == 0 {
        return Term::int(1);
    }
    if k == 1 {
        return base;
    }
    if let Term::Num(n) = &base {
        if k >= 0 || !n.is_zero() {
            return Term::num(rational_int_pow(n, k));
        }
        return Term::pow(base, k);
    }
    if let Some((inner, j)) = base.as_int_pow() {
        let inner = inner.clone();
        return expand_pow(inner, j.checked_mul(k).expect("exponent overflow"));
    }
    if base.is_app_of(PLUS) {
        if (2..=SUM_POW_LIMIT).contains(&k) {
            // base^k as a k-fold product, distributed by the cartesian
            // machinery.
            let copies = vec![base.clone(); k as usize];
            return expand_product(&copies);
        }
        // Reciprocals (and absurdly large powers) of sums stay opaque.
        return Term::pow(base, k);
    }
    // Products distribute the exponent over their factors; atoms keep it.
    let mut mono = Monomial::new();
    mono.mul(&base, k);
    mono.build()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    use super::*;
    use crate::dsl::parse_term;
    use crate::term::POW;

    // ----------------------------------------------------------------
    // Oracle: exact numeric evaluation of polynomial terms. Written
    // against the term model alone so it cannot share bugs with the
    // algebra under test.
    // ----------------------------------------------------------------

    /// Evaluates closed polynomial terms over `plus`/`times`/`pow` with
    /// constants assigned by `env`. Returns `None` on division by zero or
    /// any head outside the polynomial fragment.
    fn eval(t: &Term, env: &BTreeMap<String, BigRational>) -> Option<BigRational> {
        match t {
            Term::Num(n) => Some(n.clone()),
            Term::Var(_) => None,
            Term::App { head: Head::Sym(h), args } => match h.as_str() {
                PLUS => {
                    let mut acc = BigRational::zero();
                    for a in args {
                        acc += eval(a, env)?;
                    }
                    Some(acc)
                }
                TIMES => {
                    let mut acc = BigRational::one();
                    for a in args {
                        acc *= eval(a, env)?;
                    }
                    Some(acc)
                }
                POW => {
                    let (base, k) = t.as_int_pow()?;
                    let b = eval(base, env)?;
                    if b.is_zero() && k < 0 {
                        return None;
                    }
                    Some(rational_int_pow(&b, k))
                }
                name if args.is_empty() => env.get(name).cloned(),
                _ => None,
            },
            Term::App { .. } => None,
        }
    }

    fn p(src: &str) -> Term {
        parse_term(src).unwrap()
    }

    #[test]
    fn expands_products_over_sums() {
        assert_eq!(p("(a + b)*(c + d)"), p("(a + b)*(c + d)"));
        assert_eq!(
            expand(&p("(a + b)*(c + d)")),
            p("a*c + a*d + b*c + b*d")
        );
        // Expansion leaves duplicate monomials for `simplify` to merge.
        assert_eq!(expand(&p("(a + b)^2")), p("a^2 + a*b + a*b + b^2"));
        assert_eq!(simplify(&p("(a + b)^2")), p("a^2 + 2*a*b + b^2"));
    }

    #[test]
    fn folds_numbers_and_units() {
        assert_eq!(expand(&p("1*x")), p("x"));
        assert_eq!(expand(&p("0 + x")), p("x"));
        assert_eq!(expand(&p("0*x")), Term::int(0));
        assert_eq!(expand(&p("2*3*x")), p("6*x"));
        assert_eq!(expand(&p("2 + 3 + x")), p("5 + x"));
    }

    #[test]
    fn merges_powers_of_a_common_base() {
        assert_eq!(expand(&p("epsilon*epsilon^(-1)*x")), p("x"));
        assert_eq!(expand(&p("epsilon^2*epsilon^(-1)")), p("epsilon"));
        assert_eq!(expand(&p("x^2*x^3")), p("x^5"));
        assert_eq!(expand(&p("(x*y)^(-2)")), p("x^(-2)*y^(-2)"));
    }

    #[test]
    fn expansion_reaches_argument_positions() {
        assert_eq!(
            expand(&p("Integral(Omega, (a + b)*c, [dx])")),
            p("Integral(Omega, a*c + b*c, [dx])")
        );
    }

    #[test]
    fn simplify_collects_like_terms() {
        assert_eq!(simplify(&p("x*y + 2*y*x")), p("3*x*y"));
        assert_eq!(simplify(&p("x - x")), Term::int(0));
        assert_eq!(simplify(&p("2*x + 3*x - 5*x")), Term::int(0));
        assert_eq!(
            simplify(&p("(a + b)^2 - a^2 - 2*a*b")),
            p("b^2")
        );
    }

    #[test]
    fn simplify_normalizes_inside_applications() {
        // Keys must normalize recursively for the outer collection to see
        // them as equal.
        assert_eq!(
            simplify(&p("Integral(D, u + u, [m]) + Integral(D, 2*u, [m])")),
            p("2*Integral(D, 2*u, [m])")
        );
    }

    #[test]
    fn oeps_atoms_collect_only_when_identical() {
        assert_eq!(simplify(&p("Oeps(1) + Oeps(1)")), p("2*Oeps(1)"));
        let distinct = simplify(&p("Oeps(1) + Oeps(2)"));
        assert_eq!(distinct, p("Oeps(1) + Oeps(2)"));
        // Cancellation with opposite signs is exact.
        assert_eq!(simplify(&p("Oeps(1) - Oeps(1)")), Term::int(0));
        // Expansion does not look below the Oeps head.
        assert_eq!(expand(&p("2*Oeps(7)")), p("2*Oeps(7)"));
    }

    #[test]
    fn epsilon_cancellation_across_scalars() {
        assert_eq!(
            simplify(&p("epsilon*(1/epsilon)*B(w) - B(w)")),
            Term::int(0)
        );
    }

    #[test]
    fn simplify_settles_collapsed_reciprocal_bases() {
        // Expansion keeps the reciprocal of a sum opaque; collection then
        // collapses the base to -2*w, which the next round must fold into
        // the coefficient for the result to be a fixed point.
        let t = Term::pow(
            Term::times(vec![
                Term::int(-1),
                Term::plus(vec![Term::sym("w"), Term::sym("w")]),
            ]),
            -2,
        );
        let once = simplify(&t);
        assert_eq!(once, p("1/4 * w^(-2)"));
        assert_eq!(simplify(&once), once);
    }

    // ----------------------------------------------------------------
    // Properties against the oracle.
    // ----------------------------------------------------------------

    fn rational_strategy() -> impl Strategy<Value = BigRational> {
        (-9i64..=9, 1i64..=4).prop_filter_map("nonzero", |(n, d)| {
            if n == 0 {
                None
            } else {
                Some(BigRational::new(n.into(), d.into()))
            }
        })
    }

    /// Closed polynomial terms over four constants.
    fn term_strategy() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (-6i64..=6).prop_map(Term::int),
            (1i64..=6, 1i64..=3).prop_map(|(n, d)| Term::rational(n, d)),
            prop_oneof![
                Just(Term::sym("x")),
                Just(Term::sym("y")),
                Just(Term::sym("z")),
                Just(Term::sym("w")),
            ],
        ];
        leaf.prop_recursive(4, 48, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4)
                    .prop_map(Term::plus),
                prop::collection::vec(inner.clone(), 2..4)
                    .prop_map(Term::times),
                (inner, prop_oneof![-2i64..=-1, 2i64..=3])
                    .prop_map(|(b, e)| Term::pow(b, e)),
            ]
        })
    }

    fn env_strategy() -> impl Strategy<Value = BTreeMap<String, BigRational>> {
        (
            rational_strategy(),
            rational_strategy(),
            rational_strategy(),
            rational_strategy(),
        )
            .prop_map(|(x, y, z, w)| {
                let mut env = BTreeMap::new();
                env.insert("x".to_string(), x);
                env.insert("y".to_string(), y);
                env.insert("z".to_string(), z);
                env.insert("w".to_string(), w);
                env
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn expand_preserves_value(t in term_strategy(), env in env_strategy()) {
            if let Some(v) = eval(&t, &env) {
                prop_assert_eq!(eval(&expand(&t), &env), Some(v));
            }
        }

        #[test]
        fn simplify_preserves_value(t in term_strategy(), env in env_strategy()) {
            if let Some(v) = eval(&t, &env) {
                prop_assert_eq!(eval(&simplify(&t), &env), Some(v));
            }
        }

        #[test]
        fn simplify_is_idempotent(t in term_strategy()) {
            let once = simplify(&t);
            prop_assert_eq!(simplify(&once), once.clone());
        }

        #[test]
        fn subtraction_of_self_is_zero(t in term_strategy()) {
            let negated = Term::times(vec![Term::int(-1), t.clone()]);
            let diff = Term::plus(vec![t, negated]);
            prop_assert_eq!(simplify(&diff), Term::int(0));
        }
    }

    #[test]
    fn oracle_sanity() {
        let mut env = BTreeMap::new();
        env.insert("x".to_string(), BigRational::from_integer(3.into()));
        let v = eval(&p("x^2 + 1"), &env).unwrap();
        assert_eq!(v.to_integer().to_i64(), Some(10));
        assert_eq!(eval(&p("(0*x)^(-1)"), &env), None);
    }
}
