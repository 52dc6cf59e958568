//! First-order terms with a fixed canonical form.
//!
//! Terms are immutable values: rational constants, pattern variables, and
//! applications of a head symbol to zero or more arguments. Two heads —
//! `plus` and `times` — are associative-commutative (AC). Every public
//! constructor returns a term in canonical form:
//!
//! * AC nodes are flattened (no `plus` argument is itself a `plus`, same for
//!   `times`) and carry at least two arguments;
//! * AC argument lists are sorted by the total order [`Term::cmp`];
//! * rationals are reduced with a positive denominator (the number type
//!   guarantees this).
//!
//! Canonicalization is purely structural: it never folds numbers, drops
//! multiplicative units, or merges powers. Those transformations belong to
//! [`crate::algebra`], so `times(1, x)` and `x` are *distinct* canonical
//! terms.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

/// The head symbol of the n-ary sum node.
pub const PLUS: &str = "plus";
/// The head symbol of the n-ary product node.
pub const TIMES: &str = "times";
/// The head symbol of binary exponentiation with an integer exponent.
pub const POW: &str = "pow";
/// The head symbol of the order-of-epsilon marker application.
pub const OEPS: &str = "Oeps";
/// Distinguished constant standing for a fresh index that has not yet been
/// drawn from a session counter.
pub const FRESH_MARKER: &str = "FreshIndexMarker";
/// Head symbol used to represent `[a, b, c]` sequences (e.g. measure lists).
pub const LIST: &str = "list";
/// Constant standing for the hole of a linearity template (`_` in the
/// surface syntax). Only template positions may contain it.
pub const HOLE: &str = "_";

/// Returns true when `name` is one of the designated AC head symbols.
pub fn is_ac(name: &str) -> bool {
    name == PLUS || name == TIMES
}

/// Head of an application: either a fixed symbol or a pattern variable
/// standing for a symbol of the same arity (`F_(a, b)`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Sym(String),
    Var(String),
}

impl Head {
    pub fn name(&self) -> &str {
        match self {
            Head::Sym(s) | Head::Var(s) => s,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Head::Var(_))
    }
}

impl Ord for Head {
    fn cmp(&self, other: &Self) -> Ordering {
        // Symbol heads sort before variable heads; ties break on the name.
        match (self, other) {
            (Head::Sym(a), Head::Sym(b)) => a.cmp(b),
            (Head::Var(a), Head::Var(b)) => a.cmp(b),
            (Head::Sym(_), Head::Var(_)) => Ordering::Less,
            (Head::Var(_), Head::Sym(_)) => Ordering::Greater,
        }
    }
}

impl PartialOrd for Head {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A term in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    /// Exact rational constant.
    Num(BigRational),
    /// Pattern variable (`x_` in the surface syntax).
    Var(String),
    /// Application `head(args...)`; constants are zero-ary applications.
    App { head: Head, args: Vec<Term> },
}

impl Term {
    // ------------------------------------------------------------------
    // Constructors. All of them return canonical terms provided their
    // arguments are canonical, which every public path guarantees.
    // ------------------------------------------------------------------

    /// Rational constant from a reduced big rational.
    pub fn num(r: BigRational) -> Term {
        Term::Num(r)
    }

    /// Integer constant.
    pub fn int(n: i64) -> Term {
        Term::Num(BigRational::from(BigInt::from(n)))
    }

    /// Exact fraction `n/d`; panics when `d == 0`.
    pub fn rational(n: i64, d: i64) -> Term {
        Term::Num(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Pattern variable.
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    /// Zero-ary application (a plain constant symbol).
    pub fn sym(name: impl Into<String>) -> Term {
        Term::App {
            head: Head::Sym(name.into()),
            args: Vec::new(),
        }
    }

    /// Application of a symbol head; canonicalizes the node when the head is
    /// AC (flattening, sorting, singleton collapse).
    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::apply(Head::Sym(name.into()), args)
    }

    /// Application of an arbitrary head; the general smart constructor.
    pub fn apply(head: Head, args: Vec<Term>) -> Term {
        if let Head::Sym(name) = &head {
            if is_ac(name) {
                return Term::ac(name.clone(), args);
            }
        }
        Term::App { head, args }
    }

    /// n-ary sum in canonical form.
    pub fn plus(args: Vec<Term>) -> Term {
        Term::ac(PLUS.to_string(), args)
    }

    /// n-ary product in canonical form.
    pub fn times(args: Vec<Term>) -> Term {
        Term::ac(TIMES.to_string(), args)
    }

    /// `base ^ exp` with an integer exponent, stored as `pow(base, exp)`.
    pub fn pow(base: Term, exp: i64) -> Term {
        Term::App {
            head: Head::Sym(POW.to_string()),
            args: vec![base, Term::int(exp)],
        }
    }

    /// `Oeps(index)` with a concrete index.
    pub fn oeps(index: u64) -> Term {
        Term::App {
            head: Head::Sym(OEPS.to_string()),
            args: vec![Term::Num(BigRational::from(BigInt::from(index)))],
        }
    }

    /// `Oeps(FreshIndexMarker)`: the form rule right-hand sides carry.
    pub fn oeps_marker() -> Term {
        Term::App {
            head: Head::Sym(OEPS.to_string()),
            args: vec![Term::sym(FRESH_MARKER)],
        }
    }

    fn ac(name: String, args: Vec<Term>) -> Term {
        assert!(!args.is_empty(), "AC node `{name}` must have arguments");
        // Flatten one level: the arguments are canonical themselves, so a
        // nested same-head child cannot contain further same-head children.
        let mut flat = Vec::with_capacity(args.len());
        for a in args {
            match a {
                Term::App { head: Head::Sym(h), args: inner } if h == name => {
                    flat.extend(inner)
                }
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        flat.sort();
        Term::App {
            head: Head::Sym(name),
            args: flat,
        }
    }

    // ------------------------------------------------------------------
    // Observers.
    // ------------------------------------------------------------------

    /// True for `Num`.
    pub fn is_num(&self) -> bool {
        matches!(self, Term::Num(_))
    }

    /// The rational value when the term is a number.
    pub fn as_num(&self) -> Option<&BigRational> {
        match self {
            Term::Num(r) => Some(r),
            _ => None,
        }
    }

    /// True when the term is an application of the given symbol.
    pub fn is_app_of(&self, name: &str) -> bool {
        matches!(self, Term::App { head: Head::Sym(h), .. } if h == name)
    }

    /// Arguments when the term is an application of the given symbol.
    pub fn args_of(&self, name: &str) -> Option<&[Term]> {
        match self {
            Term::App { head: Head::Sym(h), args } if h == name => Some(args),
            _ => None,
        }
    }

    /// Decomposes `pow(base, k)` with an integer exponent that fits `i64`.
    pub fn as_int_pow(&self) -> Option<(&Term, i64)> {
        use num_traits::ToPrimitive;
        let [base, exp] = self.args_of(POW)? else {
            return None;
        };
        let Term::Num(n) = exp else { return None };
        if !n.is_integer() {
            return None;
        }
        Some((base, n.to_integer().to_i64()?))
    }

    /// True for `Oeps(FreshIndexMarker)`.
    pub fn is_oeps_marker(&self) -> bool {
        match self.args_of(OEPS) {
            Some([arg]) => arg.is_app_of(FRESH_MARKER),
            _ => false,
        }
    }

    /// True when any subterm is an `Oeps` application.
    pub fn mentions_oeps(&self) -> bool {
        self.subterms().any(|t| t.is_app_of(OEPS))
    }

    /// True when the term contains no pattern variables (including head
    /// positions).
    pub fn is_closed(&self) -> bool {
        match self {
            Term::Num(_) => true,
            Term::Var(_) => false,
            Term::App { head, args } => {
                !head.is_var() && args.iter().all(Term::is_closed)
            }
        }
    }

    /// Pattern variable names occurring anywhere in the term, in first-seen
    /// order (head variables included).
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Num(_) => {}
                Term::Var(v) => {
                    if !out.iter().any(|x| x == v) {
                        out.push(v.clone());
                    }
                }
                Term::App { head, args } => {
                    if let Head::Var(v) = head {
                        if !out.iter().any(|x| x == v) {
                            out.push(v.clone());
                        }
                    }
                    for a in args {
                        walk(a, out);
                    }
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// Iterator over `self` and all of its subterms, preorder.
    pub fn subterms(&self) -> Subterms<'_> {
        Subterms { stack: vec![self] }
    }

    /// Number of symbol occurrences: every application head, number, and
    /// variable counts as one.
    pub fn symbol_count(&self) -> usize {
        match self {
            Term::Num(_) | Term::Var(_) => 1,
            Term::App { args, .. } => {
                1 + args.iter().map(Term::symbol_count).sum::<usize>()
            }
        }
    }
}

/// Preorder iterator over subterms.
pub struct Subterms<'a> {
    stack: Vec<&'a Term>,
}

impl<'a> Iterator for Subterms<'a> {
    type Item = &'a Term;

    fn next(&mut self) -> Option<&'a Term> {
        let t = self.stack.pop()?;
        if let Term::App { args, .. } = t {
            // Push in reverse so arguments come out left to right.
            for a in args.iter().rev() {
                self.stack.push(a);
            }
        }
        Some(t)
    }
}

impl Ord for Term {
    /// Total order used for AC argument sorting: numbers sort first (by
    /// value), then applications (by head name, then arity, then arguments
    /// lexicographically), then pattern variables (by name). Variables
    /// sorting last makes "the trailing argument of an AC pattern is the
    /// absorbing variable, if any" a property of canonical form.
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(t: &Term) -> u8 {
            match t {
                Term::Num(_) => 0,
                Term::App { .. } => 1,
                Term::Var(_) => 2,
            }
        }
        match (self, other) {
            (Term::Num(a), Term::Num(b)) => a.cmp(b),
            (Term::Var(a), Term::Var(b)) => a.cmp(b),
            (
                Term::App { head: h1, args: a1 },
                Term::App { head: h2, args: a2 },
            ) => h1
                .cmp(h2)
                .then_with(|| a1.len().cmp(&a2.len()))
                .then_with(|| a1.cmp(a2)),
            (a, b) => rank(a).cmp(&rank(b)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::render_term(self))
    }
}

/// Rebuilds an arbitrary well-formed term into canonical form. Idempotent;
/// the identity on terms built through the smart constructors.
pub fn canonicalize(t: &Term) -> Term {
    match t {
        Term::Num(r) => Term::Num(r.clone()),
        Term::Var(v) => Term::Var(v.clone()),
        Term::App { head, args } => {
            let args = args.iter().map(canonicalize).collect();
            Term::apply(head.clone(), args)
        }
    }
}

/// Canonical equality: `canonicalize(a) == canonicalize(b)`.
pub fn equal(a: &Term, b: &Term) -> bool {
    canonicalize(a) == canonicalize(b)
}

/// Equality up to `Oeps` indexes: every `Oeps` argument (concrete index or
/// fresh-index marker) is replaced by `0` on both sides before comparing.
/// This is the equivalence used by proof-script expectations, where the
/// particular fresh indexes drawn during a run are irrelevant.
pub fn equiv_mod_oeps(a: &Term, b: &Term) -> bool {
    fn erase(t: &Term) -> Term {
        match t {
            Term::App { head: Head::Sym(h), .. } if h == OEPS => {
                Term::oeps(0)
            }
            Term::App { head, args } => {
                Term::apply(head.clone(), args.iter().map(erase).collect())
            }
            other => other.clone(),
        }
    }
    erase(&canonicalize(a)) == erase(&canonicalize(b))
}
