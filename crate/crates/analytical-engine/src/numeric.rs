//! Arbitrary-precision exact rationals and the handful of integer helpers
//! the rest of the crate needs.
//!
//! Everything the engine touches is a [`Rational`] in canonical form:
//! denominator positive, gcd(|numerator|, denominator) = 1, zero stored as
//! 0/1. There is deliberately no floating point anywhere; the historical
//! results this crate reproduces (31-digit integers, fractions like -1/30)
//! only survive exact arithmetic.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
}

/// An exact signed rational in canonical form.
///
/// The inner `BigRational` already maintains the canonical-form invariants
/// (reduced, positive denominator) on every construction and operation; this
/// wrapper owns the textual rendering contract and the error-returning
/// division the mill needs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn numerator(&self) -> BigInt {
        self.0.numer().clone()
    }

    pub fn denominator(&self) -> BigInt {
        self.0.denom().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The value as an integer, when the denominator is 1.
    pub fn to_bigint(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.numer().clone())
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, NumericError> {
        if rhs.is_zero() {
            return Err(NumericError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }
}

/// Builds `p/q` in canonical form; the sign ends up on the numerator.
pub fn make_rational(
    p: impl Into<BigInt>,
    q: impl Into<BigInt>,
) -> Result<Rational, NumericError> {
    let q = q.into();
    if q.is_zero() {
        return Err(NumericError::ZeroDenominator);
    }
    Ok(Rational(BigRational::new(p.into(), q)))
}

/// The mill's four elemental operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    /// Keyword used by the deck text format.
    pub fn keyword(self) -> &'static str {
        match self {
            ArithOp::Add => "ADD",
            ArithOp::Sub => "SUB",
            ArithOp::Mul => "MUL",
            ArithOp::Div => "DIV",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ArithOp> {
        match word {
            "ADD" => Some(ArithOp::Add),
            "SUB" => Some(ArithOp::Sub),
            "MUL" => Some(ArithOp::Mul),
            "DIV" => Some(ArithOp::Div),
            _ => None,
        }
    }

    /// Symbol used by the trace's "Nature of Operation" column.
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "\u{2212}",
            ArithOp::Mul => "\u{00d7}",
            ArithOp::Div => "\u{00f7}",
        }
    }
}

/// Applies one elemental operation exactly.
pub fn rat_arith(op: ArithOp, a: &Rational, b: &Rational) -> Result<Rational, NumericError> {
    match op {
        ArithOp::Add => Ok(Rational(&a.0 + &b.0)),
        ArithOp::Sub => Ok(Rational(&a.0 - &b.0)),
        ArithOp::Mul => Ok(Rational(&a.0 * &b.0)),
        ArithOp::Div => a.checked_div(b),
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }

        impl std::ops::$trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// Renders as `[-]p/q`, with `/q` omitted when the denominator is 1:
/// `-1/30`, `5/66`, `41`. This form is bit-stable; traces, deck files and
/// the CLI all rely on it.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = NumericError;

    /// Accepts exactly the grammar `[-]digits[/digits]`; the input need not
    /// be reduced (2/4 parses to 1/2) but a zero denominator is an error.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p, q),
            None => (s, "1"),
        };
        let p_ok = {
            let digits = p.strip_prefix('-').unwrap_or(p);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        let q_ok = !q.is_empty() && q.bytes().all(|b| b.is_ascii_digit());
        if !p_ok || !q_ok {
            // Reuse ZeroDenominator only for an actual 0 denominator; any
            // other malformation is reported by the caller with its own
            // context, so a bare parse failure maps to the closest variant.
            return Err(NumericError::ZeroDenominator);
        }
        let p: BigInt = p.parse().expect("digit-checked numerator");
        let q: BigInt = q.parse().expect("digit-checked denominator");
        make_rational(p, q)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|_| {
            de::Error::invalid_value(de::Unexpected::Str(&s), &"a rational like -1/30")
        })
    }
}

/// Exact binomial coefficient C(n, k); 0 when k > n.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num::integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// A binomial coefficient kept together with its arguments, for tables that
/// want to show where a coefficient came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialCoefficient {
    pub n: u64,
    pub k: u64,
    pub value: BigInt,
}

impl BinomialCoefficient {
    pub fn new(n: u64, k: u64) -> Self {
        BinomialCoefficient {
            n,
            k,
            value: binomial(n, k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> Rational {
        make_rational(p, q).unwrap()
    }

    #[test]
    fn make_rational_reduces() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(2, 4).to_string(), "1/2");
    }

    #[test]
    fn make_rational_canonical_zero() {
        let z = rat(0, 5);
        assert_eq!(z.numerator(), BigInt::from(0));
        assert_eq!(z.denominator(), BigInt::from(1));
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn make_rational_sign_on_numerator() {
        let r = rat(1, -3);
        assert_eq!(r.numerator(), BigInt::from(-1));
        assert_eq!(r.denominator(), BigInt::from(3));
        assert_eq!(r.to_string(), "-1/3");
    }

    #[test]
    fn make_rational_rejects_zero_denominator() {
        assert_eq!(make_rational(1, 0), Err(NumericError::ZeroDenominator));
    }

    #[test]
    fn arith_add_common_denominator() {
        // 1/6 - 1/30 = 5/30 - 1/30 = 4/30; adding the negated term instead:
        let sum = rat_arith(ArithOp::Add, &rat(1, 6), &rat(-1, 30)).unwrap();
        assert_eq!(sum, rat(2, 15));
    }

    #[test]
    fn arith_mul_demorgan_scaling() {
        // The brace sum of the n=7 worked example is 17/16; scaled by -8/255
        // it must land exactly on -1/30.
        let prod = rat_arith(ArithOp::Mul, &rat(-8, 255), &rat(17, 16)).unwrap();
        assert_eq!(prod, rat(-1, 30));
    }

    #[test]
    fn arith_div_by_zero() {
        let err = rat_arith(ArithOp::Div, &rat(1, 2), &Rational::zero());
        assert_eq!(err, Err(NumericError::DivisionByZero));
    }

    #[test]
    fn display_omits_unit_denominator() {
        assert_eq!(rat(41, 1).to_string(), "41");
        assert_eq!(rat(-30, 1).to_string(), "-30");
        assert_eq!(rat(5, 66).to_string(), "5/66");
        assert_eq!(rat(-1, 30).to_string(), "-1/30");
    }

    #[test]
    fn parse_strict_grammar() {
        assert_eq!("41".parse::<Rational>().unwrap(), rat(41, 1));
        assert_eq!("-1/30".parse::<Rational>().unwrap(), rat(-1, 30));
        assert_eq!("2/4".parse::<Rational>().unwrap(), rat(1, 2));
        for bad in ["", "-", "1/", "/3", "1/-3", "1.5", "+2", " 1", "1 "] {
            assert!(bad.parse::<Rational>().is_err(), "accepted {bad:?}");
        }
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn binomial_spot_values() {
        assert_eq!(binomial(11, 2), BigInt::from(55));
        assert_eq!(binomial(11, 4), BigInt::from(330));
        assert_eq!(binomial(7, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
        let c = BinomialCoefficient::new(11, 4);
        assert_eq!((c.n, c.k), (11, 4));
        assert_eq!(c.value, BigInt::from(330));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..1000).prop_map(|(p, q)| rat(p, q))
    }

    proptest! {
        #[test]
        fn add_is_associative(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn mul_distributes_over_add(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn sub_self_is_zero(a in arb_rational()) {
            prop_assert_eq!(&a - &a, Rational::zero());
        }

        #[test]
        fn div_then_mul_cancels(a in arb_rational(), b in arb_rational()) {
            prop_assume!(!b.is_zero());
            let q = a.checked_div(&b).unwrap();
            prop_assert_eq!(&q * &b, a);
        }

        #[test]
        fn canonical_form_is_fixpoint(a in arb_rational()) {
            let again = make_rational(a.numerator(), a.denominator()).unwrap();
            prop_assert_eq!(again.numerator(), a.numerator());
            prop_assert_eq!(again.denominator(), a.denominator());
        }

        #[test]
        fn display_parse_round_trip(a in arb_rational()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
        }

        #[test]
        fn pascal_rule(n in 1u64..=40, k in 1u64..=40) {
            prop_assume!(k <= n);
            prop_assert_eq!(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k));
        }
    }
}
