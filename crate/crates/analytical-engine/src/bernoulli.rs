//! Independent oracles for Bernoulli numbers and their applications.
//!
//! Four routes to the same values, sharing no code path beyond basic
//! arithmetic: the definitional recurrence over binomial coefficients
//! ([`bernoulli_modern`]), the general-form recurrence the Note G program
//! mechanizes ([`eq8_next`]), De Morgan's direct finite-difference formula
//! ([`demorgan_bernoulli`]), and the formal reciprocal of the exponential
//! generating function ([`egf_coefficients`]). Agreement across all four is
//! what the rest of the crate treats as ground truth. [`faulhaber_sum`]
//! applies the numbers to sums of powers.

use std::sync::Mutex;

use num::bigint::BigInt;
use num::traits::{One, Zero};
use thiserror::Error;

use crate::numeric::{binomial, make_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BernoulliError {
    #[error("index {index} is not valid under the {convention:?} convention")]
    InvalidIndex {
        convention: BernoulliConvention,
        index: i64,
    },
    #[error("expected {expected} preceding values for n = {n}, got {got}")]
    ArityMismatch { n: u64, expected: u64, got: usize },
    #[error("Faulhaber sum for p = {p}, x = {x} came out non-integer: {value}")]
    NonIntegerResult { p: u32, x: u64, value: Rational },
}

/// Index and sign conventions for Bernoulli numbers.
///
/// `ModernEven` is the canonical internal convention (B1 = -1/2, odd indices
/// >= 3 vanish). `SumOfPowers` differs only at index 1 (B1 = +1/2), the form
/// the Faulhaber coefficients use. `LovelaceOdd` is the 1843 numbering: odd
/// index 2k-1 names what is now B_{2k}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BernoulliConvention {
    ModernEven,
    SumOfPowers,
    LovelaceOdd,
}

static MODERN_MEMO: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// B_m under the modern convention, by the definitional recurrence
/// sum_{j=0..m} C(m+1, j) B_j = 0 solved for B_m.
///
/// Values are memoized process-wide; the table only ever grows, and every
/// entry is computed from the entries before it, so concurrent callers see a
/// single consistent sequence.
pub fn bernoulli_modern(m: u64) -> Rational {
    let mut memo = MODERN_MEMO.lock().expect("memo poisoned");
    while memo.len() <= m as usize {
        let next = memo.len() as u64;
        let value = if next == 0 {
            Rational::one()
        } else {
            let mut acc = Rational::zero();
            for (j, b) in memo.iter().enumerate() {
                let c = make_rational(binomial(next + 1, j as u64), 1).unwrap();
                acc = &acc + &(&c * b);
            }
            let divisor = Rational::from_integer(BigInt::from(next + 1));
            (&Rational::zero() - &acc).checked_div(&divisor).unwrap()
        };
        memo.push(value);
    }
    memo[m as usize].clone()
}

/// The Bernoulli number named `index` under the given convention.
pub fn bernoulli(conv: BernoulliConvention, index: i64) -> Result<Rational, BernoulliError> {
    let invalid = || BernoulliError::InvalidIndex {
        convention: conv,
        index,
    };
    match conv {
        BernoulliConvention::ModernEven => {
            if index < 0 {
                return Err(invalid());
            }
            Ok(bernoulli_modern(index as u64))
        }
        BernoulliConvention::SumOfPowers => {
            if index < 0 {
                return Err(invalid());
            }
            if index == 1 {
                return Ok(make_rational(1, 2).unwrap());
            }
            Ok(bernoulli_modern(index as u64))
        }
        BernoulliConvention::LovelaceOdd => {
            if index < 1 || index % 2 == 0 {
                return Err(invalid());
            }
            // B_{2k-1} in the 1843 numbering is the modern B_{2k}.
            Ok(bernoulli_modern(index as u64 + 1))
        }
    }
}

/// One cycle of the general-form recurrence: given the Lovelace-numbered
/// values B_1 .. B_{2n-3}, solves
///
///   0 = A0 + B1 A1 + B3 A3 + ... + B_{2n-3} A_{2n-3} + B_{2n-1}
///
/// for B_{2n-1}, where A0 = -(1/2)(2n-1)/(2n+1), A1 = 2n/2, and each later
/// coefficient extends the falling-factorial product by two factors:
/// A_{2k+1} = A_{2k-1} * (2n-2k+1)(2n-2k) / ((2k+1)(2k+2)).
pub fn eq8_next(prev: &[Rational], n: u64) -> Result<Rational, BernoulliError> {
    if prev.len() as u64 != n - 1 {
        return Err(BernoulliError::ArityMismatch {
            n,
            expected: n - 1,
            got: prev.len(),
        });
    }
    let two_n = 2 * n as i64;
    let a0 = make_rational(-(two_n - 1), 2 * (two_n + 1)).unwrap();
    let mut acc = a0;
    let mut a = make_rational(two_n, 2).unwrap();
    for (k, b) in prev.iter().enumerate() {
        let k = k as i64 + 1; // this B is B_{2k-1}
        if k > 1 {
            let grow = make_rational(
                (two_n - 2 * k + 3) * (two_n - 2 * k + 2),
                (2 * k - 1) * (2 * k),
            )
            .unwrap();
            a = &a * &grow;
        }
        acc = &acc + &(b * &a);
    }
    Ok(&Rational::zero() - &acc)
}

/// [B_1, B_3, ..., B_{2*n_max-1}] in the Lovelace numbering, built by
/// iterating [`eq8_next`] from nothing.
pub fn eq8_sequence(n_max: u64) -> Vec<Rational> {
    let mut seq: Vec<Rational> = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let next = eq8_next(&seq, n).expect("sequence grown in step");
        seq.push(next);
    }
    seq
}

/// One cell of the difference-of-powers table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDifferenceCell {
    /// Difference order.
    pub k: u32,
    /// Power.
    pub n: u32,
    /// The k-th forward difference of x^n at 0.
    pub value: BigInt,
}

impl FiniteDifferenceCell {
    pub fn new(k: u32, n: u32) -> Self {
        FiniteDifferenceCell {
            k,
            n,
            value: finite_diff_zero(k, n),
        }
    }
}

/// The k-th forward difference of x^n evaluated at 0, by the alternating
/// binomial sum sum_{j=0..k} (-1)^(k-j) C(k,j) j^n. (0^0 counts as 1.)
pub fn finite_diff_zero(k: u32, n: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 0..=k {
        let term = if j == 0 {
            if n == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            }
        } else {
            binomial(k as u64, j as u64) * BigInt::from(j).pow(n)
        };
        if (k - j) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// De Morgan's direct formula: for n >= 1,
///
///   B_{n+1} = -(n+1)/(2^(n+1) - 1) * sum_{k=0..n} (-1)^k Delta^k 0^n / 2^(k+1)
///
/// returning the modern B_{n+1} (so odd results are 0 for n >= 2 even).
pub fn demorgan_bernoulli(n: u32) -> Rational {
    let mut brace = Rational::zero();
    for k in 0..=n {
        let term = make_rational(finite_diff_zero(k, n), BigInt::from(2).pow(k + 1)).unwrap();
        if k % 2 == 0 {
            brace = &brace + &term;
        } else {
            brace = &brace - &term;
        }
    }
    let scale = make_rational(
        -BigInt::from(n + 1),
        BigInt::from(2).pow(n + 1) - BigInt::one(),
    )
    .unwrap();
    &scale * &brace
}

/// Leading coefficients of x/(e^x - 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgfSeries {
    /// Truncation order; `coefficients` has order + 1 entries.
    pub order: u32,
    /// c_m for m = 0..=order, with c_m = B_m / m!.
    pub coefficients: Vec<Rational>,
}

impl EgfSeries {
    /// m! * c_m, i.e. the Bernoulli number the m-th coefficient encodes.
    pub fn bernoulli_at(&self, m: u32) -> Rational {
        let mut fact = BigInt::one();
        for i in 2..=m as u64 {
            fact *= i;
        }
        &self.coefficients[m as usize] * &Rational::from_integer(fact)
    }
}

/// Coefficients of x/(e^x - 1) through `order`, by formal reciprocal of
/// (e^x - 1)/x = sum_{m>=0} x^m/(m+1)!: c_0 = 1 and
/// c_m = -sum_{j<m} c_j / (m-j+1)!.
pub fn egf_coefficients(order: u32) -> EgfSeries {
    // Factorials 1! .. (order+1)! up front; divisor[i] = 1/(i+1)!.
    let mut fact = vec![BigInt::one()];
    for i in 1..=(order as u64 + 1) {
        let next = fact.last().unwrap() * i;
        fact.push(next);
    }
    let mut coeffs = vec![Rational::one()];
    for m in 1..=order as usize {
        let mut acc = Rational::zero();
        for (j, c) in coeffs.iter().enumerate() {
            let d = make_rational(1, fact[m - j + 1].clone()).unwrap();
            acc = &acc + &(c * &d);
        }
        coeffs.push(&Rational::zero() - &acc);
    }
    EgfSeries {
        order,
        coefficients: coeffs,
    }
}

/// Sum of the first x p-th powers via the Bernoulli closed form
/// (1/(p+1)) sum_{j=0..p} C(p+1, j) B_j x^(p+1-j) with B1 = +1/2.
///
/// The rational intermediate must collapse to an integer; anything else is a
/// formula bug and is reported rather than truncated.
pub fn faulhaber_sum(p: u32, x: u64) -> Result<BigInt, BernoulliError> {
    let xi = BigInt::from(x);
    let mut acc = Rational::zero();
    for j in 0..=p {
        let b = bernoulli(BernoulliConvention::SumOfPowers, j as i64).unwrap();
        if b.is_zero() {
            continue;
        }
        let c = Rational::from_integer(binomial(p as u64 + 1, j as u64));
        let power = Rational::from_integer(xi.pow(p + 1 - j));
        acc = &acc + &(&(&c * &b) * &power);
    }
    let total = acc
        .checked_div(&Rational::from_integer(p as i64 + 1))
        .unwrap();
    total
        .to_bigint()
        .ok_or(BernoulliError::NonIntegerResult { p, x, value: total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> Rational {
        make_rational(p, q).unwrap()
    }

    /// Modern even-index values through B30, frozen from hand-checked tables.
    fn frozen_even_table() -> Vec<(u64, Rational)> {
        vec![
            (2, rat(1, 6)),
            (4, rat(-1, 30)),
            (6, rat(1, 42)),
            (8, rat(-1, 30)),
            (10, rat(5, 66)),
            (12, rat(-691, 2730)),
            (14, rat(7, 6)),
            (16, rat(-3617, 510)),
            (18, rat(43867, 798)),
            (20, rat(-174611, 330)),
            (22, rat(854513, 138)),
            (24, rat(-236364091, 2730)),
            (26, rat(8553103, 6)),
            (28, rat(-23749461029, 870)),
            (30, rat(8615841276005, 14322)),
        ]
    }

    #[test]
    fn modern_base_cases() {
        assert_eq!(bernoulli_modern(0), Rational::one());
        assert_eq!(bernoulli_modern(1), rat(-1, 2));
        assert_eq!(bernoulli_modern(2), rat(1, 6));
        assert_eq!(bernoulli_modern(8), rat(-1, 30));
        assert_eq!(bernoulli_modern(10), rat(5, 66));
    }

    #[test]
    fn modern_odd_indices_vanish() {
        for m in [3u64, 5, 7, 9, 11, 21, 29] {
            assert!(bernoulli_modern(m).is_zero(), "B{m} nonzero");
        }
    }

    #[test]
    fn modern_matches_frozen_table() {
        for (m, want) in frozen_even_table() {
            assert_eq!(bernoulli_modern(m), want, "B{m}");
        }
    }

    #[test]
    fn sign_alternation() {
        for k in 1u64..=15 {
            let b = bernoulli_modern(2 * k);
            assert_eq!(b.is_negative(), k % 2 == 0, "sign of B{}", 2 * k);
        }
    }

    #[test]
    fn convention_views() {
        use BernoulliConvention::*;
        assert_eq!(bernoulli(LovelaceOdd, 1).unwrap(), rat(1, 6));
        assert_eq!(bernoulli(LovelaceOdd, 7).unwrap(), rat(-1, 30));
        assert_eq!(bernoulli(SumOfPowers, 1).unwrap(), rat(1, 2));
        assert_eq!(bernoulli(SumOfPowers, 4).unwrap(), rat(-1, 30));
        assert_eq!(bernoulli(ModernEven, 3).unwrap(), Rational::zero());
        assert!(bernoulli(LovelaceOdd, 2).is_err());
        assert!(bernoulli(LovelaceOdd, 0).is_err());
        assert!(bernoulli(ModernEven, -1).is_err());
    }

    #[test]
    fn eq8_base_and_growth() {
        assert_eq!(eq8_next(&[], 1).unwrap(), rat(1, 6));
        assert_eq!(eq8_next(&[rat(1, 6)], 2).unwrap(), rat(-1, 30));
        assert_eq!(eq8_next(&[rat(1, 6), rat(-1, 30)], 3).unwrap(), rat(1, 42));
    }

    #[test]
    fn eq8_arity_checked() {
        assert!(matches!(
            eq8_next(&[rat(1, 6)], 3),
            Err(BernoulliError::ArityMismatch {
                n: 3,
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn eq8_sequence_matches_modern() {
        let seq = eq8_sequence(15);
        assert_eq!(seq[0], rat(1, 6));
        assert_eq!(seq[3], rat(-1, 30));
        assert_eq!(seq[4], rat(5, 66));
        for (i, b) in seq.iter().enumerate() {
            assert_eq!(*b, bernoulli_modern(2 * (i as u64 + 1)), "entry {i}");
        }
    }

    #[test]
    fn difference_table_row_seven() {
        let row: Vec<BigInt> = (0..=7).map(|k| finite_diff_zero(k, 7)).collect();
        let want: Vec<BigInt> = [0, 1, 126, 1806, 8400, 16800, 15120, 5040]
            .into_iter()
            .map(BigInt::from)
            .collect();
        assert_eq!(row, want);
    }

    #[test]
    fn difference_table_edges() {
        assert_eq!(finite_diff_zero(0, 3), BigInt::zero());
        assert_eq!(finite_diff_zero(0, 0), BigInt::one());
        // Delta^n 0^n = n!
        let mut fact = BigInt::one();
        for n in 1u32..=12 {
            fact *= n;
            assert_eq!(finite_diff_zero(n, n), fact, "n = {n}");
        }
        // Above the diagonal everything vanishes.
        for n in 1u32..=8 {
            for k in (n + 1)..=(n + 3) {
                assert!(finite_diff_zero(k, n).is_zero(), "k={k} n={n}");
            }
        }
        let cell = FiniteDifferenceCell::new(2, 7);
        assert_eq!(cell.value, BigInt::from(126));
    }

    #[test]
    fn demorgan_spot_values() {
        assert_eq!(demorgan_bernoulli(1), rat(1, 6));
        assert_eq!(demorgan_bernoulli(2), Rational::zero());
        assert_eq!(demorgan_bernoulli(7), rat(-1, 30));
    }

    #[test]
    fn demorgan_agrees_with_recurrence() {
        for m in (2u32..=30).step_by(2) {
            assert_eq!(
                demorgan_bernoulli(m - 1),
                bernoulli_modern(m as u64),
                "B{m}"
            );
        }
    }

    #[test]
    fn egf_leading_coefficients() {
        let series = egf_coefficients(2);
        assert_eq!(
            series.coefficients,
            vec![Rational::one(), rat(-1, 2), rat(1, 12)]
        );
        assert_eq!(series.bernoulli_at(2), rat(1, 6));
    }

    #[test]
    fn egf_agrees_with_recurrence() {
        let series = egf_coefficients(30);
        for m in 0u32..=30 {
            assert_eq!(series.bernoulli_at(m), bernoulli_modern(m as u64), "B{m}");
        }
        // Odd coefficients past c1 vanish.
        for m in (3..=29).step_by(2) {
            assert!(series.coefficients[m].is_zero(), "c{m}");
        }
    }

    #[test]
    fn faulhaber_spot_values() {
        assert_eq!(faulhaber_sum(10, 1).unwrap(), BigInt::from(1));
        assert_eq!(faulhaber_sum(10, 2).unwrap(), BigInt::from(1025));
        assert_eq!(faulhaber_sum(0, 7).unwrap(), BigInt::from(7));
        assert_eq!(faulhaber_sum(1, 100).unwrap(), BigInt::from(5050));
        assert_eq!(faulhaber_sum(10, 0).unwrap(), BigInt::zero());
        assert_eq!(
            faulhaber_sum(10, 1000).unwrap(),
            "91409924241424243424241924242500".parse::<BigInt>().unwrap()
        );
    }

    #[test]
    fn faulhaber_matches_brute_force_small() {
        for p in 0u32..=6 {
            for x in 0u64..=30 {
                let brute: BigInt = (1..=x).map(|k| BigInt::from(k).pow(p)).sum();
                assert_eq!(faulhaber_sum(p, x).unwrap(), brute, "p={p} x={x}");
            }
        }
    }

    proptest! {
        #[test]
        fn faulhaber_matches_brute_force(p in 0u32..=10, x in 0u64..=200) {
            let brute: BigInt = (1..=x).map(|k| BigInt::from(k).pow(p)).sum();
            prop_assert_eq!(faulhaber_sum(p, x).unwrap(), brute);
        }

        #[test]
        fn memo_recomputation_is_stable(m in 0u64..=40) {
            prop_assert_eq!(bernoulli_modern(m), bernoulli_modern(m));
        }
    }
}
