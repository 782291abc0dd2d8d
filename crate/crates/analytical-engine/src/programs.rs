//! The bundled historical programs: Menabrea's simultaneous-equations
//! example (Note D), the Bernoulli deck of Note G, and the prime-number
//! tabulation, each as a deck constructor plus the small oracle specific
//! to it.
//!
//! The Note G constructors face one genuine design problem. Operation
//! cards address fixed store columns, yet pass k of the cycle must
//! multiply by B_{2k-1}, a different column each pass. The 1843 table
//! glosses this ("the variable which holds the coefficient"); a real card
//! chain cannot. We resolve it with a difference ladder: V18 carries the
//! needed B value and is advanced each pass by first/second differences
//! preloaded in V19/V20. A depth-two ladder reproduces the B sequence
//! exactly through n = 5 (three passes). Beyond that no fixed-depth
//! ladder of this shape suffices, so for n >= 6 the constructors emit the
//! cycle with its passes unrolled, each pass reading its own column the
//! way separate cards genuinely could.

use std::ops::RangeInclusive;

use thiserror::Error;

use crate::bernoulli::eq8_sequence;
use crate::deck::{Deck, Operand, RepeatBlock, Step, VarId};
use crate::numeric::{ArithOp, Rational};

/// The pair of equations mx + ny = d and m'x + n'y = d'.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSystem2x2 {
    pub m: Rational,
    pub n: Rational,
    pub d: Rational,
    pub m_prime: Rational,
    pub n_prime: Rational,
    pub d_prime: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("singular system: mn' - m'n = 0")]
    SingularSystem,
}

/// Closed-form solution used as the oracle for Note D runs:
/// x = (dn' - d'n)/(mn' - m'n), y = (d'm - dm')/(mn' - m'n).
pub fn solve_2x2_reference(sys: &LinearSystem2x2) -> Result<(Rational, Rational), ProgramError> {
    let det = &(&sys.m * &sys.n_prime) - &(&sys.m_prime * &sys.n);
    if det.is_zero() {
        return Err(ProgramError::SingularSystem);
    }
    let x_num = &(&sys.d * &sys.n_prime) - &(&sys.d_prime * &sys.n);
    let y_num = &(&sys.d_prime * &sys.m) - &(&sys.d * &sys.m_prime);
    let x = x_num.checked_div(&det).expect("determinant checked nonzero");
    let y = y_num.checked_div(&det).expect("determinant checked nonzero");
    Ok((x, y))
}

/// Where the Bernoulli deck keeps things, following the 1843 table's
/// grouping: data columns holding 1, 2, n; a working range; results from
/// V21 upward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteGLayout {
    pub data_vars: [VarId; 3],
    pub working_vars: RangeInclusive<u32>,
    pub result_vars: RangeInclusive<u32>,
    pub counter_var: VarId,
}

impl NoteGLayout {
    /// Layout for a run producing B_1 .. B_{2n-1}.
    pub fn for_n(n: u32) -> NoteGLayout {
        NoteGLayout {
            data_vars: [VarId(1), VarId(2), VarId(3)],
            working_vars: 4..=20,
            result_vars: 21..=(20 + n),
            counter_var: VarId(10),
        }
    }

    pub fn result_var(&self, k: u32) -> VarId {
        VarId(self.result_vars.start() + k - 1)
    }
}

/// One term of the sum the cycle accumulates: the coefficient A with its
/// subscript, and the term's full contribution (A alone for the leading
/// term, B.A for the rest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteGTerm {
    pub k: u32,
    pub a_value: Rational,
    pub contribution: Rational,
}

/// The terms A0, B1.A1, B3.A3, ..., B_{2n-3}.A_{2n-3} whose negated sum
/// is B_{2n-1}. Each coefficient extends the previous one by two falling
/// factors over two more factorial factors.
pub fn note_g_terms(n: u32) -> Vec<NoteGTerm> {
    assert!(n >= 1, "terms are defined for n >= 1");
    let big_n = i64::from(n);
    let rat = |p: i64, q: i64| crate::numeric::make_rational(p, q).expect("q != 0");
    let mut terms = Vec::with_capacity(n as usize);
    let a0 = rat(-(2 * big_n - 1), 2 * (2 * big_n + 1));
    terms.push(NoteGTerm {
        k: 0,
        a_value: a0.clone(),
        contribution: a0,
    });
    if n == 1 {
        return terms;
    }
    let b = eq8_sequence(u64::from(n) - 1);
    let mut a = Rational::from_integer(big_n);
    terms.push(NoteGTerm {
        k: 1,
        a_value: a.clone(),
        contribution: &b[0] * &a,
    });
    for j in 1..=(big_n - 2) {
        let factor = rat(
            (2 * big_n - 2 * j + 1) * (2 * big_n - 2 * j),
            (2 * j + 1) * (2 * j + 2),
        );
        a = &a * &factor;
        terms.push(NoteGTerm {
            k: (2 * j + 1) as u32,
            a_value: a.clone(),
            contribution: &b[j as usize] * &a,
        });
    }
    terms
}

fn keep(v: u32) -> Operand {
    Operand::keep(v)
}

fn give_off(v: u32) -> Operand {
    Operand::give_off(v)
}

/// Accumulates steps with automatic consecutive numbering, so the same
/// body routine serves both the standalone cycle and its position inside
/// the concatenated full deck.
struct Builder {
    steps: Vec<Step>,
    repeats: Vec<RepeatBlock>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            steps: Vec::new(),
            repeats: Vec::new(),
        }
    }

    fn push(
        &mut self,
        op: ArithOp,
        left: Operand,
        right: Operand,
        receivers: &[u32],
        annotation: Option<String>,
    ) -> u32 {
        let number = self.steps.len() as u32 + 1;
        self.steps.push(Step {
            number,
            op,
            left,
            right,
            receivers: receivers.iter().map(|&v| VarId(v)).collect(),
            annotation,
        });
        number
    }

    fn repeat(&mut self, start: u32, end: u32, counter: u32) {
        self.repeats.push(RepeatBlock {
            start,
            end,
            counter: VarId(counter),
        });
    }
}

fn note(text: &str) -> Option<String> {
    Some(text.to_string())
}

/// Menabrea's worked example: eleven operations, no repeats, solving a
/// 2x2 system by cross-multiplication.
pub fn note_d_deck() -> Deck {
    use ArithOp::{Div, Mul, Sub};
    let mut b = Builder::new();
    b.push(Mul, keep(1), keep(5), &[7], note("= m n'"));
    b.push(Mul, keep(4), keep(2), &[8], note("= m' n"));
    b.push(Mul, keep(3), keep(5), &[9], note("= d n'"));
    b.push(Mul, keep(6), keep(2), &[10], note("= d' n"));
    b.push(Mul, keep(6), keep(1), &[11], note("= d' m"));
    b.push(Mul, keep(3), keep(4), &[12], note("= d m'"));
    b.push(Sub, keep(7), keep(8), &[13], note("= m n' - m' n"));
    b.push(Sub, keep(9), keep(10), &[14], note("= d n' - d' n"));
    b.push(Sub, keep(11), keep(12), &[15], note("= d' m - d m'"));
    b.push(Div, keep(14), keep(13), &[16], note("= x"));
    b.push(Div, keep(15), keep(13), &[17], note("= y"));
    Deck {
        name: "note_d".to_string(),
        inputs: vec![
            (VarId(1), Some("m".to_string())),
            (VarId(2), Some("n".to_string())),
            (VarId(3), Some("d".to_string())),
            (VarId(4), Some("m'".to_string())),
            (VarId(5), Some("n'".to_string())),
            (VarId(6), Some("d'".to_string())),
        ],
        presets: Vec::new(),
        steps: b.steps,
        repeats: b.repeats,
    }
}

/// Steps 1-12 of the cycle: A0 into the accumulator V13, the B1.A1 term,
/// and the pass counter V10 brought to n - 2.
fn push_preamble(b: &mut Builder, n: u32) {
    use ArithOp::{Add, Div, Mul, Sub};
    let big_n = i64::from(n);
    b.push(Mul, keep(2), keep(3), &[4, 5, 6], note("= 2n"));
    b.push(Sub, keep(4), keep(1), &[4], note("= 2n - 1"));
    b.push(Add, keep(5), keep(1), &[5], note("= 2n + 1"));
    b.push(Div, give_off(4), give_off(5), &[11], note("= (2n - 1)/(2n + 1)"));
    b.push(Div, keep(11), keep(2), &[11], note("= (1/2)((2n - 1)/(2n + 1))"));
    b.push(Sub, keep(13), give_off(11), &[13], note("= -(1/2)((2n - 1)/(2n + 1)) = A0"));
    b.push(
        Sub,
        keep(3),
        keep(1),
        &[10],
        Some(format!("= n - 1 (= {})", big_n - 1)),
    );
    b.push(Add, keep(2), keep(7), &[7], note("= 2 + 0 = 2"));
    b.push(Div, give_off(6), give_off(7), &[11], note("= 2n/2 = A1"));
    b.push(Mul, keep(21), keep(11), &[12], note("= B1 A1"));
    b.push(Add, give_off(12), keep(13), &[13], note("= A0 + B1 A1"));
    if n <= 2 {
        // One more decrement would drive the counter negative; the cycle
        // for n <= 2 zeroes it instead so the repeat exits after the
        // mandatory first pass.
        b.push(Sub, keep(10), keep(10), &[10], note("= 0"));
    } else {
        b.push(
            Sub,
            keep(10),
            keep(1),
            &[10],
            Some(format!("= n - 2 (= {})", big_n - 2)),
        );
    }
}

/// Steps 13-25: the repeated coefficient/accumulate block with its two
/// inner factor groups, the negating store into the result column, and
/// the advance of n.
fn push_cycle_tail(b: &mut Builder, n: u32) {
    use ArithOp::{Add, Div, Mul, Sub};
    let big_n = i64::from(n);
    let s13 = b.push(Add, keep(14), keep(15), &[14], None);
    b.push(Add, keep(15), keep(8), &[15], None);
    b.push(Mul, keep(11), keep(14), &[11], None);
    let s16 = b.push(Add, keep(18), keep(19), &[18], None);
    let s17 = b.push(Add, keep(16), keep(17), &[16], None);
    b.push(Add, keep(17), keep(8), &[17], None);
    b.push(Div, keep(11), keep(16), &[11], if n >= 3 { note("= A3") } else { None });
    let s20 = b.push(Add, keep(19), keep(20), &[19], None);
    b.push(
        Mul,
        keep(18),
        keep(11),
        &[12],
        if n >= 3 { note("= B3 A3") } else { None },
    );
    b.push(
        Add,
        keep(12),
        keep(13),
        &[13],
        if n >= 3 { note("= A0 + B1 A1 + B3 A3") } else { None },
    );
    let s23 = if n <= 2 {
        b.push(Sub, keep(10), keep(10), &[10], note("= 0"))
    } else {
        b.push(
            Sub,
            keep(10),
            keep(1),
            &[10],
            Some(format!("= n - 3 (= {})", big_n - 3)),
        )
    };
    b.push(
        Sub,
        keep(9),
        give_off(13),
        &[20 + n],
        Some(format!("= B{}", 2 * big_n - 1)),
    );
    b.push(
        Add,
        keep(1),
        keep(3),
        &[3],
        Some(format!("= n + 1 = {} + 1 = {}", big_n, big_n + 1)),
    );
    b.repeat(s13, s23, 10);
    b.repeat(s13, s16, 9);
    b.repeat(s17, s20, 9);
}

/// The n >= 6 form: same preamble, then each pass written out with its
/// own cards so pass p reads B_{2p+1} from its own column.
fn push_unrolled_tail(b: &mut Builder, n: u32) {
    use ArithOp::{Add, Div, Mul, Sub};
    let big_n = i64::from(n);
    for p in 1..=(n - 2) {
        b.push(Add, keep(14), keep(15), &[14], None);
        b.push(Add, keep(15), keep(8), &[15], None);
        b.push(Mul, keep(11), keep(14), &[11], None);
        b.push(Add, keep(16), keep(17), &[16], None);
        b.push(Add, keep(17), keep(8), &[17], None);
        b.push(
            Div,
            keep(11),
            keep(16),
            &[11],
            Some(format!("= A{}", 2 * p + 1)),
        );
        b.push(
            Mul,
            keep(21 + p),
            keep(11),
            &[12],
            Some(format!("= B{} A{}", 2 * p + 1, 2 * p + 1)),
        );
        b.push(Add, keep(12), keep(13), &[13], None);
    }
    b.push(
        Sub,
        keep(9),
        give_off(13),
        &[20 + n],
        Some(format!("= B{}", 2 * big_n - 1)),
    );
    b.push(
        Add,
        keep(1),
        keep(3),
        &[3],
        Some(format!("= n + 1 = {} + 1 = {}", big_n, big_n + 1)),
    );
}

/// Ladder seeds for the coefficient numerator and divisor: V14/V15 walk
/// the falling-factor product (2n-2k+1)(2n-2k), V16/V17 walk the divisor
/// (2k+1)(2k+2). Both have constant second difference 8.
fn ladder_presets(n: u32) -> Vec<(u32, Rational)> {
    let big_n = i64::from(n);
    vec![
        (14, Rational::from_integer(2 * big_n * (2 * big_n + 1))),
        (15, Rational::from_integer(2 - 8 * big_n)),
        (16, Rational::from_integer(2)),
        (17, Rational::from_integer(10)),
    ]
}

/// Window seeds (V18 = W, V19 = DW, V20 = DDW) chosen so the pass-k value
/// of V18 is exactly B_{2k+1}; only meaningful up to n = 5.
fn window_presets(n: u32) -> Vec<(u32, Rational)> {
    if n <= 2 {
        return Vec::new();
    }
    let b = eq8_sequence(u64::from(n) - 1);
    let b3 = &b[1];
    match n {
        3 => vec![(18, b3.clone())],
        4 => {
            let b5 = &b[2];
            let dw = b5 - b3;
            vec![(18, b3 - &dw), (19, dw)]
        }
        5 => {
            let b5 = &b[2];
            let b7 = &b[3];
            let ddw = &(b7 - b5) - &(b5 - b3);
            let dw = &(b5 - b3) - &ddw;
            vec![(18, b3 - &dw), (19, dw), (20, ddw)]
        }
        _ => Vec::new(),
    }
}

/// One Bernoulli cycle: a 25-step deck computing B_{2n-1} from the
/// preloaded B_1 .. B_{2n-3}, with the repeat structure of the 1843
/// table (outer block 13-23, inner factor groups 13-16 and 17-20). For
/// n >= 6 the window trick runs out and the deck ships with its passes
/// unrolled instead of repeated.
pub fn note_g_cycle_deck(n: u32) -> Deck {
    assert!(n >= 1, "the cycle needs n >= 1");
    let mut b = Builder::new();
    push_preamble(&mut b, n);
    if n <= 5 {
        push_cycle_tail(&mut b, n);
    } else {
        push_unrolled_tail(&mut b, n);
    }

    let big_n = i64::from(n);
    let mut presets: Vec<(u32, Rational)> = vec![
        (1, Rational::one()),
        (2, Rational::from_integer(2)),
        (3, Rational::from_integer(big_n)),
        (8, Rational::from_integer(8)),
    ];
    presets.extend(ladder_presets(n));
    presets.extend(window_presets(n));
    for (k, value) in eq8_sequence(u64::from(n) - 1).into_iter().enumerate() {
        presets.push((21 + k as u32, value));
    }
    presets.sort_by_key(|&(v, _)| v);

    Deck {
        name: "note_g_cycle".to_string(),
        inputs: Vec::new(),
        presets: presets.into_iter().map(|(v, r)| (VarId(v), r)).collect(),
        steps: b.steps,
        repeats: b.repeats,
    }
}

/// Staging before cycle n >= 2 inside the full deck: rebuild the ladder
/// seeds from the advanced n (the store still holds the previous seeds)
/// and refresh the window from the Bs already computed this run.
fn push_staging(b: &mut Builder, n: u32) {
    use ArithOp::{Add, Mul, Sub};
    let zero_var = |b: &mut Builder, v: u32| {
        b.push(Sub, keep(v), keep(v), &[v], None);
    };
    b.push(Mul, keep(2), keep(3), &[4], note("= 2n"));
    b.push(Add, keep(4), keep(1), &[5], note("= 2n + 1"));
    b.push(Mul, keep(4), keep(5), &[14], note("= 2n(2n + 1)"));
    b.push(Mul, keep(8), keep(3), &[5], note("= 8n"));
    b.push(Sub, keep(2), give_off(5), &[15], note("= 2 - 8n"));
    b.push(Add, keep(2), keep(9), &[16], note("= 2"));
    b.push(Add, keep(8), keep(2), &[17], note("= 10"));
    match n {
        2 => {
            zero_var(b, 18);
            zero_var(b, 19);
            zero_var(b, 20);
        }
        3 => {
            zero_var(b, 19);
            zero_var(b, 20);
            b.push(Add, keep(22), keep(9), &[18], None);
        }
        4 => {
            zero_var(b, 20);
            b.push(Sub, keep(23), keep(22), &[19], None);
            b.push(Sub, keep(22), keep(19), &[18], None);
        }
        5 => {
            b.push(Sub, keep(24), keep(23), &[20], None);
            b.push(Sub, keep(23), keep(22), &[19], None);
            b.push(Sub, keep(20), keep(19), &[20], None);
            b.push(Sub, keep(19), keep(20), &[19], None);
            b.push(Sub, keep(22), keep(19), &[18], None);
        }
        _ => {}
    }
}

/// The whole tabulation as one closed program: cycles for n = 1..n_max
/// laid end to end over a shared store, each one deriving its seeds from
/// the n left behind by its predecessor, depositing B_1, B_3, ... into
/// V21 upward with no intervention between cycles.
pub fn note_g_full_deck(n_max: u32) -> Deck {
    assert!(n_max >= 1, "the tabulation needs n_max >= 1");
    let mut b = Builder::new();
    for n in 1..=n_max {
        if n >= 2 {
            push_staging(&mut b, n);
        }
        push_preamble(&mut b, n);
        if n <= 5 {
            push_cycle_tail(&mut b, n);
        } else {
            push_unrolled_tail(&mut b, n);
        }
    }

    let presets = vec![
        (VarId(1), Rational::one()),
        (VarId(2), Rational::from_integer(2)),
        (VarId(3), Rational::one()),
        (VarId(8), Rational::from_integer(8)),
        (VarId(14), Rational::from_integer(6)),
        (VarId(15), Rational::from_integer(-6)),
        (VarId(16), Rational::from_integer(2)),
        (VarId(17), Rational::from_integer(10)),
    ];

    Deck {
        name: "note_g_full".to_string(),
        inputs: Vec::new(),
        presets,
        steps: b.steps,
        repeats: b.repeats,
    }
}

/// f(x) = x^2 + x + 41 tabulated by differences: first difference seeded
/// at 2, second difference the constant 2, additions only. The values
/// land in V21 upward.
pub fn prime_poly_deck(count: u32) -> Deck {
    use ArithOp::Add;
    assert!(count >= 1, "the tabulation needs count >= 1");
    let mut b = Builder::new();
    b.push(Add, keep(1), keep(9), &[21], note("= f(0) = 41"));
    for k in 1..count {
        b.push(
            Add,
            keep(20 + k),
            keep(2),
            &[21 + k],
            Some(format!("= f({k})")),
        );
        b.push(Add, keep(2), keep(3), &[2], None);
    }
    Deck {
        name: "primes".to_string(),
        inputs: Vec::new(),
        presets: vec![
            (VarId(1), Rational::from_integer(41)),
            (VarId(2), Rational::from_integer(2)),
            (VarId(3), Rational::from_integer(2)),
        ],
        steps: b.steps,
        repeats: b.repeats,
    }
}

/// Trial division up to the square root; 1 is not prime.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}
