//! Shared test plumbing: a seeded generator of valid decks for round-trip
//! and determinism suites.

use analytical_engine::deck::{validate_deck, Deck, Operand, RepeatBlock, Step, VarId};
use analytical_engine::numeric::{make_rational, ArithOp, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

const NAME_WORDS: &[&str] = &[
    "cards", "mill", "store", "cycle", "table", "powers", "primes", "notes",
];

fn random_label(rng: &mut impl Rng) -> String {
    let count = rng.gen_range(1..=3);
    let words: Vec<&str> = (0..count)
        .map(|_| *NAME_WORDS.choose(rng).unwrap())
        .collect();
    words.join(" ")
}

fn random_rational(rng: &mut impl Rng) -> Rational {
    make_rational(rng.gen_range(-99i64..=99), rng.gen_range(1i64..=30)).unwrap()
}

fn random_operand(rng: &mut impl Rng, max_var: u32) -> Operand {
    let var = rng.gen_range(0..max_var);
    if rng.gen_bool(0.2) {
        Operand::give_off(var)
    } else {
        Operand::keep(var)
    }
}

/// Intervals are compatible when disjoint or nested; sharing an endpoint
/// while nested is fine, an exact duplicate is not.
fn compatible(a: (u32, u32), b: (u32, u32)) -> bool {
    if a == b {
        return false;
    }
    let disjoint = a.1 < b.0 || b.1 < a.0;
    let nested = (a.0 <= b.0 && b.1 <= a.1) || (b.0 <= a.0 && a.1 <= b.1);
    disjoint || nested
}

/// A structurally valid deck: consecutive steps, one to three distinct
/// receivers each, properly nested repeat blocks, disjoint input/preset
/// sets. Everything is already in canonical textual form, so a serialize
/// then parse round trip must reproduce it exactly.
pub fn random_deck(rng: &mut impl Rng) -> Deck {
    let max_var = 40u32;
    let step_count = rng.gen_range(1..=25u32);

    let mut declared: Vec<u32> = (0..max_var).collect();
    declared.shuffle(rng);
    let input_count = rng.gen_range(0..=4usize);
    let preset_count = rng.gen_range(0..=4usize);
    let inputs: Vec<(VarId, Option<String>)> = declared[..input_count]
        .iter()
        .map(|&v| {
            let label = rng.gen_bool(0.5).then(|| random_label(rng));
            (VarId(v), label)
        })
        .collect();
    let presets: Vec<(VarId, Rational)> = declared[input_count..input_count + preset_count]
        .iter()
        .map(|&v| (VarId(v), random_rational(rng)))
        .collect();

    let ops = [ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div];
    let steps: Vec<Step> = (1..=step_count)
        .map(|number| {
            let mut vars: Vec<u32> = (0..max_var).collect();
            vars.shuffle(rng);
            let receivers = vars[..rng.gen_range(1..=3usize)]
                .iter()
                .map(|&v| VarId(v))
                .collect();
            Step {
                number,
                op: *ops.choose(rng).unwrap(),
                left: random_operand(rng, max_var),
                right: random_operand(rng, max_var),
                receivers,
                annotation: rng.gen_bool(0.4).then(|| random_label(rng)),
            }
        })
        .collect();

    let mut spans: Vec<(u32, u32)> = Vec::new();
    for _ in 0..rng.gen_range(0..=3usize) {
        let start = rng.gen_range(1..=step_count);
        let end = rng.gen_range(start..=step_count);
        if spans.iter().all(|&s| compatible(s, (start, end))) {
            spans.push((start, end));
        }
    }
    let repeats = spans
        .into_iter()
        .map(|(start, end)| RepeatBlock {
            start,
            end,
            counter: VarId(rng.gen_range(0..max_var)),
        })
        .collect();

    let deck = Deck {
        name: random_label(rng).replace(' ', "_"),
        inputs,
        presets,
        steps,
        repeats,
    };
    assert!(
        !validate_deck(&deck)
            .iter()
            .any(|d| d.severity == analytical_engine::deck::Severity::Error),
        "generator produced an invalid deck"
    );
    deck
}
