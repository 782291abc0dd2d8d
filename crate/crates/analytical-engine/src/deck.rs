//! Card programs: the data model, the `.deck` text format, validation, and
//! the single-point mutation tool used for fault injection.
//!
//! A deck is line-oriented UTF-8 text:
//!
//! ```text
//! ; comment                        -- whole-line comments only
//! DECK <name>
//! INPUT V<k> [label]               -- value bound at run time
//! SET V<k> = <number>              -- preset constant, [-]digits[/digits]
//! STEP <i> <OP> <opnd> <opnd> -> V<a> [V<b> [V<c>]] [; annotation]
//! REPEAT <start> <end> UNTIL V<c> = 0
//! END
//! ```
//!
//! `OP` is one of ADD, SUB, MUL, DIV; an operand is `V<k>` or `V<k>!`, the
//! `!` marking that the variable gives off its value (is zeroed) once read.
//! Steps must be numbered 1..n in order. Parsing canonicalizes (labels and
//! annotations are whitespace-trimmed, numbers reduced), and
//! [`serialize_deck`] emits the canonical text back, so parse-serialize is
//! structural identity and serialize-parse is byte identity.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{ArithOp, Rational};

/// Index of a store variable (the n of Vn).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.0)
    }
}

/// A supplying variable together with its retention behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Operand {
    pub var: VarId,
    /// When set, the variable is reduced to 0 after supplying its value.
    pub zero_after_read: bool,
}

impl Operand {
    pub fn keep(var: u32) -> Operand {
        Operand {
            var: VarId(var),
            zero_after_read: false,
        }
    }

    pub fn give_off(var: u32) -> Operand {
        Operand {
            var: VarId(var),
            zero_after_read: true,
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.var, if self.zero_after_read { "!" } else { "" })
    }
}

/// One operation card plus its variable cards: a single elemental operation,
/// two operands, one to three distinct receivers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub number: u32,
    pub op: ArithOp,
    pub left: Operand,
    pub right: Operand,
    pub receivers: Vec<VarId>,
    pub annotation: Option<String>,
}

/// A counter-driven loop: after the `end` step runs, the counter variable is
/// inspected and control returns to `start` while it is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepeatBlock {
    pub start: u32,
    pub end: u32,
    pub counter: VarId,
}

/// A parsed card program.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Deck {
    pub name: String,
    pub inputs: Vec<(VarId, Option<String>)>,
    pub presets: Vec<(VarId, Rational)>,
    pub steps: Vec<Step>,
    pub repeats: Vec<RepeatBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One validation finding, with enough locus to point a human at the line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub locus: String,
    pub message: String,
}

impl Diagnostic {
    fn error(locus: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            locus: locus.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.locus, self.message)
    }
}

/// The flip applied by [`mutate_flip_operation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    /// Exchange SUB for ADD or ADD for SUB.
    FlipSubAdd,
    /// Exchange the two operands, leaving the operation alone.
    SwapOperands,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeckError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("deck is invalid: {}", format_diagnostics(.0))]
    Validation(Vec<Diagnostic>),
    #[error("no step numbered {0}")]
    NoSuchStep(u32),
    #[error("step {step} is a {op} step; {mutation:?} does not apply")]
    InapplicableMutation {
        step: u32,
        op: &'static str,
        mutation: Mutation,
    },
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn parse_error(line: usize, message: impl Into<String>) -> DeckError {
    DeckError::Parse {
        line,
        message: message.into(),
    }
}

/// Strict unsigned decimal (no sign characters, which `u32::from_str` would
/// otherwise let through).
fn parse_u32(token: &str, line: usize, what: &str) -> Result<u32, DeckError> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(line, format!("expected {what}, got {token:?}")));
    }
    token
        .parse()
        .map_err(|_| parse_error(line, format!("{what} {token:?} out of range")))
}

fn parse_var(token: &str, line: usize) -> Result<VarId, DeckError> {
    let digits = token
        .strip_prefix('V')
        .ok_or_else(|| parse_error(line, format!("expected a variable like V4, got {token:?}")))?;
    Ok(VarId(parse_u32(digits, line, "variable index")?))
}

fn parse_operand(token: &str, line: usize) -> Result<Operand, DeckError> {
    let (body, zero) = match token.strip_suffix('!') {
        Some(body) => (body, true),
        None => (token, false),
    };
    Ok(Operand {
        var: parse_var(body, line)?,
        zero_after_read: zero,
    })
}

/// Parses deck text. Syntax problems report the offending line; a
/// syntactically fine deck that breaks a structural invariant is returned as
/// [`DeckError::Validation`] with every finding.
pub fn parse_deck(text: &str) -> Result<Deck, DeckError> {
    let mut deck = Deck::default();
    let mut seen_deck_line = false;
    let mut seen_end = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if seen_end {
            return Err(parse_error(line_no, "text after END"));
        }
        let keyword = line.split_whitespace().next().unwrap();
        if !seen_deck_line {
            if keyword != "DECK" {
                return Err(parse_error(line_no, "deck must begin with a DECK line"));
            }
            let name = line["DECK".len()..].trim();
            if name.is_empty() {
                return Err(parse_error(line_no, "DECK requires a name"));
            }
            deck.name = name.to_string();
            seen_deck_line = true;
            continue;
        }
        match keyword {
            "DECK" => return Err(parse_error(line_no, "duplicate DECK line")),
            "END" => {
                if line != "END" {
                    return Err(parse_error(line_no, "END takes nothing else"));
                }
                seen_end = true;
            }
            "INPUT" => {
                let mut tokens = line.split_whitespace().skip(1);
                let var = parse_var(
                    tokens.next().ok_or_else(|| parse_error(line_no, "INPUT requires a variable"))?,
                    line_no,
                )?;
                let label = tokens.collect::<Vec<_>>().join(" ");
                deck.inputs.push((var, (!label.is_empty()).then_some(label)));
            }
            "SET" => {
                let tokens: Vec<&str> = line.split_whitespace().skip(1).collect();
                let [var, eq, number] = tokens[..] else {
                    return Err(parse_error(line_no, "expected SET V<k> = <number>"));
                };
                if eq != "=" {
                    return Err(parse_error(line_no, "expected '=' in SET"));
                }
                let var = parse_var(var, line_no)?;
                let value: Rational = number.parse().map_err(|_| {
                    parse_error(line_no, format!("bad number {number:?} (want [-]digits[/digits])"))
                })?;
                deck.presets.push((var, value));
            }
            "STEP" => {
                let (head, annotation) = match line.split_once(';') {
                    Some((head, note)) => (head, Some(note.trim().to_string())),
                    None => (line, None),
                };
                let annotation = annotation.filter(|a| !a.is_empty());
                let tokens: Vec<&str> = head.split_whitespace().skip(1).collect();
                if tokens.len() < 5 {
                    return Err(parse_error(
                        line_no,
                        "expected STEP <i> <OP> <opnd> <opnd> -> <receivers>",
                    ));
                }
                let number = parse_u32(tokens[0], line_no, "step number")?;
                let op = ArithOp::from_keyword(tokens[1]).ok_or_else(|| {
                    parse_error(line_no, format!("unknown operation {:?}", tokens[1]))
                })?;
                let left = parse_operand(tokens[2], line_no)?;
                let right = parse_operand(tokens[3], line_no)?;
                if tokens[4] != "->" {
                    return Err(parse_error(line_no, "expected '->' before receivers"));
                }
                let receivers = tokens[5..]
                    .iter()
                    .map(|t| parse_var(t, line_no))
                    .collect::<Result<Vec<_>, _>>()?;
                if receivers.is_empty() {
                    return Err(parse_error(line_no, "a step needs at least one receiver"));
                }
                deck.steps.push(Step {
                    number,
                    op,
                    left,
                    right,
                    receivers,
                    annotation,
                });
            }
            "REPEAT" => {
                let tokens: Vec<&str> = line.split_whitespace().skip(1).collect();
                let [start, end, until, var, eq, zero] = tokens[..] else {
                    return Err(parse_error(line_no, "expected REPEAT <start> <end> UNTIL V<c> = 0"));
                };
                if until != "UNTIL" || eq != "=" || zero != "0" {
                    return Err(parse_error(line_no, "expected REPEAT <start> <end> UNTIL V<c> = 0"));
                }
                deck.repeats.push(RepeatBlock {
                    start: parse_u32(start, line_no, "repeat start")?,
                    end: parse_u32(end, line_no, "repeat end")?,
                    counter: parse_var(var, line_no)?,
                });
            }
            other => {
                return Err(parse_error(line_no, format!("unknown directive {other:?}")));
            }
        }
    }
    if !seen_deck_line {
        return Err(parse_error(text.lines().count().max(1), "no DECK line found"));
    }
    if !seen_end {
        return Err(parse_error(text.lines().count().max(1), "missing END"));
    }

    let diagnostics = validate_deck(&deck);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(DeckError::Validation(diagnostics));
    }
    Ok(deck)
}

/// Emits the canonical text for a deck: sections in DECK, INPUT, SET, STEP,
/// REPEAT, END order, one blank line between populated sections.
pub fn serialize_deck(deck: &Deck) -> String {
    let mut sections: Vec<String> = Vec::new();
    sections.push(format!("DECK {}\n", deck.name));
    if !deck.inputs.is_empty() {
        let mut s = String::new();
        for (var, label) in &deck.inputs {
            match label {
                Some(label) => s.push_str(&format!("INPUT {var} {label}\n")),
                None => s.push_str(&format!("INPUT {var}\n")),
            }
        }
        sections.push(s);
    }
    if !deck.presets.is_empty() {
        let mut s = String::new();
        for (var, value) in &deck.presets {
            s.push_str(&format!("SET {var} = {value}\n"));
        }
        sections.push(s);
    }
    if !deck.steps.is_empty() {
        let mut s = String::new();
        for step in &deck.steps {
            s.push_str(&format!(
                "STEP {} {} {} {} ->",
                step.number,
                step.op.keyword(),
                step.left,
                step.right
            ));
            for r in &step.receivers {
                s.push_str(&format!(" {r}"));
            }
            if let Some(note) = &step.annotation {
                s.push_str(&format!(" ; {note}"));
            }
            s.push('\n');
        }
        sections.push(s);
    }
    if !deck.repeats.is_empty() {
        let mut s = String::new();
        for block in &deck.repeats {
            s.push_str(&format!(
                "REPEAT {} {} UNTIL {} = 0\n",
                block.start, block.end, block.counter
            ));
        }
        sections.push(s);
    }
    sections.push("END\n".to_string());
    sections.join("\n")
}

fn clean_text(s: &str) -> bool {
    !s.contains('\n') && !s.contains('\r') && s == s.trim()
}

/// Checks every structural invariant; an empty result means the deck is
/// clean. Parsing already runs this, so it matters mostly for decks built in
/// code.
pub fn validate_deck(deck: &Deck) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if deck.name.is_empty() || !clean_text(&deck.name) {
        diags.push(Diagnostic::error("deck", "name must be one clean line"));
    }
    if deck.steps.is_empty() {
        diags.push(Diagnostic::error("deck", "a deck needs at least one step"));
    }

    for (i, step) in deck.steps.iter().enumerate() {
        let locus = format!("step {}", step.number);
        let expected = i as u32 + 1;
        if step.number != expected {
            diags.push(Diagnostic::error(
                &locus,
                format!("steps must be numbered consecutively from 1 (expected {expected})"),
            ));
        }
        if step.receivers.is_empty() || step.receivers.len() > 3 {
            diags.push(Diagnostic::error(
                &locus,
                format!("wants 1 to 3 receivers, has {}", step.receivers.len()),
            ));
        }
        for (a, ra) in step.receivers.iter().enumerate() {
            if step.receivers[a + 1..].contains(ra) {
                diags.push(Diagnostic::error(&locus, format!("receiver {ra} listed twice")));
            }
        }
        if let Some(note) = &step.annotation {
            if !clean_text(note) {
                diags.push(Diagnostic::error(&locus, "annotation must be one clean line"));
            }
        }
    }

    for (i, (var, label)) in deck.inputs.iter().enumerate() {
        if deck.inputs[i + 1..].iter().any(|(v, _)| v == var) {
            diags.push(Diagnostic::error("inputs", format!("{var} declared twice")));
        }
        if let Some(label) = label {
            if !clean_text(label) {
                diags.push(Diagnostic::error("inputs", format!("label for {var} must be one clean line")));
            }
        }
    }
    for (i, (var, _)) in deck.presets.iter().enumerate() {
        if deck.presets[i + 1..].iter().any(|(v, _)| v == var) {
            diags.push(Diagnostic::error("presets", format!("{var} set twice")));
        }
        if deck.inputs.iter().any(|(v, _)| v == var) {
            diags.push(Diagnostic::error(
                "presets",
                format!("{var} is both an input and a preset"),
            ));
        }
    }

    let step_count = deck.steps.len() as u32;
    for block in &deck.repeats {
        let locus = format!("repeat ({}, {})", block.start, block.end);
        if block.start > block.end {
            diags.push(Diagnostic::error(&locus, "start exceeds end"));
        }
        if block.start == 0 || block.end > step_count {
            diags.push(Diagnostic::error(&locus, "range refers to steps the deck does not have"));
        }
    }
    for (i, a) in deck.repeats.iter().enumerate() {
        for b in &deck.repeats[i + 1..] {
            let disjoint = a.end < b.start || b.end < a.start;
            let nested = (a.start <= b.start && b.end <= a.end) || (b.start <= a.start && a.end <= b.end);
            if a.start == b.start && a.end == b.end {
                diags.push(Diagnostic::error(
                    format!("repeat ({}, {})", a.start, a.end),
                    "duplicate repeat range",
                ));
            } else if !disjoint && !nested {
                diags.push(Diagnostic::error(
                    format!("repeat ({}, {})", b.start, b.end),
                    format!("partially overlaps repeat ({}, {})", a.start, a.end),
                ));
            }
        }
    }

    diags
}

/// Returns a copy of the deck with exactly one step changed; the source deck
/// is untouched. This is the entry point for the fault-injection demo: flip
/// a single sign, watch the whole Bernoulli sequence walk away.
pub fn mutate_flip_operation(
    deck: &Deck,
    step_number: u32,
    mutation: Mutation,
) -> Result<Deck, DeckError> {
    let mut out = deck.clone();
    let step = out
        .steps
        .iter_mut()
        .find(|s| s.number == step_number)
        .ok_or(DeckError::NoSuchStep(step_number))?;
    match mutation {
        Mutation::FlipSubAdd => {
            step.op = match step.op {
                ArithOp::Add => ArithOp::Sub,
                ArithOp::Sub => ArithOp::Add,
                other => {
                    return Err(DeckError::InapplicableMutation {
                        step: step_number,
                        op: other.keyword(),
                        mutation,
                    })
                }
            };
        }
        Mutation::SwapOperands => {
            std::mem::swap(&mut step.left, &mut step.right);
        }
    }
    Ok(out)
}
