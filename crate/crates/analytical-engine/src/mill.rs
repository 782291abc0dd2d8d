//! The virtual machine: a store of variable columns and the execution loop
//! that runs a deck against it.
//!
//! Semantics, in the order they bite: operands are read before anything is
//! written (so a step may receive into one of its own operands); the result
//! fans out to every receiver, bumping each receiver's revision by one;
//! operands marked `!` are reduced to 0 afterwards without touching their
//! revision. After a step that closes a repeat block, that block's counter
//! is inspected: nonzero sends control back to the block's start, zero falls
//! through. Blocks sharing an end step are tested innermost first. Execution
//! is a pure function of (deck, bindings, limits); run it twice, get the
//! same bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deck::{validate_deck, Deck, Diagnostic, RepeatBlock, Severity, Step, VarId};
use crate::numeric::{rat_arith, NumericError, Rational};

/// One store column: current value plus the revision superscript counting
/// how many values it has received (preset or bound values count once).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarState {
    pub value: Rational,
    pub revision: u64,
}

impl Default for VarState {
    fn default() -> Self {
        VarState {
            value: Rational::zero(),
            revision: 0,
        }
    }
}

/// The engine's memory: `capacity` variable columns, addressed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Store {
    capacity: u32,
    cells: Vec<VarState>,
}

pub const DEFAULT_CAPACITY: u32 = 100;

impl Store {
    pub fn new(capacity: u32) -> Store {
        Store {
            capacity,
            cells: vec![VarState::default(); capacity as usize],
        }
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn get(&self, var: VarId) -> Option<&VarState> {
        self.cells.get(var.0 as usize)
    }

    /// State of a variable known to be in range.
    pub fn state(&self, var: VarId) -> &VarState {
        &self.cells[var.0 as usize]
    }

    fn state_mut(&mut self, var: VarId) -> &mut VarState {
        &mut self.cells[var.0 as usize]
    }

    /// Binds an initial value: the revision becomes 1 regardless of whether
    /// a preset was already applied, since presets and bindings together
    /// count as one initial receive.
    fn bind(&mut self, var: VarId, value: Rational) {
        let cell = self.state_mut(var);
        cell.value = value;
        cell.revision = 1;
    }

    /// Variables that have received anything this run, ascending by index.
    pub fn touched(&self) -> impl Iterator<Item = (VarId, &VarState)> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.revision > 0)
            .map(|(i, c)| (VarId(i as u32), c))
    }
}

/// An operand as the trace saw it: which column, at which revision, holding
/// what, and whether it gave off its value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperandTrace {
    pub var: VarId,
    pub revision: u64,
    pub value: Rational,
    pub zeroed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverTrace {
    pub var: VarId,
    /// The revision after receiving (always the old revision + 1).
    pub revision: u64,
}

/// Position within the repeat-block structure: which block (by index into
/// the deck's repeat list) and which pass of it, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassEntry {
    pub block: usize,
    pub iteration: u64,
}

/// One executed operation, carrying everything the 1843 table's six columns
/// need. Field order here is the stable order of the JSON Lines records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    pub ordinal: u64,
    pub step_number: u32,
    pub pass_stack: Vec<PassEntry>,
    pub op_symbol: String,
    pub operands: [OperandTrace; 2],
    pub receivers: Vec<ReceiverTrace>,
    pub result: Rational,
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub final_store: Store,
    pub trace: Vec<TraceRow>,
    pub steps_executed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_executed_steps: u64,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_executed_steps: 1_000_000,
        }
    }
}

pub type Bindings = BTreeMap<VarId, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MillError {
    #[error("input {0} was never bound")]
    UnboundInput(VarId),
    #[error("{var} is out of range for a store of {capacity} columns")]
    VarOutOfRange { var: VarId, capacity: u32 },
    #[error("deck failed validation: {0:?}")]
    InvalidDeck(Vec<Diagnostic>),
    #[error("division by zero at step {step} (operation {ordinal})")]
    DivisionByZero { step: u32, ordinal: u64 },
    #[error(
        "counter {counter} of repeat ({start}, {end}) holds {value}, not a nonnegative integer"
    )]
    NonIntegerCounter {
        start: u32,
        end: u32,
        counter: VarId,
        value: Rational,
    },
    #[error("exceeded the limit of {limit} executed steps")]
    LoopLimitExceeded { limit: u64 },
}

/// Applies one step to the store and reports what happened. The ordinal and
/// pass stack are the executor's business; rows made here carry ordinal 0
/// and an empty stack until [`execute`] fills them in.
pub fn apply_step(store: &mut Store, step: &Step) -> Result<TraceRow, MillError> {
    let read = |operand: &crate::deck::Operand| {
        let cell = store.state(operand.var);
        OperandTrace {
            var: operand.var,
            revision: cell.revision,
            value: cell.value.clone(),
            zeroed: operand.zero_after_read,
        }
    };
    let left = read(&step.left);
    let right = read(&step.right);

    let result = rat_arith(step.op, &left.value, &right.value).map_err(|e| match e {
        NumericError::DivisionByZero => MillError::DivisionByZero {
            step: step.number,
            ordinal: 0,
        },
        NumericError::ZeroDenominator => unreachable!("arithmetic never constructs 0 denominators"),
    })?;

    // Give-off happens once the result exists; a receiver that was also a
    // zeroed operand ends up with the result, not the zero.
    if step.left.zero_after_read {
        store.state_mut(step.left.var).value = Rational::zero();
    }
    if step.right.zero_after_read {
        store.state_mut(step.right.var).value = Rational::zero();
    }

    let mut receivers = Vec::with_capacity(step.receivers.len());
    for &var in &step.receivers {
        let cell = store.state_mut(var);
        cell.revision += 1;
        cell.value = result.clone();
        receivers.push(ReceiverTrace {
            var,
            revision: cell.revision,
        });
    }

    Ok(TraceRow {
        ordinal: 0,
        step_number: step.number,
        pass_stack: Vec::new(),
        op_symbol: step.op.symbol().to_string(),
        operands: [left, right],
        receivers,
        result,
        annotation: step.annotation.clone(),
    })
}

/// Runs a deck to completion with the default store of 100 columns.
pub fn execute(deck: &Deck, bindings: &Bindings, limits: &RunLimits) -> Result<RunResult, MillError> {
    execute_with_capacity(deck, bindings, limits, DEFAULT_CAPACITY)
}

/// Runs a deck to completion against a store of the given capacity.
pub fn execute_with_capacity(
    deck: &Deck,
    bindings: &Bindings,
    limits: &RunLimits,
    capacity: u32,
) -> Result<RunResult, MillError> {
    let diagnostics = validate_deck(deck);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(MillError::InvalidDeck(diagnostics));
    }
    let out_of_range = |var: VarId| MillError::VarOutOfRange { var, capacity };
    let mut vars_used: Vec<VarId> = Vec::new();
    for step in &deck.steps {
        vars_used.push(step.left.var);
        vars_used.push(step.right.var);
        vars_used.extend(&step.receivers);
    }
    vars_used.extend(deck.repeats.iter().map(|b| b.counter));
    vars_used.extend(deck.inputs.iter().map(|(v, _)| *v));
    vars_used.extend(deck.presets.iter().map(|(v, _)| *v));
    vars_used.extend(bindings.keys());
    if let Some(&var) = vars_used.iter().find(|v| v.0 >= capacity) {
        return Err(out_of_range(var));
    }

    let mut store = Store::new(capacity);
    for (var, value) in &deck.presets {
        store.bind(*var, value.clone());
    }
    for (var, value) in bindings {
        store.bind(*var, value.clone());
    }
    for (var, _) in &deck.inputs {
        if store.state(*var).revision == 0 {
            return Err(MillError::UnboundInput(*var));
        }
    }

    let blocks = &deck.repeats;
    let mut iterations: Vec<u64> = vec![0; blocks.len()];
    // Blocks closing at each step, innermost (largest start) first.
    let mut closing: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, b) in blocks.iter().enumerate() {
        closing.entry(b.end).or_default().push(i);
    }
    for ids in closing.values_mut() {
        ids.sort_by_key(|&i| std::cmp::Reverse(blocks[i].start));
    }

    let mut trace: Vec<TraceRow> = Vec::new();
    let mut pc: u32 = 1;
    let last = deck.steps.len() as u32;
    // When control jumped here, the step it jumped from; None on fall-through.
    let mut jump_source: Option<u32> = None;

    while pc <= last {
        for (i, b) in blocks.iter().enumerate() {
            if b.start == pc {
                let continued = jump_source.is_some_and(|src| b.start <= src && src <= b.end);
                iterations[i] = if continued { iterations[i] + 1 } else { 1 };
            }
        }
        jump_source = None;

        if trace.len() as u64 >= limits.max_executed_steps {
            return Err(MillError::LoopLimitExceeded {
                limit: limits.max_executed_steps,
            });
        }

        let ordinal = trace.len() as u64 + 1;
        let step = &deck.steps[(pc - 1) as usize];
        let mut row = apply_step(&mut store, step).map_err(|e| match e {
            MillError::DivisionByZero { step, .. } => MillError::DivisionByZero { step, ordinal },
            other => other,
        })?;
        row.ordinal = ordinal;
        row.pass_stack = pass_stack_at(pc, blocks, &iterations);
        trace.push(row);

        let mut jumped = false;
        for &i in closing.get(&pc).map(Vec::as_slice).unwrap_or(&[]) {
            let b = &blocks[i];
            let counter = &store.state(b.counter).value;
            if !counter.is_integer() || counter.is_negative() {
                return Err(MillError::NonIntegerCounter {
                    start: b.start,
                    end: b.end,
                    counter: b.counter,
                    value: counter.clone(),
                });
            }
            if !counter.is_zero() {
                jump_source = Some(pc);
                pc = b.start;
                jumped = true;
                break;
            }
            // Zero: this block exits; an outer block sharing the end step
            // gets its turn.
        }
        if !jumped {
            pc += 1;
        }
    }

    Ok(RunResult {
        steps_executed: trace.len() as u64,
        final_store: store,
        trace,
    })
}

/// Enclosing blocks of a step, outermost first, paired with their current
/// pass numbers.
fn pass_stack_at(pc: u32, blocks: &[RepeatBlock], iterations: &[u64]) -> Vec<PassEntry> {
    let mut enclosing: Vec<usize> = (0..blocks.len())
        .filter(|&i| blocks[i].start <= pc && pc <= blocks[i].end)
        .collect();
    enclosing.sort_by_key(|&i| (blocks[i].start, std::cmp::Reverse(blocks[i].end)));
    enclosing
        .into_iter()
        .map(|i| PassEntry {
            block: i,
            iteration: iterations[i],
        })
        .collect()
}

/// A variable at a revision, in the trace's `^r V k` notation (`^2V13` is
/// the third value V13 has held).
fn superscripted(var: VarId, revision: u64) -> String {
    format!("^{revision}{var}")
}

const TABLE_HEADERS: [&str; 6] = [
    "Number of Operation",
    "Nature of Operation",
    "Variables acted upon",
    "Variables receiving results",
    "Indication of change",
    "Statement of Results",
];

/// Lines of the table body: either a data row or a repetition marker.
enum TableLine {
    Row([String; 6]),
    Marker(String),
}

/// Renders the run as the six-column table of the 1843 diagram. Repetition
/// boundaries get the literal marker line the table used.
pub fn render_trace_table(trace: &[TraceRow], deck: &Deck) -> String {
    let mut lines: Vec<TableLine> = Vec::new();
    for (i, row) in trace.iter().enumerate() {
        if i > 0 {
            // A block whose pass number just went up while landing on its
            // start step has genuinely jumped back.
            for entry in &row.pass_stack {
                let block = &deck.repeats[entry.block];
                if block.start != row.step_number || entry.iteration < 2 {
                    continue;
                }
                let was = trace[i - 1]
                    .pass_stack
                    .iter()
                    .find(|p| p.block == entry.block)
                    .map(|p| p.iteration);
                if was == Some(entry.iteration - 1) {
                    lines.push(TableLine::Marker(format!(
                        "Here follows a repetition of Operations {} to {}.",
                        block.start, block.end
                    )));
                }
            }
        }

        let acted = row
            .operands
            .iter()
            .map(|o| superscripted(o.var, o.revision))
            .collect::<Vec<_>>()
            .join(" ");
        let receiving = row
            .receivers
            .iter()
            .map(|r| superscripted(r.var, r.revision))
            .collect::<Vec<_>>()
            .join(" ");
        let change = row
            .operands
            .iter()
            .map(|o| {
                let name = superscripted(o.var, o.revision);
                if o.zeroed {
                    format!("{name} = 0")
                } else {
                    format!("{name} = {name}")
                }
            })
            .collect::<Vec<_>>()
            .join(", ");
        let statement = match &row.annotation {
            Some(note) => note.clone(),
            None => format!("= {}", row.result),
        };
        lines.push(TableLine::Row([
            row.ordinal.to_string(),
            row.op_symbol.clone(),
            acted,
            receiving,
            change,
            statement,
        ]));
    }

    let mut widths: [usize; 6] = TABLE_HEADERS.map(|h| h.chars().count());
    for line in &lines {
        if let TableLine::Row(cells) = line {
            for (w, cell) in widths.iter_mut().zip(cells) {
                *w = (*w).max(cell.chars().count());
            }
        }
    }

    let render_row = |cells: &[String; 6]| {
        let mut out = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str(" | ");
            }
            out.push_str(cell);
            if i < 5 {
                for _ in cell.chars().count()..widths[i] {
                    out.push(' ');
                }
            }
        }
        out.push('\n');
        out
    };

    let mut out = render_row(&TABLE_HEADERS.map(str::to_string));
    let rule_len = widths.iter().sum::<usize>() + 3 * 5;
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for line in &lines {
        match line {
            TableLine::Row(cells) => out.push_str(&render_row(cells)),
            TableLine::Marker(text) => {
                out.push_str(text);
                out.push('\n');
            }
        }
    }
    out
}

/// One JSON record per executed operation; this is the machine-readable,
/// byte-stable trace format `diff` consumes.
pub fn trace_to_records(trace: &[TraceRow]) -> String {
    let mut out = String::new();
    for row in trace {
        out.push_str(&serde_json::to_string(row).expect("trace rows always serialize"));
        out.push('\n');
    }
    out
}
