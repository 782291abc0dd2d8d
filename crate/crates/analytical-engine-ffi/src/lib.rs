//! C ABI over the emulator. Handles are opaque; every function returns an
//! `AeStatus` and writes results through out-pointers. Strings returned
//! through `char **` are heap-allocated and must go back through
//! [`ae_string_free`]; decks and runs through their own free functions.
//! Passing null where a value is required yields `NULL_ARGUMENT` rather
//! than a crash, and panics are caught at the boundary.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use analytical_engine::deck::{
    mutate_flip_operation, parse_deck, serialize_deck, Deck, Mutation, VarId,
};
use analytical_engine::mill::{
    execute, render_trace_table, trace_to_records, Bindings, MillError, RunLimits, RunResult,
};
use analytical_engine::numeric::Rational;
use analytical_engine::programs::{
    note_d_deck, note_g_cycle_deck, note_g_full_deck, prime_poly_deck,
};

/// Outcome of every call. Zero is success; everything else says why the
/// out-parameters were left untouched.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    MutationError = 4,
    InvalidArgument = 5,
    UnboundInput = 6,
    VarOutOfRange = 7,
    DivisionByZero = 8,
    NonIntegerCounter = 9,
    LoopLimitExceeded = 10,
    InvalidDeck = 11,
    InternalPanic = 12,
}

/// Which single-step rewrite to apply.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeMutation {
    /// Exchange a subtraction for an addition or back
    FlipSubAdd = 0,
    /// Swap the two operands
    SwapOperands = 1,
}

/// An immutable deck (opaque).
pub struct AeDeck {
    inner: Deck,
}

/// A finished run: final store plus full trace (opaque).
pub struct AeRun {
    inner: RunResult,
}

fn mill_status(e: &MillError) -> AeStatus {
    match e {
        MillError::UnboundInput(_) => AeStatus::UnboundInput,
        MillError::VarOutOfRange { .. } => AeStatus::VarOutOfRange,
        MillError::InvalidDeck(_) => AeStatus::InvalidDeck,
        MillError::DivisionByZero { .. } => AeStatus::DivisionByZero,
        MillError::NonIntegerCounter { .. } => AeStatus::NonIntegerCounter,
        MillError::LoopLimitExceeded { .. } => AeStatus::LoopLimitExceeded,
    }
}

fn guarded(body: impl FnOnce() -> AeStatus) -> AeStatus {
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(AeStatus::InternalPanic)
}

/// Writes `deck` through `out` as a fresh handle.
fn emit_deck(deck: Deck, out: *mut *mut AeDeck) -> AeStatus {
    unsafe {
        *out = Box::into_raw(Box::new(AeDeck { inner: deck }));
    }
    AeStatus::Ok
}

fn emit_string(text: String, out: *mut *mut c_char) -> AeStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe {
                *out = c.into_raw();
            }
            AeStatus::Ok
        }
        // The emulator never emits interior NULs; treat one as a bug.
        Err(_) => AeStatus::InternalPanic,
    }
}

/// Parses canonical deck text into a handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_parse(text: *const c_char, out: *mut *mut AeDeck) -> AeStatus {
    guarded(|| {
        if text.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(t) => t,
            Err(_) => return AeStatus::InvalidUtf8,
        };
        match parse_deck(text) {
            Ok(deck) => emit_deck(deck, out),
            Err(_) => AeStatus::ParseError,
        }
    })
}

/// The bundled simultaneous-equations deck.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_note_d(out: *mut *mut AeDeck) -> AeStatus {
    guarded(|| {
        if out.is_null() {
            return AeStatus::NullArgument;
        }
        emit_deck(note_d_deck(), out)
    })
}

/// One Bernoulli cycle for the given n >= 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_note_g_cycle(n: u32, out: *mut *mut AeDeck) -> AeStatus {
    guarded(|| {
        if out.is_null() {
            return AeStatus::NullArgument;
        }
        if n == 0 {
            return AeStatus::InvalidArgument;
        }
        emit_deck(note_g_cycle_deck(n), out)
    })
}

/// The full Bernoulli tabulation up to B_{2*n_max-1}, n_max >= 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_note_g_full(n_max: u32, out: *mut *mut AeDeck) -> AeStatus {
    guarded(|| {
        if out.is_null() {
            return AeStatus::NullArgument;
        }
        if n_max == 0 {
            return AeStatus::InvalidArgument;
        }
        emit_deck(note_g_full_deck(n_max), out)
    })
}

/// The prime-polynomial tabulation of the first `count` values, count >= 1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_primes(count: u32, out: *mut *mut AeDeck) -> AeStatus {
    guarded(|| {
        if out.is_null() {
            return AeStatus::NullArgument;
        }
        if count == 0 {
            return AeStatus::InvalidArgument;
        }
        emit_deck(prime_poly_deck(count), out)
    })
}

/// Canonical text of a deck; free the result with [`ae_string_free`].
///
/// # Safety
/// `deck` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_serialize(
    deck: *const AeDeck,
    out: *mut *mut c_char,
) -> AeStatus {
    guarded(|| {
        if deck.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        let deck = unsafe { &*deck };
        emit_string(serialize_deck(&deck.inner), out)
    })
}

/// Number of operation cards in the deck.
///
/// # Safety
/// `deck` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_step_count(deck: *const AeDeck, out: *mut u32) -> AeStatus {
    guarded(|| {
        if deck.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        unsafe {
            *out = (*deck).inner.steps.len() as u32;
        }
        AeStatus::Ok
    })
}

/// A copy of the deck with one step rewritten.
///
/// # Safety
/// `deck` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_mutate(
    deck: *const AeDeck,
    step: u32,
    kind: AeMutation,
    out: *mut *mut AeDeck,
) -> AeStatus {
    guarded(|| {
        if deck.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        let mutation = match kind {
            AeMutation::FlipSubAdd => Mutation::FlipSubAdd,
            AeMutation::SwapOperands => Mutation::SwapOperands,
        };
        match mutate_flip_operation(unsafe { &(*deck).inner }, step, mutation) {
            Ok(mutated) => emit_deck(mutated, out),
            Err(_) => AeStatus::MutationError,
        }
    })
}

/// Releases a deck handle. Null is tolerated.
///
/// # Safety
/// `deck` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn ae_deck_free(deck: *mut AeDeck) {
    if !deck.is_null() {
        drop(unsafe { Box::from_raw(deck) });
    }
}

/// Runs a deck. Bindings come as parallel arrays: `vars[i]` receives the
/// rational in `values[i]` (text form, e.g. "-691/2730"). `max_steps` of
/// zero means the default budget of one million operations.
///
/// # Safety
/// `deck` must be a live handle; `vars`/`values` must hold `bindings_len`
/// readable entries (null allowed when the length is zero); `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ae_execute(
    deck: *const AeDeck,
    vars: *const u32,
    values: *const *const c_char,
    bindings_len: usize,
    max_steps: u64,
    out: *mut *mut AeRun,
) -> AeStatus {
    guarded(|| {
        if deck.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        if bindings_len > 0 && (vars.is_null() || values.is_null()) {
            return AeStatus::NullArgument;
        }
        let mut bindings = Bindings::new();
        for i in 0..bindings_len {
            let var = unsafe { *vars.add(i) };
            let value_ptr = unsafe { *values.add(i) };
            if value_ptr.is_null() {
                return AeStatus::NullArgument;
            }
            let text = match unsafe { CStr::from_ptr(value_ptr) }.to_str() {
                Ok(t) => t,
                Err(_) => return AeStatus::InvalidUtf8,
            };
            let value = match Rational::from_str(text) {
                Ok(v) => v,
                Err(_) => return AeStatus::InvalidArgument,
            };
            bindings.insert(VarId(var), value);
        }
        let limits = if max_steps == 0 {
            RunLimits::default()
        } else {
            RunLimits {
                max_executed_steps: max_steps,
            }
        };
        match execute(unsafe { &(*deck).inner }, &bindings, &limits) {
            Ok(result) => {
                unsafe {
                    *out = Box::into_raw(Box::new(AeRun { inner: result }));
                }
                AeStatus::Ok
            }
            Err(e) => mill_status(&e),
        }
    })
}

/// Number of operations the run executed.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_run_steps_executed(run: *const AeRun, out: *mut u64) -> AeStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        unsafe {
            *out = (*run).inner.steps_executed;
        }
        AeStatus::Ok
    })
}

/// Final value of one variable, in the canonical "[-]p/q" text form; free
/// it with [`ae_string_free`].
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_run_value(
    run: *const AeRun,
    var: u32,
    out: *mut *mut c_char,
) -> AeStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        let store = unsafe { &(*run).inner.final_store };
        match store.get(VarId(var)) {
            Some(cell) => emit_string(cell.value.to_string(), out),
            None => AeStatus::VarOutOfRange,
        }
    })
}

/// How many values the variable has received (preset and bound values
/// count once).
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_run_revision(
    run: *const AeRun,
    var: u32,
    out: *mut u64,
) -> AeStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        let store = unsafe { &(*run).inner.final_store };
        match store.get(VarId(var)) {
            Some(cell) => {
                unsafe {
                    *out = cell.revision;
                }
                AeStatus::Ok
            }
            None => AeStatus::VarOutOfRange,
        }
    })
}

/// The run's trace as JSON Lines; free with [`ae_string_free`].
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_run_trace_jsonl(
    run: *const AeRun,
    out: *mut *mut c_char,
) -> AeStatus {
    guarded(|| {
        if run.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        emit_string(trace_to_records(unsafe { &(*run).inner.trace }), out)
    })
}

/// The run rendered as the six-column diagram table. The deck must be the
/// one the run came from (it supplies the repeat-block structure). Free
/// the string with [`ae_string_free`].
///
/// # Safety
/// `run` and `deck` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ae_run_render_table(
    run: *const AeRun,
    deck: *const AeDeck,
    out: *mut *mut c_char,
) -> AeStatus {
    guarded(|| {
        if run.is_null() || deck.is_null() || out.is_null() {
            return AeStatus::NullArgument;
        }
        let table = render_trace_table(unsafe { &(*run).inner.trace }, unsafe { &(*deck).inner });
        emit_string(table, out)
    })
}

/// Releases a run handle. Null is tolerated.
///
/// # Safety
/// `run` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn ae_run_free(run: *mut AeRun) {
    if !run.is_null() {
        drop(unsafe { Box::from_raw(run) });
    }
}

/// Releases a string produced by this library. Null is tolerated.
///
/// # Safety
/// `text` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn ae_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    unsafe fn take_string(ptr: *mut c_char) -> String {
        let text = CStr::from_ptr(ptr).to_str().unwrap().to_string();
        ae_string_free(ptr);
        text
    }

    #[test]
    fn parse_serialize_round_trip() {
        unsafe {
            let mut deck: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_note_g_cycle(4, &mut deck), AeStatus::Ok);
            let mut text: *mut c_char = ptr::null_mut();
            assert_eq!(ae_deck_serialize(deck, &mut text), AeStatus::Ok);
            let first = take_string(text);

            let c = CString::new(first.clone()).unwrap();
            let mut reparsed: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_parse(c.as_ptr(), &mut reparsed), AeStatus::Ok);
            let mut text2: *mut c_char = ptr::null_mut();
            assert_eq!(ae_deck_serialize(reparsed, &mut text2), AeStatus::Ok);
            assert_eq!(take_string(text2), first);

            let mut count = 0u32;
            assert_eq!(ae_deck_step_count(deck, &mut count), AeStatus::Ok);
            assert_eq!(count, 25);

            ae_deck_free(deck);
            ae_deck_free(reparsed);
        }
    }

    #[test]
    fn full_tabulation_runs() {
        unsafe {
            let mut deck: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_note_g_full(4, &mut deck), AeStatus::Ok);
            let mut run: *mut AeRun = ptr::null_mut();
            assert_eq!(
                ae_execute(deck, ptr::null(), ptr::null(), 0, 0, &mut run),
                AeStatus::Ok
            );

            let mut steps = 0u64;
            assert_eq!(ae_run_steps_executed(run, &mut steps), AeStatus::Ok);
            assert_eq!(steps, 141);

            let mut value: *mut c_char = ptr::null_mut();
            assert_eq!(ae_run_value(run, 24, &mut value), AeStatus::Ok);
            assert_eq!(take_string(value), "-1/30");

            let mut rev = 0u64;
            assert_eq!(ae_run_revision(run, 24, &mut rev), AeStatus::Ok);
            assert_eq!(rev, 1);

            let mut jsonl: *mut c_char = ptr::null_mut();
            assert_eq!(ae_run_trace_jsonl(run, &mut jsonl), AeStatus::Ok);
            assert_eq!(take_string(jsonl).lines().count(), 141);

            let mut table: *mut c_char = ptr::null_mut();
            assert_eq!(ae_run_render_table(run, deck, &mut table), AeStatus::Ok);
            assert!(take_string(table).contains("Here follows a repetition"));

            ae_run_free(run);
            ae_deck_free(deck);
        }
    }

    #[test]
    fn bindings_reach_the_store() {
        unsafe {
            let mut deck: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_note_d(&mut deck), AeStatus::Ok);
            let vars: [u32; 6] = [1, 2, 3, 4, 5, 6];
            let owned: Vec<CString> = ["1", "1", "3", "1", "-1", "1"]
                .iter()
                .map(|s| CString::new(*s).unwrap())
                .collect();
            let values: Vec<*const c_char> = owned.iter().map(|c| c.as_ptr()).collect();
            let mut run: *mut AeRun = ptr::null_mut();
            assert_eq!(
                ae_execute(deck, vars.as_ptr(), values.as_ptr(), 6, 0, &mut run),
                AeStatus::Ok
            );
            let mut x: *mut c_char = ptr::null_mut();
            assert_eq!(ae_run_value(run, 16, &mut x), AeStatus::Ok);
            assert_eq!(take_string(x), "2");
            ae_run_free(run);
            ae_deck_free(deck);
        }
    }

    #[test]
    fn error_codes() {
        unsafe {
            let mut deck: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_parse(ptr::null(), &mut deck), AeStatus::NullArgument);
            assert_eq!(ae_deck_note_g_cycle(0, &mut deck), AeStatus::InvalidArgument);

            let garbage = CString::new("not a deck").unwrap();
            assert_eq!(
                ae_deck_parse(garbage.as_ptr(), &mut deck),
                AeStatus::ParseError
            );

            // Unbound inputs surface as their own status.
            assert_eq!(ae_deck_note_d(&mut deck), AeStatus::Ok);
            let mut run: *mut AeRun = ptr::null_mut();
            assert_eq!(
                ae_execute(deck, ptr::null(), ptr::null(), 0, 0, &mut run),
                AeStatus::UnboundInput
            );

            // A singular system divides by zero.
            let vars: [u32; 6] = [1, 2, 3, 4, 5, 6];
            let owned: Vec<CString> = ["1", "1", "1", "2", "2", "2"]
                .iter()
                .map(|s| CString::new(*s).unwrap())
                .collect();
            let values: Vec<*const c_char> = owned.iter().map(|c| c.as_ptr()).collect();
            assert_eq!(
                ae_execute(deck, vars.as_ptr(), values.as_ptr(), 6, 0, &mut run),
                AeStatus::DivisionByZero
            );

            // A starved step budget is reported as such.
            let mut full: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_note_g_full(4, &mut full), AeStatus::Ok);
            assert_eq!(
                ae_execute(full, ptr::null(), ptr::null(), 0, 10, &mut run),
                AeStatus::LoopLimitExceeded
            );

            // Value lookups police the store bounds.
            assert_eq!(
                ae_execute(full, ptr::null(), ptr::null(), 0, 0, &mut run),
                AeStatus::Ok
            );
            let mut value: *mut c_char = ptr::null_mut();
            assert_eq!(ae_run_value(run, 1000, &mut value), AeStatus::VarOutOfRange);

            // Bad binding text.
            let bad = CString::new("one half").unwrap();
            let bad_values = [bad.as_ptr()];
            let bad_vars = [3u32];
            let mut run2: *mut AeRun = ptr::null_mut();
            assert_eq!(
                ae_execute(full, bad_vars.as_ptr(), bad_values.as_ptr(), 1, 0, &mut run2),
                AeStatus::InvalidArgument
            );

            ae_run_free(run);
            ae_deck_free(full);
            ae_deck_free(deck);
            ae_string_free(ptr::null_mut());
            ae_run_free(ptr::null_mut());
            ae_deck_free(ptr::null_mut());
        }
    }

    #[test]
    fn mutation_through_the_boundary() {
        unsafe {
            let mut deck: *mut AeDeck = ptr::null_mut();
            assert_eq!(ae_deck_note_g_cycle(4, &mut deck), AeStatus::Ok);
            let mut flipped: *mut AeDeck = ptr::null_mut();
            assert_eq!(
                ae_deck_mutate(deck, 6, AeMutation::FlipSubAdd, &mut flipped),
                AeStatus::Ok
            );
            let mut run: *mut AeRun = ptr::null_mut();
            assert_eq!(
                ae_execute(flipped, ptr::null(), ptr::null(), 0, 0, &mut run),
                AeStatus::Ok
            );
            let mut value: *mut c_char = ptr::null_mut();
            assert_eq!(ae_run_value(run, 24, &mut value), AeStatus::Ok);
            assert_ne!(take_string(value), "-1/30");

            // Step 1 is a multiplication; the sub/add flip has no purchase.
            let mut nope: *mut AeDeck = ptr::null_mut();
            assert_eq!(
                ae_deck_mutate(deck, 1, AeMutation::FlipSubAdd, &mut nope),
                AeStatus::MutationError
            );

            ae_run_free(run);
            ae_deck_free(flipped);
            ae_deck_free(deck);
        }
    }

    #[test]
    fn header_is_generated() {
        let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("include/analytical_engine.h");
        let text = std::fs::read_to_string(header).expect("build.rs wrote the header");
        for symbol in [
            "ae_deck_parse",
            "ae_execute",
            "ae_run_trace_jsonl",
            "ae_string_free",
            "AE_STATUS_DIVISION_BY_ZERO",
        ] {
            assert!(text.contains(symbol), "{symbol} missing from header");
        }
    }
}
