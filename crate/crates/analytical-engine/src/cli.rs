//! The `aengine` command-line surface: run decks, compute Bernoulli
//! numbers by any of five methods, cross-check the methods against each
//! other, tabulate power sums and primes, inject faults, and diff traces.
//!
//! Every command writes deterministic bytes for a given invocation; there
//! are no timestamps and no banner. Exit codes: 0 success, 1 a detected
//! mismatch, 2 usage or parse trouble, 3 runtime failure inside the mill.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bernoulli::{
    bernoulli, bernoulli_modern, demorgan_bernoulli, egf_coefficients, eq8_sequence,
    faulhaber_sum, BernoulliConvention,
};
use crate::deck::{mutate_flip_operation, parse_deck, serialize_deck, Mutation, VarId};
use crate::mill::{execute, render_trace_table, trace_to_records, Bindings, RunLimits};
use crate::numeric::{ArithOp, Rational};
use crate::programs::{
    is_prime_trial, note_d_deck, note_g_full_deck, prime_poly_deck, solve_2x2_reference,
    LinearSystem2x2,
};

/// Text of the bundled decks, embedded at compile time. These must stay
/// byte-identical to what the constructors serialize; `cmd_check` and the
/// test suite both verify that.
pub const NOTE_D_TEXT: &str = include_str!("../decks/note_d.deck");
pub const NOTE_G_CYCLE_TEXT: &str = include_str!("../decks/note_g_cycle.deck");
pub const NOTE_G_FULL_TEXT: &str = include_str!("../decks/note_g_full.deck");
pub const PRIMES_TEXT: &str = include_str!("../decks/primes.deck");

pub const SHIPPED_DECKS: [(&str, &str); 4] = [
    ("note_d.deck", NOTE_D_TEXT),
    ("note_g_cycle.deck", NOTE_G_CYCLE_TEXT),
    ("note_g_full.deck", NOTE_G_FULL_TEXT),
    ("primes.deck", PRIMES_TEXT),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus {
    pub code: i32,
}

impl ExitStatus {
    pub const SUCCESS: ExitStatus = ExitStatus { code: 0 };
    pub const MISMATCH: ExitStatus = ExitStatus { code: 1 };
    pub const USAGE: ExitStatus = ExitStatus { code: 2 };
    pub const RUNTIME: ExitStatus = ExitStatus { code: 3 };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceMode {
    /// The six-column table of the 1843 diagram
    Table,
    /// One JSON record per executed operation
    Jsonl,
    /// Final store only
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BernoulliMethod {
    /// The defining recurrence over binomial coefficients
    Recurrence,
    /// The two-at-a-time coefficient recurrence of the Bernoulli program
    Eq8,
    /// De Morgan's divided-differences formula
    Demorgan,
    /// Reciprocal power series of (e^x - 1)/x
    Egf,
    /// Build the full tabulation deck and run it on the mill
    Engine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    /// B1 = -1/2, odd indexes above 1 vanish
    Modern,
    /// B1 = +1/2, as in sum-of-powers expansions
    SumOfPowers,
    /// Odd indexes only: B_{2k-1} here is the modern B_{2k}
    Lovelace,
}

impl From<ConventionArg> for BernoulliConvention {
    fn from(arg: ConventionArg) -> Self {
        match arg {
            ConventionArg::Modern => BernoulliConvention::ModernEven,
            ConventionArg::SumOfPowers => BernoulliConvention::SumOfPowers,
            ConventionArg::Lovelace => BernoulliConvention::LovelaceOdd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MutationArg {
    /// Exchange a subtraction for an addition (or back)
    SubAdd,
    /// Swap the two operands
    Swap,
}

impl From<MutationArg> for Mutation {
    fn from(arg: MutationArg) -> Self {
        match arg {
            MutationArg::SubAdd => Mutation::FlipSubAdd,
            MutationArg::Swap => Mutation::SwapOperands,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "aengine",
    version,
    about = "Exact-arithmetic emulator of the Analytical Engine's card-deck programs"
)]
struct Cli {
    /// Accepted for scripted use; output carries no banner either way
    #[arg(long, global = true)]
    plain: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a deck file and print the final store
    Run {
        deck: PathBuf,
        /// Bind an input or override a preset, e.g. --set V1=3 (repeatable)
        #[arg(long = "set", value_name = "Vk=value")]
        sets: Vec<String>,
        #[arg(long, value_enum, default_value_t = TraceMode::None)]
        trace: TraceMode,
        /// Abort after this many executed operations
        #[arg(long, default_value_t = RunLimits::default().max_executed_steps)]
        max_steps: u64,
    },
    /// Compute one Bernoulli number
    Bernoulli {
        /// Index under the chosen convention
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        #[arg(long, value_enum, default_value_t = ConventionArg::Modern)]
        convention: ConventionArg,
        #[arg(long, value_enum, default_value_t = BernoulliMethod::Recurrence)]
        method: BernoulliMethod,
    },
    /// Cross-check every computation path against the others
    Check,
    /// Sum of the first x p-th powers by the Bernoulli closed form
    SumPowers {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        x: u64,
        /// Also sum the long way and compare
        #[arg(long)]
        brute_force: bool,
    },
    /// Tabulate x^2 + x + 41 by differences and verify primality
    Primes {
        #[arg(long, default_value_t = 40)]
        count: u32,
    },
    /// Flip one step of a deck and write the mutated deck
    Mutate {
        deck: PathBuf,
        /// Step number to mutate
        #[arg(long)]
        flip_at: u32,
        #[arg(long, value_enum)]
        kind: MutationArg,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two JSON Lines traces, reporting the first divergence
    Diff { trace_a: PathBuf, trace_b: PathBuf },
    /// Write the bundled decks into a directory
    Export {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let status = match cli.command {
        Command::Run {
            deck,
            sets,
            trace,
            max_steps,
        } => cmd_run(
            &mut out,
            &mut err,
            &deck,
            &sets,
            trace,
            &RunLimits {
                max_executed_steps: max_steps,
            },
        ),
        Command::Bernoulli {
            n,
            convention,
            method,
        } => cmd_bernoulli(&mut out, &mut err, n, convention.into(), method),
        Command::Check => cmd_check(&mut out),
        Command::SumPowers { p, x, brute_force } => {
            cmd_sum_powers(&mut out, &mut err, p, x, brute_force)
        }
        Command::Primes { count } => cmd_primes(&mut out, &mut err, count),
        Command::Mutate {
            deck,
            flip_at,
            kind,
            out: out_path,
        } => cmd_mutate(&mut out, &mut err, &deck, flip_at, kind.into(), out_path.as_deref()),
        Command::Diff { trace_a, trace_b } => cmd_diff(&mut out, &mut err, &trace_a, &trace_b),
        Command::Export { dir } => cmd_export(&mut out, &mut err, &dir),
    };
    status.code
}

fn parse_set(text: &str) -> Result<(VarId, Rational), String> {
    let (var, value) = text
        .split_once('=')
        .ok_or_else(|| format!("--set wants Vk=value, got {text:?}"))?;
    let var = var.trim();
    let index: u32 = var
        .strip_prefix('V')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| format!("--set wants a variable like V3, got {var:?}"))?;
    let value = Rational::from_str(value.trim())
        .map_err(|e| format!("--set value {:?}: {e}", value.trim()))?;
    Ok((VarId(index), value))
}

fn write_finals(out: &mut impl Write, store: &crate::mill::Store) -> io::Result<()> {
    writeln!(out, "final store:")?;
    for (var, cell) in store.touched() {
        writeln!(out, "{var} = {}", cell.value)?;
    }
    Ok(())
}

pub fn cmd_run(
    out: &mut impl Write,
    err: &mut impl Write,
    deck_path: &Path,
    sets: &[String],
    trace: TraceMode,
    limits: &RunLimits,
) -> ExitStatus {
    run_inner(out, err, deck_path, sets, trace, limits).unwrap_or(ExitStatus::RUNTIME)
}

fn run_inner(
    out: &mut impl Write,
    err: &mut impl Write,
    deck_path: &Path,
    sets: &[String],
    trace: TraceMode,
    limits: &RunLimits,
) -> io::Result<ExitStatus> {
    let text = match fs::read_to_string(deck_path) {
        Ok(text) => text,
        Err(e) => {
            writeln!(err, "cannot read {}: {e}", deck_path.display())?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let deck = match parse_deck(&text) {
        Ok(deck) => deck,
        Err(e) => {
            writeln!(err, "{}: {e}", deck_path.display())?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let mut bindings = Bindings::new();
    for set in sets {
        match parse_set(set) {
            Ok((var, value)) => {
                bindings.insert(var, value);
            }
            Err(msg) => {
                writeln!(err, "{msg}")?;
                return Ok(ExitStatus::USAGE);
            }
        }
    }
    let result = match execute(&deck, &bindings, limits) {
        Ok(result) => result,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(ExitStatus::RUNTIME);
        }
    };
    match trace {
        TraceMode::Jsonl => {
            // Machine-readable mode prints the records and nothing else.
            write!(out, "{}", trace_to_records(&result.trace))?;
        }
        TraceMode::Table => {
            write!(out, "{}", render_trace_table(&result.trace, &deck))?;
            writeln!(out)?;
            write_finals(out, &result.final_store)?;
        }
        TraceMode::None => {
            write_finals(out, &result.final_store)?;
        }
    }
    Ok(ExitStatus::SUCCESS)
}

/// The tabulation index k such that the requested number is B_{2k-1} in
/// the odd-index convention, the only values the Bernoulli deck produces.
fn note_g_index(convention: BernoulliConvention, n: i64) -> Option<u32> {
    match convention {
        BernoulliConvention::LovelaceOdd if n >= 1 && n % 2 == 1 => Some(((n + 1) / 2) as u32),
        BernoulliConvention::ModernEven | BernoulliConvention::SumOfPowers
            if n >= 2 && n % 2 == 0 =>
        {
            Some((n / 2) as u32)
        }
        _ => None,
    }
}

pub fn cmd_bernoulli(
    out: &mut impl Write,
    err: &mut impl Write,
    n: i64,
    convention: BernoulliConvention,
    method: BernoulliMethod,
) -> ExitStatus {
    bernoulli_inner(out, err, n, convention, method).unwrap_or(ExitStatus::RUNTIME)
}

fn bernoulli_inner(
    out: &mut impl Write,
    err: &mut impl Write,
    n: i64,
    convention: BernoulliConvention,
    method: BernoulliMethod,
) -> io::Result<ExitStatus> {
    // The recurrence path also validates the (convention, index) pair.
    let by_recurrence = match bernoulli(convention, n) {
        Ok(value) => value,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let modern_index = match convention {
        BernoulliConvention::LovelaceOdd => n + 1,
        _ => n,
    } as u32;
    let value = match method {
        BernoulliMethod::Recurrence => by_recurrence,
        BernoulliMethod::Egf => {
            let from_series = egf_coefficients(modern_index).bernoulli_at(modern_index);
            if convention == BernoulliConvention::SumOfPowers && n == 1 {
                -&from_series
            } else {
                from_series
            }
        }
        BernoulliMethod::Demorgan => {
            if modern_index < 2 {
                writeln!(err, "the divided-differences formula starts at index 2")?;
                return Ok(ExitStatus::USAGE);
            }
            demorgan_bernoulli(modern_index - 1)
        }
        BernoulliMethod::Eq8 => match note_g_index(convention, n) {
            Some(k) => eq8_sequence(u64::from(k))
                .pop()
                .expect("k >= 1 gives a nonempty sequence"),
            None => {
                writeln!(err, "the coefficient recurrence only reaches B2, B4, ... (odd indexes in the 1843 numbering); index {n} is outside it")?;
                return Ok(ExitStatus::USAGE);
            }
        },
        BernoulliMethod::Engine => match note_g_index(convention, n) {
            Some(k) => {
                let deck = note_g_full_deck(k);
                match execute(&deck, &Bindings::new(), &RunLimits::default()) {
                    Ok(result) => result.final_store.state(VarId(20 + k)).value.clone(),
                    Err(e) => {
                        writeln!(err, "{e}")?;
                        return Ok(ExitStatus::RUNTIME);
                    }
                }
            }
            None => {
                writeln!(err, "the tabulation deck only produces B2, B4, ... (odd indexes in the 1843 numbering); index {n} is outside it")?;
                return Ok(ExitStatus::USAGE);
            }
        },
    };
    writeln!(out, "{value}")?;
    Ok(ExitStatus::SUCCESS)
}

/// Deterministic systems with nonzero determinant, coefficients in
/// [-9, 9]; seeded so check output never varies.
fn seeded_systems(count: usize) -> Vec<LinearSystem2x2> {
    let mut rng = ChaCha8Rng::seed_from_u64(1843);
    let mut systems = Vec::with_capacity(count);
    while systems.len() < count {
        let c: Vec<i64> = (0..6).map(|_| rng.gen_range(-9..=9)).collect();
        if c[0] * c[4] - c[3] * c[1] == 0 {
            continue;
        }
        systems.push(LinearSystem2x2 {
            m: Rational::from_integer(c[0]),
            n: Rational::from_integer(c[1]),
            d: Rational::from_integer(c[2]),
            m_prime: Rational::from_integer(c[3]),
            n_prime: Rational::from_integer(c[4]),
            d_prime: Rational::from_integer(c[5]),
        });
    }
    systems
}

fn brute_force_power_sum(p: u32, x: u64) -> BigInt {
    let mut sum = BigInt::from(0);
    for k in 1..=x {
        sum += BigInt::from(k).pow(p);
    }
    sum
}

fn suite_oracle_agreement() -> Result<(), String> {
    let eq8 = eq8_sequence(15);
    let series = egf_coefficients(30);
    for k in 1..=15u32 {
        let modern = bernoulli_modern(u64::from(2 * k));
        let demorgan = demorgan_bernoulli(2 * k - 1);
        let egf = series.bernoulli_at(2 * k);
        let from_eq8 = &eq8[(k - 1) as usize];
        if modern != demorgan || modern != egf || &modern != from_eq8 {
            return Err(format!("methods disagree at index {}", 2 * k));
        }
    }
    for (index, expect) in [(2, "1/6"), (6, "1/42"), (8, "-1/30"), (10, "5/66")] {
        if bernoulli_modern(index).to_string() != expect {
            return Err(format!("B{index} is not {expect}"));
        }
    }
    Ok(())
}

fn suite_engine_equivalence() -> Result<(), String> {
    let deck = note_g_full_deck(10);
    let result = execute(&deck, &Bindings::new(), &RunLimits::default())
        .map_err(|e| e.to_string())?;
    for (i, expect) in eq8_sequence(10).iter().enumerate() {
        let got = &result.final_store.state(VarId(21 + i as u32)).value;
        if got != expect {
            return Err(format!("tabulated value {} of 10 is wrong", i + 1));
        }
    }
    // The embedded deck texts must be exactly what the constructors
    // serialize today.
    let fresh = [
        ("note_d.deck", serialize_deck(&note_d_deck())),
        ("note_g_cycle.deck", serialize_deck(&crate::programs::note_g_cycle_deck(4))),
        ("note_g_full.deck", serialize_deck(&note_g_full_deck(4))),
        ("primes.deck", serialize_deck(&prime_poly_deck(40))),
    ];
    for ((name, embedded), (_, current)) in SHIPPED_DECKS.iter().zip(&fresh) {
        if embedded != current {
            return Err(format!("embedded {name} differs from its constructor"));
        }
    }
    Ok(())
}

fn suite_faulhaber_brute() -> Result<(), String> {
    for p in 0..=10u32 {
        for x in [0u64, 1, 2, 7, 50, 120] {
            let closed = faulhaber_sum(p, x).map_err(|e| e.to_string())?;
            if closed != brute_force_power_sum(p, x) {
                return Err(format!("closed form disagrees at p={p}, x={x}"));
            }
        }
    }
    let big = faulhaber_sum(10, 1000).map_err(|e| e.to_string())?;
    if big.to_string() != "91409924241424243424241924242500" {
        return Err("tenth powers of 1..1000 misfire".to_string());
    }
    Ok(())
}

fn suite_note_d_randomized() -> Result<(), String> {
    let deck = note_d_deck();
    for (i, sys) in seeded_systems(100).iter().enumerate() {
        let (x, y) = solve_2x2_reference(sys).expect("generator rejects singular systems");
        let bindings: Bindings = [
            (VarId(1), sys.m.clone()),
            (VarId(2), sys.n.clone()),
            (VarId(3), sys.d.clone()),
            (VarId(4), sys.m_prime.clone()),
            (VarId(5), sys.n_prime.clone()),
            (VarId(6), sys.d_prime.clone()),
        ]
        .into_iter()
        .collect();
        let result = execute(&deck, &bindings, &RunLimits::default())
            .map_err(|e| format!("system {i}: {e}"))?;
        if result.final_store.state(VarId(16)).value != x
            || result.final_store.state(VarId(17)).value != y
        {
            return Err(format!("system {i} disagrees with the reference solution"));
        }
    }
    Ok(())
}

fn suite_prime_demo() -> Result<(), String> {
    let deck = prime_poly_deck(40);
    if deck.steps.iter().any(|s| s.op != ArithOp::Add) {
        return Err("tabulation uses an operation other than addition".to_string());
    }
    let result =
        execute(&deck, &Bindings::new(), &RunLimits::default()).map_err(|e| e.to_string())?;
    for k in 0..40u32 {
        let value = &result.final_store.state(VarId(21 + k)).value;
        let as_int: u64 = value
            .to_bigint()
            .and_then(|b| u64::try_from(b).ok())
            .ok_or_else(|| format!("f({k}) is not a small integer"))?;
        if !is_prime_trial(as_int) {
            return Err(format!("f({k}) = {as_int} is composite"));
        }
    }
    Ok(())
}

pub fn cmd_check(out: &mut impl Write) -> ExitStatus {
    check_inner(out).unwrap_or(ExitStatus::RUNTIME)
}

fn check_inner(out: &mut impl Write) -> io::Result<ExitStatus> {
    let suites: [(&str, fn() -> Result<(), String>); 5] = [
        ("oracle-agreement", suite_oracle_agreement),
        ("engine-equivalence", suite_engine_equivalence),
        ("faulhaber-brute", suite_faulhaber_brute),
        ("note-d-randomized", suite_note_d_randomized),
        ("prime-demo", suite_prime_demo),
    ];
    let mut all_pass = true;
    for (name, suite) in suites {
        match suite() {
            Ok(()) => writeln!(out, "suite {name:<18} PASS")?,
            Err(detail) => {
                all_pass = false;
                writeln!(out, "suite {name:<18} FAIL: {detail}")?;
            }
        }
    }
    Ok(if all_pass {
        ExitStatus::SUCCESS
    } else {
        ExitStatus::MISMATCH
    })
}

pub fn cmd_sum_powers(
    out: &mut impl Write,
    err: &mut impl Write,
    p: u32,
    x: u64,
    brute_force: bool,
) -> ExitStatus {
    sum_powers_inner(out, err, p, x, brute_force).unwrap_or(ExitStatus::RUNTIME)
}

fn sum_powers_inner(
    out: &mut impl Write,
    err: &mut impl Write,
    p: u32,
    x: u64,
    brute_force: bool,
) -> io::Result<ExitStatus> {
    let closed = match faulhaber_sum(p, x) {
        Ok(value) => value,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(ExitStatus::RUNTIME);
        }
    };
    writeln!(out, "{closed}")?;
    if brute_force {
        let brute = brute_force_power_sum(p, x);
        writeln!(out, "{brute}")?;
        if brute == closed {
            writeln!(out, "MATCH")?;
        } else {
            writeln!(out, "MISMATCH")?;
            return Ok(ExitStatus::MISMATCH);
        }
    }
    Ok(ExitStatus::SUCCESS)
}

pub fn cmd_primes(out: &mut impl Write, err: &mut impl Write, count: u32) -> ExitStatus {
    primes_inner(out, err, count).unwrap_or(ExitStatus::RUNTIME)
}

fn primes_inner(out: &mut impl Write, err: &mut impl Write, count: u32) -> io::Result<ExitStatus> {
    if count == 0 {
        writeln!(err, "--count must be at least 1")?;
        return Ok(ExitStatus::USAGE);
    }
    let deck = prime_poly_deck(count);
    let result = match execute(&deck, &Bindings::new(), &RunLimits::default()) {
        Ok(result) => result,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(ExitStatus::RUNTIME);
        }
    };
    let mut composites = 0u32;
    for k in 0..count {
        let value = &result.final_store.state(VarId(21 + k)).value;
        let as_int = value.to_bigint().and_then(|b| u64::try_from(b).ok());
        let verdict = match as_int {
            Some(v) if is_prime_trial(v) => "prime",
            _ => {
                composites += 1;
                "composite"
            }
        };
        writeln!(out, "f({k}) = {value}  {verdict}")?;
    }
    if composites > 0 {
        writeln!(out, "{composites} composite value(s)")?;
        return Ok(ExitStatus::MISMATCH);
    }
    writeln!(out, "all prime")?;
    Ok(ExitStatus::SUCCESS)
}

pub fn cmd_mutate(
    out: &mut impl Write,
    err: &mut impl Write,
    deck_path: &Path,
    flip_at: u32,
    mutation: Mutation,
    out_path: Option<&Path>,
) -> ExitStatus {
    mutate_inner(out, err, deck_path, flip_at, mutation, out_path).unwrap_or(ExitStatus::RUNTIME)
}

fn mutate_inner(
    out: &mut impl Write,
    err: &mut impl Write,
    deck_path: &Path,
    flip_at: u32,
    mutation: Mutation,
    out_path: Option<&Path>,
) -> io::Result<ExitStatus> {
    let text = match fs::read_to_string(deck_path) {
        Ok(text) => text,
        Err(e) => {
            writeln!(err, "cannot read {}: {e}", deck_path.display())?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let deck = match parse_deck(&text) {
        Ok(deck) => deck,
        Err(e) => {
            writeln!(err, "{}: {e}", deck_path.display())?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let mutated = match mutate_flip_operation(&deck, flip_at, mutation) {
        Ok(deck) => deck,
        Err(e) => {
            writeln!(err, "{e}")?;
            return Ok(ExitStatus::USAGE);
        }
    };
    let serialized = serialize_deck(&mutated);
    match out_path {
        Some(path) => {
            if let Err(e) = fs::write(path, &serialized) {
                writeln!(err, "cannot write {}: {e}", path.display())?;
                return Ok(ExitStatus::RUNTIME);
            }
            writeln!(out, "wrote {}", path.display())?;
        }
        None => {
            write!(out, "{serialized}")?;
        }
    }
    Ok(ExitStatus::SUCCESS)
}

pub fn cmd_diff(
    out: &mut impl Write,
    err: &mut impl Write,
    path_a: &Path,
    path_b: &Path,
) -> ExitStatus {
    diff_inner(out, err, path_a, path_b).unwrap_or(ExitStatus::RUNTIME)
}

fn load_trace(
    err: &mut impl Write,
    path: &Path,
) -> io::Result<Result<Vec<serde_json::Value>, ()>> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            writeln!(err, "cannot read {}: {e}", path.display())?;
            return Ok(Err(()));
        }
    };
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match serde_json::from_str::<serde_json::Value>(line) {
            Ok(value) if value.is_object() => records.push(value),
            _ => {
                writeln!(
                    err,
                    "{} line {}: not a JSON Lines trace record",
                    path.display(),
                    i + 1
                )?;
                return Ok(Err(()));
            }
        }
    }
    Ok(Ok(records))
}

fn diff_inner(
    out: &mut impl Write,
    err: &mut impl Write,
    path_a: &Path,
    path_b: &Path,
) -> io::Result<ExitStatus> {
    let a = match load_trace(err, path_a)? {
        Ok(records) => records,
        Err(()) => return Ok(ExitStatus::USAGE),
    };
    let b = match load_trace(err, path_b)? {
        Ok(records) => records,
        Err(()) => return Ok(ExitStatus::USAGE),
    };
    for (i, (ra, rb)) in a.iter().zip(&b).enumerate() {
        if ra == rb {
            continue;
        }
        let field = |record: &serde_json::Value, key: &str| {
            record
                .get(key)
                .map(|v| v.to_string())
                .unwrap_or_else(|| "?".to_string())
        };
        let mut differing: Vec<&str> = Vec::new();
        if let (Some(oa), Some(ob)) = (ra.as_object(), rb.as_object()) {
            for (key, value) in oa {
                if ob.get(key) != Some(value) {
                    differing.push(key);
                }
            }
            for key in ob.keys() {
                if !oa.contains_key(key) {
                    differing.push(key);
                }
            }
        }
        writeln!(
            out,
            "first divergence at record {}: ordinal {}, step {}, fields: {}",
            i + 1,
            field(ra, "ordinal"),
            field(ra, "step_number"),
            differing.join(", ")
        )?;
        writeln!(out, "a: {ra}")?;
        writeln!(out, "b: {rb}")?;
        return Ok(ExitStatus::MISMATCH);
    }
    if a.len() != b.len() {
        writeln!(
            out,
            "traces agree through record {} but lengths differ: {} vs {}",
            a.len().min(b.len()),
            a.len(),
            b.len()
        )?;
        return Ok(ExitStatus::MISMATCH);
    }
    writeln!(out, "identical")?;
    Ok(ExitStatus::SUCCESS)
}

pub fn cmd_export(out: &mut impl Write, err: &mut impl Write, dir: &Path) -> ExitStatus {
    export_inner(out, err, dir).unwrap_or(ExitStatus::RUNTIME)
}

fn export_inner(out: &mut impl Write, err: &mut impl Write, dir: &Path) -> io::Result<ExitStatus> {
    if let Err(e) = fs::create_dir_all(dir) {
        writeln!(err, "cannot create {}: {e}", dir.display())?;
        return Ok(ExitStatus::RUNTIME);
    }
    for (name, text) in SHIPPED_DECKS {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, text) {
            writeln!(err, "cannot write {}: {e}", path.display())?;
            return Ok(ExitStatus::RUNTIME);
        }
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(ExitStatus::SUCCESS)
}
