//! Exact-arithmetic emulator of the Analytical Engine's programming model.
//!
//! The crate is organized the way the machine was: [`numeric`] supplies the
//! exact rational values everything computes with, [`deck`] defines card
//! programs and their textual format, [`mill`] executes them against a store
//! of variables, [`programs`] bundles the historical decks (the Note D
//! linear-system table, the Note G Bernoulli cycle, the prime tabulation),
//! and [`bernoulli`] provides the independent oracles the engine's output is
//! checked against. [`cli`] ties it all to the `aengine` binary.

pub mod bernoulli;
pub mod cli;
pub mod deck;
pub mod mill;
pub mod numeric;
pub mod programs;
