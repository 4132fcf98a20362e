//! Energy detection of Manchester-coded ambient backscatter.
//!
//! A tag modulates an ambient RF signal by switching its reflection on and
//! off; the reader decides each bit from the energies of the two halves of a
//! Manchester symbol. The crate provides the link model, the line codes, the
//! semi-coherent (SeCoMC) and non-coherent (NoCoMC) detectors with a
//! threshold baseline, closed-form BER expressions, and a seeded parallel
//! Monte Carlo harness.

pub mod analysis;
pub mod cli;
pub mod coding;
pub mod detectors;
pub mod error;
pub mod montecarlo;
pub mod selftest;
pub mod signal_model;

pub use error::{Error, Result};
