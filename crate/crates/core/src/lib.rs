//! Stochastic circuit simulation of Johnson-Nyquist noise against resistors and
//! memristor models, with power-flow estimation and a Second-Law passivity audit.
//!
//! The crate is organised by responsibility:
//!
//! * [`noise`] synthesizes band-limited Gaussian noise with an exactly flat
//!   one-sided PSD, estimates spectra, and computes block-means statistics.
//! * [`elements`] holds the device models: thermal resistor, polynomial
//!   memristor and capacitor.
//! * [`circuits`] runs the fixed-topology testbenches (two-branch exchange
//!   loop, rectifier cell, series cascade, ideal current drive).
//! * [`audit`] provides closed-form reference values, FDT compliance checks
//!   and the passivity classifier.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod circuits;
pub mod elements;
mod error;
pub mod noise;

pub use error::{Error, Result};
