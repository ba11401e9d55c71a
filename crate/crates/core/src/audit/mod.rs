//! Closed-form reference values, FDT compliance and the passivity classifier.

mod fdt;
mod passivity;
mod reference;

pub use fdt::{check_fdt_compliance, FdtReport};
pub use passivity::{
    classify_passivity, classify_passivity_with, Classification, PassivityVerdict, SeedEstimate, DECISION_RULE_TEXT,
    DEFAULT_THRESHOLD, MIN_SEEDS, MIN_VERDICT_BLOCKS,
};
pub use reference::{expected_exchange_power, expected_memristor_absorption, fdt_reference_psd};

use serde::Serialize;

/// Time-averaged power flow with a block-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFlowEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub n_blocks: usize,
    pub block_length: usize,
    pub burn_in_discarded: usize,
}

impl PowerFlowEstimate {
    /// `|mean| / standard_error`; infinite for a nonzero mean with zero error.
    pub fn z_score(&self) -> f64 {
        if self.standard_error > 0.0 {
            self.mean.abs() / self.standard_error
        } else if self.mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Equal-weight pool of independent, equal-length estimates.
    pub fn pool(estimates: &[PowerFlowEstimate]) -> Option<PowerFlowEstimate> {
        let first = estimates.first()?;
        let n = estimates.len() as f64;
        Some(PowerFlowEstimate {
            mean: estimates.iter().map(|e| e.mean).sum::<f64>() / n,
            standard_error: estimates
                .iter()
                .map(|e| e.standard_error * e.standard_error)
                .sum::<f64>()
                .sqrt()
                / n,
            n_blocks: estimates.iter().map(|e| e.n_blocks).sum(),
            block_length: first.block_length,
            burn_in_discarded: estimates.iter().map(|e| e.burn_in_discarded).sum(),
        })
    }
}
