use serde::{Deserialize, Serialize};

use super::NoiseRecord;
use crate::{Error, Result};

/// Preferred minimum number of blocks for a block-means error.
pub const MIN_BLOCKS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockStats {
    pub mean: f64,
    /// Unbiased sample variance of the individual samples.
    pub variance: f64,
    pub standard_error: f64,
    pub n_blocks: usize,
    pub block_length: usize,
}

/// Mean with a standard error from the scatter of non-overlapping block means.
///
/// Trailing samples that do not fill a whole block still count towards the
/// mean and variance but not the error estimate.
pub fn block_means_error(samples: &[f64], block_length: usize) -> Result<BlockStats> {
    if samples.is_empty() {
        return Err(Error::Argument("empty sample series".into()));
    }
    if block_length == 0 {
        return Err(Error::Argument("block length must be positive".into()));
    }
    let n_blocks = samples.len() / block_length;
    if n_blocks < 2 {
        return Err(Error::InsufficientData(format!(
            "{} samples give fewer than two blocks of length {block_length}",
            samples.len()
        )));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let variance = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };

    let block_means: Vec<f64> = samples
        .chunks_exact(block_length)
        .map(|b| b.iter().sum::<f64>() / block_length as f64)
        .collect();
    let nb = n_blocks as f64;
    let bm_mean = block_means.iter().sum::<f64>() / nb;
    let bm_var = block_means.iter().map(|m| (m - bm_mean).powi(2)).sum::<f64>() / (nb - 1.0);

    Ok(BlockStats {
        mean,
        variance,
        standard_error: (bm_var / nb).sqrt(),
        n_blocks,
        block_length,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecordStatistics {
    pub mean: f64,
    pub variance: f64,
    pub standard_error_of_mean: f64,
    pub n_blocks: usize,
    pub block_length: usize,
}

/// Mean, unbiased variance and block-means standard error of a record.
///
/// Blocks span ten periods of the record's lower band edge. Records too short
/// for 32 such blocks fall back to 32 shorter blocks.
pub fn record_statistics(record: &NoiseRecord) -> Result<RecordStatistics> {
    let x = record.samples();
    if x.is_empty() {
        return Err(Error::Argument("empty record".into()));
    }
    if x.len() == 1 {
        return Ok(RecordStatistics {
            mean: x[0],
            variance: 0.0,
            standard_error_of_mean: 0.0,
            n_blocks: 1,
            block_length: 1,
        });
    }
    let preferred = ((10.0 / (record.band().0 * record.dt())).ceil() as usize).max(1);
    let block_length = if x.len() / preferred >= MIN_BLOCKS {
        preferred
    } else {
        (x.len() / MIN_BLOCKS).max(1)
    };
    let s = block_means_error(x, block_length)?;
    Ok(RecordStatistics {
        mean: s.mean,
        variance: s.variance,
        standard_error_of_mean: s.standard_error,
        n_blocks: s.n_blocks,
        block_length: s.block_length,
    })
}

/// Sample excess kurtosis `m4 / m2^2 - 3`.
pub fn excess_kurtosis(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (m2, m4) = samples.iter().fold((0.0, 0.0), |(m2, m4), x| {
        let d2 = (x - mean).powi(2);
        (m2 + d2, m4 + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    m4 / (m2 * m2) - 3.0
}
