//! Band-limited Gaussian noise synthesis, spectral estimation and record statistics.
//!
//! All spectral densities are one-sided: a record with PSD level `S` on the band
//! `[f_L, f_H]` has mean-square value `S * (f_H - f_L)`.

mod export;
mod fft;
mod psd;
mod rng;
mod stats;
mod synth;

pub use export::{read_raw, write_csv, write_raw, RawHeader};
pub use psd::{estimate_psd, PsdEstimate, Window};
pub use rng::NoiseStream;
pub use stats::{block_means_error, excess_kurtosis, record_statistics, BlockStats, RecordStatistics, MIN_BLOCKS};
pub use synth::{in_band_bins, synthesize_bandlimited_gaussian, synthesize_oversampled, synthesize_substream};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Boltzmann constant in J/K, used when the unit system is [`UnitSystem::Si`].
pub const BOLTZMANN_SI: f64 = 1.380649e-23;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    /// k_B = 1 and every quantity of order one.
    #[default]
    Normalized,
    Si,
}

impl UnitSystem {
    pub fn boltzmann(self) -> f64 {
        match self {
            UnitSystem::Normalized => 1.0,
            UnitSystem::Si => BOLTZMANN_SI,
        }
    }
}

/// Global run parameters shared by every testbench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub sample_rate: f64,
    pub band_low: f64,
    pub band_high: f64,
    /// Must be a power of two.
    pub n_samples: usize,
    pub seed: u64,
    pub k_boltzmann: f64,
    pub burn_in_fraction: f64,
    pub units: UnitSystem,
}

impl Default for SimConfig {
    /// The desk-scale reference configuration: fs = 1, band (0.05, 0.45), 2^22 samples.
    fn default() -> Self {
        SimConfig {
            sample_rate: 1.0,
            band_low: 0.05,
            band_high: 0.45,
            n_samples: 1 << 22,
            seed: 0,
            k_boltzmann: 1.0,
            burn_in_fraction: 0.1,
            units: UnitSystem::Normalized,
        }
    }
}

impl SimConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_samples(mut self, n_samples: usize) -> Self {
        self.n_samples = n_samples;
        self
    }

    pub fn with_band(mut self, low: f64, high: f64) -> Self {
        self.band_low = low;
        self.band_high = high;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fs = self.sample_rate;
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::Config(format!("sample_rate must be positive, got {fs}")));
        }
        if !(self.band_low > 0.0) {
            return Err(Error::Config(format!(
                "band_low must be strictly positive, got {}",
                self.band_low
            )));
        }
        if !(self.band_low < self.band_high) {
            return Err(Error::Config(format!(
                "band_low ({}) must be below band_high ({})",
                self.band_low, self.band_high
            )));
        }
        if self.band_high > fs / 2.0 {
            return Err(Error::Config(format!(
                "band_high ({}) exceeds the Nyquist frequency ({})",
                self.band_high,
                fs / 2.0
            )));
        }
        if self.n_samples < 2 || !self.n_samples.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_samples must be a power of two, got {}",
                self.n_samples
            )));
        }
        if !(self.k_boltzmann.is_finite() && self.k_boltzmann > 0.0) {
            return Err(Error::Config(format!(
                "k_boltzmann must be positive, got {}",
                self.k_boltzmann
            )));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::Config(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn bandwidth(&self) -> f64 {
        self.band_high - self.band_low
    }

    pub fn burn_in_samples(&self) -> usize {
        (self.burn_in_fraction * self.n_samples as f64).floor() as usize
    }

    /// Minimum block length for block-means errors: ten periods of the lowest in-band frequency.
    pub fn min_block_length(&self) -> usize {
        ((10.0 * self.sample_rate / self.band_low).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseRole {
    VoltageSource,
    CurrentSource,
}

/// A sampled noise waveform together with the spectrum it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRecord {
    pub(crate) samples: Vec<f64>,
    pub(crate) dt: f64,
    pub(crate) band: (f64, f64),
    pub(crate) target_psd_level: f64,
    pub(crate) role: NoiseRole,
    pub(crate) seed: u64,
    pub(crate) substream: u64,
}

impl NoiseRecord {
    /// Wraps arbitrary samples, e.g. a deterministic test waveform.
    pub fn from_samples(samples: Vec<f64>, dt: f64, band: (f64, f64), target_psd_level: f64, role: NoiseRole) -> Self {
        NoiseRecord {
            samples,
            dt,
            band,
            target_psd_level,
            role,
            seed: 0,
            substream: 0,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    pub fn target_psd_level(&self) -> f64 {
        self.target_psd_level
    }

    pub fn role(&self) -> NoiseRole {
        self.role
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// Mean-square value implied by the target spectrum.
    pub fn target_variance(&self) -> f64 {
        self.target_psd_level * (self.band.1 - self.band.0)
    }
}
