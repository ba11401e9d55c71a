use rustfft::num_complex::Complex64;

use super::fft::inverse_in_place;
use super::{NoiseRecord, NoiseRole, NoiseStream, SimConfig};
use crate::{Error, Result};

/// Inclusive range of DFT bins `k` (frequency `k * fs / n`) that carry noise power.
///
/// The Nyquist bin is never used, so every populated bin has a distinct
/// conjugate partner and a full bin width of one-sided power.
pub fn in_band_bins(config: &SimConfig) -> Result<(usize, usize)> {
    config.validate()?;
    let n = config.n_samples;
    let df = config.sample_rate / n as f64;
    // Tolerance keeps band edges that sit exactly on a bin from flipping on rounding.
    let lo = ((config.band_low / df) - 1e-9).ceil().max(1.0) as usize;
    let hi = (((config.band_high / df) + 1e-9).floor() as usize).min(n / 2 - 1);
    if lo > hi {
        return Err(Error::Config(format!(
            "band [{}, {}] contains no frequency bin at resolution {df}",
            config.band_low, config.band_high
        )));
    }
    Ok((lo, hi))
}

/// Gaussian noise whose one-sided PSD equals `psd_level` on `[f_L, f_H]` and zero elsewhere.
///
/// Uses substream 0 of the configured seed.
pub fn synthesize_bandlimited_gaussian(config: &SimConfig, psd_level: f64, role: NoiseRole) -> Result<NoiseRecord> {
    synthesize_substream(config, psd_level, role, 0)
}

pub fn synthesize_substream(
    config: &SimConfig,
    psd_level: f64,
    role: NoiseRole,
    substream: u64,
) -> Result<NoiseRecord> {
    synthesize_oversampled(config, psd_level, role, substream, 1)
}

/// Same realization as [`synthesize_substream`], evaluated on a grid `factor` times finer.
///
/// The spectral coefficients are identical; only the inverse transform is longer,
/// which is exact band-limited interpolation of the base-rate record.
pub fn synthesize_oversampled(
    config: &SimConfig,
    psd_level: f64,
    role: NoiseRole,
    substream: u64,
    factor: usize,
) -> Result<NoiseRecord> {
    if !(psd_level.is_finite() && psd_level >= 0.0) {
        return Err(Error::Argument(format!(
            "psd_level must be finite and non-negative, got {psd_level}"
        )));
    }
    if factor == 0 || !factor.is_power_of_two() {
        return Err(Error::Argument(format!(
            "oversampling factor must be a power of two, got {factor}"
        )));
    }
    let (lo, hi) = in_band_bins(config)?;
    let n = config.n_samples;
    let len = n * factor;
    let dt = 1.0 / (config.sample_rate * factor as f64);

    let samples = if psd_level == 0.0 {
        vec![0.0; len]
    } else {
        // x[m] = (1/n) sum_k X_k exp(2 pi i k m / len). A conjugate pair at +-k
        // contributes 2 E|X_k|^2 / n^2 to the variance, which must equal
        // psd_level * fs / n (one bin of one-sided power), so
        // E|X_k|^2 = psd_level * fs * n / 2 and each quadrature has variance
        // psd_level * fs * n / 4.
        let sigma = (psd_level * config.sample_rate * n as f64 / 4.0).sqrt();
        let mut stream = NoiseStream::new(config.seed, substream);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for k in lo..=hi {
            let re = sigma * stream.standard_normal();
            let im = sigma * stream.standard_normal();
            buf[k] = Complex64::new(re, im);
            buf[len - k] = Complex64::new(re, -im);
        }
        inverse_in_place(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter().map(|z| z.re * scale).collect()
    };

    Ok(NoiseRecord {
        samples,
        dt,
        band: (config.band_low, config.band_high),
        target_psd_level: psd_level,
        role,
        seed: config.seed,
        substream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig::default().with_n_samples(1 << 14).with_seed(11)
    }

    #[test]
    fn zero_level_is_exactly_zero() {
        let r = synthesize_bandlimited_gaussian(&small(), 0.0, NoiseRole::VoltageSource).unwrap();
        assert_eq!(r.len(), 1 << 14);
        assert!(r.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_negative_level() {
        let err = synthesize_bandlimited_gaussian(&small(), -1.0, NoiseRole::VoltageSource);
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn rejects_invalid_config() {
        let c = small().with_band(0.2, 0.1);
        assert!(matches!(
            synthesize_bandlimited_gaussian(&c, 1.0, NoiseRole::VoltageSource),
            Err(Error::Config(_))
        ));
        let c = small().with_n_samples(3000);
        assert!(matches!(
            synthesize_bandlimited_gaussian(&c, 1.0, NoiseRole::VoltageSource),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn bins_cover_band() {
        let (lo, hi) = in_band_bins(&SimConfig::default()).unwrap();
        let n = (1usize << 22) as f64;
        assert!((lo as f64) / n >= 0.05 && ((lo - 1) as f64) / n < 0.05);
        assert!((hi as f64) / n <= 0.45 && ((hi + 1) as f64) / n > 0.45);
    }

    #[test]
    fn nyquist_bin_is_excluded() {
        let c = small().with_band(0.25, 0.5);
        let (_, hi) = in_band_bins(&c).unwrap();
        assert_eq!(hi, (1 << 13) - 1);
    }

    #[test]
    fn record_mean_is_exactly_zero_up_to_rounding() {
        let r = synthesize_bandlimited_gaussian(&small(), 4.0, NoiseRole::VoltageSource).unwrap();
        let mean = r.samples().iter().sum::<f64>() / r.len() as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn oversampled_record_interpolates_base_record() {
        let c = small();
        let base = synthesize_substream(&c, 4.0, NoiseRole::CurrentSource, 2).unwrap();
        let fine = synthesize_oversampled(&c, 4.0, NoiseRole::CurrentSource, 2, 4).unwrap();
        assert_eq!(fine.len(), 4 * base.len());
        for (i, &x) in base.samples().iter().enumerate() {
            assert!((fine.samples()[4 * i] - x).abs() < 1e-9);
        }
    }
}
