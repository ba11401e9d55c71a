use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::forward_in_place;
use super::NoiseRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    /// Periodic (DFT-even) Hann window.
    Hann,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }

    fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; len],
            Window::Hann => (0..len)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / len as f64).cos()))
                .collect(),
        }
    }
}

/// One-sided averaged periodogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub frequency_bins: Vec<f64>,
    pub psd_values: Vec<f64>,
    pub segment_count: usize,
    pub window_name: String,
}

impl PsdEstimate {
    pub fn resolution(&self) -> f64 {
        if self.frequency_bins.len() < 2 {
            0.0
        } else {
            self.frequency_bins[1] - self.frequency_bins[0]
        }
    }

    /// Rectangle-rule integral of the spectrum, i.e. the estimated mean-square value.
    pub fn integrate(&self) -> f64 {
        self.psd_values.iter().sum::<f64>() * self.resolution()
    }

    /// Mean PSD over bins inside `[low, high]`, dropping `margin` bins at each edge.
    pub fn band_mean(&self, low: f64, high: f64, margin: usize) -> Option<f64> {
        let idx: Vec<usize> = self
            .frequency_bins
            .iter()
            .enumerate()
            .filter(|(_, &f)| f >= low && f <= high)
            .map(|(i, _)| i)
            .collect();
        if idx.len() <= 2 * margin {
            return None;
        }
        let inner = &idx[margin..idx.len() - margin];
        Some(inner.iter().map(|&i| self.psd_values[i]).sum::<f64>() / inner.len() as f64)
    }

    /// Largest PSD value outside `[low, high]`, skipping `transition` bins next to each edge.
    pub fn max_outside(&self, low: f64, high: f64, transition: usize) -> f64 {
        let first_in = self.frequency_bins.iter().position(|&f| f >= low);
        let last_in = self.frequency_bins.iter().rposition(|&f| f <= high);
        let (Some(first_in), Some(last_in)) = (first_in, last_in) else {
            return self.psd_values.iter().cloned().fold(0.0, f64::max);
        };
        self.psd_values
            .iter()
            .enumerate()
            .filter(|&(i, _)| i + transition < first_in || i > last_in + transition)
            .map(|(_, &p)| p)
            .fold(0.0, f64::max)
    }
}

/// Averaged windowed periodogram over `n_segments` non-overlapping segments.
///
/// Normalised by the window power `sum(w^2)` so that a flat spectrum of level
/// `S` is estimated as `S` without bias; interior bins carry a factor two for
/// the one-sided convention, DC and Nyquist do not.
pub fn estimate_psd(record: &NoiseRecord, n_segments: usize, window: Window) -> Result<PsdEstimate> {
    if n_segments == 0 {
        return Err(Error::Argument("n_segments must be at least 1".into()));
    }
    let n = record.len();
    if n < 2 * n_segments || !n.is_multiple_of(n_segments) || !(n / n_segments).is_power_of_two() {
        return Err(Error::Argument(format!(
            "record of length {n} cannot be split into {n_segments} power-of-two segments"
        )));
    }
    let seg_len = n / n_segments;
    let fs = record.sample_rate();
    let w = window.coefficients(seg_len);
    let w_power: f64 = w.iter().map(|x| x * x).sum();
    let n_bins = seg_len / 2 + 1;
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg_len];

    for seg in record.samples().chunks_exact(seg_len) {
        for ((b, &x), &wi) in buf.iter_mut().zip(seg).zip(&w) {
            *b = Complex64::new(x * wi, 0.0);
        }
        forward_in_place(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }

    let norm = 1.0 / (fs * w_power * n_segments as f64);
    let psd_values = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || k == seg_len / 2 { 1.0 } else { 2.0 };
            one_sided * p * norm
        })
        .collect();
    let frequency_bins = (0..n_bins).map(|k| k as f64 * fs / seg_len as f64).collect();

    Ok(PsdEstimate {
        frequency_bins,
        psd_values,
        segment_count: n_segments,
        window_name: window.name().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseRole;

    fn record(samples: Vec<f64>) -> NoiseRecord {
        NoiseRecord::from_samples(samples, 1.0, (0.05, 0.45), 0.0, NoiseRole::VoltageSource)
    }

    #[test]
    fn zeros_give_zero_spectrum() {
        let est = estimate_psd(&record(vec![0.0; 1024]), 4, Window::Hann).unwrap();
        assert!(est.psd_values.iter().all(|&p| p == 0.0));
        assert_eq!(est.psd_values.len(), 129);
    }

    #[test]
    fn bin_centred_sinusoid_power() {
        // A sin(2 pi f t) carries mean-square A^2 / 2.
        let amp = 1.7;
        let seg = 1024;
        let k0 = 100;
        let x: Vec<f64> = (0..8 * seg)
            .map(|i| amp * (2.0 * PI * k0 as f64 * i as f64 / seg as f64).sin())
            .collect();
        let est = estimate_psd(&record(x), 8, Window::Hann).unwrap();
        let df = est.resolution();
        let peak: f64 = est.psd_values[k0 - 2..=k0 + 2].iter().sum::<f64>() * df;
        assert!((peak / (amp * amp / 2.0) - 1.0).abs() < 0.02, "peak power {peak}");
    }

    #[test]
    fn rejects_bad_segmentation() {
        assert!(estimate_psd(&record(vec![0.0; 1000]), 3, Window::Hann).is_err());
        assert!(estimate_psd(&record(vec![0.0; 96]), 1, Window::Hann).is_err());
        assert!(estimate_psd(&record(vec![0.0; 64]), 0, Window::Hann).is_err());
        assert!(estimate_psd(&record(vec![0.0; 64]), 64, Window::Hann).is_err());
    }

    #[test]
    fn window_names() {
        assert_eq!(Window::Hann.name(), "hann");
        assert_eq!(Window::Rectangular.name(), "rectangular");
    }
}
