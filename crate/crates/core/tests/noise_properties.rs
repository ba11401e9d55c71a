use memaudit::noise::{
    estimate_psd, excess_kurtosis, read_raw, record_statistics, synthesize_bandlimited_gaussian, synthesize_substream,
    write_raw, NoiseRole, SimConfig, Window,
};
use proptest::prelude::*;

fn cfg(n: usize, seed: u64) -> SimConfig {
    SimConfig::default().with_n_samples(n).with_seed(seed)
}

#[test]
fn parseval_within_one_percent() {
    for seed in 0..4 {
        let r = synthesize_bandlimited_gaussian(&cfg(1 << 20, seed), 4.0, NoiseRole::VoltageSource).unwrap();
        let stats = record_statistics(&r).unwrap();
        assert!(
            (stats.variance / 1.6 - 1.0).abs() < 0.01,
            "seed {seed}: {}",
            stats.variance
        );
    }
}

#[test]
fn spectrum_integrates_to_the_time_domain_variance() {
    let r = synthesize_bandlimited_gaussian(&cfg(1 << 16, 4), 4.0, NoiseRole::VoltageSource).unwrap();
    let p = estimate_psd(&r, 1, Window::Rectangular).unwrap();
    let mean_square = r.samples().iter().map(|x| x * x).sum::<f64>() / r.len() as f64;
    assert!((p.integrate() / mean_square - 1.0).abs() < 1e-9);
}

#[test]
fn no_power_outside_the_band() {
    for (low, high) in [(0.05, 0.45), (0.1, 0.2), (0.013, 0.5)] {
        let c = cfg(1 << 16, 9).with_band(low, high);
        let r = synthesize_substream(&c, 2.5, NoiseRole::CurrentSource, 3).unwrap();
        let p = estimate_psd(&r, 1, Window::Rectangular).unwrap();
        let inside = p.band_mean(low, high, 1).unwrap();
        assert!(p.max_outside(low, high, 1) < 1e-6 * inside, "band ({low}, {high})");
    }
}

#[test]
fn hann_estimate_matches_level() {
    let r = synthesize_bandlimited_gaussian(&cfg(1 << 20, 5), 4.0, NoiseRole::VoltageSource).unwrap();
    let p = estimate_psd(&r, 64, Window::Hann).unwrap();
    let level = p.band_mean(0.05, 0.45, 2).unwrap();
    assert!((level / 4.0 - 1.0).abs() < 0.03, "{level}");
}

#[test]
fn samples_are_gaussian() {
    // Standard error of the excess kurtosis of n Gaussian samples is sqrt(24/n).
    let n = 1 << 20;
    let r = synthesize_bandlimited_gaussian(&cfg(n, 6), 1.0, NoiseRole::VoltageSource).unwrap();
    let se = (24.0 / n as f64).sqrt();
    assert!(excess_kurtosis(r.samples()).abs() < 5.0 * se);
}

#[test]
fn standard_error_halves_when_record_quadruples() {
    let avg_se = |n: usize| {
        (0..8)
            .map(|s| {
                let r = synthesize_bandlimited_gaussian(&cfg(n, 100 + s), 4.0, NoiseRole::VoltageSource).unwrap();
                record_statistics(&r).unwrap().standard_error_of_mean
            })
            .sum::<f64>()
            / 8.0
    };
    let ratio = avg_se(1 << 16) / avg_se(1 << 18);
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn records_are_bit_identical_for_identical_inputs() {
    let c = cfg(1 << 14, 77);
    let a = synthesize_substream(&c, 4.0, NoiseRole::VoltageSource, 2).unwrap();
    let b = synthesize_substream(&c, 4.0, NoiseRole::VoltageSource, 2).unwrap();
    assert!(a
        .samples()
        .iter()
        .zip(b.samples())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    let other = synthesize_substream(&c, 4.0, NoiseRole::VoltageSource, 3).unwrap();
    assert_ne!(a.samples()[..8], other.samples()[..8]);
}

#[test]
fn raw_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.f64");
    let r = synthesize_substream(&cfg(1 << 10, 1), 4.0, NoiseRole::VoltageSource, 1).unwrap();
    let header = write_raw(&r, &path).unwrap();
    let (back, samples) = read_raw(&path).unwrap();
    assert_eq!(header, back);
    assert_eq!(samples, r.samples());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variance_scales_with_level(level in 0.1f64..10.0, seed in 0u64..1000) {
        let c = cfg(1 << 12, seed);
        let unit = synthesize_substream(&c, 1.0, NoiseRole::VoltageSource, 0).unwrap();
        let scaled = synthesize_substream(&c, level, NoiseRole::VoltageSource, 0).unwrap();
        for (u, s) in unit.samples().iter().zip(scaled.samples()) {
            prop_assert!((s - level.sqrt() * u).abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }
}
