use rayon::prelude::*;
use serde::Serialize;

use super::PowerFlowEstimate;
use crate::circuits::{run_exchange, BranchSpec};
use crate::elements::ThermalResistor;
use crate::noise::SimConfig;
use crate::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 5.0;
/// Every estimate entering a verdict must rest on at least this many blocks.
pub const MIN_VERDICT_BLOCKS: usize = 32;
pub const MIN_SEEDS: usize = 3;

/// Criterion applied by the classifier, embedded in every verdict.
pub const DECISION_RULE_TEXT: &str = "A device that needs no external energy source cannot \
sustain a net power flow out of a thermal reservoir at its own temperature: such a flow is a \
persistent departure from equilibrium, i.e. a steady entropy reduction. The device is placed in \
parallel with a Johnson-noisy reference resistor at the bath temperature, matched to its \
small-signal resistance. It is classified requires-activity when the pooled mean power it \
absorbs exceeds `threshold` pooled standard errors and every independent seed agrees on the \
sign; otherwise it is passive-consistent. A finite run can refute passivity but never prove it.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    PassiveConsistent,
    RequiresActivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedEstimate {
    pub seed: u64,
    pub estimate: PowerFlowEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassivityVerdict {
    pub classification: Classification,
    pub z_score: f64,
    pub threshold: f64,
    pub sign_stable: bool,
    /// Power flowing from the reference resistor into the device.
    pub pooled: PowerFlowEstimate,
    pub per_seed: Vec<SeedEstimate>,
    pub reference_resistor: ThermalResistor,
    pub device: BranchSpec,
    pub testbench: String,
    pub definition: &'static str,
}

/// Classifies `device` with `n_seeds` consecutive seeds starting at `config.seed`.
pub fn classify_passivity(
    device: &BranchSpec,
    t_bath: f64,
    config: &SimConfig,
    n_seeds: usize,
) -> Result<PassivityVerdict> {
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| config.seed.wrapping_add(i)).collect();
    classify_passivity_with(device, t_bath, config, &seeds, DEFAULT_THRESHOLD)
}

/// Runs the exchange loop (reference resistor → device) once per seed and pools the flows.
pub fn classify_passivity_with(
    device: &BranchSpec,
    t_bath: f64,
    config: &SimConfig,
    seeds: &[u64],
    threshold: f64,
) -> Result<PassivityVerdict> {
    if seeds.len() < MIN_SEEDS {
        return Err(Error::Argument(format!(
            "a verdict needs at least {MIN_SEEDS} seeds, got {}",
            seeds.len()
        )));
    }
    if !(threshold > 0.0) {
        return Err(Error::Argument(format!("threshold must be positive, got {threshold}")));
    }
    device.validate()?;
    let r_ref = device.small_signal_resistance();
    if !(r_ref > 0.0) {
        return Err(Error::Argument(format!(
            "device small-signal resistance {r_ref} cannot be matched by a reference resistor"
        )));
    }
    let reference = ThermalResistor::new(r_ref, t_bath, true)?;
    let reference_branch = BranchSpec::Resistor(reference);

    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let cfg = config.clone().with_seed(seed);
            let (estimate, _) = run_exchange(&reference_branch, device, &cfg)?;
            if estimate.n_blocks < MIN_VERDICT_BLOCKS {
                return Err(Error::InsufficientData(format!(
                    "seed {seed}: {} blocks, a verdict needs {MIN_VERDICT_BLOCKS}",
                    estimate.n_blocks
                )));
            }
            Ok(SeedEstimate { seed, estimate })
        })
        .collect::<Result<Vec<_>>>()?;

    let estimates: Vec<PowerFlowEstimate> = per_seed.iter().map(|s| s.estimate).collect();
    let pooled = PowerFlowEstimate::pool(&estimates).expect("at least three seeds");
    let z_score = pooled.z_score();
    let sign = pooled.mean.signum();
    let sign_stable = pooled.mean != 0.0 && estimates.iter().all(|e| e.mean.signum() == sign && e.mean != 0.0);
    let classification = if z_score > threshold && sign_stable {
        Classification::RequiresActivity
    } else {
        Classification::PassiveConsistent
    };

    Ok(PassivityVerdict {
        classification,
        z_score,
        threshold,
        sign_stable,
        pooled,
        per_seed,
        reference_resistor: reference,
        device: *device,
        testbench: format!(
            "exchange loop: noisy reference resistor R={r_ref} T={t_bath} in parallel with {}",
            device.describe()
        ),
        definition: DECISION_RULE_TEXT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::PolynomialMemristor;

    fn cfg() -> SimConfig {
        SimConfig::default().with_n_samples(1 << 14).with_seed(100)
    }

    #[test]
    fn needs_three_seeds() {
        let d = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        assert!(classify_passivity(&d, 1.0, &cfg(), 2).is_err());
    }

    #[test]
    fn quiet_memristor_requires_activity() {
        let d = BranchSpec::memristor(PolynomialMemristor::linear(1.0), 1.0);
        let v = classify_passivity(&d, 1.0, &cfg(), 3).unwrap();
        assert_eq!(v.classification, Classification::RequiresActivity);
        assert!(v.pooled.mean > 0.0);
        assert_eq!(v.per_seed.len(), 3);
        assert_eq!(v.reference_resistor.resistance, 1.0);
    }

    #[test]
    fn too_few_blocks_is_an_error() {
        let d = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let short = cfg().with_n_samples(1 << 12);
        assert!(matches!(
            classify_passivity(&d, 1.0, &short, 3),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn inadmissible_device_rejected() {
        let d = BranchSpec::memristor(PolynomialMemristor::new(1.0, 2.0, 1.0), 1.0);
        assert!(matches!(
            classify_passivity(&d, 1.0, &cfg(), 3),
            Err(Error::Inadmissible { .. })
        ));
    }
}
