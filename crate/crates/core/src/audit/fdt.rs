use serde::Serialize;

use super::fdt_reference_psd;
use crate::circuits::BranchSpec;
use crate::noise::{estimate_psd, synthesize_substream, NoiseRole, SimConfig, Window};
use crate::{Error, Result};

/// Relative tolerance on the measured in-band PSD of a noisy branch.
pub const FDT_TOLERANCE: f64 = 0.03;
/// Periodogram segments used for the measurement.
pub const FDT_SEGMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdtReport {
    pub pass: bool,
    pub measured_psd_level: f64,
    /// `4 k T Re[Z]` at the branch's temperature and small-signal resistance.
    pub reference: f64,
    /// Set when a dissipative branch at `T > 0` has no thermal noise source.
    pub non_fdt_device: bool,
    pub note: String,
}

/// Measures the branch's open-circuit noise PSD and compares it with the FDT value.
pub fn check_fdt_compliance(branch: &BranchSpec, config: &SimConfig) -> Result<FdtReport> {
    branch.validate()?;
    config.validate()?;
    let k = config.k_boltzmann;
    let reference = fdt_reference_psd(branch.small_signal_resistance().max(0.0), branch.temperature(), k)?;
    let record = synthesize_substream(config, branch.noise_psd(k), NoiseRole::VoltageSource, 0)?;
    let psd = estimate_psd(&record, FDT_SEGMENTS, Window::Hann)?;
    let measured = psd
        .band_mean(config.band_low, config.band_high, 2)
        .ok_or_else(|| Error::InsufficientData("band spans too few periodogram bins".into()))?;

    let report = if branch.is_noisy() {
        let pass = if reference > 0.0 {
            (measured / reference - 1.0).abs() <= FDT_TOLERANCE
        } else {
            measured == 0.0
        };
        FdtReport {
            pass,
            measured_psd_level: measured,
            reference,
            non_fdt_device: false,
            note: format!("noisy branch, tolerance {}%", FDT_TOLERANCE * 100.0),
        }
    } else if reference > 0.0 {
        FdtReport {
            pass: false,
            measured_psd_level: measured,
            reference,
            non_fdt_device: measured < 1e-6 * reference,
            note: "non-FDT device: dissipative element at T > 0 without thermal noise".into(),
        }
    } else {
        FdtReport {
            pass: measured == 0.0,
            measured_psd_level: measured,
            reference,
            non_fdt_device: false,
            note: "noise-free branch at zero temperature".into(),
        }
    };
    Ok(report)
}
