use serde::Serialize;

use crate::elements::{ElementState, PolynomialMemristor};
use crate::noise::{block_means_error, NoiseRecord, NoiseRole, SimConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealDriveResult {
    pub mean_voltage: f64,
    pub se: f64,
    pub n_blocks: usize,
    pub block_length: usize,
}

/// Memristor driven by an ideal current generator: `q = ∫ I dt`, `U = M(q) I`.
///
/// There is no source impedance, so the charge is fixed by the drive alone.
/// Returns the burn-in-trimmed mean of `U` with its block-means error.
pub fn run_ideal_drive(m: &PolynomialMemristor, drive: &NoiseRecord, config: &SimConfig) -> Result<IdealDriveResult> {
    m.require_admissible()?;
    if drive.role() != NoiseRole::CurrentSource {
        return Err(Error::Argument("ideal drive needs a current-source record".into()));
    }
    let (f_low, _) = drive.band();
    if !(f_low > 0.0) {
        return Err(Error::Config(format!("drive band must exclude DC, got f_L = {f_low}")));
    }
    if !(0.0..1.0).contains(&config.burn_in_fraction) {
        return Err(Error::Config(format!(
            "burn_in_fraction must lie in [0, 1), got {}",
            config.burn_in_fraction
        )));
    }
    let current = drive.samples();
    if current.is_empty() {
        return Err(Error::Argument("empty drive record".into()));
    }
    let dt = drive.dt();
    let burn_in = (config.burn_in_fraction * current.len() as f64).floor() as usize;

    let mut state = ElementState::new(m.q0);
    let mut voltage = Vec::with_capacity(current.len() - burn_in);
    for (n, &i) in current.iter().enumerate() {
        if n > 0 {
            state = state.advance_charge(current[n - 1], i, dt)?;
        }
        if n >= burn_in {
            voltage.push(m.voltage(&state, i));
        }
    }
    let block_length = ((10.0 / (f_low * dt)).ceil() as usize).max(1);
    let stats = block_means_error(&voltage, block_length)?;
    Ok(IdealDriveResult {
        mean_voltage: stats.mean,
        se: stats.standard_error,
        n_blocks: stats.n_blocks,
        block_length,
    })
}
