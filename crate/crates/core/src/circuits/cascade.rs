use rayon::prelude::*;
use serde::Serialize;

use super::{simulate_rectifier, RectifierOptions};
use crate::elements::{Capacitor, PolynomialMemristor, ThermalResistor};
use crate::noise::SimConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageDc {
    pub mean: f64,
    pub se: f64,
    pub clamp_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeResult {
    pub per_stage_dc: Vec<StageDc>,
    /// Sum of the per-stage means, in stage order.
    pub total_dc_mean: f64,
    /// Stages are independent, so their errors add in quadrature.
    pub total_dc_se: f64,
    /// `total_dc² / (4 N R_out)` with `R_out` the shunt resistance (matched load).
    pub available_power_estimate: f64,
    pub n_stages: usize,
}

pub fn run_cascade(
    n_stages: usize,
    m: &PolynomialMemristor,
    shunt: &ThermalResistor,
    cap: &Capacitor,
    config: &SimConfig,
) -> Result<CascadeResult> {
    run_cascade_with(n_stages, m, shunt, cap, config, &RectifierOptions::default())
}

/// `n_stages` identical rectifier cells stacked in series.
///
/// Stage `i` draws its noise from substream `opts.substream + i`, so a one-stage
/// cascade reproduces [`run_rectifier_cell_with`](super::run_rectifier_cell_with) exactly.
pub fn run_cascade_with(
    n_stages: usize,
    m: &PolynomialMemristor,
    shunt: &ThermalResistor,
    cap: &Capacitor,
    config: &SimConfig,
    opts: &RectifierOptions,
) -> Result<CascadeResult> {
    if n_stages == 0 {
        return Err(Error::Argument("a cascade needs at least one stage".into()));
    }
    let per_stage_dc = (0..n_stages as u64)
        .into_par_iter()
        .map(|i| {
            let stage_opts = RectifierOptions {
                substream: opts.substream + i,
                ..*opts
            };
            let r = simulate_rectifier(m, shunt, cap, config, &stage_opts)?.result;
            Ok(StageDc {
                mean: r.dc_voltage_mean,
                se: r.dc_voltage_se,
                clamp_count: r.clamp_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let total_dc_mean = per_stage_dc.iter().map(|s| s.mean).sum::<f64>();
    let total_dc_se = per_stage_dc.iter().map(|s| s.se * s.se).sum::<f64>().sqrt();
    Ok(CascadeResult {
        available_power_estimate: total_dc_mean * total_dc_mean / (4.0 * n_stages as f64 * shunt.resistance),
        per_stage_dc,
        total_dc_mean,
        total_dc_se,
        n_stages,
    })
}
