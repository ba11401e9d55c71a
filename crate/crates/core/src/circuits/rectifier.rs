use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::solve_increasing;
use crate::elements::{Capacitor, ClampedMemristance, ElementState, PolynomialMemristor, ThermalResistor};
use crate::noise::{block_means_error, synthesize_oversampled, NoiseRole, SimConfig};
use crate::{Error, Result};

/// Wiring of the rectifier cell around the shunt's Norton noise source `i_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RectifierTopology {
    /// `i_n ∥ R ∥ M ∥ C` on one node:
    /// `C dV/dt = i_n - V/R - V/M(q)`, `dq/dt = V/M(q)`, `U_w = V`.
    #[default]
    Parallel,
    /// `i_n ∥ R` feeding `M` in series with `C`:
    /// `dq/dt = (R i_n - U_w) / (R + M(q))`, `U_w = v0 + (q - q0)/C`.
    ///
    /// The trapezoidal step sees the drive only at grid points, and with the band
    /// reaching close to Nyquist this biases the DC estimate; use `oversample >= 4`.
    Series,
}

impl RectifierTopology {
    pub fn describe(self) -> &'static str {
        match self {
            RectifierTopology::Parallel => {
                "Norton noise current of the shunt in parallel with the shunt conductance, \
                 the memristor and the capacitor on a single node; U_w is the node voltage"
            }
            RectifierTopology::Series => {
                "Norton noise current of the shunt in parallel with the shunt conductance, \
                 driving the memristor in series with the capacitor; U_w is the capacitor voltage"
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RectifierOptions {
    pub topology: RectifierTopology,
    /// Integrate on a grid this many times finer than `config.sample_rate` (power of two).
    /// The drive is the same realization, band-limited interpolated.
    pub oversample: usize,
    pub substream: u64,
}

impl Default for RectifierOptions {
    fn default() -> Self {
        RectifierOptions {
            topology: RectifierTopology::Parallel,
            oversample: 1,
            substream: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectifierResult {
    pub dc_voltage_mean: f64,
    pub dc_voltage_se: f64,
    pub capacitor_final_voltage: f64,
    pub clamp_count: u64,
    pub n_blocks: usize,
    pub block_length: usize,
    pub burn_in_discarded: usize,
    pub topology: RectifierTopology,
    pub oversample: usize,
    pub substream: u64,
    pub memristor: PolynomialMemristor,
    pub shunt: ThermalResistor,
    pub capacitor: Capacitor,
    pub config: SimConfig,
}

/// Result plus the capacitor voltage and memristor charge at every base-rate sample.
#[derive(Debug, Clone)]
pub struct RectifierRun {
    pub result: RectifierResult,
    pub voltage: Vec<f64>,
    pub charge: Vec<f64>,
}

pub fn run_rectifier_cell(
    m: &PolynomialMemristor,
    shunt: &ThermalResistor,
    cap: &Capacitor,
    config: &SimConfig,
) -> Result<RectifierResult> {
    run_rectifier_cell_with(m, shunt, cap, config, &RectifierOptions::default())
}

pub fn run_rectifier_cell_with(
    m: &PolynomialMemristor,
    shunt: &ThermalResistor,
    cap: &Capacitor,
    config: &SimConfig,
    opts: &RectifierOptions,
) -> Result<RectifierResult> {
    simulate_rectifier(m, shunt, cap, config, opts).map(|run| run.result)
}

/// Checks the cell's preconditions: admissible model, noisy shunt, capacitor
/// corner `1 / (2 pi R C)` at least a decade below `f_L`.
fn check_cell(m: &PolynomialMemristor, shunt: &ThermalResistor, cap: &Capacitor, config: &SimConfig) -> Result<()> {
    config.validate()?;
    m.require_admissible()?;
    shunt.validate()?;
    cap.validate()?;
    if !shunt.noisy {
        return Err(Error::Config("the rectifier shunt must be a noisy resistor".into()));
    }
    let corner = 1.0 / (2.0 * PI * shunt.resistance * cap.capacitance);
    if !(corner < config.band_low / 10.0) {
        return Err(Error::Config(format!(
            "capacitor corner frequency {corner} is not below f_L/10 = {}; increase C",
            config.band_low / 10.0
        )));
    }
    Ok(())
}

/// Integrates the rectifier cell at fixed step and measures the DC capacitor voltage.
///
/// The memristor branch is semi-implicit: its conductance is evaluated at a
/// predicted mid-step charge and the linear part is solved implicitly
/// (trapezoidal), so small `M` does not make the step unstable.
pub fn simulate_rectifier(
    m: &PolynomialMemristor,
    shunt: &ThermalResistor,
    cap: &Capacitor,
    config: &SimConfig,
    opts: &RectifierOptions,
) -> Result<RectifierRun> {
    check_cell(m, shunt, cap, config)?;
    let factor = opts.oversample;
    let drive = synthesize_oversampled(
        config,
        shunt.current_noise_psd(config.k_boltzmann),
        NoiseRole::CurrentSource,
        opts.substream,
        factor,
    )?;
    let i_n = drive.samples();
    let h = drive.dt();
    let n = config.n_samples;

    let mut mem = ClampedMemristance::new(*m);
    let mut voltage = Vec::with_capacity(n);
    let mut charge = Vec::with_capacity(n);
    let mut state = ElementState::new(m.q0);
    let r = shunt.resistance;
    let c = cap.capacitance;

    match opts.topology {
        RectifierTopology::Parallel => {
            let mut v = cap.v0;
            for step in 0..i_n.len() {
                if step % factor == 0 {
                    voltage.push(v);
                    charge.push(state.q);
                }
                if step + 1 == i_n.len() {
                    break;
                }
                let drive_avg = 0.5 * (i_n[step] + i_n[step + 1]);
                let node_step = |mval: f64| {
                    let g = 1.0 / r + 1.0 / mval;
                    ((c / h - 0.5 * g) * v + drive_avg) / (c / h + 0.5 * g)
                };
                // Predictor with M(q_n), corrector with M at the mid-step charge.
                let m0 = mem.peek(state.q);
                let v_pred = node_step(m0);
                let q_pred = state.q + 0.5 * h * (v + v_pred) / m0;
                let m_mid = mem.eval(0.5 * (state.q + q_pred));
                let v_next = node_step(m_mid);
                state = state.advance_charge(v / m_mid, v_next / m_mid, h)?;
                v = v_next;
            }
        }
        RectifierTopology::Series => {
            let (v0, q0) = (cap.v0, m.q0);
            let rate = |q: f64, i: f64, mval: f64| (r * i - v0 - (q - q0) / c) / (r + mval);
            for step in 0..i_n.len() {
                if step % factor == 0 {
                    voltage.push(v0 + (state.q - q0) / c);
                    charge.push(state.q);
                }
                if step + 1 == i_n.len() {
                    break;
                }
                let f_now = rate(state.q, i_n[step], mem.eval(state.q));
                let i_next = i_n[step + 1];
                // Trapezoidal step, implicit in the end charge.
                let prev = state.q;
                let g = |q: f64| {
                    let mq = mem.peek(q);
                    let f = rate(q, i_next, mq);
                    let df = -1.0 / (c * (r + mq)) - f * mem.peek_slope(q) / (r + mq);
                    (q - prev - 0.5 * h * (f_now + f), 1.0 - 0.5 * h * df)
                };
                let q = solve_increasing(g, prev + h * f_now, h * f_now.abs() + 1e-9);
                let f_next = rate(q, i_next, mem.peek(q));
                state = state.advance_charge(f_now, f_next, h)?;
            }
        }
    }

    let burn_in = config.burn_in_samples();
    let tau = match opts.topology {
        RectifierTopology::Parallel => r * c,
        RectifierTopology::Series => (r + m.memristance(m.q0).max(0.0)) * c,
    };
    let block_length = config
        .min_block_length()
        .max((10.0 * tau * config.sample_rate).ceil() as usize);
    let stats = block_means_error(&voltage[burn_in..], block_length)?;

    let result = RectifierResult {
        dc_voltage_mean: stats.mean,
        dc_voltage_se: stats.standard_error,
        capacitor_final_voltage: *voltage.last().unwrap_or(&cap.v0),
        clamp_count: mem.clamp_count(),
        n_blocks: stats.n_blocks,
        block_length: stats.block_length,
        burn_in_discarded: burn_in,
        topology: opts.topology,
        oversample: factor,
        substream: opts.substream,
        memristor: *m,
        shunt: *shunt,
        capacitor: *cap,
        config: config.clone(),
    };
    Ok(RectifierRun {
        result,
        voltage,
        charge,
    })
}
