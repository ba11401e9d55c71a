use serde::Serialize;

use super::{solve_increasing, BranchSpec, DEFAULT_DECIMATION, EXCHANGE_SUBSTREAM_A, EXCHANGE_SUBSTREAM_B};
use crate::audit::PowerFlowEstimate;
use crate::elements::{ClampedMemristance, ElementState};
use crate::noise::{block_means_error, synthesize_substream, NoiseRole, SimConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeOptions {
    /// Keep every `decimation`-th sample in the trace. Statistics always use every sample.
    pub decimation: usize,
    pub substream_a: u64,
    pub substream_b: u64,
}

impl Default for ExchangeOptions {
    fn default() -> Self {
        ExchangeOptions {
            decimation: DEFAULT_DECIMATION,
            substream_a: EXCHANGE_SUBSTREAM_A,
            substream_b: EXCHANGE_SUBSTREAM_B,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowDirection {
    AToB,
    BToA,
}

/// Decimated per-sample record of an exchange-loop run.
///
/// `current` flows around the loop from branch a into branch b; `voltage` is the
/// common terminal voltage. Charges are zero for resistor branches.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CircuitTrace {
    pub decimation: usize,
    pub dt: f64,
    pub current: Vec<f64>,
    pub voltage: Vec<f64>,
    pub charge_a: Vec<f64>,
    pub charge_b: Vec<f64>,
    /// Terminal power absorbed by each branch; `power_a = -power_b` exactly.
    pub power_a: Vec<f64>,
    pub power_b: Vec<f64>,
    /// `I² R(t)` in each branch's resistive element.
    pub dissipation_a: Vec<f64>,
    pub dissipation_b: Vec<f64>,
    /// Power delivered by both noise EMFs, `I (u_a - u_b)`.
    pub source_power: Vec<f64>,
    pub clamp_count: u64,
}

impl CircuitTrace {
    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    /// Mean terminal power into the receiving branch over the retained samples.
    pub fn net_flow(&self, direction: FlowDirection) -> f64 {
        let p = match direction {
            FlowDirection::AToB => &self.power_b,
            FlowDirection::BToA => &self.power_a,
        };
        p.iter().sum::<f64>() / p.len() as f64
    }

    /// Largest `|source - dissipation| / max(|source|, dissipation)` over the retained samples.
    pub fn bookkeeping_residual(&self) -> f64 {
        self.source_power
            .iter()
            .zip(self.dissipation_a.iter().zip(&self.dissipation_b))
            .map(|(&s, (&da, &db))| {
                let d = da + db;
                let scale = s.abs().max(d);
                if scale == 0.0 {
                    0.0
                } else {
                    (s - d).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }
}

/// A branch as seen by the loop solver.
enum Leg {
    Fixed(f64),
    Memristor {
        m: ClampedMemristance,
        state: ElementState,
        /// Loop current enters branch b (+1) and leaves branch a (-1).
        orientation: f64,
    },
}

impl Leg {
    fn new(spec: &BranchSpec, orientation: f64) -> Self {
        match spec {
            BranchSpec::Resistor(r) => Leg::Fixed(r.resistance),
            BranchSpec::Memristor { model, .. } => Leg::Memristor {
                m: ClampedMemristance::new(*model),
                state: ElementState::new(model.q0),
                orientation,
            },
        }
    }

    fn charge(&self) -> f64 {
        match self {
            Leg::Fixed(_) => 0.0,
            Leg::Memristor { state, .. } => state.q,
        }
    }

    /// Resistance and its derivative with respect to loop charge after a loop-charge step `dq`.
    fn peek(&self, dq: f64) -> (f64, f64) {
        match self {
            Leg::Fixed(r) => (*r, 0.0),
            Leg::Memristor { m, state, orientation } => {
                let q = state.q + orientation * dq;
                (m.peek(q), orientation * m.peek_slope(q))
            }
        }
    }

    fn accept(&mut self) -> f64 {
        match self {
            Leg::Fixed(r) => *r,
            Leg::Memristor { m, state, .. } => m.eval(state.q),
        }
    }

    fn advance(&mut self, i_prev: f64, i_now: f64, dt: f64) -> Result<()> {
        if let Leg::Memristor { state, orientation, .. } = self {
            *state = state.advance_charge(*orientation * i_prev, *orientation * i_now, dt)?;
        }
        Ok(())
    }

    fn clamp_count(&self) -> u64 {
        match self {
            Leg::Fixed(_) => 0,
            Leg::Memristor { m, .. } => m.clamp_count(),
        }
    }

    fn is_dynamic(&self) -> bool {
        matches!(self, Leg::Memristor { .. })
    }
}

/// Loop-charge increment for one trapezoidal step with state-dependent resistances.
///
/// Solves `dq = dt/2 (i_prev + du / (R_a(dq) + R_b(dq)))` by Newton iteration.
fn solve_loop_step(a: &Leg, b: &Leg, i_prev: f64, du: f64, dt: f64) -> f64 {
    // du / (R_a + R_b) is bounded, so g changes sign somewhere.
    let g = |dq: f64| {
        let (ra, sa) = a.peek(dq);
        let (rb, sb) = b.peek(dq);
        let rs = ra + rb;
        let value = dq - 0.5 * dt * (i_prev + du / rs);
        let slope = 1.0 + 0.5 * dt * du * (sa + sb) / (rs * rs);
        (value, slope)
    };
    solve_increasing(g, dt * i_prev, 0.5 * dt * (i_prev.abs() + du.abs()))
}

/// Two branches in parallel exchanging noise power; see [`run_exchange_with`].
pub fn run_exchange(
    branch_a: &BranchSpec,
    branch_b: &BranchSpec,
    config: &SimConfig,
) -> Result<(PowerFlowEstimate, CircuitTrace)> {
    run_exchange_with(branch_a, branch_b, config, &ExchangeOptions::default())
}

/// Simulates the single loop `I = (u_a - u_b) / (R_a(t) + R_b(t))`.
///
/// The returned estimate is the burn-in-trimmed mean of the terminal power
/// absorbed by branch b, `P_b = I V_b` with `V_b = R_b I + u_b`. For noisy
/// resistors its expectation is `(R_b S_a - R_a S_b) / (R_a + R_b)^2` per unit
/// bandwidth, the net exchange from a to b.
pub fn run_exchange_with(
    branch_a: &BranchSpec,
    branch_b: &BranchSpec,
    config: &SimConfig,
    opts: &ExchangeOptions,
) -> Result<(PowerFlowEstimate, CircuitTrace)> {
    config.validate()?;
    branch_a.validate()?;
    branch_b.validate()?;
    if opts.decimation == 0 {
        return Err(Error::Argument("decimation must be at least 1".into()));
    }
    let k = config.k_boltzmann;
    let source = |spec: &BranchSpec, substream| -> Result<Option<Vec<f64>>> {
        let psd = spec.noise_psd(k);
        if psd > 0.0 {
            let rec = synthesize_substream(config, psd, NoiseRole::VoltageSource, substream)?;
            Ok(Some(rec.samples))
        } else {
            Ok(None)
        }
    };
    let ua = source(branch_a, opts.substream_a)?;
    let ub = source(branch_b, opts.substream_b)?;
    let u = |rec: &Option<Vec<f64>>, n: usize| rec.as_ref().map_or(0.0, |r| r[n]);

    let n = config.n_samples;
    let dt = config.dt();
    let mut a = Leg::new(branch_a, -1.0);
    let mut b = Leg::new(branch_b, 1.0);
    let dynamic = a.is_dynamic() || b.is_dynamic();

    let burn_in = config.burn_in_samples();
    let mut absorbed_b = Vec::with_capacity(n - burn_in);
    let retained = n.div_ceil(opts.decimation);
    let mut trace = CircuitTrace {
        decimation: opts.decimation,
        dt: dt * opts.decimation as f64,
        current: Vec::with_capacity(retained),
        voltage: Vec::with_capacity(retained),
        charge_a: Vec::with_capacity(retained),
        charge_b: Vec::with_capacity(retained),
        power_a: Vec::with_capacity(retained),
        power_b: Vec::with_capacity(retained),
        dissipation_a: Vec::with_capacity(retained),
        dissipation_b: Vec::with_capacity(retained),
        source_power: Vec::with_capacity(retained),
        clamp_count: 0,
    };

    for step in 0..n {
        let (ua_n, ub_n) = (u(&ua, step), u(&ub, step));
        let ra = a.accept();
        let rb = b.accept();
        let current = (ua_n - ub_n) / (ra + rb);
        let voltage = rb * current + ub_n;
        let p_b = current * voltage;

        if step >= burn_in {
            absorbed_b.push(p_b);
        }
        if step % opts.decimation == 0 {
            trace.current.push(current);
            trace.voltage.push(voltage);
            trace.charge_a.push(a.charge());
            trace.charge_b.push(b.charge());
            trace.power_a.push(-p_b);
            trace.power_b.push(p_b);
            trace.dissipation_a.push(current * current * ra);
            trace.dissipation_b.push(current * current * rb);
            trace.source_power.push(current * (ua_n - ub_n));
        }

        if dynamic && step + 1 < n {
            let du_next = u(&ua, step + 1) - u(&ub, step + 1);
            let dq = solve_loop_step(&a, &b, current, du_next, dt);
            let (ra1, _) = a.peek(dq);
            let (rb1, _) = b.peek(dq);
            let next_current = du_next / (ra1 + rb1);
            a.advance(current, next_current, dt)?;
            b.advance(current, next_current, dt)?;
        }
    }
    trace.clamp_count = a.clamp_count() + b.clamp_count();

    let stats = block_means_error(&absorbed_b, config.min_block_length())?;
    let estimate = PowerFlowEstimate {
        mean: stats.mean,
        standard_error: stats.standard_error,
        n_blocks: stats.n_blocks,
        block_length: stats.block_length,
        burn_in_discarded: burn_in,
    };
    Ok((estimate, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::PolynomialMemristor;

    fn cfg() -> SimConfig {
        SimConfig::default().with_n_samples(1 << 15).with_seed(5)
    }

    #[test]
    fn quiet_loop_carries_nothing() {
        let a = BranchSpec::resistor(1.0, 1.0, false).unwrap();
        let b = BranchSpec::memristor(PolynomialMemristor::linear(1.0), 1.0);
        let (est, trace) = run_exchange(&a, &b, &cfg()).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.standard_error, 0.0);
        assert!(trace.current.iter().all(|&i| i == 0.0));
    }

    #[test]
    fn trace_is_decimated() {
        let a = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let b = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let (_, trace) = run_exchange(&a, &b, &cfg()).unwrap();
        assert_eq!(trace.len(), (1 << 15) / 16);
        assert_eq!(trace.dt, 16.0);
    }

    #[test]
    fn burn_in_is_reported() {
        let a = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let b = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let (est, _) = run_exchange(&a, &b, &cfg()).unwrap();
        assert_eq!(est.burn_in_discarded, 3276);
        assert_eq!(est.block_length, 200);
        assert_eq!(est.n_blocks, (32768 - 3276) / 200);
    }

    #[test]
    fn inadmissible_memristor_rejected_before_simulation() {
        let a = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let b = BranchSpec::memristor(PolynomialMemristor::new(1.0, 2.0, 1.0), 1.0);
        assert!(matches!(run_exchange(&a, &b, &cfg()), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn memristor_charge_tracks_loop_current() {
        // Charge in branch b must equal the trapezoidal integral of the loop current.
        let a = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        let b = BranchSpec::memristor(PolynomialMemristor::new(1.0, 1.0, 1.0), 1.0);
        let opts = ExchangeOptions {
            decimation: 1,
            ..Default::default()
        };
        let (_, trace) = run_exchange_with(&a, &b, &cfg().with_n_samples(1 << 12), &opts).unwrap();
        let mut q = 0.0;
        for n in 1..trace.len() {
            q += 0.5 * trace.dt * (trace.current[n - 1] + trace.current[n]);
            assert!(
                (trace.charge_b[n] - q).abs() < 1e-9 * (1.0 + q.abs()),
                "step {n}: {} vs {q}",
                trace.charge_b[n]
            );
        }
    }
}
