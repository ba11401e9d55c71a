//! Fixed-topology testbenches driven by synthesized thermal noise.

mod cascade;
mod drive;
mod exchange;
mod rectifier;

pub use cascade::{run_cascade, run_cascade_with, CascadeResult, StageDc};
pub use drive::{run_ideal_drive, IdealDriveResult};
pub use exchange::{run_exchange, run_exchange_with, CircuitTrace, ExchangeOptions, FlowDirection};
pub use rectifier::{
    run_rectifier_cell, run_rectifier_cell_with, simulate_rectifier, RectifierOptions, RectifierResult, RectifierRun,
    RectifierTopology,
};

use serde::Serialize;

use crate::elements::{PolynomialMemristor, ThermalResistor};
use crate::{Error, Result};

/// Noise substreams used by the two-branch exchange loop.
pub const EXCHANGE_SUBSTREAM_A: u64 = 0;
pub const EXCHANGE_SUBSTREAM_B: u64 = 1;

/// Default storage decimation of circuit traces.
pub const DEFAULT_DECIMATION: usize = 16;

/// One branch of the exchange loop: a single device, plus its noise EMF if it has one.
///
/// Memristor branches never carry a noise source. Their `temperature` is the
/// ambient temperature they sit at, used only by the audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BranchSpec {
    Resistor(ThermalResistor),
    Memristor {
        #[serde(flatten)]
        model: PolynomialMemristor,
        #[serde(rename = "T")]
        temperature: f64,
    },
}

impl BranchSpec {
    pub fn resistor(resistance: f64, temperature: f64, noisy: bool) -> Result<Self> {
        Ok(BranchSpec::Resistor(ThermalResistor::new(
            resistance,
            temperature,
            noisy,
        )?))
    }

    pub fn memristor(model: PolynomialMemristor, temperature: f64) -> Self {
        BranchSpec::Memristor { model, temperature }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BranchSpec::Resistor(r) => r.validate(),
            BranchSpec::Memristor { model, temperature } => {
                if !(temperature.is_finite() && *temperature >= 0.0) {
                    return Err(Error::Argument(format!(
                        "temperature must be non-negative, got {temperature}"
                    )));
                }
                model.require_admissible()
            }
        }
    }

    pub fn temperature(&self) -> f64 {
        match self {
            BranchSpec::Resistor(r) => r.temperature,
            BranchSpec::Memristor { temperature, .. } => *temperature,
        }
    }

    pub fn is_noisy(&self) -> bool {
        matches!(self, BranchSpec::Resistor(r) if r.noisy)
    }

    /// One-sided PSD of the branch's series noise EMF (zero when it has none).
    pub fn noise_psd(&self, k_boltzmann: f64) -> f64 {
        match self {
            BranchSpec::Resistor(r) => r.voltage_noise_psd(k_boltzmann),
            BranchSpec::Memristor { .. } => 0.0,
        }
    }

    /// `R` for a resistor, `M(q0)` for a memristor.
    pub fn small_signal_resistance(&self) -> f64 {
        match self {
            BranchSpec::Resistor(r) => r.resistance,
            BranchSpec::Memristor { model, .. } => model.memristance(model.q0),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BranchSpec::Resistor(r) => format!(
                "{} resistor R={} T={}",
                if r.noisy { "noisy" } else { "noise-free" },
                r.resistance,
                r.temperature
            ),
            BranchSpec::Memristor { model, temperature } => format!(
                "noise-free memristor a={} b={} c={} q0={} at T={}",
                model.a, model.b, model.c, model.q0, temperature
            ),
        }
    }
}

/// Root of a function that is negative far left and positive far right.
///
/// Newton steps are taken from `guess` while they stay inside a bracket;
/// otherwise the bracket is bisected. `g` returns the value and its slope.
pub(crate) fn solve_increasing(g: impl Fn(f64) -> (f64, f64), guess: f64, scale: f64) -> f64 {
    let mut x = guess;
    let (mut v, mut s) = g(x);
    if v == 0.0 {
        return x;
    }
    let mut width = scale.abs() + 1e-12;
    let (mut lo, mut hi) = if v < 0.0 { (x, x + width) } else { (x - width, x) };
    loop {
        if v < 0.0 {
            if g(hi).0 >= 0.0 {
                break;
            }
            lo = hi;
            hi += width;
        } else {
            if g(lo).0 <= 0.0 {
                break;
            }
            hi = lo;
            lo -= width;
        }
        width *= 2.0;
    }
    for _ in 0..200 {
        let newton = x - v / s;
        x = if s.is_finite() && s > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        (v, s) = g(x);
        if v == 0.0 {
            break;
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let tol = 1e-15 * (1.0 + x.abs());
        if v.abs() <= tol || hi - lo <= tol {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memristor_branches_are_silent() {
        let b = BranchSpec::memristor(PolynomialMemristor::linear(1.0), 1.0);
        assert!(!b.is_noisy());
        assert_eq!(b.noise_psd(1.0), 0.0);
        assert_eq!(b.small_signal_resistance(), 1.0);
    }

    #[test]
    fn noisy_resistor_psd() {
        let b = BranchSpec::resistor(1.0, 1.0, true).unwrap();
        assert_eq!(b.noise_psd(1.0), 4.0);
        assert!(b.is_noisy());
    }

    #[test]
    fn inadmissible_branch_fails_validation() {
        let b = BranchSpec::memristor(PolynomialMemristor::new(1.0, 2.0, 1.0), 1.0);
        assert!(matches!(b.validate(), Err(Error::Inadmissible { .. })));
    }

    #[test]
    fn serializes_with_type_tag() {
        let b = BranchSpec::memristor(PolynomialMemristor::new(1.0, 1.0, 1.0), 1.0);
        let v = serde_json::to_value(b).unwrap();
        assert_eq!(v["type"], "memristor");
        assert_eq!(v["a"], 1.0);
        let r = serde_json::to_value(BranchSpec::resistor(2.0, 1.0, true).unwrap()).unwrap();
        assert_eq!(r["type"], "resistor");
        assert_eq!(r["R"], 2.0);
    }

    #[test]
    fn bracketed_solver_handles_flat_and_steep_functions() {
        let cubic = |x: f64| (x * x * x - 8.0, 3.0 * x * x);
        assert!((solve_increasing(cubic, 0.0, 0.1) - 2.0).abs() < 1e-12);
        let root = solve_increasing(|x: f64| (x.atan() - 1.2, 1.0 / (1.0 + x * x)), 50.0, 1.0);
        assert!((root - 1.2f64.tan()).abs() < 1e-12);
    }
}
