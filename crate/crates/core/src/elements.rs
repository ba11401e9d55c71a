//! Device models: thermal resistor, polynomial memristor, capacitor.
//!
//! Sign convention throughout is passive: current flows into the `+` terminal,
//! so `v * i` is power absorbed by the element.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Linear resistor with optional Johnson noise EMF in series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalResistor {
    #[serde(rename = "R")]
    pub resistance: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    /// `false` gives the noise-free resistor, which violates the FDT for `T > 0`.
    pub noisy: bool,
}

impl ThermalResistor {
    pub fn new(resistance: f64, temperature: f64, noisy: bool) -> Result<Self> {
        let r = ThermalResistor {
            resistance,
            temperature,
            noisy,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resistance.is_finite() && self.resistance > 0.0) {
            return Err(Error::Argument(format!(
                "resistance must be positive, got {}",
                self.resistance
            )));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::Argument(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// One-sided open-circuit voltage noise PSD, `4 k T R` if noisy.
    pub fn voltage_noise_psd(&self, k_boltzmann: f64) -> f64 {
        if self.noisy {
            4.0 * k_boltzmann * self.temperature * self.resistance
        } else {
            0.0
        }
    }

    /// One-sided short-circuit (Norton) current noise PSD, `4 k T / R` if noisy.
    pub fn current_noise_psd(&self, k_boltzmann: f64) -> f64 {
        if self.noisy {
            4.0 * k_boltzmann * self.temperature / self.resistance
        } else {
            0.0
        }
    }

    /// `U = R I + u_n`. A noise-free resistor must be given `u_n = 0`.
    pub fn terminal_voltage(&self, current: f64, u_n: f64) -> Result<f64> {
        if !self.noisy && u_n != 0.0 {
            return Err(Error::Contract(format!(
                "noise voltage {u_n} applied to a noise-free resistor"
            )));
        }
        if u_n == 0.0 {
            Ok(self.resistance * current)
        } else {
            Ok(self.resistance * current + u_n)
        }
    }
}

/// Result of the `M(q) >= 0` check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// A charge with `M(witness_q) < 0` when the model is inadmissible.
    pub witness_q: Option<f64>,
}

/// Memristor with cubic flux-charge relation `Φ(q) = a q + b q² + c q³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialMemristor {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub q0: f64,
}

impl PolynomialMemristor {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        PolynomialMemristor { a, b, c, q0: 0.0 }
    }

    /// `b = c = 0`: a constant memristance `r0`, i.e. a noise-free resistor.
    pub fn linear(r0: f64) -> Self {
        Self::new(r0, 0.0, 0.0)
    }

    pub fn with_initial_charge(mut self, q0: f64) -> Self {
        self.q0 = q0;
        self
    }

    pub fn flux(&self, q: f64) -> f64 {
        q * (self.a + q * (self.b + q * self.c))
    }

    /// `M(q) = dΦ/dq = a + 2 b q + 3 c q²`.
    pub fn memristance(&self, q: f64) -> f64 {
        self.a + q * (2.0 * self.b + q * 3.0 * self.c)
    }

    /// `dM/dq = 2 b + 6 c q`.
    pub fn memristance_slope(&self, q: f64) -> f64 {
        2.0 * self.b + 6.0 * self.c * q
    }

    /// `U = M(q) I`; the state is not touched.
    pub fn voltage(&self, state: &ElementState, current: f64) -> f64 {
        self.memristance(state.q) * current
    }

    pub fn is_linear(&self) -> bool {
        self.b == 0.0 && self.c == 0.0
    }

    /// Closed-form test of `M(q) >= 0` for all real `q`.
    pub fn check_nonnegativity(&self) -> Admissibility {
        let (a, b, c) = (self.a, self.b, self.c);
        let inadmissible = |q: f64| Admissibility {
            admissible: false,
            witness_q: Some(q),
        };
        let ok = Admissibility {
            admissible: true,
            witness_q: None,
        };
        if c > 0.0 {
            if b * b <= 3.0 * a * c {
                ok
            } else {
                // Vertex of the parabola, where M = a - b²/(3c) < 0.
                inadmissible(-b / (3.0 * c))
            }
        } else if c == 0.0 {
            if b == 0.0 {
                if a >= 0.0 {
                    ok
                } else {
                    inadmissible(0.0)
                }
            } else {
                // One unit past the zero crossing of the line, on its negative side.
                let zero = -a / (2.0 * b);
                inadmissible(zero - b.signum() * (1.0 + zero.abs()))
            }
        } else {
            // Downward parabola: step from the vertex until 3c d² outweighs the peak.
            let vertex = -b / (3.0 * c);
            let peak = a - b * b / (3.0 * c);
            let d = (peak.max(0.0) / (-3.0 * c)).sqrt() + 1.0;
            inadmissible(vertex + d)
        }
    }

    /// Errors with the witness when `M(q) < 0` somewhere.
    pub fn require_admissible(&self) -> Result<()> {
        match self.check_nonnegativity().witness_q {
            None => Ok(()),
            Some(q) => Err(Error::Inadmissible {
                a: self.a,
                b: self.b,
                c: self.c,
                witness_q: q,
                memristance_at_witness: self.memristance(q),
            }),
        }
    }

    /// Lower bound applied to `M(q)` inside circuit solvers.
    pub fn memristance_floor(&self) -> f64 {
        if self.a > 0.0 {
            MEMRISTANCE_FLOOR_RATIO * self.a
        } else {
            MEMRISTANCE_FLOOR_RATIO
        }
    }
}

/// Ratio of the memristance floor to `a = M(0)`.
pub const MEMRISTANCE_FLOOR_RATIO: f64 = 1e-9;

/// Evaluates `M(q)` clamped below at the model's floor, counting clamp events.
#[derive(Debug, Clone)]
pub struct ClampedMemristance {
    model: PolynomialMemristor,
    floor: f64,
    clamp_count: u64,
}

impl ClampedMemristance {
    pub fn new(model: PolynomialMemristor) -> Self {
        ClampedMemristance {
            floor: model.memristance_floor(),
            model,
            clamp_count: 0,
        }
    }

    /// Clamped value without touching the counter; for trial evaluations inside solvers.
    #[inline]
    pub fn peek(&self, q: f64) -> f64 {
        self.model.memristance(q).max(self.floor)
    }

    /// Slope of the clamped curve (zero where the floor is active).
    #[inline]
    pub fn peek_slope(&self, q: f64) -> f64 {
        if self.model.memristance(q) > self.floor {
            self.model.memristance_slope(q)
        } else {
            0.0
        }
    }

    /// Clamped value for an accepted step; counts a clamp event if the floor was hit.
    #[inline]
    pub fn eval(&mut self, q: f64) -> f64 {
        let m = self.model.memristance(q);
        if m < self.floor {
            self.clamp_count += 1;
            self.floor
        } else {
            m
        }
    }

    pub fn clamp_count(&self) -> u64 {
        self.clamp_count
    }

    pub fn model(&self) -> &PolynomialMemristor {
        &self.model
    }
}

/// Accumulated charge and elapsed time of a charge-controlled element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementState {
    pub q: f64,
    pub t: f64,
}

impl ElementState {
    pub fn new(q0: f64) -> Self {
        ElementState { q: q0, t: 0.0 }
    }

    /// Trapezoidal step of `q = ∫ I dt`.
    pub fn advance_charge(&self, i_prev: f64, i_now: f64, dt: f64) -> Result<ElementState> {
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("time step must be positive, got {dt}")));
        }
        Ok(ElementState {
            q: self.q + dt * (i_prev + i_now) / 2.0,
            t: self.t + dt,
        })
    }
}

/// Ideal capacitor. Noise-free: its impedance has no real part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacitor {
    #[serde(rename = "C")]
    pub capacitance: f64,
    #[serde(default)]
    pub v0: f64,
}

impl Capacitor {
    pub fn new(capacitance: f64) -> Result<Self> {
        let c = Capacitor { capacitance, v0: 0.0 };
        c.validate()?;
        Ok(c)
    }

    pub fn with_initial_voltage(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.capacitance.is_finite() && self.capacitance > 0.0) {
            return Err(Error::Argument(format!(
                "capacitance must be positive, got {}",
                self.capacitance
            )));
        }
        Ok(())
    }

    /// Thermal voltage noise PSD; always zero for a reactive element.
    pub fn voltage_noise_psd(&self, _k_boltzmann: f64) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn memristance_examples() {
        assert_eq!(PolynomialMemristor::linear(1.0).memristance(123.4), 1.0);
        let m = PolynomialMemristor::new(1.0, 1.0, 1.0);
        assert_eq!(m.memristance(1.0), 6.0);
        assert_eq!(m.memristance(-1.0), 2.0);
    }

    #[test]
    fn flux_examples() {
        let m = PolynomialMemristor::new(1.0, 1.0, 1.0);
        assert_eq!(m.flux(0.0), 0.0);
        assert_eq!(m.flux(1.0), 3.0);
        assert_eq!(PolynomialMemristor::linear(1.0).flux(2.5), 2.5);
    }

    #[test]
    fn admissibility_examples() {
        let ok = PolynomialMemristor::new(1.0, 1.0, 1.0).check_nonnegativity();
        assert!(ok.admissible && ok.witness_q.is_none());

        let bad = PolynomialMemristor::new(1.0, 2.0, 1.0);
        let report = bad.check_nonnegativity();
        assert!(!report.admissible);
        let q = report.witness_q.unwrap();
        assert!((q + 2.0 / 3.0).abs() < 1e-15);
        assert!((bad.memristance(q) - (1.0 - 4.0 / 3.0)).abs() < 1e-15);

        assert!(PolynomialMemristor::linear(1.0).check_nonnegativity().admissible);
    }

    #[test]
    fn degenerate_branches_of_the_check() {
        // Negative constant.
        let m = PolynomialMemristor::linear(-0.5);
        let q = m.check_nonnegativity().witness_q.unwrap();
        assert!(m.memristance(q) < 0.0);
        // Pure line, both slopes.
        for b in [0.7, -0.7] {
            let m = PolynomialMemristor::new(3.0, b, 0.0);
            let q = m.check_nonnegativity().witness_q.unwrap();
            assert!(m.memristance(q) < 0.0, "b={b}, q={q}");
        }
        // Downward parabola with a positive peak.
        let m = PolynomialMemristor::new(5.0, 1.0, -0.01);
        let q = m.check_nonnegativity().witness_q.unwrap();
        assert!(m.memristance(q) < 0.0);
        // Boundary b² = 3ac is admissible.
        let m = PolynomialMemristor::new(1.0, 3.0, 3.0);
        assert!(m.check_nonnegativity().admissible);
    }

    #[test]
    fn require_admissible_carries_witness() {
        let err = PolynomialMemristor::new(1.0, 2.0, 1.0)
            .require_admissible()
            .unwrap_err();
        match err {
            Error::Inadmissible {
                witness_q,
                memristance_at_witness,
                ..
            } => {
                assert!((witness_q + 2.0 / 3.0).abs() < 1e-15);
                assert!(memristance_at_witness < 0.0);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn memristor_voltage_examples() {
        let lin = PolynomialMemristor::linear(1.0);
        assert_eq!(lin.voltage(&ElementState::new(0.0), 0.5), 0.5);
        let m = PolynomialMemristor::new(1.0, 1.0, 1.0);
        assert_eq!(m.voltage(&ElementState::new(7.0), 0.0), 0.0);
        assert_eq!(m.voltage(&ElementState::new(1.0), 2.0), 12.0);
    }

    #[test]
    fn advance_charge_examples() {
        let s = ElementState::new(0.3);
        assert_eq!(s.advance_charge(0.0, 0.0, 0.1).unwrap().q, 0.3);
        let s = ElementState::new(0.0).advance_charge(1.0, 1.0, 0.1).unwrap();
        assert_eq!(s.q, 0.1);
        assert!((s.t - 0.1).abs() < 1e-15);
        assert!(ElementState::new(0.0).advance_charge(1.0, 1.0, 0.0).is_err());
        assert!(ElementState::new(0.0).advance_charge(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn sinusoid_period_returns_charge() {
        // 64 steps per period, amplitude 1, period 1: the trapezoid sum of a full
        // sine period cancels to rounding.
        let steps = 64;
        let dt = 1.0 / steps as f64;
        let i = |k: usize| (2.0 * std::f64::consts::PI * k as f64 * dt).sin();
        let mut s = ElementState::new(0.0);
        for k in 0..steps {
            s = s.advance_charge(i(k), i(k + 1), dt).unwrap();
        }
        assert!(s.q.abs() < 1e-9);
    }

    #[test]
    fn resistor_terminal_voltage() {
        let r = ThermalResistor::new(1.0, 1.0, true).unwrap();
        assert_eq!(r.terminal_voltage(1.0, 0.0).unwrap(), 1.0);
        let r = ThermalResistor::new(2.0, 1.0, true).unwrap();
        assert_eq!(r.terminal_voltage(0.0, 0.3).unwrap(), 0.3);
        let quiet = ThermalResistor::new(2.0, 1.0, false).unwrap();
        assert!(matches!(quiet.terminal_voltage(0.0, 0.3), Err(Error::Contract(_))));
        assert_eq!(quiet.terminal_voltage(0.5, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn resistor_validation() {
        assert!(ThermalResistor::new(0.0, 1.0, true).is_err());
        assert!(ThermalResistor::new(1.0, -1.0, true).is_err());
        assert!(Capacitor::new(0.0).is_err());
    }

    #[test]
    fn noise_levels() {
        let r = ThermalResistor::new(2.0, 0.5, true).unwrap();
        assert_eq!(r.voltage_noise_psd(1.0), 4.0);
        assert_eq!(r.current_noise_psd(1.0), 1.0);
        let q = ThermalResistor::new(2.0, 0.5, false).unwrap();
        assert_eq!(q.voltage_noise_psd(1.0), 0.0);
        assert_eq!(Capacitor::new(1.0).unwrap().voltage_noise_psd(1.0), 0.0);
    }

    #[test]
    fn clamp_counts_floor_hits() {
        // Boundary model M(q) = 3 (q + 1)², zero at q = -1.
        let mut m = ClampedMemristance::new(PolynomialMemristor::new(3.0, 3.0, 1.0));
        assert!(m.eval(0.0) > 0.0);
        assert_eq!(m.clamp_count(), 0);
        assert_eq!(m.eval(-1.0), 3.0 * MEMRISTANCE_FLOOR_RATIO);
        assert_eq!(m.clamp_count(), 1);
        assert_eq!(m.peek(-1.0), 3.0 * MEMRISTANCE_FLOOR_RATIO);
        assert_eq!(m.clamp_count(), 1);
    }

    fn admissible_model() -> impl Strategy<Value = PolynomialMemristor> {
        (0.01f64..5.0, -3.0f64..3.0, 0.01f64..3.0).prop_filter_map("M >= 0", |(a, b, c)| {
            let m = PolynomialMemristor::new(a, b, c);
            m.check_nonnegativity().admissible.then_some(m)
        })
    }

    proptest! {
        #[test]
        fn central_difference_matches_memristance(m in admissible_model(), q in -100.0f64..100.0) {
            let h = 1e-4;
            let fd = (m.flux(q + h) - m.flux(q - h)) / (2.0 * h);
            let exact = m.memristance(q);
            prop_assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()));
        }

        #[test]
        fn linear_memristor_matches_quiet_resistor(r in 0.01f64..100.0, i in -10.0f64..10.0, q in -5.0f64..5.0) {
            let m = PolynomialMemristor::linear(r);
            let res = ThermalResistor::new(r, 1.0, false).unwrap();
            let vm = m.voltage(&ElementState::new(q), i);
            let vr = res.terminal_voltage(i, 0.0).unwrap();
            prop_assert_eq!(vm.to_bits(), vr.to_bits());
        }

        #[test]
        fn witness_is_negative(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            let m = PolynomialMemristor::new(a, b, c);
            if let Some(q) = m.check_nonnegativity().witness_q {
                prop_assert!(m.memristance(q) < 0.0);
            }
        }
    }
}
