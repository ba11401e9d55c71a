use crate::{Error, Result};

fn check_band(f_low: f64, f_high: f64) -> Result<()> {
    if f_high > f_low {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "band requires f_H > f_L, got [{f_low}, {f_high}]"
        )))
    }
}

/// Classical one-sided Johnson voltage PSD `Re[Z] · 4 k T`.
pub fn fdt_reference_psd(re_z: f64, temperature: f64, k_boltzmann: f64) -> Result<f64> {
    if re_z < 0.0 || temperature < 0.0 {
        return Err(Error::Argument(format!(
            "Re[Z] and T must be non-negative, got {re_z} and {temperature}"
        )));
    }
    Ok(4.0 * k_boltzmann * temperature * re_z)
}

/// Net power from a resistor at `t1` into an equal resistor at `t2` over the band.
///
/// `4 k (T1 - T2) Δf R0² / (2 R0)²`; the resistance cancels.
pub fn expected_exchange_power(r0: f64, t1: f64, t2: f64, f_low: f64, f_high: f64, k_boltzmann: f64) -> Result<f64> {
    if !(r0 > 0.0) {
        return Err(Error::Argument(format!("R0 must be positive, got {r0}")));
    }
    check_band(f_low, f_high)?;
    Ok(k_boltzmann * (t1 - t2) * (f_high - f_low))
}

/// Power a noise-free matched memristor absorbs from a resistor at temperature `t`.
pub fn expected_memristor_absorption(temperature: f64, f_low: f64, f_high: f64, k_boltzmann: f64) -> Result<f64> {
    if temperature < 0.0 {
        return Err(Error::Argument(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    check_band(f_low, f_high)?;
    Ok(k_boltzmann * temperature * (f_high - f_low))
}
