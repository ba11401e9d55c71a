use rustfft::num_complex::Complex64;
use rustfft::FftPlannerScalar;

// The scalar planner is used so identical inputs give bit-identical outputs
// regardless of which SIMD extensions the host CPU offers.

pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlannerScalar::<f64>::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalized inverse transform.
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    let mut planner = FftPlannerScalar::<f64>::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}
