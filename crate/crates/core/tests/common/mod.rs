#![allow(dead_code)]

use memaudit::elements::PolynomialMemristor;
use memaudit::noise::{synthesize_oversampled, NoiseRole, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Symmetric grid on `[-1e6, 1e6]`: zero plus `±10^x` for log-spaced `x` in `[-12, 6]`.
///
/// Log spacing resolves negative pockets of M(q) a few units wide just as well
/// as ones near a million, which a uniform grid of this size would not.
pub fn scan_grid(points: usize) -> Vec<f64> {
    let side = (points - 1) / 2;
    let mut grid = Vec::with_capacity(2 * side + 1);
    let step = 18.0 / (side - 1) as f64;
    for i in (0..side).rev() {
        grid.push(-(10f64).powf(-12.0 + step * i as f64));
    }
    grid.push(0.0);
    for i in 0..side {
        grid.push((10f64).powf(-12.0 + step * i as f64));
    }
    grid
}

/// Minimum of `a + 2 b q + 3 c q^2` over the grid.
pub fn brute_force_min(grid: &[f64], a: f64, b: f64, c: f64) -> f64 {
    let (b2, c3) = (2.0 * b, 3.0 * c);
    grid.iter()
        .map(|&q| a + q * (b2 + c3 * q))
        .fold(f64::INFINITY, f64::min)
}

/// Random admissible model with strictly positive `a` and `c`.
pub fn random_admissible(rng: &mut ChaCha8Rng) -> PolynomialMemristor {
    loop {
        let m = PolynomialMemristor::new(
            rng.random_range(0.1..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(0.1..3.0),
        );
        if m.check_nonnegativity().admissible {
            return m;
        }
    }
}

/// Parallel rectifier cell integrated by classical RK4 on the `factor`-times
/// oversampled drive, two fine samples per step so every stage lands on a grid
/// sample. Returns the node voltage at base-rate samples.
pub fn rk4_parallel_cell(
    m: &PolynomialMemristor,
    r: f64,
    c: f64,
    psd: f64,
    config: &SimConfig,
    substream: u64,
    factor: usize,
) -> Vec<f64> {
    assert!(factor >= 2 && factor.is_multiple_of(2));
    let drive = synthesize_oversampled(config, psd, NoiseRole::CurrentSource, substream, factor).unwrap();
    let i = drive.samples();
    let h = 2.0 * drive.dt();
    let floor = m.memristance_floor();
    let mem = |q: f64| m.memristance(q).max(floor);
    let rhs = |v: f64, q: f64, drive: f64| {
        let mq = mem(q);
        ((drive - v / r - v / mq) / c, v / mq)
    };
    let n = config.n_samples;
    let mut out = Vec::with_capacity(n);
    let (mut v, mut q) = (0.0, m.q0);
    let mut k = 0;
    while k < i.len() {
        if k % factor == 0 {
            out.push(v);
        }
        if k + 2 >= i.len() {
            break;
        }
        let (a1, b1) = rhs(v, q, i[k]);
        let (a2, b2) = rhs(v + 0.5 * h * a1, q + 0.5 * h * b1, i[k + 1]);
        let (a3, b3) = rhs(v + 0.5 * h * a2, q + 0.5 * h * b2, i[k + 1]);
        let (a4, b4) = rhs(v + h * a3, q + h * b3, i[k + 2]);
        v += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        q += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        k += 2;
    }
    while out.len() < n {
        out.push(v);
    }
    out
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
