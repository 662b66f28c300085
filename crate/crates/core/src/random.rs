//! Seeded random matrices: Gaussian ensembles, Haar unitaries and
//! per-trial sub-seed derivation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, from_diagonal, CMatrix};
use num_complex::Complex64;

pub type TrialRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a.
pub fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Independent seed for trial `index` of the suite `label`.
pub fn sub_seed(seed: u64, label: &str, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ fnv1a(label)).wrapping_add(index))
}

pub fn gaussian(rng: &mut TrialRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn uniform(rng: &mut TrialRng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

pub fn below(rng: &mut TrialRng, n: usize) -> usize {
    rng.random_range(0..n)
}

pub fn coin(rng: &mut TrialRng, p: f64) -> bool {
    rng.random_bool(p)
}

/// Entries `(x + iy)/√2` with `x, y` standard normal.
pub fn complex_gaussian(rng: &mut TrialRng, rows: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| c(s * gaussian(rng), s * gaussian(rng)))
}

pub fn real_gaussian(rng: &mut TrialRng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gaussian(rng), 0.0))
}

fn phase_normalized_q(g: CMatrix) -> CMatrix {
    let d = g.nrows();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<Complex64> = (0..d)
        .map(|i| {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                c(1.0, 0.0)
            }
        })
        .collect();
    q * from_diagonal(&phases)
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian
/// matrix with the diagonal of `R` normalized to positive reals.
pub fn random_unitary(rng: &mut TrialRng, d: usize) -> CMatrix {
    phase_normalized_q(complex_gaussian(rng, d, d))
}

/// Haar-distributed real orthogonal matrix.
pub fn random_orthogonal(rng: &mut TrialRng, d: usize) -> CMatrix {
    phase_normalized_q(real_gaussian(rng, d, d)).map(|z| c(z.re, 0.0))
}

pub fn unimodular(rng: &mut TrialRng) -> Complex64 {
    Complex64::from_polar(1.0, uniform(rng, 0.0, 2.0 * PI))
}

/// `k` points on the unit circle with pairwise angular gaps of at least `π/k`.
pub fn separated_phases(rng: &mut TrialRng, k: usize) -> Vec<Complex64> {
    if k == 0 {
        return Vec::new();
    }
    let offset = uniform(rng, 0.0, 2.0 * PI);
    let step = 2.0 * PI / k as f64;
    (0..k)
        .map(|j| {
            let jitter = uniform(rng, -0.25, 0.25) * step;
            Complex64::from_polar(1.0, offset + j as f64 * step + jitter)
        })
        .collect()
}

/// `k` reals in `[lo, hi]`, one per equal subinterval, pairwise at least half
/// a subinterval apart.
pub fn separated_reals(rng: &mut TrialRng, k: usize, lo: f64, hi: f64) -> Vec<f64> {
    let step = (hi - lo) / k.max(1) as f64;
    (0..k)
        .map(|j| lo + (j as f64 + 0.5 + uniform(rng, -0.25, 0.25)) * step)
        .collect()
}

/// `k` angles in `(0, π)` kept apart from each other and from `0` and `π`.
pub fn separated_angles(rng: &mut TrialRng, k: usize) -> Vec<f64> {
    let step = PI / (k + 1) as f64;
    (0..k)
        .map(|j| (j as f64 + 1.0 + uniform(rng, -0.25, 0.25)) * step)
        .collect()
}

/// Well-conditioned invertible matrix `U·diag(σ)·V*` with `σ ∈ [0.5, 2]`.
pub fn random_invertible(rng: &mut TrialRng, d: usize) -> CMatrix {
    let u = random_unitary(rng, d);
    let v = random_unitary(rng, d);
    let sigma: Vec<Complex64> = (0..d).map(|_| c(uniform(rng, 0.5, 2.0), 0.0)).collect();
    u * from_diagonal(&sigma) * v.adjoint()
}
