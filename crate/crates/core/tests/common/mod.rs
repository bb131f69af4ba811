//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tensor_derivs::{Mat3, SymTensor};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Uniform rotation from a quaternion drawn in the unit ball.
pub fn rotation(rng: &mut StdRng) -> Mat3 {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-3 && n2 <= 1.0 {
            return quat_rotation(q);
        }
    }
}

/// Rotation for a nonzero (not necessarily normalized) quaternion.
pub fn quat_rotation(q: [f64; 4]) -> Mat3 {
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Mat3::from_rows([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

/// `R diag(α) Rᵗ` for a random rotation.
pub fn with_eigenvalues(rng: &mut StdRng, alphas: [f64; 3]) -> SymTensor {
    let r = rotation(rng);
    SymTensor::from_mat_symmetrized(&(r * Mat3::diag(alphas) * r.transpose()))
}

/// Eigenvalues log-uniform in `[lo, hi]`, redrawn until `max/min ≤ max_cond`.
pub fn log_uniform_spectrum(rng: &mut StdRng, lo: f64, hi: f64, max_cond: f64) -> [f64; 3] {
    loop {
        let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(lo.ln()..hi.ln()).exp());
        let (mn, mx) = a.iter().fold((f64::MAX, 0.0f64), |(mn, mx), v| (mn.min(*v), mx.max(*v)));
        if mx / mn <= max_cond {
            return a;
        }
    }
}

/// Positive definite tensor with condition number at most `max_cond`.
pub fn psym(rng: &mut StdRng, lo: f64, hi: f64, max_cond: f64) -> SymTensor {
    let a = log_uniform_spectrum(rng, lo, hi, max_cond);
    with_eigenvalues(rng, a)
}

/// Eigenvalues uniform in `[lo, hi]` with pairwise gaps at least `gap`.
pub fn separated_values(rng: &mut StdRng, lo: f64, hi: f64, count: usize, gap: f64) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..hi)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= gap) {
            return v;
        }
    }
}

/// Symmetric tensor with entries uniform in `[-1, 1]`.
pub fn sym(rng: &mut StdRng) -> SymTensor {
    let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    SymTensor::new(c).unwrap()
}

/// Symmetric tensor of unit Frobenius norm.
pub fn unit_sym(rng: &mut StdRng) -> SymTensor {
    let x = sym(rng);
    x.scale(1.0 / x.norm())
}

pub fn general(rng: &mut StdRng) -> Mat3 {
    let mut m = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    m
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
