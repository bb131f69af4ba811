//! Inverse gradients of strain measures, the `𝔸_I` basis, the `J`, `J*`,
//! `K` tensors and the Sylvester-type solvers built on them.
//!
//! Everything here assumes a positive definite argument.

use crate::error::{Error, Result};
use crate::multilinear::{compose4, FourthTensor};
use crate::scalar::{ScalarFn, StrainMeasureFn};
use crate::spectral::{decompose, Spectrum, DEFAULT_CLUSTER_TOL};
use crate::tensor::{Mat3, SymTensor};

/// Default number of Gauss–Legendre points for the log inverse.
pub const DEFAULT_QUAD_POINTS: usize = 32;

fn require_positive(s: &Spectrum) -> Result<()> {
    if s.is_positive() {
        Ok(())
    } else {
        Err(Error::NotPositiveDefinite(s.min_alpha()))
    }
}

fn positive_spectrum(a: &SymTensor) -> Result<Spectrum> {
    let s = decompose(a, DEFAULT_CLUSTER_TOL)?;
    require_positive(&s)?;
    Ok(s)
}

/// The `D = d(d+1)/2` tensors `𝔸_I`: `Aᵢ ⊠ Aᵢ` for `I ≤ d`, then
/// `Aᵢ ⊠ Aⱼ + Aⱼ ⊠ Aᵢ` for `i < j`.
#[derive(Clone, Debug)]
pub struct FourthSpectralBasis {
    labels: Vec<(usize, usize)>,
    tensors: Vec<FourthTensor>,
}

impl FourthSpectralBasis {
    pub fn new(s: &Spectrum) -> Self {
        let p = s.projector_mats();
        let d = s.d();
        let mut labels: Vec<(usize, usize)> = (0..d).map(|i| (i, i)).collect();
        for i in 0..d {
            for j in i + 1..d {
                labels.push((i, j));
            }
        }
        let tensors = labels
            .iter()
            .map(|&(i, j)| {
                if i == j {
                    FourthTensor::boxed(p[i], p[i])
                } else {
                    FourthTensor::from_terms(vec![(1.0, p[i], p[j]), (1.0, p[j], p[i])])
                }
            })
            .collect();
        FourthSpectralBasis { labels, tensors }
    }

    /// D
    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Eigenvalue labels `(i, j)` of each `𝔸_I`; `i == j` for the first d.
    pub fn labels(&self) -> &[(usize, usize)] {
        &self.labels
    }

    pub fn tensors(&self) -> &[FourthTensor] {
        &self.tensors
    }

    /// `Σ c_I 𝔸_I`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<FourthTensor> {
        if coeffs.len() != self.len() {
            return Err(Error::Arity {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        let mut t = FourthTensor::zero();
        for (c, b) in coeffs.iter().zip(&self.tensors) {
            t = t.add(&b.scale(*c));
        }
        Ok(t)
    }
}

/// `f_I`: `f′(αᵢ)` on the diagonal labels, the divided difference on pairs.
pub fn strain_coefficients(f: &ScalarFn, s: &Spectrum) -> Result<Vec<f64>> {
    let basis = FourthSpectralBasis::new(s);
    let a = s.alphas();
    basis
        .labels()
        .iter()
        .map(|&(i, j)| {
            if i == j {
                f.eval_deriv(1, a[i])
            } else {
                crate::coefficients::coeff_divided_difference(f, &[a[i], a[j]])
            }
        })
        .collect()
}

/// `∇f(A) = Σ f_I 𝔸_I`.
pub fn grad_spectral(f: &StrainMeasureFn, s: &Spectrum) -> Result<FourthTensor> {
    require_positive(s)?;
    let c = strain_coefficients(f.function(), s)?;
    FourthSpectralBasis::new(s).combine(&c)
}

/// `∇⁻¹f(A) = Σ f_I⁻¹ 𝔸_I`.
pub fn inverse_grad(f: &StrainMeasureFn, s: &Spectrum) -> Result<FourthTensor> {
    require_positive(s)?;
    let c = strain_coefficients(f.function(), s)?;
    let scale = c.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let tol = 1e3 * f64::EPSILON * scale;
    if let Some(bad) = c.iter().find(|v| **v <= tol) {
        return Err(Error::NonMonotone(*bad));
    }
    let inv: Vec<f64> = c.iter().map(|v| 1.0 / v).collect();
    FourthSpectralBasis::new(s).combine(&inv)
}

fn checked_powi(a: &Mat3, p: i32) -> Result<Mat3> {
    a.powi(p).ok_or(Error::NotPositiveDefinite(0.0))
}

/// `∇f⁽ᵐ⁾(A)` as a ⊠-sum of integer powers:
/// `(1/m) Σ_{k=1}^{m} A^{m−k} ⊠ A^{k−1}` for `m > 0` and
/// `(1/|m|) Σ_{k=m+1}^{0} A^{m−k} ⊠ A^{k−1}` for `m < 0`.
pub fn seth_hill_sum_form(m: i32, a: &SymTensor) -> Result<FourthTensor> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "the sum form needs m ≠ 0; use the log inverse integral".into(),
        ));
    }
    positive_spectrum(a)?;
    let am: Mat3 = a.into();
    let ks: Vec<i32> = if m > 0 { (1..=m).collect() } else { (m + 1..=0).collect() };
    let w = 1.0 / m.unsigned_abs() as f64;
    let mut t = FourthTensor::zero();
    for k in ks {
        t.push(w, checked_powi(&am, m - k)?, checked_powi(&am, k - 1)?);
    }
    Ok(t)
}

/// `∇⁻¹f⁽¹ᐟᵐ⁾(A) = (1/|m|) Σ_k A^{1−k/m} ⊠ A^{(k−1)/m}`, same k ranges as
/// [`seth_hill_sum_form`], with fractional powers taken spectrally.
pub fn seth_hill_fractional_inverse(m: i32, a: &SymTensor) -> Result<FourthTensor> {
    if m == 0 {
        return Err(Error::InvalidArgument("fractional inverse needs m ≠ 0".into()));
    }
    let s = positive_spectrum(a)?;
    let ks: Vec<i32> = if m > 0 { (1..=m).collect() } else { (m + 1..=0).collect() };
    let mf = m as f64;
    let w = 1.0 / m.unsigned_abs() as f64;
    let mut t = FourthTensor::zero();
    for k in ks {
        let kf = k as f64;
        t.push(w, s.power(1.0 - kf / mf)?, s.power((kf - 1.0) / mf)?);
    }
    Ok(t)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one point".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] → [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Ok((nodes, weights))
}

/// `∇⁻¹ ln(A) = ∫₀¹ Aˣ ⊠ A^{1−x} dx` by Gauss–Legendre quadrature.
pub fn log_inverse_integral(a: &SymTensor, quad_points: usize) -> Result<FourthTensor> {
    let s = positive_spectrum(a)?;
    let (x, w) = gauss_legendre(quad_points)?;
    let mut t = FourthTensor::zero();
    for (xq, wq) in x.iter().zip(&w) {
        t.push(*wq, s.power(*xq)?, s.power(1.0 - xq)?);
    }
    Ok(t)
}

/// `Σ (αᵢ − αⱼ)/(ln αᵢ − ln αⱼ) Aᵢ ⊠ Aⱼ`, the ratio being `αᵢ` when `i = j`.
pub fn log_inverse_spectral(s: &Spectrum) -> Result<FourthTensor> {
    require_positive(s)?;
    let p = s.projector_mats();
    let a = s.alphas();
    let mut t = FourthTensor::zero();
    for i in 0..s.d() {
        for j in 0..s.d() {
            let r = if i == j {
                a[i]
            } else {
                (a[i] - a[j]) / (a[i].ln() - a[j].ln())
            };
            t.push(r, p[i], p[j]);
        }
    }
    Ok(t)
}

/// `J(A) = A ⊠ I − I ⊠ A`.
pub fn j_tensor(a: &SymTensor) -> Result<FourthTensor> {
    positive_spectrum(a)?;
    Ok(commutator_map(&a.into()))
}

fn commutator_map(a: &Mat3) -> FourthTensor {
    FourthTensor::from_terms(vec![(1.0, *a, Mat3::IDENTITY), (-1.0, Mat3::IDENTITY, *a)])
}

/// `J*(A) = Σ_{i≠j} (αᵢ − αⱼ)⁻¹ Aᵢ ⊠ Aⱼ`, the Moore–Penrose inverse of `J(A)`.
pub fn j_star(s: &Spectrum) -> Result<FourthTensor> {
    require_positive(s)?;
    Ok(pseudo_commutator(s))
}

fn pseudo_commutator(s: &Spectrum) -> FourthTensor {
    let p = s.projector_mats();
    let a = s.alphas();
    let mut t = FourthTensor::zero();
    for i in 0..s.d() {
        for j in 0..s.d() {
            if i != j {
                t.push(1.0 / (a[i] - a[j]), p[i], p[j]);
            }
        }
    }
    t
}

/// `K = Σ vᵢ 𝔸ᵢ` over the diagonal labels of `s`; `K(A)` takes `vᵢ = αᵢ`.
/// A function of A enters through its values on A's own projectors.
pub fn k_tensor(s: &Spectrum, values: &[f64]) -> Result<FourthTensor> {
    require_positive(s)?;
    if values.len() != s.d() {
        return Err(Error::Arity {
            expected: s.d(),
            got: values.len(),
        });
    }
    let p = s.projector_mats();
    let mut t = FourthTensor::zero();
    for (v, pi) in values.iter().zip(&p) {
        t.push(*v, *pi, *pi);
    }
    Ok(t)
}

/// `K*(values) = K(1/values)`.
pub fn k_star(s: &Spectrum, values: &[f64]) -> Result<FourthTensor> {
    if let Some(z) = values.iter().find(|v| **v == 0.0) {
        return Err(Error::NonMonotone(*z));
    }
    let inv: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
    k_tensor(s, &inv)
}

/// `∇f = K(f′(A)) + J*(A) J(f(A))` and `∇⁻¹f = K*(f′(A)) + J(A) J*(f(A))`.
pub fn jk_decomposition(f: &StrainMeasureFn, a: &SymTensor) -> Result<(FourthTensor, FourthTensor)> {
    let s = positive_spectrum(a)?;
    let func = f.function();
    let fprime = s
        .alphas()
        .iter()
        .map(|&x| func.eval_deriv(1, x))
        .collect::<Result<Vec<_>>>()?;
    let fa = s.apply(func)?;
    let fs = decompose(&fa, DEFAULT_CLUSTER_TOL)?;
    let ja = commutator_map(&a.into());
    let jsa = pseudo_commutator(&s);
    let jf = commutator_map(&fa.into());
    let jsf = pseudo_commutator(&fs);
    let grad = k_tensor(&s, &fprime)?.add(&compose4(&jsa, &jf));
    let inv = k_star(&s, &fprime)?.add(&compose4(&ja, &jsf));
    Ok((grad, inv))
}

/// Solution of `AX − XA = Y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorSolution {
    /// Minimum-norm solution `J*(A) Y`.
    pub x: Mat3,
    /// `‖Σ Aᵢ Y Aᵢ‖`, the part of `Y` outside the range of `J(A)`.
    pub null_residual: f64,
}

/// Solves `AX − XA = Y` through the pseudo-inverse.
pub fn sylvester_commutator(a: &SymTensor, y: &Mat3) -> Result<CommutatorSolution> {
    if !y.is_finite() {
        return Err(Error::NonFinite("commutator right-hand side"));
    }
    let s = positive_spectrum(a)?;
    let p = s.projector_mats();
    let null: Mat3 = p.iter().fold(Mat3::ZERO, |acc, pi| acc + *pi * *y * *pi);
    if s.d() == 1 {
        if y.max_abs() == 0.0 {
            return Ok(CommutatorSolution {
                x: Mat3::ZERO,
                null_residual: 0.0,
            });
        }
        return Err(Error::SingleEigenvalue);
    }
    Ok(CommutatorSolution {
        x: pseudo_commutator(&s).apply(y),
        null_residual: null.norm(),
    })
}

/// Solves `Σ_{k=1}^{m} A^{m−k} X A^{k−1} = C`, i.e. `X = (1/m) ∇⁻¹f⁽ᵐ⁾(A) C`.
pub fn sylvester_power(m: u32, a: &SymTensor, c: &Mat3) -> Result<Mat3> {
    if m == 0 {
        return Err(Error::InvalidArgument("power equation needs m ≥ 1".into()));
    }
    if !c.is_finite() {
        return Err(Error::NonFinite("power equation right-hand side"));
    }
    let s = positive_spectrum(a)?;
    if m == 1 {
        return Ok(*c);
    }
    let p = s.projector_mats();
    let al = s.alphas();
    let mut x = Mat3::ZERO;
    for i in 0..s.d() {
        for j in 0..s.d() {
            // Σ_k αᵢ^{m−k} αⱼ^{k−1} without the cancelling difference quotient
            let denom: f64 = (1..=m as i32)
                .map(|k| al[i].powi(m as i32 - k) * al[j].powi(k - 1))
                .sum();
            x += (p[i] * *c * p[j]) * (1.0 / denom);
        }
    }
    Ok(x)
}

/// `Σ_k A^{m−k} X A^{k−1} − C` by direct matrix products.
pub fn power_residual(m: u32, a: &SymTensor, x: &Mat3, c: &Mat3) -> Mat3 {
    let am: Mat3 = a.into();
    let mut pows = vec![Mat3::IDENTITY];
    for k in 1..m as usize {
        pows.push(pows[k - 1] * am);
    }
    let mut lhs = Mat3::ZERO;
    for k in 1..=m as usize {
        lhs += pows[m as usize - k] * *x * pows[k - 1];
    }
    lhs - *c
}
