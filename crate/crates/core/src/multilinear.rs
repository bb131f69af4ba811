//! Kronecker (box) products of second-order tensors.
//!
//! `(A ⊠ B) X = A X Bᵗ`, and a k-fold product contracts against k − 1
//! arguments as `(A ⊠ B ⊠ … ⊠ C) : X Y … Z = A X Bᵗ Y … Z Cᵗ`.
//! Tensors of order 2k are kept in factored form (weighted sums of k-fold
//! products). Dense component arrays are only produced on request.
//!
//! Dense layout: the component array of the multilinear map, row-major over
//! `(i₁ j₁ i₂ j₂ … i_k j_k)` where `(i₁, j₁)` indexes the result and
//! `(i_r, j_r)` the (r−1)-th argument, so that
//! `Y_{i₁j₁} = T_{i₁j₁i₂j₂…} X_{i₂j₂} …`. For k = 2 this is
//! `(A ⊠ B)_{ijkl} = A_{ik} B_{jl}`.

use crate::error::{Error, Result};
use crate::tensor::Mat3;

/// A single k-fold box product `F₁ ⊠ F₂ ⊠ … ⊠ F_k`, k ≥ 2.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxProduct {
    factors: Vec<Mat3>,
}

impl BoxProduct {
    pub fn new(factors: Vec<Mat3>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidArgument(
                "a box product needs at least two factors".into(),
            ));
        }
        Ok(BoxProduct { factors })
    }

    pub fn factors(&self) -> &[Mat3] {
        &self.factors
    }

    /// Number of factors k; the tensor has order 2k.
    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn contract(&self, xs: &[Mat3]) -> Result<Mat3> {
        contract_factors(&self.factors, xs)
    }

    pub fn dense_components(&self) -> Vec<f64> {
        let mut out = vec![0.0; 3usize.pow(2 * self.arity() as u32)];
        accumulate_dense(&mut out, 1.0, &self.factors);
        out
    }
}

/// `F₁ X₁ F₂ᵗ X₂ … X_{k−1} F_kᵗ`
fn contract_factors(factors: &[Mat3], xs: &[Mat3]) -> Result<Mat3> {
    if xs.len() + 1 != factors.len() {
        return Err(Error::Arity {
            expected: factors.len() - 1,
            got: xs.len(),
        });
    }
    let mut acc = factors[0];
    for (x, f) in xs.iter().zip(&factors[1..]) {
        acc = acc * *x * f.transpose();
    }
    Ok(acc)
}

/// Adds `w · F₁ ⊠ … ⊠ F_k` into a dense array laid out as in the module docs.
fn accumulate_dense(out: &mut [f64], w: f64, factors: &[Mat3]) {
    let k = factors.len();
    let order = 2 * k;
    let mut idx = vec![0usize; order];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut rem = flat;
        for p in (0..order).rev() {
            idx[p] = rem % 3;
            rem /= 3;
        }
        // slots: (a, b) = (idx0, idx1); argument r has (c_r, d_r) = (idx[2r], idx[2r+1])
        let (a, b) = (idx[0], idx[1]);
        let mut v = factors[0][(a, idx[2])];
        for r in 1..k - 1 {
            // F_{r+1}[c_{r+1}, d_r]
            v *= factors[r][(idx[2 * (r + 1)], idx[2 * r + 1])];
            if v == 0.0 {
                break;
            }
        }
        v *= factors[k - 1][(b, idx[2 * (k - 1) + 1])];
        *slot += w * v;
    }
}

/// Contracts a dense order-2k array against k − 1 arguments by index loops.
pub fn dense_contract(components: &[f64], xs: &[Mat3]) -> Result<Mat3> {
    let k = xs.len() + 1;
    if components.len() != 3usize.pow(2 * k as u32) {
        let mut len = components.len();
        let mut order = 0;
        while len > 1 && len % 9 == 0 {
            len /= 9;
            order += 1;
        }
        if len != 1 || order < 2 {
            return Err(Error::InvalidArgument(format!(
                "{} components is not 3^(2k) for any k ≥ 2",
                components.len()
            )));
        }
        return Err(Error::Arity {
            expected: order - 1,
            got: xs.len(),
        });
    }
    let mut y = Mat3::ZERO;
    let order = 2 * k;
    let mut idx = vec![0usize; order];
    for (flat, t) in components.iter().enumerate() {
        if *t == 0.0 {
            continue;
        }
        let mut rem = flat;
        for p in (0..order).rev() {
            idx[p] = rem % 3;
            rem /= 3;
        }
        let mut v = *t;
        for (r, x) in xs.iter().enumerate() {
            v *= x[(idx[2 * (r + 1)], idx[2 * (r + 1) + 1])];
        }
        y[(idx[0], idx[1])] += v;
    }
    Ok(y)
}

/// Weighted sum of k-fold box products, an order-2k tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSum {
    arity: usize,
    terms: Vec<(f64, Vec<Mat3>)>,
}

impl BoxSum {
    pub fn zero(arity: usize) -> Self {
        BoxSum {
            arity,
            terms: Vec::new(),
        }
    }

    /// `I ⊠ I ⊠ … ⊠ I`
    pub fn identity(arity: usize) -> Self {
        BoxSum {
            arity,
            terms: vec![(1.0, vec![Mat3::IDENTITY; arity])],
        }
    }

    pub fn single(weight: f64, factors: Vec<Mat3>) -> Result<Self> {
        let b = BoxProduct::new(factors)?;
        Ok(BoxSum {
            arity: b.arity(),
            terms: vec![(weight, b.factors)],
        })
    }

    pub fn push(&mut self, weight: f64, factors: Vec<Mat3>) -> Result<()> {
        if factors.len() != self.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: factors.len(),
            });
        }
        if weight != 0.0 {
            self.terms.push((weight, factors));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[(f64, Vec<Mat3>)] {
        &self.terms
    }

    pub fn contract(&self, xs: &[Mat3]) -> Result<Mat3> {
        if xs.len() + 1 != self.arity {
            return Err(Error::Arity {
                expected: self.arity - 1,
                got: xs.len(),
            });
        }
        let mut y = Mat3::ZERO;
        for (w, f) in &self.terms {
            y += contract_factors(f, xs)?.scale(*w);
        }
        Ok(y)
    }

    pub fn scale(&self, s: f64) -> Self {
        BoxSum {
            arity: self.arity,
            terms: self.terms.iter().map(|(w, f)| (w * s, f.clone())).collect(),
        }
    }

    pub fn add(&self, other: &BoxSum) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: other.arity,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(BoxSum {
            arity: self.arity,
            terms,
        })
    }

    pub fn sub(&self, other: &BoxSum) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Factor-wise product `(⊠ Fᵣ)(⊠ Gᵣ) = ⊠ (Fᵣ Gᵣ)`, extended bilinearly.
    pub fn compose(&self, other: &BoxSum) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Arity {
                expected: self.arity,
                got: other.arity,
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (w1, f1) in &self.terms {
            for (w2, f2) in &other.terms {
                let f = f1.iter().zip(f2).map(|(a, b)| *a * *b).collect();
                terms.push((w1 * w2, f));
            }
        }
        Ok(BoxSum {
            arity: self.arity,
            terms,
        })
    }

    pub fn dense_components(&self) -> Vec<f64> {
        let mut out = vec![0.0; 3usize.pow(2 * self.arity as u32)];
        for (w, f) in &self.terms {
            accumulate_dense(&mut out, *w, f);
        }
        out
    }
}

/// Fourth-order tensor `Σ w · B ⊠ C`, acting as `X ↦ Σ w · B X Cᵗ`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FourthTensor {
    terms: Vec<(f64, Mat3, Mat3)>,
}

impl FourthTensor {
    pub fn zero() -> Self {
        FourthTensor { terms: Vec::new() }
    }

    /// `𝕀 = I ⊠ I`
    pub fn identity() -> Self {
        FourthTensor::boxed(Mat3::IDENTITY, Mat3::IDENTITY)
    }

    /// `B ⊠ C`
    pub fn boxed(b: impl Into<Mat3>, c: impl Into<Mat3>) -> Self {
        FourthTensor {
            terms: vec![(1.0, b.into(), c.into())],
        }
    }

    pub fn from_terms(terms: Vec<(f64, Mat3, Mat3)>) -> Self {
        FourthTensor { terms }
    }

    pub fn push(&mut self, w: f64, b: impl Into<Mat3>, c: impl Into<Mat3>) {
        if w != 0.0 {
            self.terms.push((w, b.into(), c.into()));
        }
    }

    pub fn terms(&self) -> &[(f64, Mat3, Mat3)] {
        &self.terms
    }

    pub fn apply(&self, x: &Mat3) -> Mat3 {
        let mut y = Mat3::ZERO;
        for (w, b, c) in &self.terms {
            y += (*b * *x * c.transpose()).scale(*w);
        }
        y
    }

    pub fn scale(&self, s: f64) -> Self {
        FourthTensor {
            terms: self.terms.iter().map(|(w, b, c)| (w * s, *b, *c)).collect(),
        }
    }

    pub fn add(&self, other: &FourthTensor) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        FourthTensor { terms }
    }

    pub fn sub(&self, other: &FourthTensor) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `self ∘ other`: the map `X ↦ self(other(X))`.
    pub fn compose(&self, other: &FourthTensor) -> Self {
        compose4(self, other)
    }

    pub fn to_box_sum(&self) -> BoxSum {
        BoxSum {
            arity: 2,
            terms: self
                .terms
                .iter()
                .map(|(w, b, c)| (*w, vec![*b, *c]))
                .collect(),
        }
    }

    pub fn dense_components(&self) -> Vec<f64> {
        self.to_box_sum().dense_components()
    }

    /// Dense 9x9 matrix of the map on Lin, row index `3i + j` of `Y_ij`,
    /// column index `3k + l` of `X_kl`.
    pub fn dense_matrix(&self) -> [[f64; 9]; 9] {
        let comps = self.dense_components();
        let mut m = [[0.0; 9]; 9];
        for (r, row) in m.iter_mut().enumerate() {
            row.copy_from_slice(&comps[9 * r..9 * r + 9]);
        }
        m
    }

    /// Largest `‖T X − U X‖ / ‖X‖` over the given probes.
    pub fn max_action_diff(&self, other: &FourthTensor, probes: &[Mat3]) -> f64 {
        probes
            .iter()
            .map(|x| (self.apply(x) - other.apply(x)).norm() / x.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Operator-norm-like distance computed from the dense 9x9 matrices
    /// (Frobenius norm of the difference).
    pub fn dense_distance(&self, other: &FourthTensor) -> f64 {
        let a = self.dense_components();
        let b = other.dense_components();
        a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }
}

/// `(A ⊠ B)(X ⊠ Y) = (AX) ⊠ (BY)` applied term by term; the result acts as
/// `p` after `q`.
pub fn compose4(p: &FourthTensor, q: &FourthTensor) -> FourthTensor {
    let mut terms = Vec::with_capacity(p.terms.len() * q.terms.len());
    for (w1, a, b) in &p.terms {
        for (w2, x, y) in &q.terms {
            terms.push((w1 * w2, *a * *x, *b * *y));
        }
    }
    FourthTensor { terms }
}

/// Contraction of a single box product; see [`BoxProduct::contract`].
pub fn contract(b: &BoxProduct, xs: &[Mat3]) -> Result<Mat3> {
    b.contract(xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(seed: u64) -> Mat3 {
        // deterministic pseudo-random entries in [-1, 1]
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                out[(i, j)] = ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            }
        }
        out
    }

    #[test]
    fn identity_and_two_factor() {
        let x = m(1);
        let i = BoxProduct::new(vec![Mat3::IDENTITY, Mat3::IDENTITY]).unwrap();
        assert_eq!(i.contract(&[x]).unwrap(), x);

        let a = Mat3::diag([1.0, 2.0, 3.0]);
        let x = Mat3::outer([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]) + Mat3::outer([0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
        let y = BoxProduct::new(vec![a, Mat3::IDENTITY]).unwrap().contract(&[x]).unwrap();
        assert_eq!(y, a * x);
        assert_eq!(y[(0, 1)], 1.0);
        assert_eq!(y[(1, 0)], 2.0);
    }

    #[test]
    fn three_factor_against_dense_multiply() {
        let (a, b, c, x, y) = (m(2), m(3), m(4), m(5), m(6));
        let t = BoxProduct::new(vec![a, b, c]).unwrap();
        let got = t.contract(&[x, y]).unwrap();
        let expect = a * x * b.transpose() * y * c.transpose();
        assert!((got - expect).norm() < 1e-14);
        assert!(matches!(t.contract(&[x]), Err(Error::Arity { expected: 2, got: 1 })));
    }

    #[test]
    fn dense_readout() {
        let i = BoxProduct::new(vec![Mat3::IDENTITY, Mat3::IDENTITY]).unwrap().dense_components();
        for idx in 0..81 {
            let (a, b, c, d) = (idx / 27, (idx / 9) % 3, (idx / 3) % 3, idx % 3);
            let expect = if a == c && b == d { 1.0 } else { 0.0 };
            assert_eq!(i[idx], expect);
        }
        let (a, b) = (m(7), m(8));
        let t = BoxProduct::new(vec![a, b]).unwrap().dense_components();
        // (A⊠B)_{1213}, one-based
        assert_eq!(t[27 * 0 + 9 * 1 + 3 * 0 + 2], a[(0, 0)] * b[(1, 2)]);
    }

    #[test]
    fn dense_contraction_matches_orders_4_to_10() {
        for k in 2..=5usize {
            let factors: Vec<Mat3> = (0..k as u64).map(|s| m(100 + s)).collect();
            let xs: Vec<Mat3> = (0..k as u64 - 1).map(|s| m(200 + s)).collect();
            let t = BoxProduct::new(factors).unwrap();
            let dense = dense_contract(&t.dense_components(), &xs).unwrap();
            let direct = t.contract(&xs).unwrap();
            assert!((dense - direct).norm() <= 1e-12 * direct.norm().max(1.0), "k={k}");
        }
    }

    #[test]
    fn compose_examples() {
        let p = FourthTensor::from_terms(vec![(0.7, m(11), m(12)), (-1.3, m(13), m(14))]);
        let id = FourthTensor::identity();
        for s in 0..20 {
            let x = m(300 + s);
            assert!((compose4(&id, &p).apply(&x) - p.apply(&x)).norm() < 1e-14);
        }
        let a = Mat3([[3.0, 1.0, 0.0], [1.0, 2.0, 0.5], [0.0, 0.5, 1.0]]);
        let ai = a.inverse().unwrap();
        let pair = compose4(&FourthTensor::boxed(a, a), &FourthTensor::boxed(ai, ai));
        for s in 0..5 {
            let x = m(400 + s);
            assert!((pair.apply(&x) - x).norm() < 1e-13);
        }
        let q = FourthTensor::from_terms(vec![(0.4, m(15), m(16)), (2.0, m(17), m(18))]);
        for s in 0..20 {
            let x = m(500 + s);
            let seq = p.apply(&q.apply(&x));
            let comp = compose4(&p, &q).apply(&x);
            assert!((seq - comp).norm() <= 1e-12 * seq.norm().max(1.0));
        }
    }

    #[test]
    fn box_sum_compose_acts_as_kronecker_product() {
        let s = BoxSum::single(2.0, vec![m(20), m(21), m(22)]).unwrap();
        let t = BoxSum::single(-0.5, vec![m(23), m(24), m(25)]).unwrap();
        let st = s.compose(&t).unwrap();
        let (f, g) = (&s.terms()[0].1, &t.terms()[0].1);
        let (x, y) = (m(26), m(27));
        let expect = (f[0] * g[0]) * x * (f[1] * g[1]).transpose() * y * (f[2] * g[2]).transpose();
        assert!((st.contract(&[x, y]).unwrap() - expect.scale(-1.0)).norm() < 1e-13);
    }
}
