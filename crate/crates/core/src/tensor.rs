//! Second-order tensors on 3-dimensional space.
//!
//! [`Mat3`] is a general (not necessarily symmetric) 3x3 array and is the
//! working type for products and contractions. [`SymTensor`] stores only the
//! six unique entries of a symmetric tensor, so symmetry holds by construction.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// General 3x3 second-order tensor, row-major.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Self = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Self = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            m.0[i][i] = d[i];
        }
        m
    }

    /// Dyad `u ⊗ v`.
    pub fn outer(u: [f64; 3], v: [f64; 3]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = u[i] * v[j];
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by cofactors; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let m = &self.0;
        let mut inv = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv.0[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        }
        Some(inv)
    }

    /// Integer power by repeated multiplication; negative exponents go through
    /// the cofactor inverse.
    pub fn powi(&self, p: i32) -> Option<Self> {
        let base = if p < 0 { self.inverse()? } else { *self };
        let mut out = Self::IDENTITY;
        for _ in 0..p.unsigned_abs() {
            out = out * base;
        }
        Some(out)
    }

    pub fn symmetric_part(&self) -> Self {
        (*self + self.transpose()).scale(0.5)
    }

    pub fn skew_part(&self) -> Self {
        (*self - self.transpose()).scale(0.5)
    }

    /// `tr(A Bᵗ)`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| a * b)
            .sum()
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mat3{:?}", self.0)
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(mut self, rhs: Mat3) -> Mat3 {
        self += rhs;
        self
    }
}

impl AddAssign for Mat3 {
    fn add_assign(&mut self, rhs: Mat3) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(mut self, rhs: Mat3) -> Mat3 {
        self -= rhs;
        self
    }
}

impl SubAssign for Mat3 {
    fn sub_assign(&mut self, rhs: Mat3) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for k in 0..3 {
                let a = self.0[i][k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..3 {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        self.scale(s)
    }
}

/// Symmetric second-order tensor stored as its six unique components
/// `(a11, a22, a33, a23, a13, a12)`.
#[derive(Clone, Copy, PartialEq)]
pub struct SymTensor([f64; 6]);

/// Voigt position of the unique component `(i, j)`.
const fn voigt(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (1, 2) | (2, 1) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

impl SymTensor {
    pub const ZERO: Self = SymTensor([0.0; 6]);
    pub const IDENTITY: Self = SymTensor([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);

    /// Builds from the six components `(a11, a22, a33, a23, a13, a12)`.
    pub fn new(components: [f64; 6]) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("symmetric tensor components"));
        }
        Ok(SymTensor(components))
    }

    pub fn diag(d: [f64; 3]) -> Self {
        SymTensor([d[0], d[1], d[2], 0.0, 0.0, 0.0])
    }

    /// Accepts a full array if `|a_ij - a_ji| <= tol * max(1, max|a|)`;
    /// the stored value is the symmetric part.
    pub fn from_rows(rows: [[f64; 3]; 3], tol: f64) -> Result<Self> {
        let m = Mat3(rows);
        if !m.is_finite() {
            return Err(Error::NonFinite("tensor entries"));
        }
        let scale = m.max_abs().max(1.0);
        let asym = m.skew_part().max_abs() * 2.0;
        if asym > tol * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
            )));
        }
        Ok(Self::from_mat_symmetrized(&m))
    }

    /// Symmetric part of a general tensor.
    pub fn from_mat_symmetrized(m: &Mat3) -> Self {
        let s = |i: usize, j: usize| 0.5 * (m.0[i][j] + m.0[j][i]);
        SymTensor([m.0[0][0], m.0[1][1], m.0[2][2], s(1, 2), s(0, 2), s(0, 1)])
    }

    /// Symmetric dyad `v ⊗ v`.
    pub fn dyad(v: [f64; 3]) -> Self {
        SymTensor::from_mat_symmetrized(&Mat3::outer(v, v))
    }

    pub fn components(&self) -> [f64; 6] {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[voigt(i, j)]
    }

    pub fn to_mat(&self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.get(i, j);
            }
        }
        m
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        self.to_mat().0
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    /// Frobenius norm (off-diagonal entries counted twice).
    pub fn norm(&self) -> f64 {
        let d: f64 = self.0[..3].iter().map(|v| v * v).sum();
        let o: f64 = self.0[3..].iter().map(|v| v * v).sum();
        (d + 2.0 * o).sqrt()
    }

    /// Largest absolute entry; bounds the spectral radius from below by 1/3.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl fmt::Debug for SymTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymTensor{:?}", self.to_rows())
    }
}

impl From<SymTensor> for Mat3 {
    fn from(s: SymTensor) -> Mat3 {
        s.to_mat()
    }
}

impl From<&SymTensor> for Mat3 {
    fn from(s: &SymTensor) -> Mat3 {
        s.to_mat()
    }
}

impl Add for SymTensor {
    type Output = SymTensor;
    fn add(mut self, rhs: SymTensor) -> SymTensor {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

impl AddAssign for SymTensor {
    fn add_assign(&mut self, rhs: SymTensor) {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
    }
}

impl Sub for SymTensor {
    type Output = SymTensor;
    fn sub(mut self, rhs: SymTensor) -> SymTensor {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a -= b);
        self
    }
}

impl Neg for SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        self.scale(-1.0)
    }
}

impl Mul<f64> for SymTensor {
    type Output = SymTensor;
    fn mul(self, s: f64) -> SymTensor {
        self.scale(s)
    }
}
