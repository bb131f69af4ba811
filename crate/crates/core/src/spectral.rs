//! Spectral decomposition `A = Σ αᵢ Aᵢ` with eigenvalue clustering, and
//! primary functions `f(A) = Σ f(αᵢ) Aᵢ`.

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;
use crate::tensor::{Mat3, SymTensor};

/// Default relative gap below which eigenvalues are treated as coincident.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

const MAX_SWEEPS: usize = 64;

/// Distinct eigenvalues (ascending) and the matching eigenprojectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    alphas: Vec<f64>,
    projectors: Vec<SymTensor>,
}

/// Cyclic Jacobi eigen-solver for a symmetric 3x3 array. Returns eigenvalues
/// and the matching unit eigenvectors, sorted ascending.
pub fn jacobi_eigen(a: &SymTensor) -> Result<([f64; 3], [[f64; 3]; 3])> {
    let mut m = a.to_mat().0;
    let mut v = Mat3::IDENTITY.0;
    let scale = a.norm();
    let mut converged = scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale {
            converged = true;
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = m[p][q];
            if apq == 0.0 {
                continue;
            }
            let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let mkp = m[k][p];
                let mkq = m[k][q];
                m[k][p] = c * mkp - s * mkq;
                m[k][q] = s * mkp + c * mkq;
            }
            for k in 0..3 {
                let mpk = m[p][k];
                let mqk = m[q][k];
                m[p][k] = c * mpk - s * mqk;
                m[q][k] = s * mpk + c * mqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    if !converged {
        let off = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
        if off.sqrt() > 1e-13 * scale {
            return Err(Error::EigenNoConvergence { sweeps: MAX_SWEEPS });
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let vals = order.map(|i| m[i][i]);
    let vecs = order.map(|i| [v[0][i], v[1][i], v[2][i]]);
    Ok((vals, vecs))
}

/// Decomposes `a`, merging eigenvalues whose gap is at most
/// `cluster_tol · max(spectral radius, 1)`. A merged cluster gets the mean
/// eigenvalue and the sum of its rank-one projectors.
pub fn decompose(a: &SymTensor, cluster_tol: f64) -> Result<Spectrum> {
    if a.components().iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("tensor to decompose"));
    }
    if !(cluster_tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("cluster tolerance {cluster_tol}")));
    }
    let (vals, vecs) = jacobi_eigen(a)?;
    let radius = vals[0].abs().max(vals[2].abs()).max(1.0);
    let gap = cluster_tol * radius;

    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for r in 1..3 {
        let last = *groups.last().unwrap().last().unwrap();
        if vals[r] - vals[last] <= gap {
            groups.last_mut().unwrap().push(r);
        } else {
            groups.push(vec![r]);
        }
    }
    let mut alphas = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    for g in &groups {
        alphas.push(g.iter().map(|&r| vals[r]).sum::<f64>() / g.len() as f64);
        let p = if g.len() == 3 {
            SymTensor::IDENTITY
        } else {
            g.iter()
                .map(|&r| SymTensor::dyad(vecs[r]))
                .fold(SymTensor::ZERO, |acc, d| acc + d)
        };
        projectors.push(p);
    }
    Ok(Spectrum { alphas, projectors })
}

impl Spectrum {
    /// Builds a spectrum from given eigenvalues and projectors. The caller is
    /// responsible for the projector identities; eigenvalues must be strictly
    /// increasing.
    pub fn from_parts(alphas: Vec<f64>, projectors: Vec<SymTensor>) -> Result<Self> {
        if alphas.is_empty() || alphas.len() > 3 || alphas.len() != projectors.len() {
            return Err(Error::InvalidArgument(
                "spectrum needs 1..3 eigenvalues with matching projectors".into(),
            ));
        }
        if alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be strictly increasing".into(),
            ));
        }
        Ok(Spectrum { alphas, projectors })
    }

    /// Eigen-index: number of distinct eigenvalues.
    pub fn d(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn projectors(&self) -> &[SymTensor] {
        &self.projectors
    }

    pub fn projector_mats(&self) -> Vec<Mat3> {
        self.projectors.iter().map(SymTensor::to_mat).collect()
    }

    pub fn is_positive(&self) -> bool {
        self.alphas[0] > 0.0
    }

    pub fn min_alpha(&self) -> f64 {
        self.alphas[0]
    }

    /// `Σ αᵢ Aᵢ`
    pub fn reconstruct(&self) -> SymTensor {
        self.map_values(&self.alphas)
    }

    /// `Σ vᵢ Aᵢ` for per-eigenvalue values `v`.
    pub fn map_values(&self, values: &[f64]) -> SymTensor {
        self.projectors
            .iter()
            .zip(values)
            .fold(SymTensor::ZERO, |acc, (p, v)| acc + p.scale(*v))
    }

    /// `Aᵖ` for real `p`, computed spectrally.
    pub fn power(&self, p: f64) -> Result<SymTensor> {
        if p.fract() != 0.0 && !self.is_positive() {
            return Err(Error::NotPositiveDefinite(self.min_alpha()));
        }
        let vals: Vec<f64> = self.alphas.iter().map(|a| a.powf(p)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                func: format!("power:{p}"),
                x: self.min_alpha(),
            });
        }
        Ok(self.map_values(&vals))
    }

    /// `f(A) = Σ f(αᵢ) Aᵢ`.
    pub fn apply(&self, f: &ScalarFn) -> Result<SymTensor> {
        let vals = self
            .alphas
            .iter()
            .map(|&a| f.eval(a))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.map_values(&vals))
    }

    /// Largest deviation from `AᵢAⱼ = δᵢⱼAᵢ` and `ΣAᵢ = I`.
    pub fn projector_residuals(&self) -> (f64, f64) {
        let mats = self.projector_mats();
        let mut orth: f64 = 0.0;
        for (i, pi) in mats.iter().enumerate() {
            for (j, pj) in mats.iter().enumerate() {
                let expected = if i == j { *pi } else { Mat3::ZERO };
                orth = orth.max((*pi * *pj - expected).norm());
            }
        }
        let sum = mats.iter().fold(Mat3::ZERO, |acc, p| acc + *p);
        (orth, (sum - Mat3::IDENTITY).norm())
    }
}

/// `f(A)` for a decomposed tensor; alias of [`Spectrum::apply`].
pub fn apply_fn(s: &Spectrum, f: &ScalarFn) -> Result<SymTensor> {
    s.apply(f)
}
