//! Assembly of `(1/n!) ∇⁽ⁿ⁾f(A)` from coefficient tables, contraction
//! against directions, truncated Taylor sums and the gradient rules.

use crate::coefficients::{build_table, CoeffTable, Method};
use crate::error::{Error, Result};
use crate::multilinear::{compose4, BoxSum, FourthTensor};
use crate::scalar::ScalarFn;
use crate::spectral::{decompose, Spectrum, DEFAULT_CLUSTER_TOL};
use crate::tensor::{Mat3, SymTensor};

/// `(1/n!) ∇⁽ⁿ⁾f(A) = Σ f_{i₁…iₙ₊₁} A_{i₁} ⊠ … ⊠ A_{iₙ₊₁}`.
#[derive(Clone, Debug)]
pub struct SpectralDerivative {
    spectrum: Spectrum,
    table: CoeffTable,
    projectors: Vec<Mat3>,
}

/// Derivative of order `n` at `a`, default clustering and divided
/// differences.
pub fn derivative(f: &ScalarFn, a: &SymTensor, n: usize) -> Result<SpectralDerivative> {
    let s = decompose(a, DEFAULT_CLUSTER_TOL)?;
    derivative_with(f, &s, n, Method::DividedDifference)
}

/// Derivative on an existing spectrum with an explicit coefficient route.
pub fn derivative_with(
    f: &ScalarFn,
    s: &Spectrum,
    n: usize,
    method: Method,
) -> Result<SpectralDerivative> {
    let table = build_table(f, s, n, method)?;
    Ok(SpectralDerivative {
        spectrum: s.clone(),
        projectors: s.projector_mats(),
        table,
    })
}

impl SpectralDerivative {
    pub fn order(&self) -> usize {
        self.table.order()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn table(&self) -> &CoeffTable {
        &self.table
    }

    /// `(1/n!) ∇⁽ⁿ⁾f : X₁ … Xₙ`, summed over all `d^{n+1}` index tuples.
    pub fn contract_dirs(&self, xs: &[Mat3]) -> Result<Mat3> {
        let n = self.order();
        if xs.len() != n {
            return Err(Error::Arity {
                expected: n,
                got: xs.len(),
            });
        }
        let d = self.spectrum.d();
        let coeffs = self.table.tuple_values();
        let mut out = Mat3::ZERO;
        // depth-first over tuples, reusing the prefix A_{i₁}X₁…A_{i_r}X_r
        let mut stack: Vec<(usize, usize, Mat3)> = (0..d).map(|i| (1, i, self.projectors[i])).collect();
        while let Some((depth, flat, prefix)) = stack.pop() {
            if depth == n + 1 {
                let c = coeffs[flat];
                if c != 0.0 {
                    out += prefix * c;
                }
                continue;
            }
            let px = prefix * xs[depth - 1];
            for i in 0..d {
                stack.push((depth + 1, flat * d + i, px * self.projectors[i]));
            }
        }
        Ok(out)
    }

    /// `∇⁽ⁿ⁾f : X₁ … Xₙ`, i.e. `n!` times [`Self::contract_dirs`].
    pub fn derivative_action(&self, xs: &[Mat3]) -> Result<Mat3> {
        let fact: f64 = (1..=self.order()).map(|k| k as f64).product();
        Ok(self.contract_dirs(xs)? * fact)
    }

    /// Factored form with one term per index tuple.
    pub fn to_box_sum(&self) -> BoxSum {
        let n = self.order();
        let d = self.spectrum.d();
        let mut sum = BoxSum::zero(n + 1);
        for (flat, c) in self.table.tuple_values().iter().enumerate() {
            if *c == 0.0 {
                continue;
            }
            let mut idx = vec![0usize; n + 1];
            let mut rem = flat;
            for p in (0..=n).rev() {
                idx[p] = rem % d;
                rem /= d;
            }
            let factors = idx.iter().map(|&i| self.projectors[i]).collect();
            sum.push(*c, factors).expect("arity is n + 1");
        }
        sum
    }

    /// The gradient as a fourth-order tensor; only for `n = 1`.
    pub fn to_fourth(&self) -> Result<FourthTensor> {
        if self.order() != 1 {
            return Err(Error::InvalidArgument(format!(
                "order {} derivative is not a fourth-order tensor",
                self.order()
            )));
        }
        let d = self.spectrum.d();
        let mut t = FourthTensor::zero();
        for i in 0..d {
            for j in 0..d {
                let c = self.table.get(&[i, j]).expect("table is complete");
                t.push(c, self.projectors[i], self.projectors[j]);
            }
        }
        Ok(t)
    }

    /// Dense components of `(1/n!) ∇⁽ⁿ⁾f` in the crate's dense layout.
    pub fn dense_components(&self) -> Vec<f64> {
        self.to_box_sum().dense_components()
    }
}

/// `∇f(A)` as a fourth-order tensor.
pub fn gradient(f: &ScalarFn, a: &SymTensor) -> Result<FourthTensor> {
    derivative(f, a, 1)?.to_fourth()
}

/// `f(A) + Σ_{k≤n} (1/k!) ∇⁽ᵏ⁾f(A) : Xᵏ`.
pub fn taylor_eval(f: &ScalarFn, a: &SymTensor, x: &SymTensor, n: usize) -> Result<SymTensor> {
    let shifted = decompose(&(*a + *x), DEFAULT_CLUSTER_TOL)?;
    for &alpha in shifted.alphas() {
        if !f.in_domain(alpha) {
            return Err(Error::Domain {
                func: f.to_string(),
                x: alpha,
            });
        }
    }
    let s = decompose(a, DEFAULT_CLUSTER_TOL)?;
    let mut total: Mat3 = s.apply(f)?.into();
    let xm: Mat3 = x.into();
    for k in 1..=n {
        let dv = derivative_with(f, &s, k, Method::DividedDifference)?;
        total += dv.contract_dirs(&vec![xm; k])?;
    }
    Ok(SymTensor::from_mat_symmetrized(&total))
}

/// `∇(fg)(A) = (I ⊠ g(A)) ∇f(A) + (f(A) ⊠ I) ∇g(A)`.
pub fn grad_product_rule(f: &ScalarFn, g: &ScalarFn, a: &SymTensor) -> Result<FourthTensor> {
    let s = decompose(a, DEFAULT_CLUSTER_TOL)?;
    let gf = derivative_with(f, &s, 1, Method::DividedDifference)?.to_fourth()?;
    let gg = derivative_with(g, &s, 1, Method::DividedDifference)?.to_fourth()?;
    let fa: Mat3 = s.apply(f)?.into();
    let ga: Mat3 = s.apply(g)?.into();
    let left = compose4(&FourthTensor::boxed(Mat3::IDENTITY, ga), &gf);
    let right = compose4(&FourthTensor::boxed(fa, Mat3::IDENTITY), &gg);
    Ok(left.add(&right))
}

/// `∇(1/f)(A) = −(f⁻¹(A) ⊠ f⁻¹(A)) ∇f(A)`.
pub fn grad_reciprocal(f: &ScalarFn, a: &SymTensor) -> Result<FourthTensor> {
    let s = decompose(a, DEFAULT_CLUSTER_TOL)?;
    let mut inv = Vec::with_capacity(s.d());
    for &alpha in s.alphas() {
        let v = f.eval(alpha)?;
        if v == 0.0 {
            return Err(Error::Domain {
                func: format!("1/({f})"),
                x: alpha,
            });
        }
        inv.push(1.0 / v);
    }
    let finv: Mat3 = s.map_values(&inv).into();
    let gf = derivative_with(f, &s, 1, Method::DividedDifference)?.to_fourth()?;
    Ok(compose4(&FourthTensor::boxed(finv, finv), &gf).scale(-1.0))
}

/// `∇(f∘g)(A) = ∇f(g(A)) ∇g(A)`.
pub fn grad_chain_rule(f: &ScalarFn, g: &ScalarFn, a: &SymTensor) -> Result<FourthTensor> {
    let s = decompose(a, DEFAULT_CLUSTER_TOL)?;
    let gg = derivative_with(g, &s, 1, Method::DividedDifference)?.to_fourth()?;
    let ga = s.apply(g)?;
    let gf = gradient(f, &ga)?;
    Ok(compose4(&gf, &gg))
}
