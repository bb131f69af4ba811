//! Brute-force reference computations for tests. These deliberately avoid
//! the production algorithms: term enumeration, finite differences and
//! dense linear solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;
use crate::spectral::{decompose, DEFAULT_CLUSTER_TOL};
use crate::tensor::{Mat3, SymTensor};

/// Largest degree accepted by [`expand_monomial`].
pub const MAX_EXPANSION_DEGREE: usize = 12;

/// The terms of `(A + X)ᵐ` grouped by the number of `X` factors.
#[derive(Clone, Debug)]
pub struct PerturbationSeries {
    degree: usize,
    terms: Vec<Mat3>,
    counts: Vec<usize>,
}

impl PerturbationSeries {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Sum of all products with exactly `k` factors of `X`.
    pub fn term(&self, k: usize) -> Mat3 {
        self.terms.get(k).copied().unwrap_or(Mat3::ZERO)
    }

    /// Number of products collected into [`Self::term`]`(k)`.
    pub fn count(&self, k: usize) -> usize {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn total(&self) -> Mat3 {
        self.terms.iter().fold(Mat3::ZERO, |a, t| a + *t)
    }
}

/// Expands `(A + X)ᵐ` over all `2ᵐ` placements of the two factors.
pub fn expand_monomial(a: &Mat3, x: &Mat3, m: usize) -> Result<PerturbationSeries> {
    if m > MAX_EXPANSION_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "expansion degree {m} exceeds {MAX_EXPANSION_DEGREE}"
        )));
    }
    let mut terms = vec![Mat3::ZERO; m + 1];
    let mut counts = vec![0usize; m + 1];
    for mask in 0u32..(1 << m) {
        let mut prod = Mat3::IDENTITY;
        for slot in 0..m {
            prod = prod * if mask >> slot & 1 == 1 { *x } else { *a };
        }
        let k = mask.count_ones() as usize;
        terms[k] += prod;
        counts[k] += 1;
    }
    Ok(PerturbationSeries {
        degree: m,
        terms,
        counts,
    })
}

/// Default step for an order-n mixed difference along unit directions:
/// `ε^{1/(n+2)} · L`, with the length scale `L` the geometric mean of the
/// smallest eigenvalue magnitude and `max(‖A‖, 1)`, kept above
/// `10⁻³ max(‖A‖, 1)`.
pub fn default_step(a: &SymTensor, n: usize) -> f64 {
    let big = a.norm().max(1.0);
    let small = decompose(a, DEFAULT_CLUSTER_TOL)
        .map(|s| s.alphas().iter().fold(f64::MAX, |m, x| m.min(x.abs())))
        .unwrap_or(big);
    f64::EPSILON.powf(1.0 / (n as f64 + 2.0)) * (small * big).sqrt().max(1e-3 * big)
}

/// Central mixed difference estimate of `∇⁽ⁿ⁾f(A) : X₁ … Xₙ`:
/// `(2h)⁻ⁿ Σ_{s ∈ {±1}ⁿ} (Π sᵢ) f(A + h Σ sᵢ Xᵢ)`.
pub fn finite_diff_derivative(
    f: &ScalarFn,
    a: &SymTensor,
    xs: &[SymTensor],
    h: Option<f64>,
) -> Result<Mat3> {
    let n = xs.len();
    if n == 0 || n > 3 {
        return Err(Error::InvalidArgument(format!(
            "finite differences support orders 1 to 3, got {n}"
        )));
    }
    let xmax = xs.iter().map(|x| x.max_abs()).fold(0.0, f64::max);
    if xmax == 0.0 {
        return Ok(Mat3::ZERO);
    }
    let h = h.unwrap_or_else(|| default_step(a, n) / xs.iter().map(|x| x.norm()).fold(0.0, f64::max));
    if !(h > 0.0) || !h.is_finite() || a.max_abs() + h * xmax == a.max_abs() {
        return Err(Error::InvalidArgument(format!("finite difference step {h} underflows")));
    }
    let mut acc = Mat3::ZERO;
    for signs in 0u32..(1 << n) {
        let mut shifted = *a;
        let mut parity = 1.0;
        for (r, x) in xs.iter().enumerate() {
            let s = if signs >> r & 1 == 1 { -1.0 } else { 1.0 };
            parity *= s;
            shifted += x.scale(s * h);
        }
        let v: Mat3 = decompose(&shifted, DEFAULT_CLUSTER_TOL)?.apply(f)?.into();
        acc += v * parity;
    }
    Ok(acc * (1.0 / (2.0 * h).powi(n as i32)))
}

/// Coefficients `p₀ … pₙ` of the polynomial matching Hermite data by a
/// dense confluent Vandermonde solve. The r-th occurrence of a node value
/// (in input order) carries the r-th derivative `f⁽ʳ⁾`.
pub fn hermite_interp_solve(nodes: &[f64], data: &[f64], n: usize) -> Result<Vec<f64>> {
    if nodes.len() != n + 1 || data.len() != n + 1 {
        return Err(Error::Arity {
            expected: n + 1,
            got: nodes.len().min(data.len()),
        });
    }
    let mut mat = DMatrix::<f64>::zeros(n + 1, n + 1);
    for (row, &x) in nodes.iter().enumerate() {
        let r = nodes[..row].iter().filter(|y| **y == x).count();
        for l in r..=n {
            let falling: f64 = (l - r + 1..=l).map(|v| v as f64).product();
            mat[(row, l)] = falling * x.powi((l - r) as i32);
        }
    }
    let rhs = DVector::from_column_slice(data);
    let sol = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidArgument("singular interpolation system".into()))?;
    Ok(sol.iter().copied().collect())
}

/// `Σᵢ yᵢ / Π_{k≠i} (xᵢ − xₖ)`, the leading coefficient of the Lagrange
/// interpolant through distinct nodes.
pub fn lagrange_leading(xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter()
        .zip(ys)
        .enumerate()
        .map(|(i, (xi, yi))| {
            let den: f64 = xs
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, xk)| xi - xk)
                .product();
            yi / den
        })
        .sum()
}

/// `Σᵢ xᵢᵐ / Π_{k≠i}(xᵢ − xₖ)` for distinct nodes.
pub fn partial_fraction_sum(xs: &[f64], m: u32) -> f64 {
    let ys: Vec<f64> = xs.iter().map(|x| x.powi(m as i32)).collect();
    lagrange_leading(xs, &ys)
}

/// `Σ x₁^{i₁} ⋯ x_N^{i_N}` over all `i₁ + … + i_N = m − (N − 1)`, by
/// enumeration; zero when `m < N − 1`.
pub fn monomial_sum(xs: &[f64], m: u32) -> f64 {
    let n = xs.len() - 1;
    if (m as usize) < n {
        return 0.0;
    }
    fn rec(xs: &[f64], left: u32) -> f64 {
        match xs {
            [] => 0.0,
            [x] => x.powi(left as i32),
            [x, rest @ ..] => (0..=left).map(|i| x.powi(i as i32) * rec(rest, left - i)).sum(),
        }
    }
    rec(xs, m - n as u32)
}

/// `(A + X) − A` in floating point: the perturbation actually applied once
/// the sum is rounded.
pub fn effective_step(a: &SymTensor, x: &SymTensor) -> SymTensor {
    (*a + *x) - *a
}

/// `f[x, y]`, with a midpoint odd-order series when the nodes are close.
fn first_difference(f: &ScalarFn, x: f64, y: f64) -> Result<f64> {
    let c = 0.5 * (x + y);
    let h = 0.5 * (x - y);
    if h.abs() > 0.05 * c.abs().max(1.0) {
        return Ok((f.eval(x)? - f.eval(y)?) / (x - y));
    }
    let t = f.taylor(c, 41)?;
    let h2 = h * h;
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 0..=20 {
        sum += t[2 * k + 1] * pow;
        pow *= h2;
    }
    Ok(sum)
}

/// `f(A + X) − f(A)` without cancellation, as
/// `Σ_{i,j} f[βᵢ, αⱼ] Bᵢ X Aⱼ` where `A + X = Σ βᵢ Bᵢ`.
///
/// The rounded sum `A + X` is what gets decomposed, so `X` is replaced by
/// [`effective_step`] to keep the identity exact.
pub fn exact_increment(f: &ScalarFn, a: &SymTensor, x: &SymTensor) -> Result<Mat3> {
    let sa = decompose(a, DEFAULT_CLUSTER_TOL)?;
    let sb = decompose(&(*a + *x), DEFAULT_CLUSTER_TOL)?;
    let pa = sa.projector_mats();
    let pb = sb.projector_mats();
    let xm: Mat3 = effective_step(a, x).into();
    let mut out = Mat3::ZERO;
    for (bi, beta) in pb.iter().zip(sb.alphas()) {
        for (aj, alpha) in pa.iter().zip(sa.alphas()) {
            out += (*bi * xm * *aj) * first_difference(f, *beta, *alpha)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(seed: u64) -> Mat3 {
        let mut s = seed * 2654435761 + 12345;
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in i..3 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                let v = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    #[test]
    fn expansion_examples() {
        let (a, x) = (m(1), m(2));
        let s = expand_monomial(&a, &x, 2).unwrap();
        assert!((s.term(1) - (a * x + x * a)).max_abs() < 1e-15);
        assert!((s.term(2) - x * x).max_abs() < 1e-15);
        let s3 = expand_monomial(&a, &x, 3).unwrap();
        assert_eq!(s3.count(2), 3);
        for deg in 1..=8 {
            let s = expand_monomial(&a, &x, deg).unwrap();
            let direct = (a + x).powi(deg as i32).unwrap();
            assert!((s.total() - direct).max_abs() < 1e-12 * direct.max_abs().max(1.0));
        }
        assert!(expand_monomial(&a, &x, 13).is_err());
    }

    #[test]
    fn finite_differences() {
        let a = SymTensor::from_mat_symmetrized(&(m(3) + Mat3::IDENTITY * 2.0));
        let x = SymTensor::from_mat_symmetrized(&m(4));
        let am: Mat3 = a.into();
        let xm: Mat3 = x.into();
        let d1 = finite_diff_derivative(&ScalarFn::Monomial(2), &a, &[x], None).unwrap();
        assert!((d1 - (am * xm + xm * am)).max_abs() < 1e-9);
        let d2 = finite_diff_derivative(&ScalarFn::Monomial(3), &a, &[x, x], None).unwrap();
        let want = expand_monomial(&am, &xm, 3).unwrap().term(2) * 2.0;
        assert!((d2 - want).max_abs() < 1e-5 * want.max_abs());
        assert!(finite_diff_derivative(&ScalarFn::Exp, &a, &[x; 4], None).is_err());
        assert!(finite_diff_derivative(&ScalarFn::Exp, &a, &[x], Some(1e-300)).is_err());
    }

    #[test]
    fn hermite_solve() {
        let p = hermite_interp_solve(&[0.0, 1.0], &[0.0, 1.0], 1).unwrap();
        assert!(p[0].abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
        // x³ from value/slope at 0 and values at 1, 2
        let p = hermite_interp_solve(&[0.0, 0.0, 1.0, 2.0], &[0.0, 0.0, 1.0, 8.0], 3).unwrap();
        assert!((p[3] - 1.0).abs() < 1e-13);
        let xs = [0.3, 1.1, 1.7, 2.6];
        let ys = [1.0, -2.0, 0.5, 3.0];
        let p = hermite_interp_solve(&xs, &ys, 3).unwrap();
        assert!((p[3] - lagrange_leading(&xs, &ys)).abs() < 1e-12);
        assert!(hermite_interp_solve(&[1.0, 1.0], &[1.0], 1).is_err());
    }

    #[test]
    fn monomial_identity() {
        let xs = [0.6, 1.3, 1.9];
        assert!((monomial_sum(&xs, 3) - (0.6 + 1.3 + 1.9)).abs() < 1e-14);
        assert!((partial_fraction_sum(&xs, 3) - monomial_sum(&xs, 3)).abs() < 1e-13);
        assert_eq!(monomial_sum(&xs, 1), 0.0);
        assert!(partial_fraction_sum(&xs, 1).abs() < 1e-14);
    }

    #[test]
    fn increment_matches_direct_difference() {
        let a = SymTensor::from_mat_symmetrized(&(m(5) + Mat3::IDENTITY * 2.0));
        let x = SymTensor::from_mat_symmetrized(&(m(6) * 0.1));
        let f = ScalarFn::Exp;
        let inc = exact_increment(&f, &a, &x).unwrap();
        let fa: Mat3 = decompose(&a, DEFAULT_CLUSTER_TOL).unwrap().apply(&f).unwrap().into();
        let fb: Mat3 = decompose(&(a + x), DEFAULT_CLUSTER_TOL).unwrap().apply(&f).unwrap().into();
        assert!((inc - (fb - fa)).max_abs() < 1e-13);
        let tiny = SymTensor::from_mat_symmetrized(&(m(6) * 1e-9));
        let inc = exact_increment(&f, &a, &tiny).unwrap();
        let lin = crate::derivatives::gradient(&f, &a).unwrap().apply(&tiny.into());
        assert!((inc - lin).max_abs() < 1e-16 + 1e-7 * lin.max_abs());
    }
}
