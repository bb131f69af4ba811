//! Explicit coefficient formulas for the low-order index classes, the two
//! three-point interpolation solutions, and the classical n = 1, 2 tables.
//!
//! These are kept as an independent check on the general routes and are
//! not used to build tables.

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;

use super::IndexClass;

/// Closed form for a labelled class. Supported patterns, up to relabelling:
/// `(0,0,n+1)`, `(0,1,n)`, `(0,2,n−1)`, `(1,1,n−1)` and `(1,2,n−2)`.
pub fn coeff_closed_form(f: &ScalarFn, cls: &IndexClass, alphas: [f64; 3]) -> Result<f64> {
    closed_form_nodes(f, &cls.nodes(alphas))
}

/// As [`coeff_closed_form`], on `(eigenvalue, multiplicity)` pairs.
pub fn closed_form_nodes(f: &ScalarFn, nodes: &[(f64, usize)]) -> Result<f64> {
    let mut nodes: Vec<(f64, usize)> = nodes.iter().copied().filter(|n| n.1 > 0).collect();
    nodes.sort_by_key(|n| n.1);
    let n = nodes.iter().map(|n| n.1).sum::<usize>() - 1;
    let mults: Vec<usize> = nodes.iter().map(|n| n.1).collect();
    match mults.as_slice() {
        [_] => Ok(single_node(f, nodes[0].0, n)?),
        [1, _] => one_and_rest(f, nodes[0].0, nodes[1].0, n),
        [2, _] => two_and_rest(f, nodes[0].0, nodes[1].0, n),
        [1, 1, _] => one_one_rest(f, nodes[0].0, nodes[1].0, nodes[2].0, n),
        [1, 2, _] => one_two_rest(f, nodes[0].0, nodes[1].0, nodes[2].0, n),
        _ => {
            let mut nu = [0usize; 3];
            for (slot, m) in nu.iter_mut().zip(mults.iter()) {
                *slot = *m;
            }
            nu.sort_unstable();
            Err(Error::UnsupportedPattern(nu))
        }
    }
}

/// `(0,0,n+1)`: `f⁽ⁿ⁾(αₖ)/n!`.
fn single_node(f: &ScalarFn, ak: f64, n: usize) -> Result<f64> {
    Ok(f.taylor(ak, n)?[n])
}

/// `(0,1,n)`: `h⁻ⁿ [f(αⱼ) − Σ_{l<n} hˡ f⁽ˡ⁾(αₖ)/l!]`, `h = αⱼ − αₖ`.
fn one_and_rest(f: &ScalarFn, aj: f64, ak: f64, n: usize) -> Result<f64> {
    let h = aj - ak;
    let t = f.taylor(ak, n - 1)?;
    let fj = f.eval(aj)?;
    let partial: f64 = (0..n).map(|l| h.powi(l as i32) * t[l]).sum();
    Ok((fj - partial) / h.powi(n as i32))
}

/// `(0,2,n−1)`:
/// `h⁻ⁿ [Σ_{l≤n−2} (n−1−l) hˡ f⁽ˡ⁾(αₖ)/l! + h f′(αⱼ) − (n−1) f(αⱼ)]`.
fn two_and_rest(f: &ScalarFn, aj: f64, ak: f64, n: usize) -> Result<f64> {
    let h = aj - ak;
    let t = f.taylor(ak, n.saturating_sub(2))?;
    let fj = f.taylor(aj, 1)?;
    let partial: f64 = (0..n - 1)
        .map(|l| (n - 1 - l) as f64 * h.powi(l as i32) * t[l])
        .sum();
    Ok((partial + h * fj[1] - (n - 1) as f64 * fj[0]) / h.powi(n as i32))
}

/// `(1,1,n−1)`.
fn one_one_rest(f: &ScalarFn, ai: f64, aj: f64, ak: f64, n: usize) -> Result<f64> {
    let hi = ai - ak;
    let hj = aj - ak;
    let t = f.taylor(ak, n - 2)?;
    let p = (n - 1) as i32;
    let mut inner = f.eval(ai)? / hi.powi(p) - f.eval(aj)? / hj.powi(p);
    for (l, tl) in t.iter().enumerate().take(n - 1) {
        let e = p - l as i32;
        inner -= tl * (1.0 / hi.powi(e) - 1.0 / hj.powi(e));
    }
    Ok(inner / (ai - aj))
}

/// `(1,2,n−2)`, with `αⱼ` the doubled node.
fn one_two_rest(f: &ScalarFn, ai: f64, aj: f64, ak: f64, n: usize) -> Result<f64> {
    let hi = ai - ak;
    let hj = aj - ak;
    let t = f.taylor(ak, n - 3)?;
    let fj = f.taylor(aj, 1)?;
    let p = (n - 2) as i32;
    let r = (aj - ai) / hj;
    let mut inner = f.eval(ai)? / hi.powi(p) - fj[0] / hj.powi(p) * (1.0 + (n - 2) as f64 * r)
        + (aj - ai) / hj.powi(p) * fj[1];
    for (l, tl) in t.iter().enumerate().take(n - 2) {
        let e = p - l as i32;
        inner -= tl * (1.0 / hi.powi(e) - (1.0 + (n - l - 2) as f64 * r) / hj.powi(e));
    }
    Ok(inner / ((ai - aj) * (ai - aj)))
}

/// Leading coefficient of the degree-n polynomial with prescribed values at
/// `x₁`, `x₂` and normalized derivatives `taylor0[l] = f⁽ˡ⁾(0)/l!`,
/// `l ≤ n − 2`, at the origin.
pub fn two_values_leading(taylor0: &[f64], x1: f64, f1: f64, x2: f64, f2: f64, n: usize) -> f64 {
    let p = (n - 1) as i32;
    let mut s = f1 / x1.powi(p) - f2 / x2.powi(p);
    for (l, t) in taylor0.iter().enumerate().take(n - 1) {
        s -= t * (x1.powi(l as i32) / x1.powi(p) - x2.powi(l as i32) / x2.powi(p));
    }
    s / (x1 - x2)
}

/// As [`two_values_leading`] with an extra slope `df2` at `x₂`; the origin
/// carries `l ≤ n − 3`.
pub fn values_and_slope_leading(
    taylor0: &[f64],
    x1: f64,
    f1: f64,
    x2: f64,
    f2: f64,
    df2: f64,
    n: usize,
) -> f64 {
    let p = (n - 2) as i32;
    let shift = |l: usize| 1.0 - (n - 2 - l) as f64 * (x1 / x2 - 1.0);
    let mut s = f1 / x1.powi(p) - f2 / x2.powi(p) * shift(0) + df2 / x2.powi(p) * (x2 - x1);
    for (l, t) in taylor0.iter().enumerate().take(n - 2) {
        s -= t * (x1.powi(l as i32) / x1.powi(p) - x2.powi(l as i32) / x2.powi(p) * shift(l));
    }
    s / ((x1 - x2) * (x1 - x2))
}

/// Gradient coefficient `f_{ij}` from eigenvalue labels.
pub fn ogden_first(f: &ScalarFn, alphas: &[f64], i: usize, j: usize) -> Result<f64> {
    let (ai, aj) = (alphas[i], alphas[j]);
    if i == j {
        f.eval_deriv(1, ai)
    } else {
        Ok((f.eval(ai)? - f.eval(aj)?) / (ai - aj))
    }
}

/// Second-derivative coefficient `f_{ijk}` from eigenvalue labels.
pub fn ogden_second(f: &ScalarFn, alphas: &[f64], i: usize, j: usize, k: usize) -> Result<f64> {
    let mut idx = [i, j, k];
    idx.sort_unstable();
    let [a, b, c] = idx;
    if a == c {
        return Ok(f.eval_deriv(2, alphas[a])? / 2.0);
    }
    if a == b || b == c {
        // repeated label r, single label s
        let (r, s) = if a == b { (a, c) } else { (b, a) };
        let (ar, as_) = (alphas[r], alphas[s]);
        let h = as_ - ar;
        return Ok((f.eval(as_)? - f.eval(ar)? - h * f.eval_deriv(1, ar)?) / (h * h));
    }
    let (ai, aj, ak) = (alphas[a], alphas[b], alphas[c]);
    let (fi, fj, fk) = (f.eval(ai)?, f.eval(aj)?, f.eval(ak)?);
    Ok(((fj - fi) * (ai + aj - 2.0 * ak) - (fi + fj - 2.0 * fk) * (aj - ai))
        / (2.0 * (ai - aj) * (aj - ak) * (ak - ai)))
}
