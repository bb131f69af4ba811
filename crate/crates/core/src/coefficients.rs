//! Coefficients `f⁽ⁿ⁾_{i₁…iₙ₊₁}` of the n-th derivative in the projector basis.
//!
//! A coefficient depends only on the multiset of eigenvalues selected by its
//! indices, i.e. on the index class `(νᵢ, νⱼ, νₖ)` together with the labelled
//! eigenvalues. Three independent evaluation routes are provided:
//!
//! * confluent divided differences (the production route),
//! * residues of `f(z) / Π (z − αₗ)^{νₗ}`,
//! * the leading coefficient of the Hermite interpolant.
//!
//! The closed forms for the low-order patterns live in [`closed`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::ScalarFn;
use crate::spectral::Spectrum;

pub mod closed;

/// Multiplicity pattern `(νᵢ, νⱼ, νₖ)` with `νᵢ + νⱼ + νₖ = n + 1`, stored
/// sorted ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexClass {
    nu: [usize; 3],
}

impl IndexClass {
    pub fn new(nu: [usize; 3]) -> Result<Self> {
        if nu.iter().sum::<usize>() == 0 {
            return Err(Error::InvalidArgument("index class with no indices".into()));
        }
        let mut nu = nu;
        nu.sort_unstable();
        Ok(IndexClass { nu })
    }

    pub fn nu(&self) -> [usize; 3] {
        self.nu
    }

    /// Derivative order n.
    pub fn order(&self) -> usize {
        self.nu.iter().sum::<usize>() - 1
    }

    /// Pairs each multiplicity with its eigenvalue, dropping empty labels.
    pub fn nodes(&self, alphas: [f64; 3]) -> Vec<(f64, usize)> {
        self.nu
            .iter()
            .zip(alphas)
            .filter(|(nu, _)| **nu > 0)
            .map(|(nu, a)| (a, *nu))
            .collect()
    }
}

/// All classes `0 ≤ I ≤ J ≤ K`, `I + J + K = n + 1`.
pub fn enumerate_classes(n: usize) -> Vec<IndexClass> {
    let total = n + 1;
    let mut out = Vec::new();
    for i in 0..=total / 3 {
        for j in i..=(total - i) / 2 {
            let k = total - i - j;
            if k >= j {
                out.push(IndexClass { nu: [i, j, k] });
            }
        }
    }
    out
}

/// Class count from the floor formula and from enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassCount {
    pub formula: usize,
    pub enumerated: usize,
}

impl ClassCount {
    pub fn agrees(&self) -> bool {
        self.formula == self.enumerated
    }
}

/// `N(n) = ⌊((n + 4)² + 4) / 12⌋`, checked against explicit enumeration.
pub fn count_classes(n: usize) -> ClassCount {
    ClassCount {
        formula: ((n + 4) * (n + 4) + 4) / 12,
        enumerated: enumerate_classes(n).len(),
    }
}

/// Distinct values with multiplicities, ascending. Exact equality merges.
fn collapse(nodes: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for x in sorted {
        match out.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Nodes closer than this (relative to `max(1, |x|)`) are evaluated together
/// by a Taylor expansion about their centroid.
const CLUSTER_REL_GAP: f64 = 0.05;
const CLUSTER_MAX_TERMS: usize = 80;

struct DividedDifference<'a> {
    f: &'a ScalarFn,
    vals: Vec<f64>,
    group: Vec<usize>,
    taylor: Vec<Vec<f64>>,
    memo: HashMap<Vec<usize>, f64>,
}

impl<'a> DividedDifference<'a> {
    fn new(f: &'a ScalarFn, nodes: &[(f64, usize)]) -> Result<Self> {
        let vals: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        let mut group = vec![0usize; vals.len()];
        for r in 1..vals.len() {
            let gap = vals[r] - vals[r - 1];
            let scale = vals[r].abs().max(vals[r - 1].abs()).max(1.0);
            group[r] = group[r - 1] + usize::from(gap > CLUSTER_REL_GAP * scale);
        }
        let taylor = nodes
            .iter()
            .map(|&(x, c)| f.taylor(x, c - 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(DividedDifference {
            f,
            vals,
            group,
            taylor,
            memo: HashMap::new(),
        })
    }

    fn eval(&mut self, counts: Vec<usize>) -> f64 {
        if let Some(v) = self.memo.get(&counts) {
            return *v;
        }
        let lo = counts.iter().position(|c| *c > 0).unwrap();
        let hi = counts.iter().rposition(|c| *c > 0).unwrap();
        let total: usize = counts.iter().sum();
        let value = if lo == hi {
            self.taylor[lo][total - 1]
        } else {
            let clustered = if self.group[lo] == self.group[hi] {
                self.cluster_taylor(&counts, total)
            } else {
                None
            };
            match clustered {
                Some(v) => v,
                None => {
                    let mut left = counts.clone();
                    left[lo] -= 1;
                    let mut right = counts.clone();
                    right[hi] -= 1;
                    (self.eval(left) - self.eval(right)) / (self.vals[hi] - self.vals[lo])
                }
            }
        };
        self.memo.insert(counts, value);
        value
    }

    /// `f[x₀…xₙ] = Σ_p f⁽ⁿ⁺ᵖ⁾(c)/(n+p)! · h_p(x − c)` with `h_p` the complete
    /// homogeneous symmetric polynomial; `None` when the series does not
    /// settle.
    fn cluster_taylor(&self, counts: &[usize], total: usize) -> Option<f64> {
        let weight: f64 = counts.iter().zip(&self.vals).map(|(c, v)| *c as f64 * v).sum();
        let c = weight / total as f64;
        let n = total - 1;
        let coeffs = self.f.taylor(c, n + CLUSTER_MAX_TERMS).ok()?;
        let mut h = vec![0.0; CLUSTER_MAX_TERMS + 1];
        h[0] = 1.0;
        for (cnt, v) in counts.iter().zip(&self.vals) {
            let y = v - c;
            for _ in 0..*cnt {
                for p in 1..h.len() {
                    h[p] += y * h[p - 1];
                }
            }
        }
        let mut sum = 0.0;
        let mut quiet = 0;
        for p in 0..=CLUSTER_MAX_TERMS {
            let term = coeffs[n + p] * h[p];
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                quiet += 1;
                if quiet >= 3 {
                    return sum.is_finite().then_some(sum);
                }
            } else {
                quiet = 0;
            }
        }
        None
    }
}

/// Confluent divided difference `f[x₁, …, xₙ₊₁]`. A node repeated r times
/// uses `f⁽ˡ⁾/l!`, `l < r`. Groups of nearby distinct nodes are expanded
/// about their centroid, which keeps full accuracy as nodes approach
/// confluence.
pub fn coeff_divided_difference(f: &ScalarFn, nodes: &[f64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("divided difference of no nodes".into()));
    }
    if nodes.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("divided difference nodes"));
    }
    let collapsed = collapse(nodes);
    let mut dd = DividedDifference::new(f, &collapsed)?;
    let v = dd.eval(collapsed.iter().map(|n| n.1).collect());
    if !v.is_finite() {
        return Err(Error::NonFinite("divided difference"));
    }
    Ok(v)
}

/// Textbook confluent Newton table, without the cluster expansion.
pub fn newton_divided_difference(f: &ScalarFn, nodes: &[f64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("divided difference of no nodes".into()));
    }
    let mut z = nodes.to_vec();
    z.sort_by(f64::total_cmp);
    let collapsed = collapse(&z);
    let mut derivs: Vec<(f64, Vec<f64>)> = Vec::new();
    for (x, c) in &collapsed {
        derivs.push((*x, f.taylor(*x, c - 1)?));
    }
    let lookup = |x: f64, l: usize| -> f64 {
        derivs
            .iter()
            .find(|(v, _)| *v == x)
            .map(|(_, t)| t[l])
            .unwrap()
    };
    let mut col: Vec<f64> = z.iter().map(|&x| lookup(x, 0)).collect();
    for k in 1..z.len() {
        col = (0..z.len() - k)
            .map(|i| {
                if z[i + k] == z[i] {
                    lookup(z[i], k)
                } else {
                    (col[i + 1] - col[i]) / (z[i + k] - z[i])
                }
            })
            .collect();
    }
    Ok(col[0])
}

fn check_distinct(nodes: &[(f64, usize)]) -> Result<()> {
    for (a, (x, _)) in nodes.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite("coefficient nodes"));
        }
        for (y, _) in &nodes[a + 1..] {
            if x == y {
                return Err(Error::CoincidentNodes(*x, *y));
            }
        }
    }
    if nodes.iter().all(|n| n.1 == 0) {
        return Err(Error::InvalidArgument("no nodes".into()));
    }
    Ok(())
}

/// Residue evaluation of `(1/2πi)∮ f(z) / Π (z − αₗ)^{νₗ} dz`: the sum over
/// labels of `1/(νₗ−1)! · d^{νₗ−1}/dx^{νₗ−1} [f(x) / Π_{m≠l}(x − αₘ)^{νₘ}]`
/// at `x = αₗ`, with the Leibniz rule on exact Taylor coefficients.
pub fn coeff_residue_nodes(f: &ScalarFn, nodes: &[(f64, usize)]) -> Result<f64> {
    check_distinct(nodes)?;
    let mut total = 0.0;
    for (l, &(al, nul)) in nodes.iter().enumerate() {
        if nul == 0 {
            continue;
        }
        let p = nul - 1;
        let ft = f.taylor(al, p)?;
        // Taylor coefficients of Π_{m≠l} (x − αₘ)^{−νₘ} about αₗ
        let mut g = vec![0.0; p + 1];
        g[0] = 1.0;
        for (m, &(am, num)) in nodes.iter().enumerate() {
            if m == l || num == 0 {
                continue;
            }
            let h = al - am;
            let nu = -(num as f64);
            let mut factor = vec![0.0; p + 1];
            let mut binom = 1.0;
            for (r, slot) in factor.iter_mut().enumerate() {
                if r > 0 {
                    binom *= (nu - (r - 1) as f64) / r as f64;
                }
                *slot = binom * h.powf(nu - r as f64);
            }
            g = (0..=p)
                .map(|k| (0..=k).map(|r| g[r] * factor[k - r]).sum())
                .collect();
        }
        total += (0..=p).map(|r| ft[p - r] * g[r]).sum::<f64>();
    }
    Ok(total)
}

/// Residue route for a labelled class.
pub fn coeff_residue(f: &ScalarFn, cls: &IndexClass, alphas: [f64; 3]) -> Result<f64> {
    coeff_residue_nodes(f, &cls.nodes(alphas))
}

/// Condition estimate above which the interpolation route refuses to answer.
pub const INTERP_MAX_CONDITION: f64 = 1e12;

/// Leading coefficient of the degree-n Hermite interpolant matching
/// `f⁽ʳ⁾(αₗ)`, `r < νₗ`.
///
/// The interpolant is written as `T(x) + (x − αₖ)^{νₖ} Q(x)`, where `αₖ` is
/// the node of highest multiplicity and `T` its Taylor polynomial of degree
/// `νₖ − 1`; the remaining conditions give a small linear system for `Q`,
/// whose leading coefficient is the answer.
pub fn coeff_interpolation_nodes(f: &ScalarFn, nodes: &[(f64, usize)]) -> Result<f64> {
    check_distinct(nodes)?;
    let nodes: Vec<(f64, usize)> = nodes.iter().copied().filter(|n| n.1 > 0).collect();
    let n = nodes.iter().map(|n| n.1).sum::<usize>() - 1;
    let anchor = (0..nodes.len()).max_by_key(|&i| (nodes[i].1, i)).unwrap();
    let (ak, nuk) = nodes[anchor];
    let tk = f.taylor(ak, nuk - 1)?;
    if nuk == n + 1 {
        return Ok(tk[n]);
    }
    let unknowns = n + 1 - nuk;
    let others: Vec<(f64, usize)> = nodes
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != anchor)
        .map(|(_, n)| *n)
        .collect();
    let hmax = others.iter().map(|(a, _)| (a - ak).abs()).fold(0.0, f64::max);

    let mut mat = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<f64>::zeros(unknowns);
    // magnitude of the data entering each right-hand side, before cancellation
    let mut data = vec![0.0; unknowns];
    let mut row = 0;
    for &(al, nul) in &others {
        let h = al - ak;
        let fl = f.taylor(al, nul - 1)?;
        for r in 0..nul {
            // r-th normalized derivative of T at αₗ
            let t_r: f64 = (r..nuk)
                .map(|t| tk[t] * binom_usize(t, r) * h.powi((t - r) as i32))
                .sum();
            rhs[row] = fl[r] - t_r;
            data[row] = fl[r].abs()
                + (r..nuk)
                    .map(|t| (tk[t] * binom_usize(t, r) * h.powi((t - r) as i32)).abs())
                    .sum::<f64>();
            for s in 0..unknowns {
                let e = nuk + s;
                mat[(row, s)] = binom_usize(e, r) * h.powi((e - r) as i32);
            }
            row += 1;
        }
    }
    // column equilibration: unknown q_s = y_s / hmax^s
    for s in 0..unknowns {
        let scale = hmax.powi(s as i32);
        for r in 0..unknowns {
            mat[(r, s)] /= scale;
        }
    }
    // row equilibration
    for r in 0..unknowns {
        let m = (0..unknowns).map(|s| mat[(r, s)].abs()).fold(0.0, f64::max);
        if m > 0.0 {
            for s in 0..unknowns {
                mat[(r, s)] /= m;
            }
            rhs[r] /= m;
            data[r] /= m;
        }
    }
    let rhs_max = rhs.amax();
    if rhs_max == 0.0 {
        return Ok(0.0);
    }
    let svd = mat.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let matrix_cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    // relative error amplification, including cancellation in the data
    let cond = matrix_cond * data.iter().fold(0.0, |a: f64, b| a.max(*b)) / rhs_max;
    if !(cond <= INTERP_MAX_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let y = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let lead = y[unknowns - 1] / hmax.powi((unknowns - 1) as i32);
    if !lead.is_finite() {
        return Err(Error::NonFinite("interpolation coefficient"));
    }
    Ok(lead)
}

/// Interpolation route for a labelled class.
pub fn coeff_interpolation(f: &ScalarFn, cls: &IndexClass, alphas: [f64; 3]) -> Result<f64> {
    coeff_interpolation_nodes(f, &cls.nodes(alphas))
}

fn binom_usize(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, r| acc * (n - r) as f64 / (r + 1) as f64)
}

/// Coefficient evaluation route.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    DividedDifference,
    Residue,
    Interpolation,
}

impl Method {
    pub fn evaluate(&self, f: &ScalarFn, nodes: &[(f64, usize)]) -> Result<f64> {
        match self {
            Method::DividedDifference => {
                let flat: Vec<f64> = nodes
                    .iter()
                    .flat_map(|&(x, c)| std::iter::repeat(x).take(c))
                    .collect();
                coeff_divided_difference(f, &flat)
            }
            Method::Residue => coeff_residue_nodes(f, nodes),
            Method::Interpolation => coeff_interpolation_nodes(f, nodes),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dd" => Ok(Method::DividedDifference),
            "residue" => Ok(Method::Residue),
            "interp" => Ok(Method::Interpolation),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method '{s}' (expected dd, residue or interp)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DividedDifference => "dd",
            Method::Residue => "residue",
            Method::Interpolation => "interp",
        })
    }
}

/// All sorted multi-indices of length `len` over `0..d`.
pub fn sorted_multi_indices(d: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            rec(d, len, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, len, 0, &mut Vec::with_capacity(len), &mut out);
    out
}

/// Coefficients of `(1/n!) ∇⁽ⁿ⁾ f(A)` for one spectrum, keyed by sorted
/// multi-index over the eigenvalue labels `0..d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    order: usize,
    alphas: Vec<f64>,
    method: Method,
    entries: BTreeMap<Vec<usize>, f64>,
    /// Row-major over all `d^{n+1}` index tuples.
    tuples: Vec<f64>,
    cross_check: Option<f64>,
}

impl CoeffTable {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn d(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Distinct entries, keyed by sorted multi-index.
    pub fn entries(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.entries
    }

    /// Coefficient for any ordering of the indices.
    pub fn get(&self, indices: &[usize]) -> Option<f64> {
        if indices.len() != self.order + 1 {
            return None;
        }
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.entries.get(&key).copied()
    }

    /// Coefficients for all `d^{n+1}` tuples, row-major.
    pub fn tuple_values(&self) -> &[f64] {
        &self.tuples
    }

    /// Largest relative disagreement with the residue route, recorded in
    /// debug builds.
    pub fn cross_check(&self) -> Option<f64> {
        self.cross_check
    }
}

/// Builds the table for `(1/n!) ∇⁽ⁿ⁾ f(A)` on the given spectrum.
pub fn build_table(f: &ScalarFn, s: &Spectrum, n: usize, method: Method) -> Result<CoeffTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    if let Some(max) = f.max_order() {
        let needed = n.min(n + 1 - s.d().min(n + 1)).max(if s.d() == 1 { n } else { 0 });
        if max < needed {
            return Err(Error::DerivativeOrder {
                func: f.to_string(),
                max,
                requested: needed,
            });
        }
    }
    let d = s.d();
    let alphas = s.alphas().to_vec();
    let mut entries = BTreeMap::new();
    let mut cross: Option<f64> = None;
    for key in sorted_multi_indices(d, n + 1) {
        let mut nodes: Vec<(f64, usize)> = Vec::new();
        for &i in &key {
            match nodes.last_mut() {
                Some((a, c)) if *a == alphas[i] => *c += 1,
                _ => nodes.push((alphas[i], 1)),
            }
        }
        let v = method.evaluate(f, &nodes)?;
        if cfg!(debug_assertions) && method == Method::DividedDifference {
            if let Ok(r) = coeff_residue_nodes(f, &nodes) {
                let rel = (r - v).abs() / v.abs().max(1e-300);
                cross = Some(cross.map_or(rel, |c: f64| c.max(rel)));
            }
        }
        entries.insert(key, v);
    }
    let len = d.pow((n + 1) as u32);
    let mut tuples = Vec::with_capacity(len);
    let mut idx = vec![0usize; n + 1];
    for flat in 0..len {
        let mut rem = flat;
        for p in (0..=n).rev() {
            idx[p] = rem % d;
            rem /= d;
        }
        let mut key = idx.clone();
        key.sort_unstable();
        tuples.push(entries[&key]);
    }
    Ok(CoeffTable {
        order: n,
        alphas,
        method,
        entries,
        tuples,
        cross_check: cross,
    })
}
