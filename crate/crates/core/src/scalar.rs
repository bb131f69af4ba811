//! Scalar functions with exact derivatives of every order.
//!
//! Every family produces normalized Taylor coefficients `f⁽ˡ⁾(x)/l!`, which is
//! what the coefficient engine consumes. Combinators (product, reciprocal,
//! composition) operate on these truncated series directly.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// User-supplied derivative callback: returns `[f(x), f'(x), …, f⁽ᵏ⁾(x)]`
/// for the requested `k`.
pub type DerivativeCallback = dyn Fn(f64, usize) -> Vec<f64> + Send + Sync;

/// A scalar function `f(x)` with analytic derivatives.
#[derive(Clone)]
pub enum ScalarFn {
    /// `xᵐ` for integer `m` (negative `m` needs `x > 0`).
    Monomial(i32),
    /// `xᵖ` for real `p`, `x > 0`.
    Power(f64),
    Exp,
    Log,
    /// `c₀ + c₁x + c₂x² + …`
    Polynomial(Vec<f64>),
    /// Seth–Hill strain measure `(xᵐ − 1)/m`, with `m = 0` meaning `ln x`.
    SethHill(f64),
    /// `f · g`
    Product(Box<ScalarFn>, Box<ScalarFn>),
    /// `1 / f`
    Reciprocal(Box<ScalarFn>),
    /// `f ∘ g`, i.e. `f(g(x))`
    Compose(Box<ScalarFn>, Box<ScalarFn>),
    /// Derivatives from a callback, valid up to `max_order`.
    Custom {
        name: String,
        max_order: usize,
        callback: Arc<DerivativeCallback>,
    },
}

/// Generalized binomial coefficient `C(p, l)`.
fn binom(p: f64, l: usize) -> f64 {
    let mut c = 1.0;
    for r in 0..l {
        c *= (p - r as f64) / (r + 1) as f64;
    }
    c
}

fn factorial(l: usize) -> f64 {
    (1..=l).fold(1.0, |acc, r| acc * r as f64)
}

/// Truncated series product.
fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|r| a[r] * b[k - r]).sum())
        .collect()
}

impl ScalarFn {
    pub fn identity() -> Self {
        ScalarFn::Monomial(1)
    }

    pub fn constant(c: f64) -> Self {
        ScalarFn::Polynomial(vec![c])
    }

    pub fn sqrt() -> Self {
        ScalarFn::Power(0.5)
    }

    pub fn product(f: ScalarFn, g: ScalarFn) -> Self {
        ScalarFn::Product(Box::new(f), Box::new(g))
    }

    pub fn reciprocal(f: ScalarFn) -> Self {
        ScalarFn::Reciprocal(Box::new(f))
    }

    /// `outer(inner(x))`
    pub fn compose(outer: ScalarFn, inner: ScalarFn) -> Self {
        ScalarFn::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn custom(
        name: impl Into<String>,
        max_order: usize,
        callback: impl Fn(f64, usize) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        ScalarFn::Custom {
            name: name.into(),
            max_order,
            callback: Arc::new(callback),
        }
    }

    /// Highest derivative order available, `None` when unbounded.
    pub fn max_order(&self) -> Option<usize> {
        match self {
            ScalarFn::Custom { max_order, .. } => Some(*max_order),
            ScalarFn::Product(f, g) | ScalarFn::Compose(f, g) => {
                match (f.max_order(), g.max_order()) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                }
            }
            ScalarFn::Reciprocal(f) => f.max_order(),
            _ => None,
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            ScalarFn::Monomial(m) => *m >= 0 || x > 0.0,
            ScalarFn::Power(_) | ScalarFn::Log | ScalarFn::SethHill(_) => x > 0.0,
            ScalarFn::Exp | ScalarFn::Polynomial(_) | ScalarFn::Custom { .. } => true,
            ScalarFn::Product(f, g) => f.in_domain(x) && g.in_domain(x),
            ScalarFn::Reciprocal(f) => f.in_domain(x),
            ScalarFn::Compose(f, g) => {
                g.in_domain(x) && g.taylor(x, 0).map_or(false, |v| f.in_domain(v[0]))
            }
        }
    }

    fn domain_error(&self, x: f64) -> Error {
        Error::Domain {
            func: self.to_string(),
            x,
        }
    }

    /// Normalized Taylor coefficients `[f(x), f'(x), f''(x)/2!, …, f⁽ᵏ⁾(x)/k!]`.
    pub fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if !self.in_domain(x) {
            return Err(self.domain_error(x));
        }
        let out: Vec<f64> = match self {
            ScalarFn::Monomial(m) => {
                let m = *m;
                (0..=order)
                    .map(|l| {
                        if m >= 0 && l as i32 > m {
                            0.0
                        } else {
                            binom(m as f64, l) * x.powi(m - l as i32)
                        }
                    })
                    .collect()
            }
            ScalarFn::Power(p) => (0..=order)
                .map(|l| binom(*p, l) * x.powf(p - l as f64))
                .collect(),
            ScalarFn::Exp => {
                let e = x.exp();
                let mut c = Vec::with_capacity(order + 1);
                let mut inv_fact = 1.0;
                for l in 0..=order {
                    if l > 0 {
                        inv_fact /= l as f64;
                    }
                    c.push(e * inv_fact);
                }
                c
            }
            ScalarFn::Log => log_taylor(x, order),
            ScalarFn::Polynomial(coeffs) => (0..=order)
                .map(|l| {
                    // Horner on the l-th derivative / l!
                    coeffs
                        .iter()
                        .enumerate()
                        .skip(l)
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * x + c * binom(k as f64, l))
                })
                .collect(),
            ScalarFn::SethHill(m) => {
                let m = *m;
                if m == 0.0 {
                    log_taylor(x, order)
                } else {
                    (0..=order)
                        .map(|l| {
                            if l == 0 {
                                (x.powf(m) - 1.0) / m
                            } else {
                                // C(m, l)/m = Π_{r=1}^{l-1} (m - r) / l!
                                let prod: f64 = (1..l).map(|r| m - r as f64).product();
                                prod / factorial(l) * x.powf(m - l as f64)
                            }
                        })
                        .collect()
                }
            }
            ScalarFn::Product(f, g) => {
                let a = f.taylor(x, order)?;
                let b = g.taylor(x, order)?;
                series_mul(&a, &b)
            }
            ScalarFn::Reciprocal(f) => {
                let a = f.taylor(x, order)?;
                if a[0] == 0.0 {
                    return Err(self.domain_error(x));
                }
                let mut h = vec![0.0; order + 1];
                h[0] = 1.0 / a[0];
                for l in 1..=order {
                    let s: f64 = (1..=l).map(|r| a[r] * h[l - r]).sum();
                    h[l] = -s / a[0];
                }
                h
            }
            ScalarFn::Compose(f, g) => {
                let inner = g.taylor(x, order)?;
                let outer = f.taylor(inner[0], order)?;
                // f(g0 + δ) with δ = Σ_{l≥1} g_l t^l
                let mut delta = inner.clone();
                delta[0] = 0.0;
                let mut out = vec![0.0; order + 1];
                let mut power = vec![0.0; order + 1];
                power[0] = 1.0;
                for c in outer.iter() {
                    for (o, p) in out.iter_mut().zip(&power) {
                        *o += c * p;
                    }
                    power = series_mul(&power, &delta);
                }
                out
            }
            ScalarFn::Custom {
                name,
                max_order,
                callback,
            } => {
                if order > *max_order {
                    return Err(Error::DerivativeOrder {
                        func: name.clone(),
                        max: *max_order,
                        requested: order,
                    });
                }
                let raw = callback(x, order);
                if raw.len() < order + 1 {
                    return Err(Error::DerivativeOrder {
                        func: name.clone(),
                        max: raw.len().saturating_sub(1),
                        requested: order,
                    });
                }
                raw.into_iter()
                    .take(order + 1)
                    .enumerate()
                    .map(|(l, v)| v / factorial(l))
                    .collect()
            }
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(self.domain_error(x));
        }
        Ok(out)
    }

    /// `f⁽ˡ⁾(x)`.
    pub fn eval_deriv(&self, l: usize, x: f64) -> Result<f64> {
        Ok(self.taylor(x, l)?[l] * factorial(l))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.taylor(x, 0)?[0])
    }

    /// Degree when `f` is a polynomial, `None` otherwise.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            ScalarFn::Monomial(m) if *m >= 0 => Some(*m as usize),
            ScalarFn::Polynomial(c) => Some(
                c.iter()
                    .rposition(|v| *v != 0.0)
                    .unwrap_or(0),
            ),
            ScalarFn::SethHill(m) if *m >= 0.0 && m.fract() == 0.0 && *m != 0.0 => {
                Some(*m as usize)
            }
            ScalarFn::Product(f, g) => Some(f.polynomial_degree()? + g.polynomial_degree()?),
            _ => None,
        }
    }
}

fn log_taylor(x: f64, order: usize) -> Vec<f64> {
    (0..=order)
        .map(|l| {
            if l == 0 {
                x.ln()
            } else {
                let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
                sign / (l as f64 * x.powi(l as i32))
            }
        })
        .collect()
}

impl fmt::Display for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFn::Monomial(m) => write!(f, "monomial:{m}"),
            ScalarFn::Power(p) => write!(f, "power:{p}"),
            ScalarFn::Exp => write!(f, "exp"),
            ScalarFn::Log => write!(f, "log"),
            ScalarFn::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            ScalarFn::SethHill(m) => write!(f, "seth_hill:{m}"),
            ScalarFn::Product(a, b) => write!(f, "({a})*({b})"),
            ScalarFn::Reciprocal(a) => write!(f, "1/({a})"),
            ScalarFn::Compose(a, b) => write!(f, "({a})∘({b})"),
            ScalarFn::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

impl fmt::Debug for ScalarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFn({self})")
    }
}

fn parse_num<T: FromStr>(s: &str, spec: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad parameter '{s}' in function spec '{spec}'")))
}

/// Parses the command-line function grammar:
/// `exp`, `log`, `sqrt`, `identity`, `monomial:<int>`, `power:<real>`,
/// `seth_hill:<real>`, `poly:<c0>,<c1>,…`.
impl FromStr for ScalarFn {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (spec, None),
        };
        let need = || {
            param.ok_or_else(|| Error::InvalidArgument(format!("function '{name}' needs a parameter")))
        };
        let f = match name {
            "exp" => ScalarFn::Exp,
            "log" | "ln" => ScalarFn::Log,
            "sqrt" => ScalarFn::sqrt(),
            "identity" | "x" => ScalarFn::identity(),
            "monomial" => ScalarFn::Monomial(parse_num(need()?, spec)?),
            "power" => ScalarFn::Power(parse_num(need()?, spec)?),
            "seth_hill" => ScalarFn::SethHill(parse_num(need()?, spec)?),
            "poly" => {
                let coeffs = need()?
                    .split(',')
                    .map(|c| parse_num(c, spec))
                    .collect::<Result<Vec<f64>>>()?;
                ScalarFn::Polynomial(coeffs)
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown function '{spec}'"
                )))
            }
        };
        if param.is_some() && matches!(name, "exp" | "log" | "ln" | "sqrt" | "identity" | "x") {
            return Err(Error::InvalidArgument(format!(
                "function '{name}' takes no parameter"
            )));
        }
        if let ScalarFn::Power(p) | ScalarFn::SethHill(p) = f {
            if !p.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite exponent in '{spec}'")));
            }
        }
        Ok(f)
    }
}

/// A strain measure: smooth, `f(1) = 0`, `f'(1) = 1`, `f' > 0`.
#[derive(Clone, Debug)]
pub struct StrainMeasureFn(ScalarFn);

impl StrainMeasureFn {
    /// Checks the normalization at `x = 1`. Monotonicity is checked where the
    /// function meets a spectrum.
    pub fn new(f: ScalarFn) -> Result<Self> {
        let t = f.taylor(1.0, 1)?;
        if t[0].abs() > 1e-12 || (t[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "{f} is not a strain measure: f(1) = {}, f'(1) = {}",
                t[0], t[1]
            )));
        }
        Ok(StrainMeasureFn(f))
    }

    pub fn log() -> Self {
        StrainMeasureFn(ScalarFn::Log)
    }

    pub fn function(&self) -> &ScalarFn {
        &self.0
    }

    /// The exponent when this is a Seth–Hill measure (log counts as `m = 0`).
    pub fn seth_hill_exponent(&self) -> Option<f64> {
        match self.0 {
            ScalarFn::SethHill(m) => Some(m),
            ScalarFn::Log => Some(0.0),
            _ => None,
        }
    }
}

/// Seth–Hill strain measure `(xᵐ − 1)/m`; `m = 0` is the logarithmic measure.
pub fn seth_hill(m: f64) -> StrainMeasureFn {
    StrainMeasureFn(ScalarFn::SethHill(m))
}

impl From<StrainMeasureFn> for ScalarFn {
    fn from(s: StrainMeasureFn) -> ScalarFn {
        s.0
    }
}
