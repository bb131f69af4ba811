//! Python bindings. Matrices cross the boundary as nested 3x3 lists (any
//! sequence of sequences, so numpy arrays work too); symmetric inputs are
//! checked to 1e-12.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyTuple};

use tensor_derivs::coefficients::{self, Method};
use tensor_derivs::derivatives::{self, SpectralDerivative};
use tensor_derivs::inverse;
use tensor_derivs::{Error, FourthTensor, Mat3, ScalarFn, StrainMeasureFn, SymTensor};

type Rows = [[f64; 3]; 3];

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NonFinite(_)
        | Error::EigenNoConvergence { .. }
        | Error::CoincidentNodes(..)
        | Error::IllConditioned(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sym(rows: Rows) -> PyResult<SymTensor> {
    SymTensor::from_rows(rows, 1e-12).map_err(py_err)
}

fn func(spec: &str) -> PyResult<ScalarFn> {
    spec.parse().map_err(py_err)
}

fn measure(spec: &str) -> PyResult<StrainMeasureFn> {
    StrainMeasureFn::new(func(spec)?).map_err(py_err)
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(py_err)
}

fn dense9(t: &FourthTensor) -> Vec<Vec<f64>> {
    t.dense_matrix().iter().map(|r| r.to_vec()).collect()
}

/// Eigenvalues and eigenprojectors of a symmetric tensor.
#[pyclass(name = "Spectrum", frozen)]
struct PySpectrum {
    inner: tensor_derivs::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[new]
    #[pyo3(signature = (a, cluster_tol = tensor_derivs::DEFAULT_CLUSTER_TOL))]
    fn new(a: Rows, cluster_tol: f64) -> PyResult<Self> {
        let inner = tensor_derivs::decompose(&sym(a)?, cluster_tol).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn alphas(&self) -> Vec<f64> {
        self.inner.alphas().to_vec()
    }

    #[getter]
    fn projectors(&self) -> Vec<Rows> {
        self.inner.projector_mats().iter().map(|m| m.0).collect()
    }

    fn reconstruct(&self) -> Rows {
        self.inner.reconstruct().to_rows()
    }

    /// `f(A)` for a function spec such as `"exp"` or `"seth_hill:-2"`.
    fn apply(&self, f: &str) -> PyResult<Rows> {
        Ok(self.inner.apply(&func(f)?).map_err(py_err)?.to_rows())
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(d={}, alphas={:?})", self.inner.d(), self.inner.alphas())
    }
}

/// The n-th derivative of `f` at `A`, kept in spectral form.
#[pyclass(name = "Derivative", frozen)]
struct PyDerivative {
    inner: SpectralDerivative,
}

#[pymethods]
impl PyDerivative {
    #[new]
    #[pyo3(signature = (f, a, n, method = "dd"))]
    fn new(f: &str, a: Rows, n: usize, method: &str) -> PyResult<Self> {
        let s = tensor_derivs::decompose(&sym(a)?, tensor_derivs::DEFAULT_CLUSTER_TOL).map_err(py_err)?;
        let inner = derivatives::derivative_with(&func(f)?, &s, n, self::method(method)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    /// Coefficients keyed by sorted 0-based eigenvalue labels.
    fn coefficients<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let out = PyDict::new(py);
        for (k, v) in self.inner.table().entries() {
            out.set_item(PyTuple::new(py, k)?, v)?;
        }
        Ok(out)
    }

    /// `(1/n!) ∇ⁿf : X₁ … Xₙ`, contracted in the given order.
    fn contract(&self, xs: Vec<Rows>) -> PyResult<Rows> {
        let xs: Vec<Mat3> = xs.into_iter().map(Mat3::from_rows).collect();
        Ok(self.inner.contract_dirs(&xs).map_err(py_err)?.0)
    }

    /// `∇ⁿf : X₁ … Xₙ`.
    fn action(&self, xs: Vec<Rows>) -> PyResult<Rows> {
        let xs: Vec<Mat3> = xs.into_iter().map(Mat3::from_rows).collect();
        Ok(self.inner.derivative_action(&xs).map_err(py_err)?.0)
    }

    /// Flat component array of `(1/n!) ∇ⁿf`, `3^(2n+2)` entries.
    fn dense(&self) -> PyResult<Vec<f64>> {
        if self.inner.order() > 4 {
            return Err(PyValueError::new_err("dense export is limited to order 4"));
        }
        Ok(self.inner.dense_components())
    }
}

#[pyfunction]
#[pyo3(signature = (f, a, x, n))]
fn taylor(f: &str, a: Rows, x: Rows, n: usize) -> PyResult<Rows> {
    Ok(derivatives::taylor_eval(&func(f)?, &sym(a)?, &sym(x)?, n)
        .map_err(py_err)?
        .to_rows())
}

/// `(formula, enumerated)` number of index classes at order n.
#[pyfunction]
fn count_classes(n: usize) -> (usize, usize) {
    let c = coefficients::count_classes(n);
    (c.formula, c.enumerated)
}

/// Confluent divided difference over `(node, multiplicity)` pairs.
#[pyfunction]
#[pyo3(signature = (f, nodes, method = "dd"))]
fn coefficient(f: &str, nodes: Vec<(f64, usize)>, method: &str) -> PyResult<f64> {
    self::method(method)?
        .evaluate(&func(f)?, &nodes)
        .map_err(py_err)
}

/// `∇f(A)` as a 9x9 matrix acting on row-major flattened tensors.
#[pyfunction]
fn gradient(f: &str, a: Rows) -> PyResult<Vec<Vec<f64>>> {
    Ok(dense9(&derivatives::gradient(&func(f)?, &sym(a)?).map_err(py_err)?))
}

/// `∇⁻¹f(A)` for a strain measure on a positive definite `A`.
#[pyfunction]
fn inverse_gradient(f: &str, a: Rows) -> PyResult<Vec<Vec<f64>>> {
    let s = tensor_derivs::decompose(&sym(a)?, tensor_derivs::DEFAULT_CLUSTER_TOL).map_err(py_err)?;
    Ok(dense9(&inverse::inverse_grad(&measure(f)?, &s).map_err(py_err)?))
}

/// Solves `Σ_k A^{m−k} X A^{k−1} = C`.
#[pyfunction]
fn solve_power(m: u32, a: Rows, c: Rows) -> PyResult<Rows> {
    Ok(inverse::sylvester_power(m, &sym(a)?, &Mat3::from_rows(c)).map_err(py_err)?.0)
}

/// Solves `AX − XA = Y`; returns `(X, null_residual)`.
#[pyfunction]
fn solve_commutator(a: Rows, y: Rows) -> PyResult<(Rows, f64)> {
    let sol = inverse::sylvester_commutator(&sym(a)?, &Mat3::from_rows(y)).map_err(py_err)?;
    Ok((sol.x.0, sol.null_residual))
}

/// Solves `∇ln(A) X = C` by quadrature.
#[pyfunction]
#[pyo3(signature = (a, c, quad_points = inverse::DEFAULT_QUAD_POINTS))]
fn solve_log(a: Rows, c: Rows, quad_points: usize) -> PyResult<Rows> {
    let t = inverse::log_inverse_integral(&sym(a)?, quad_points).map_err(py_err)?;
    Ok(t.apply(&Mat3::from_rows(c)).0)
}

#[pymodule]
fn tensor_derivs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyDerivative>()?;
    m.add_function(wrap_pyfunction!(taylor, m)?)?;
    m.add_function(wrap_pyfunction!(count_classes, m)?)?;
    m.add_function(wrap_pyfunction!(coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(solve_power, m)?)?;
    m.add_function(wrap_pyfunction!(solve_commutator, m)?)?;
    m.add_function(wrap_pyfunction!(solve_log, m)?)?;
    Ok(())
}
