//! Python bindings: multiplicative integrals and the factorization tools,
//! with JSON strings as the structured-data interchange (the same wire
//! format the CLI reads).

use num_complex::Complex;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use potint::blaschke::{detach_max, find_det_zeros};
use potint::factor::{classify_by_det, nonuniqueness_demo, Classification};
use potint::matcore::{C64, CMat};
use potint::mvf::Mvf;
use potint::potapov::{bp_to_repr, rational_approximant};
use potint::prodint::{
    det_certificate, ode_integral, prod_integral, IntegratorSpecJson, KernelSpecJson, MatJson,
};
use potint::wire::FunctionSpecJson;
use potint::Error;

fn pyerr(e: Error) -> PyErr {
    match e {
        Error::MalformedSpec(_)
        | Error::InvalidIntegrator(_)
        | Error::InvalidKernel(_)
        | Error::InvalidPartition(_)
        | Error::DimensionMismatch(_)
        | Error::Serde(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn mat_to_py(m: &CMat) -> Vec<Vec<Complex<f64>>> {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| m.entry(i, j)).collect())
        .collect()
}

fn mat_from_py(rows: &[Vec<Complex<f64>>]) -> PyResult<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square and nonempty"));
    }
    Ok(CMat::from_fn(n, |i, j| rows[i][j]))
}

fn parse_kernel(json: &str) -> PyResult<potint::prodint::KernelSpec> {
    let j: KernelSpecJson =
        serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    j.to_spec().map_err(pyerr)
}

fn parse_integrator(json: &str) -> PyResult<potint::prodint::IntegratorSpec> {
    let j: IntegratorSpecJson =
        serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    j.to_spec().map_err(pyerr)
}

/// An evaluable analytic matrix function built from a JSON function spec
/// (kinds: constant, bp_product, potapov_repr, cayley, pp_inner, sc_inner,
/// outer_poly).
#[pyclass(name = "Function")]
struct PyFunction {
    mvf: Mvf,
    tol: f64,
}

#[pymethods]
impl PyFunction {
    #[new]
    #[pyo3(signature = (spec_json, tol = 1e-8))]
    fn new(spec_json: &str, tol: f64) -> PyResult<Self> {
        let spec: FunctionSpecJson =
            serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let mvf = spec.to_mvf(tol).map_err(pyerr)?;
        Ok(PyFunction { mvf, tol })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.mvf.dim()
    }

    fn eval(&self, z: Complex<f64>) -> Vec<Vec<Complex<f64>>> {
        mat_to_py(&self.mvf.eval(z))
    }

    /// "inner" | "outer" | "mixed" | "undetermined", from boundary
    /// determinant sampling.
    fn classify(&self) -> &'static str {
        match classify_by_det(&self.mvf) {
            Classification::InnerLike => "inner",
            Classification::OuterLike => "outer",
            Classification::Mixed => "mixed",
            Classification::Undetermined => "undetermined",
        }
    }

    #[pyo3(signature = (radius = 0.7, budget = 40_000))]
    fn find_det_zeros(&self, radius: f64, budget: usize) -> PyResult<Vec<Complex<f64>>> {
        find_det_zeros(&self.mvf, radius, budget).map_err(pyerr)
    }

    /// Detaches the maximal elementary factor at `z0`; returns the factor
    /// as a JSON object string and the remainder as a new Function.
    fn detach(&self, z0: Complex<f64>) -> PyResult<(String, PyFunction)> {
        let (factor, remainder) = detach_max(&self.mvf, z0).map_err(pyerr)?;
        let j = serde_json::json!({
            "zero": [factor.zero().re, factor.zero().im],
            "frame": serde_json::to_value(MatJson::from_cmat(factor.frame())).unwrap(),
            "rank": factor.rank(),
        });
        Ok((
            j.to_string(),
            PyFunction {
                mvf: remainder,
                tol: self.tol,
            },
        ))
    }

    /// Index-k rational boundary-unitary approximant; returns its discrete
    /// Herglotz data as a JSON string.
    fn cayley_approx(&self, k: u32) -> PyResult<String> {
        let ap = rational_approximant(&self.mvf, k).map_err(pyerr)?;
        let j = serde_json::json!({
            "k": ap.k,
            "radius": ap.radius,
            "certified_gap": ap.certified_gap,
            "cayley": serde_json::to_value(ap.cayley.to_json()).unwrap(),
        });
        Ok(j.to_string())
    }
}

/// Multiplicative integral of a kernel against an integrator, both given as
/// JSON spec strings. Returns (value, error_certificate, partitions_used).
#[pyfunction]
#[pyo3(name = "prod_integral", signature = (kernel_json, integrator_json, tol = 1e-8))]
fn py_prod_integral(
    kernel_json: &str,
    integrator_json: &str,
    tol: f64,
) -> PyResult<(Vec<Vec<Complex<f64>>>, f64, usize)> {
    let f = parse_kernel(kernel_json)?;
    let e = parse_integrator(integrator_json)?;
    let r = prod_integral(&f, &e, tol).map_err(pyerr)?;
    Ok((mat_to_py(&r.value), r.error_certificate, r.partitions_used))
}

/// Determinant identity data: (det of the product, exp of the scalar trace
/// integral). The two agree for any kernel/integrator pair.
#[pyfunction]
#[pyo3(name = "det_certificate", signature = (kernel_json, integrator_json, tol = 1e-8))]
fn py_det_certificate(
    kernel_json: &str,
    integrator_json: &str,
    tol: f64,
) -> PyResult<(Complex<f64>, Complex<f64>)> {
    let f = parse_kernel(kernel_json)?;
    let e = parse_integrator(integrator_json)?;
    det_certificate(&f, &e, tol).map_err(pyerr)
}

/// Runge-Kutta solution of F' = F·M(t) with M a matrix polynomial in t.
#[pyfunction]
#[pyo3(name = "ode_integral")]
fn py_ode_integral(
    coeffs: Vec<Vec<Vec<Complex<f64>>>>,
    domain: (f64, f64),
    steps: usize,
) -> PyResult<Vec<Vec<Complex<f64>>>> {
    if coeffs.is_empty() {
        return Err(PyValueError::new_err("need at least one coefficient"));
    }
    let mats: Vec<CMat> = coeffs
        .iter()
        .map(|c| mat_from_py(c))
        .collect::<PyResult<_>>()?;
    let dim = mats[0].dim();
    let a_fn = move |t: f64| {
        let mut acc = CMat::zeros(dim);
        let mut p = 1.0;
        for c in &mats {
            acc = acc.add(&c.scale(C64::new(p, 0.0)));
            p *= t;
        }
        acc
    };
    let v = ode_integral(&a_fn, dim, domain, steps).map_err(pyerr)?;
    Ok(mat_to_py(&v))
}

/// Converts a finite product (JSON) into multiplicative step data (JSON).
#[pyfunction]
#[pyo3(name = "bp_to_repr")]
fn py_bp_to_repr(product_json: &str) -> PyResult<String> {
    let j: potint::blaschke::BPProductJson =
        serde_json::from_str(product_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let p = potint::blaschke::BPProduct::from_json(&j).map_err(pyerr)?;
    let r = bp_to_repr(&p).map_err(pyerr)?;
    serde_json::to_string(&r.to_json()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Two distinct increasing integrators generating the same inner function.
/// Returns (function_gap, integrator_gap, closed_form_gap).
#[pyfunction]
#[pyo3(name = "nonuniqueness_demo", signature = (tol = 1e-10))]
fn py_nonuniqueness_demo(tol: f64) -> PyResult<(f64, f64, f64)> {
    let r = nonuniqueness_demo(tol).map_err(pyerr)?;
    Ok((r.function_gap, r.integrator_gap, r.closed_form_gap))
}

#[pymodule]
fn potint_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFunction>()?;
    m.add_function(wrap_pyfunction!(py_prod_integral, m)?)?;
    m.add_function(wrap_pyfunction!(py_det_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(py_ode_integral, m)?)?;
    m.add_function(wrap_pyfunction!(py_bp_to_repr, m)?)?;
    m.add_function(wrap_pyfunction!(py_nonuniqueness_demo, m)?)?;
    Ok(())
}
