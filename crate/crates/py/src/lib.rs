//! Python bindings: characters, expansion specs, the local Siegel series, expansions and the
//! verification checks, with structured results handed over as JSON strings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use siegel_eis::cli;
use siegel_eis::eisenstein::{self, EisensteinSpec, NormalizedExpansion, Translate};
use siegel_eis::exactnum::CyclotomicNumber;
use siegel_eis::nearholo;
use siegel_eis::pullback;
use siegel_eis::quadforms::{self, Mat};
use siegel_eis::siegelseries;
use siegel_eis::Error;

fn py_err(e: Error) -> PyErr {
    if cli::exit_code(&e) == 2 {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> PyResult<String> {
    serde_json::to_string(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn int_mat(rows: Vec<Vec<i64>>) -> Mat {
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    quadforms::mat_from_ints(&refs)
}

#[pyclass(name = "Character", frozen)]
struct PyCharacter {
    inner: siegel_eis::characters::DirichletCharacter,
}

#[pymethods]
impl PyCharacter {
    /// `desc` is one of trivial, odd4, kron:D, turns:M:t1,..; `modulus` sizes the trivial character.
    #[new]
    #[pyo3(signature = (desc, modulus = 1))]
    fn new(desc: &str, modulus: u64) -> PyResult<Self> {
        Ok(Self { inner: cli::parse_chi(desc, modulus).map_err(py_err)? })
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    #[getter]
    fn parity(&self) -> u8 {
        self.inner.parity()
    }

    #[getter]
    fn order(&self) -> u64 {
        self.inner.order()
    }

    fn conductor(&self) -> u64 {
        self.inner.conductor_and_primitive().0
    }

    /// χ(a) as a cyclotomic number in display form.
    fn value(&self, a: i64) -> String {
        self.inner.value(a).to_string()
    }

    fn value_complex(&self, a: i64) -> (f64, f64) {
        let z = self.inner.value(a).to_complex();
        (z.re, z.im)
    }

    fn __repr__(&self) -> String {
        format!("Character(modulus={}, order={})", self.inner.modulus(), self.inner.order())
    }
}

#[pyclass(name = "EisensteinSpec", frozen)]
struct PySpec {
    inner: EisensteinSpec,
}

#[pymethods]
impl PySpec {
    #[new]
    #[pyo3(signature = (n, level, k, chi = "trivial", m0 = 0))]
    fn new(n: usize, level: u64, k: i64, chi: &str, m0: i64) -> PyResult<Self> {
        let args = cli::SpecArgs { n, level, k, chi: chi.to_string(), m0 };
        Ok(Self { inner: args.to_spec().map_err(py_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!("EisensteinSpec(n={}, N={}, k={}, m0={})", s.n, s.level, s.k, s.m0)
    }
}

#[pyclass(name = "Expansion", frozen)]
struct PyExpansion {
    inner: NormalizedExpansion,
}

#[pymethods]
impl PyExpansion {
    fn __len__(&self) -> usize {
        self.inner.coeffs.len()
    }

    /// (h as a nested list of rational strings, coefficient in display form) pairs.
    fn coefficients(&self) -> Vec<(Vec<Vec<String>>, String)> {
        self.inner
            .coeffs
            .iter()
            .map(|c| {
                let h = c.h.entries().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
                (h, c.value.to_string())
            })
            .collect()
    }

    /// True iff every coefficient is p-integral with zero π-exponent.
    fn is_p_integral(&self, p: u64) -> bool {
        eisenstein::integrality_report(&self.inner, p).all_pass
    }

    fn integrality_report(&self, p: u64) -> PyResult<String> {
        to_json(&eisenstein::integrality_report(&self.inner, p))
    }

    /// E*(Z) from the Fourier side at a point given as "a+bi,c+di;e+fi,g+hi".
    fn evaluate(&self, point: &str) -> PyResult<(f64, f64)> {
        let z = eisenstein::parse_point(point).map_err(py_err)?;
        let v = eisenstein::eval_expansion_numeric(&self.inner, &z).map_err(py_err)?;
        Ok((v.re, v.im))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner)
    }
}

#[pyfunction]
fn build_expansion(spec: &PySpec, bound: u64) -> PyResult<PyExpansion> {
    Ok(PyExpansion { inner: eisenstein::build_expansion(&spec.inner, bound).map_err(py_err)? })
}

/// The nearly holomorphic expansion at s = −m0, as JSON.
#[pyfunction]
fn raise_expansion(spec: &PySpec, bound: u64) -> PyResult<String> {
    to_json(&nearholo::eisenstein_at_minus_m0(&spec.inner, bound).map_err(py_err)?)
}

/// Pullback JSON and the cusp-support verdict.
#[pyfunction]
fn pullback_check(spec: &PySpec, bound: u64) -> PyResult<(String, bool)> {
    let r = nearholo::eisenstein_at_minus_m0(&spec.inner, bound).map_err(py_err)?;
    let pb = pullback::restrict_diagonal(&r.expansion).map_err(py_err)?;
    Ok((to_json(&pb)?, pullback::cusp_support_check(&pb).pass))
}

/// Kitaoka's value of the local Siegel series of an integral h at X = χ(p)p^{−k}.
#[pyfunction]
#[pyo3(signature = (h, p, k, chi_at_p = 1))]
fn kitaoka_bp(h: Vec<Vec<i64>>, p: u64, k: i64, chi_at_p: i64) -> PyResult<String> {
    let h = int_mat(h);
    let n = h.len() / 2;
    let v = siegelseries::kitaoka_bp(&h, k, &CyclotomicNumber::from_int(chi_at_p), p, n).map_err(py_err)?;
    Ok(v.to_string())
}

/// Coefficients of the brute-force polynomial B_p(X), constant term first.
#[pyfunction]
fn brute_force_bp(h: Vec<Vec<i64>>, p: u64, j_max: u32) -> PyResult<Vec<String>> {
    let b = siegelseries::brute_force_bp(&int_mat(h), p, j_max, siegelseries::budget_from_env()).map_err(py_err)?;
    Ok(b.poly.coeffs().iter().map(|c| c.to_string()).collect())
}

/// f_ℓ^h as a polynomial string.
#[pyfunction]
fn f_poly(h: Vec<Vec<i64>>, ell: u64, rho: i64) -> PyResult<String> {
    let h = int_mat(h);
    let n = h.len() / 2;
    let f = siegelseries::extract_f_poly(&h, ell, n, rho, siegelseries::budget_from_env()).map_err(py_err)?;
    Ok(f.f.to_string())
}

/// Numeric I(ℓ, m) at z.
#[pyfunction]
fn archimedean_i(l: i64, m: i64, re: f64, im: f64) -> PyResult<(f64, f64)> {
    let r = pullback::archimedean_i_numeric(l, m, num_complex::Complex64::new(re, im)).map_err(py_err)?;
    Ok(r.value)
}

/// Direct coset sum at a point (the E* translate).
#[pyfunction]
fn direct_series(spec: &PySpec, point: &str, height: u64) -> PyResult<(f64, f64)> {
    let z = eisenstein::parse_point(point).map_err(py_err)?;
    let r = eisenstein::direct_series_numeric(&spec.inner, &z, height, Translate::Iota).map_err(py_err)?;
    Ok((r.re, r.im))
}

/// Run the `eis` command line in-process; returns its exit status.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    cli::main_with_args(std::iter::once("eis".to_string()).chain(args))
}

#[pymodule]
fn pysiegel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCharacter>()?;
    m.add_class::<PySpec>()?;
    m.add_class::<PyExpansion>()?;
    m.add_function(wrap_pyfunction!(build_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(raise_expansion, m)?)?;
    m.add_function(wrap_pyfunction!(pullback_check, m)?)?;
    m.add_function(wrap_pyfunction!(kitaoka_bp, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_bp, m)?)?;
    m.add_function(wrap_pyfunction!(f_poly, m)?)?;
    m.add_function(wrap_pyfunction!(archimedean_i, m)?)?;
    m.add_function(wrap_pyfunction!(direct_series, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
