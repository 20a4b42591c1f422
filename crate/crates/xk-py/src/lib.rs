use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use xk::engine::{analysis_json, stage_matrix, values, Point};
use xk::norms::{mt_norm as mt_norm_dp, sup_norm_interval, MTLevel, MTParams};
use xk::rational::{fmt_q, parse_q};
use xk::registry::record_json;
use xk::spaces::{Manifest, NetPolicy, DEFAULT_STAGE_CAP};
use xk::suites::{admissible_prefix, run_suite as run_named, SuiteConfig};
use xk::{Certificate, Func, GammaId, OddGuard, ParameterSchedule, Registry, Which};

fn err(e: xk::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn coords(v: &BTreeMap<GammaId, xk::Q>) -> Vec<(u32, String)> {
    v.iter().map(|(g, c)| (g.0, fmt_q(c))).collect()
}

fn func_pairs(f: &Func) -> Vec<(u32, String)> {
    coords(f.entries())
}

#[pyclass(name = "Schedule", frozen)]
struct PySchedule(ParameterSchedule);

#[pymethods]
impl PySchedule {
    #[new]
    fn new(m: Vec<u64>, n: Vec<u64>) -> PyResult<Self> {
        ParameterSchedule::from_u64(&m, &n).map(PySchedule).map_err(err)
    }

    #[staticmethod]
    fn toy_small() -> Self {
        PySchedule(ParameterSchedule::toy_small())
    }

    #[staticmethod]
    fn toy_linear(len: usize) -> Self {
        PySchedule(ParameterSchedule::toy_linear(len))
    }

    #[staticmethod]
    fn admissible_prefix() -> Self {
        PySchedule(admissible_prefix())
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode().as_str()
    }

    #[getter]
    fn theta(&self) -> String {
        fmt_q(self.0.theta())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }
}

#[pyclass(name = "Point", frozen)]
struct PyPoint(Point);

#[pymethods]
impl PyPoint {
    #[new]
    fn new(d: Vec<(u32, String)>) -> PyResult<Self> {
        let mut out = Vec::with_capacity(d.len());
        for (g, c) in d {
            out.push((GammaId(g), parse_q(&c).map_err(err)?));
        }
        Ok(PyPoint(Point::from_d(out)))
    }

    fn d(&self) -> Vec<(u32, String)> {
        coords(self.0.d_coords())
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }
}

#[pyclass(name = "Registry", frozen)]
struct PyRegistry(Registry);

#[pymethods]
impl PyRegistry {
    #[staticmethod]
    #[pyo3(signature = (schedule, stage, net = "units", discipline = "XK", waive_odd_guard = false, cap = DEFAULT_STAGE_CAP))]
    fn generate(
        schedule: &PySchedule,
        stage: u32,
        net: &str,
        discipline: &str,
        waive_odd_guard: bool,
        cap: usize,
    ) -> PyResult<Self> {
        let net: NetPolicy = net.parse().map_err(err)?;
        let which = match discipline {
            "XK" | "xk" => Which::XK,
            "BmT" | "bmt" => Which::BmT,
            other => return Err(PyValueError::new_err(format!("unknown discipline {other:?}"))),
        };
        let guard = if waive_odd_guard { OddGuard::Waive } else { OddGuard::Enforce };
        let mut m = Manifest::new(schedule.0.clone(), which, net, guard, stage);
        m.cap = cap;
        m.build().map(PyRegistry).map_err(err)
    }

    #[staticmethod]
    fn from_manifest(json: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Manifest::from_json(&v).and_then(|m| m.build()).map(PyRegistry).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn stage(&self) -> u32 {
        self.0.generated_stage()
    }

    fn delta(&self, q: u32) -> Vec<u32> {
        self.0.delta(q).iter().map(|g| g.0).collect()
    }

    fn record(&self, g: u32) -> PyResult<String> {
        self.0.record(GammaId(g)).map(|r| record_json(r).to_string()).map_err(err)
    }

    fn c_star(&self, g: u32) -> PyResult<Vec<(u32, String)>> {
        self.0.c_star(GammaId(g)).map(func_pairs).map_err(err)
    }

    fn d_star(&self, g: u32) -> PyResult<Vec<(u32, String)>> {
        self.0.d_star(GammaId(g)).map(func_pairs).map_err(err)
    }

    fn analysis(&self, g: u32) -> PyResult<String> {
        xk::engine::evaluation_analysis(&self.0, GammaId(g)).map(|rows| analysis_json(&rows).to_string()).map_err(err)
    }

    /// `(pairs_checked, failures)` of the biorthogonality check on `Γ_stage`.
    fn biorthogonality(&self, stage: u32) -> PyResult<(u64, usize)> {
        let rep = stage_matrix(&self.0, stage).map_err(err)?.biorthogonality(&self.0);
        Ok((rep.pairs_checked, rep.failures.len()))
    }

    fn values(&self, x: &PyPoint, stage: u32) -> PyResult<Vec<(u32, String)>> {
        values(&self.0, &x.0, stage).map(|v| coords(&v)).map_err(err)
    }

    fn norm_interval(&self, x: &PyPoint, stage: u32) -> PyResult<(String, String)> {
        let ni = sup_norm_interval(&self.0, &x.0, stage).map_err(err)?;
        Ok((fmt_q(&ni.lower), fmt_q(&ni.upper)))
    }
}

#[pyclass(name = "Certificate", frozen)]
struct PyCertificate(Certificate);

#[pymethods]
impl PyCertificate {
    #[getter]
    fn claim_id(&self) -> &str {
        &self.0.claim_id
    }

    #[getter]
    fn verdict(&self) -> &'static str {
        self.0.verdict.as_str()
    }

    #[getter]
    fn values(&self) -> BTreeMap<String, String> {
        self.0.values.clone()
    }

    fn to_json(&self) -> String {
        self.0.to_canonical()
    }

    fn __repr__(&self) -> String {
        format!("Certificate({:?}, {})", self.0.claim_id, self.0.verdict.as_str())
    }
}

/// Mixed Tsirelson norm; `levels` holds `(j, l, theta)`. Returns the value and the tree as JSON.
#[pyfunction]
#[pyo3(signature = (x, levels, excluded = None))]
fn mt_norm(x: Vec<(u64, String)>, levels: Vec<(usize, u64, String)>, excluded: Option<usize>) -> PyResult<(String, Option<String>)> {
    let mut v = BTreeMap::new();
    for (k, c) in x {
        v.insert(k, parse_q(&c).map_err(err)?);
    }
    let mut lv = Vec::new();
    for (j, l, t) in levels {
        lv.push(MTLevel { j, l, theta: parse_q(&t).map_err(err)? });
    }
    let params = MTParams::new(lv, excluded, "python").map_err(err)?;
    let (val, tree) = mt_norm_dp(&v, &params);
    Ok((fmt_q(&val), tree.map(|t| t.to_json().to_string())))
}

#[pyfunction]
#[pyo3(signature = (name, seed = 7, cases = 0, stage = 6))]
fn run_suite(py: Python<'_>, name: &str, seed: u64, cases: usize, stage: u32) -> PyResult<Vec<PyCertificate>> {
    let cfg = SuiteConfig { seed, cases, stage, ..SuiteConfig::default() };
    let out = py.detach(|| run_named(name, &cfg)).map_err(err)?;
    Ok(out.into_iter().map(PyCertificate).collect())
}

#[pymodule]
fn xk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySchedule>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyRegistry>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(mt_norm, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("SUITES", xk::suites::SUITES.to_vec())?;
    Ok(())
}
