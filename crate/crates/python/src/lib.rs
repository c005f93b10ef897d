//! Python bindings: image I/O, metric scoring, norms, descriptors,
//! subjective-score processing and the correlation statistics.

use std::collections::BTreeMap;

use advfid_core::descriptors::ContentDescriptor;
use advfid_core::stats;
use advfid_core::subjective::{self, SubjectScoreMatrix};
use advfid_core::{MetricId, ScoreValue, Scorer};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: advfid_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_f64(v: ScoreValue) -> f64 {
    v.finite().unwrap_or(f64::INFINITY)
}

/// An 8-bit grayscale or RGB raster.
#[pyclass(name = "Image", module = "advfid", frozen)]
struct PyImage {
    inner: advfid_core::Image,
}

#[pymethods]
impl PyImage {
    /// Wraps interleaved samples (`channels` is 1 or 3).
    #[new]
    fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> PyResult<Self> {
        let inner = advfid_core::Image::new(width, height, channels, samples).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Decodes a PNG or BMP file.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let inner = advfid_core::load_image(&path).map_err(py_err)?;
        Ok(Self { inner })
    }

    fn save_png(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save_png(&path).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    /// Interleaved samples as `bytes`.
    fn samples<'py>(&self, py: Python<'py>) -> Bound<'py, pyo3::types::PyBytes> {
        pyo3::types::PyBytes::new(py, self.inner.samples())
    }

    fn __repr__(&self) -> String {
        format!(
            "Image({}x{}x{})",
            self.inner.width(),
            self.inner.height(),
            self.inner.channels()
        )
    }
}

fn parse_metric(name: &str) -> PyResult<MetricId> {
    name.parse().map_err(py_err)
}

/// Names of every metric this build can compute.
#[pyfunction]
fn metric_names() -> Vec<&'static str> {
    let scorer = Scorer::default();
    MetricId::ALL
        .into_iter()
        .filter(|m| scorer.is_enabled(*m))
        .map(MetricId::name)
        .collect()
}

/// Scores one metric; unbounded perfect scores come back as `inf`.
#[pyfunction]
fn score(reference: &PyImage, test: &PyImage, metric: &str) -> PyResult<f64> {
    let m = parse_metric(metric)?;
    let s = Scorer::default()
        .score("", m, &reference.inner, &test.inner)
        .map_err(py_err)?;
    Ok(to_f64(s.value))
}

/// Scores several metrics (all enabled ones by default) into a dict.
#[pyfunction]
#[pyo3(signature = (reference, test, metrics=None))]
fn score_all(
    reference: &PyImage,
    test: &PyImage,
    metrics: Option<Vec<String>>,
) -> PyResult<BTreeMap<String, f64>> {
    let scorer = Scorer::default();
    let ids: Vec<MetricId> = match metrics {
        Some(names) => names
            .iter()
            .map(|n| parse_metric(n))
            .collect::<PyResult<_>>()?,
        None => MetricId::ALL
            .into_iter()
            .filter(|m| scorer.is_enabled(*m))
            .collect(),
    };
    ids.into_iter()
        .map(|m| {
            let s = scorer
                .score("", m, &reference.inner, &test.inner)
                .map_err(py_err)?;
            Ok((m.name().to_string(), to_f64(s.value)))
        })
        .collect()
}

/// `(L0, L2, Linf)` with intensities scaled to [0, 1].
#[pyfunction]
fn norms(reference: &PyImage, test: &PyImage) -> PyResult<(usize, f64, f64)> {
    let (a, b) = (&reference.inner, &test.inner);
    use advfid_core::norms::{l0_norm, l2_norm, linf_norm};
    Ok((
        l0_norm(a, b).map_err(py_err)?,
        l2_norm(a, b).map_err(py_err)?,
        linf_norm(a, b).map_err(py_err)?,
    ))
}

/// `(si, cf)`; `cf` is `None` for grayscale images.
#[pyfunction]
fn descriptors(image: &PyImage) -> PyResult<(f64, Option<f64>)> {
    let d = ContentDescriptor::compute("", &image.inner).map_err(py_err)?;
    Ok((d.si, d.cf))
}

fn matrix(rows: Vec<Vec<u8>>) -> PyResult<SubjectScoreMatrix> {
    let n = rows.first().map_or(0, Vec::len);
    let subjects = (1..=n).map(|i| format!("subject_{i}")).collect();
    let stimuli = (1..=rows.len()).map(|j| format!("stimulus_{j}")).collect();
    SubjectScoreMatrix::new(subjects, stimuli, rows).map_err(py_err)
}

/// `rows[j][i]` is subject `i`'s 1..5 rating of stimulus `j`. Returns one
/// `(mos, ci95)` per stimulus, without screening.
#[pyfunction]
fn mos(rows: Vec<Vec<u8>>) -> PyResult<Vec<(f64, f64)>> {
    Ok(subjective::mos(&matrix(rows)?)
        .into_iter()
        .map(|r| (r.mos, r.ci95))
        .collect())
}

/// Zero-based indices of the subjects rejected by the screening rule.
#[pyfunction]
fn screen_outliers(rows: Vec<Vec<u8>>) -> PyResult<Vec<usize>> {
    let out = subjective::screen_outliers(&matrix(rows)?).map_err(py_err)?;
    Ok(out
        .tallies
        .iter()
        .enumerate()
        .filter(|(_, t)| t.rejected)
        .map(|(i, _)| i)
        .collect())
}

/// Fits the 5-parameter logistic. Returns `(beta, residual_rmse, converged)`.
#[pyfunction]
fn fit_logistic(x: Vec<f64>, y: Vec<f64>) -> PyResult<([f64; 5], f64, bool)> {
    let (p, d) = stats::fit_logistic5(&x, &y).map_err(py_err)?;
    Ok((p.beta, d.residual_rmse, d.converged))
}

/// Evaluates a fitted logistic at each `x`.
#[pyfunction]
fn logistic(beta: [f64; 5], x: Vec<f64>) -> Vec<f64> {
    stats::LogisticParams { beta }.eval_all(&x)
}

#[pyfunction]
fn plcc(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::plcc(&x, &y).map_err(py_err)
}

#[pyfunction]
fn srocc(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::srocc(&x, &y).map_err(py_err)
}

#[pyfunction]
fn rmse(pred: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    stats::rmse(&pred, &y).map_err(py_err)
}

#[pymodule]
fn advfid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_function(wrap_pyfunction!(metric_names, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(score_all, m)?)?;
    m.add_function(wrap_pyfunction!(norms, m)?)?;
    m.add_function(wrap_pyfunction!(descriptors, m)?)?;
    m.add_function(wrap_pyfunction!(mos, m)?)?;
    m.add_function(wrap_pyfunction!(screen_outliers, m)?)?;
    m.add_function(wrap_pyfunction!(fit_logistic, m)?)?;
    m.add_function(wrap_pyfunction!(logistic, m)?)?;
    m.add_function(wrap_pyfunction!(plcc, m)?)?;
    m.add_function(wrap_pyfunction!(srocc, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    Ok(())
}
