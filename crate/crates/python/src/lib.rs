//! Python bindings. Values cross the boundary as plain Python data: discrete
//! symbols as their labels (ints where the label is numeric), distributions as
//! nested lists shaped by the program's structural mappings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde_json::Value;

use ised::blackbox::{builtin, decode_value, encode_value};
use ised::estimator::{self, EstimateResult, SampleSummary};
use ised::experiment::{self, ExperimentConfig};
use ised::mapping::{DistValue, Semiring, SetValue, StructuralMapping};
use ised::sampler::RandomnessKey;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(value_err)
}

fn from_json<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn dist_from_json(m: &StructuralMapping, v: &Value) -> Result<DistValue, String> {
    let bad = || format!("distribution does not fit {m}");
    let row = |v: &Value| -> Result<Vec<f64>, String> {
        v.as_array().ok_or_else(bad)?.iter().map(|x| x.as_f64().ok_or_else(bad)).collect()
    };
    let items = || v.as_array().ok_or_else(bad);
    let d = match m {
        StructuralMapping::Discrete { .. } => DistValue::Discrete(row(v)?),
        StructuralMapping::Permutation { .. } => DistValue::Perm(items()?.iter().map(row).collect::<Result<_, _>>()?),
        StructuralMapping::Tuple { members } => DistValue::Tuple(
            members
                .iter()
                .zip(items()?)
                .map(|(mm, x)| dist_from_json(mm, x))
                .collect::<Result<_, _>>()?,
        ),
        StructuralMapping::List { element, .. } => {
            DistValue::List(items()?.iter().map(|x| dist_from_json(element, x)).collect::<Result<_, _>>()?)
        }
        StructuralMapping::Float => return Err("Float inputs have no distribution".into()),
    };
    d.check_shape(m).map_err(|e| e.to_string())?;
    Ok(d)
}

fn dist_to_json(d: &DistValue) -> Value {
    match d {
        DistValue::Discrete(r) => Value::from(r.clone()),
        DistValue::Perm(rows) => Value::from(rows.clone()),
        DistValue::Tuple(ds) | DistValue::List(ds) => Value::Array(ds.iter().map(dist_to_json).collect()),
    }
}

/// Labels that read as integers come back as ints.
fn numeric_labels(v: Value) -> Value {
    match v {
        Value::String(s) => s.parse::<i64>().map_or(Value::String(s), Value::from),
        Value::Array(xs) => Value::Array(xs.into_iter().map(numeric_labels).collect()),
        other => other,
    }
}

fn value_from_py(m: &StructuralMapping, obj: &Bound<'_, PyAny>) -> PyResult<SetValue> {
    let j = to_json(obj)?;
    decode_value(m, &j).ok_or_else(|| value_err(format!("{j} is not a value of {m}")))
}

fn value_to_py<'py>(py: Python<'py>, m: &StructuralMapping, v: &SetValue) -> PyResult<Bound<'py, PyAny>> {
    let j = encode_value(m, v).ok_or_else(|| value_err("value does not fit its mapping"))?;
    from_json(py, &numeric_labels(j))
}

fn semiring(name: &str) -> PyResult<Semiring> {
    name.parse().map_err(value_err)
}

/// A black-box program with typed inputs and output.
#[pyclass(name = "Program", frozen)]
struct PyProgram {
    inner: ised::Program,
}

#[pymethods]
impl PyProgram {
    /// One of the built-in benchmark programs, e.g. `sum2` or `hwf`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        builtin(name).map(|inner| PyProgram { inner }).map_err(value_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.inner.input_mappings().iter().map(|m| m.to_string()).collect()
    }

    #[getter]
    fn output(&self) -> String {
        self.inner.output_mapping().to_string()
    }

    #[getter]
    fn call_count(&self) -> u64 {
        self.inner.call_count()
    }

    /// Runs the program; raises ValueError when it rejects the inputs.
    fn __call__<'py>(&self, py: Python<'py>, inputs: Vec<Bound<'py, PyAny>>) -> PyResult<Bound<'py, PyAny>> {
        let ms = self.inner.input_mappings();
        if inputs.len() != ms.len() {
            return Err(value_err(format!("expected {} inputs, got {}", ms.len(), inputs.len())));
        }
        let vs = ms.iter().zip(&inputs).map(|(m, o)| value_from_py(m, o)).collect::<PyResult<Vec<_>>>()?;
        let y = self.inner.evaluate(&vs).map_err(value_err)?;
        value_to_py(py, self.inner.output_mapping(), &y)
    }

    fn __repr__(&self) -> String {
        format!("Program({:?})", self.inner.name())
    }
}

impl PyProgram {
    fn p_hat(&self, p_hat: &Bound<'_, PyAny>) -> PyResult<Vec<DistValue>> {
        let j = to_json(p_hat)?;
        let items = j.as_array().ok_or_else(|| value_err("p_hat must be a list, one entry per input"))?;
        let ms = self.inner.input_mappings();
        if items.len() != ms.len() {
            return Err(value_err(format!("expected {} distributions, got {}", ms.len(), items.len())));
        }
        ms.iter().zip(items).map(|(m, x)| dist_from_json(m, x).map_err(value_err)).collect()
    }
}

type Sample<'py> = (Vec<Bound<'py, PyAny>>, Option<Bound<'py, PyAny>>);

/// Sampled input tuples and the program outputs they produced.
#[pyclass(name = "Summary", frozen)]
struct PySummary {
    inner: SampleSummary,
    output: StructuralMapping,
}

#[pymethods]
impl PySummary {
    /// Draws `k` tuples under the key `(seed, example)`.
    #[staticmethod]
    #[pyo3(signature = (program, p_hat, k, seed=0, example=0))]
    fn draw(program: &PyProgram, p_hat: &Bound<'_, PyAny>, k: usize, seed: u64, example: u64) -> PyResult<Self> {
        let inner = SampleSummary::draw(&program.inner, program.p_hat(p_hat)?, k, RandomnessKey::example(seed, example))
            .map_err(value_err)?;
        Ok(PySummary { inner, output: program.inner.output_mapping().clone() })
    }

    /// Every tuple of the support once, as if sampling had enumerated it.
    #[staticmethod]
    fn exhaustive(program: &PyProgram, p_hat: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = estimator::exhaustive_summary(&program.inner, program.p_hat(p_hat)?, estimator::DEFAULT_INPUT_BOUND)
            .map_err(value_err)?;
        Ok(PySummary { inner, output: program.inner.output_mapping().clone() })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    /// `(inputs, output)` per sample; failed evaluations give `None`.
    fn samples<'py>(&self, py: Python<'py>) -> PyResult<Vec<Sample<'py>>> {
        self.inner
            .r_hat
            .iter()
            .zip(&self.inner.y_hat)
            .map(|(r, y)| {
                let ins = self
                    .inner
                    .input_mappings
                    .iter()
                    .zip(r)
                    .map(|(m, v)| value_to_py(py, m, v))
                    .collect::<PyResult<Vec<_>>>()?;
                let out = match y {
                    Ok(v) => Some(value_to_py(py, &self.output, v)?),
                    Err(_) => None,
                };
                Ok((ins, out))
            })
            .collect()
    }
}

impl PySummary {
    fn target(&self, y: &Bound<'_, PyAny>) -> PyResult<SetValue> {
        value_from_py(&self.output, y)
    }
}

fn estimate_dict<'py>(py: Python<'py>, r: EstimateResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("w_tilde", r.w_tilde)?;
    d.set_item("w_hat", r.w_hat)?;
    d.set_item("w", r.w)?;
    d.set_item("loss", r.loss)?;
    if let Some(g) = r.grad_p_hat {
        d.set_item("grad", from_json(py, &Value::Array(g.iter().map(dist_to_json).collect()))?)?;
    }
    Ok(d)
}

/// ISED loss for one example: keys `w_tilde`, `w_hat`, `w`, `loss`.
#[pyfunction]
#[pyo3(signature = (summary, y, semiring="add-mult"))]
fn ised_forward<'py>(py: Python<'py>, summary: &PySummary, y: &Bound<'py, PyAny>, semiring: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = estimator::ised_forward(&summary.inner, &summary.output, self::semiring(semiring)?, &summary.target(y)?)
        .map_err(value_err)?;
    estimate_dict(py, r)
}

/// As [`ised_forward`] plus `grad`, the gradient of the loss in `p_hat`.
#[pyfunction]
#[pyo3(signature = (summary, y, semiring="add-mult"))]
fn ised_grad<'py>(py: Python<'py>, summary: &PySummary, y: &Bound<'py, PyAny>, semiring: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = estimator::ised_grad(&summary.inner, &summary.output, self::semiring(semiring)?, &summary.target(y)?)
        .map_err(value_err)?;
    estimate_dict(py, r)
}

/// REINFORCE on a summary: keys `objective`, `mean_reward`, `grad`.
#[pyfunction]
fn reinforce_grad<'py>(py: Python<'py>, summary: &PySummary, y: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let r = estimator::reinforce_grad(&summary.inner, &summary.target(y)?, None).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("objective", r.objective)?;
    d.set_item("mean_reward", r.mean_reward)?;
    d.set_item("grad", from_json(py, &Value::Array(r.grad_p_hat.iter().map(dist_to_json).collect()))?)?;
    Ok(d)
}

/// IndeCateR estimate of `-dE[reward]/dp_hat`: keys `grad`, `program_calls`.
#[pyfunction]
#[pyo3(signature = (program, p_hat, y, k, seed=0, example=0))]
fn indecater_grad<'py>(
    py: Python<'py>,
    program: &PyProgram,
    p_hat: &Bound<'py, PyAny>,
    y: &Bound<'py, PyAny>,
    k: usize,
    seed: u64,
    example: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let y = value_from_py(program.inner.output_mapping(), y)?;
    let r = estimator::indecater_grad(
        &program.p_hat(p_hat)?,
        &program.inner,
        &y,
        k,
        RandomnessKey::example(seed, example),
        None,
    )
    .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("grad", from_json(py, &Value::Array(r.grad_p_hat.iter().map(dist_to_json).collect()))?)?;
    d.set_item("program_calls", r.program_calls)?;
    Ok(d)
}

/// Exact probability of every output, in output enumeration order.
#[pyfunction]
fn exact_wmc(program: &PyProgram, p_hat: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    estimator::exact_wmc(&program.inner, &program.p_hat(p_hat)?).map_err(value_err)
}

/// Probability of the best single proof of every output.
#[pyfunction]
fn top1_proofs(program: &PyProgram, p_hat: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
    estimator::top1_proofs(&program.inner, &program.p_hat(p_hat)?).map_err(value_err)
}

/// A worked-example vector by case name (`ised-addmult`, `dpl`, ...).
#[pyfunction]
fn golden(case: &str) -> PyResult<Vec<f64>> {
    experiment::golden(case).map_err(value_err)
}

fn config(toml: Option<&str>) -> PyResult<ExperimentConfig> {
    toml.map_or_else(|| Ok(ExperimentConfig::default()), ExperimentConfig::from_toml).map_err(value_err)
}

/// Trains per the TOML config without writing files. Returns
/// `{"records": [...], "summary": {...}}`.
#[pyfunction]
#[pyo3(signature = (toml=None))]
fn execute<'py>(py: Python<'py>, toml: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(toml)?;
    let report = py.detach(|| experiment::execute(&cfg)).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let v = serde_json::json!({ "records": report.records, "summary": report.summary });
    from_json(py, &v)
}

/// Like [`execute`] but also writes the result files to the config's output
/// directory. Returns the summary.
#[pyfunction]
#[pyo3(signature = (toml=None))]
fn run<'py>(py: Python<'py>, toml: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(toml)?;
    let report = py.detach(|| experiment::run(&cfg)).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    from_json(py, &serde_json::to_value(&report.summary).map_err(value_err)?)
}

#[pymodule]
fn ised_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProgram>()?;
    m.add_class::<PySummary>()?;
    m.add_function(wrap_pyfunction!(ised_forward, m)?)?;
    m.add_function(wrap_pyfunction!(ised_grad, m)?)?;
    m.add_function(wrap_pyfunction!(reinforce_grad, m)?)?;
    m.add_function(wrap_pyfunction!(indecater_grad, m)?)?;
    m.add_function(wrap_pyfunction!(exact_wmc, m)?)?;
    m.add_function(wrap_pyfunction!(top1_proofs, m)?)?;
    m.add_function(wrap_pyfunction!(golden, m)?)?;
    m.add_function(wrap_pyfunction!(execute, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
