//! Python bindings for the pulse-sequence compiler and simulators.
//!
//! Build `libionsynth_py.so` with `cargo build -p ionsynth-py --release`,
//! rename/copy it to `ionsynth_py.so` somewhere on `sys.path`, and:
//!
//! ```text
//! import ionsynth_py as ion
//! trap = ion.TrapConfig()
//! target = ion.TargetSpec(1, 1, [(0, 1, 2**-0.5), (1, 0, 2**-0.5)])
//! seq = ion.plan(target, trap)
//! result = ion.simulate(target, trap, tier="ideal")
//! ```

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ionsynth::cli;
use ionsynth::coupling::{self, TrapConfig};
use ionsynth::fock::TargetSpec;
use ionsynth::planner::{self, Pulse, PulseSequence};
use ionsynth::simulator::{self, SimOptions, SimResult, SimTier};
use ionsynth::spectrum;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_tier(tier: &str) -> PyResult<SimTier> {
    tier.parse::<SimTier>().map_err(PyValueError::new_err)
}

/// Target coefficient table C[m][n] with phonon caps M, N.
#[pyclass(name = "TargetSpec", module = "ionsynth_py", skip_from_py_object)]
#[derive(Clone)]
struct PyTargetSpec {
    inner: TargetSpec,
}

#[pymethods]
impl PyTargetSpec {
    /// TargetSpec(M, N, coeffs) with coeffs a list of (m, n, complex)
    /// entries; absent entries are zero. The table must be normalized.
    #[new]
    fn new(m: usize, n: usize, coeffs: Vec<(usize, usize, Complex64)>) -> PyResult<Self> {
        let inner = TargetSpec::from_entries(m, n, &coeffs).map_err(value_err)?;
        Ok(PyTargetSpec { inner })
    }

    /// A random normalized target (complex Gaussian entries).
    #[staticmethod]
    fn random(m: usize, n: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        PyTargetSpec {
            inner: TargetSpec::random(m, n, &mut rng),
        }
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m_max()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n_max()
    }

    fn coeff(&self, m: usize, n: usize) -> Complex64 {
        self.inner.coeff(m, n)
    }

    fn __repr__(&self) -> String {
        format!("TargetSpec(M={}, N={})", self.inner.m_max(), self.inner.n_max())
    }
}

/// Trap and drive parameters (hbar = 1, frequencies in units of the base
/// coupling).
#[pyclass(name = "TrapConfig", module = "ionsynth_py", skip_from_py_object)]
#[derive(Clone)]
struct PyTrapConfig {
    inner: TrapConfig,
}

#[pymethods]
impl PyTrapConfig {
    #[new]
    #[pyo3(signature = (nu_x=None, nu_y=None, eta_x=None, eta_y=None, omega=None, omega_0=None, cap_margin=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        nu_x: Option<f64>,
        nu_y: Option<f64>,
        eta_x: Option<f64>,
        eta_y: Option<f64>,
        omega: Option<f64>,
        omega_0: Option<f64>,
        cap_margin: Option<usize>,
    ) -> PyResult<Self> {
        let d = TrapConfig::default();
        let inner = TrapConfig {
            nu_x: nu_x.unwrap_or(d.nu_x),
            nu_y: nu_y.unwrap_or(d.nu_y),
            eta_x: eta_x.unwrap_or(d.eta_x),
            eta_y: eta_y.unwrap_or(d.eta_y),
            omega_base: omega.unwrap_or(d.omega_base),
            omega_0: omega_0.unwrap_or(d.omega_0),
            cap_margin: cap_margin.unwrap_or(d.cap_margin),
        };
        inner.validate().map_err(value_err)?;
        Ok(PyTrapConfig { inner })
    }

    #[getter]
    fn nu_x(&self) -> f64 {
        self.inner.nu_x
    }

    #[getter]
    fn nu_y(&self) -> f64 {
        self.inner.nu_y
    }

    #[getter]
    fn eta_x(&self) -> f64 {
        self.inner.eta_x
    }

    #[getter]
    fn eta_y(&self) -> f64 {
        self.inner.eta_y
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega_base
    }

    #[getter]
    fn omega_0(&self) -> f64 {
        self.inner.omega_0
    }

    #[getter]
    fn cap_margin(&self) -> usize {
        self.inner.cap_margin
    }

    fn __repr__(&self) -> String {
        format!(
            "TrapConfig(nu_x={}, nu_y={}, eta_x={}, eta_y={}, omega={}, omega_0={}, cap_margin={})",
            self.inner.nu_x,
            self.inner.nu_y,
            self.inner.eta_x,
            self.inner.eta_y,
            self.inner.omega_base,
            self.inner.omega_0,
            self.inner.cap_margin
        )
    }
}

/// One laser operation of a compiled sequence.
#[pyclass(name = "Pulse", module = "ionsynth_py", skip_from_py_object)]
#[derive(Clone)]
struct PyPulse {
    inner: Pulse,
}

#[pymethods]
impl PyPulse {
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn detuning(&self) -> f64 {
        self.inner.detuning
    }

    #[getter]
    fn laser_phase(&self) -> f64 {
        self.inner.laser_phase
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration
    }

    #[getter]
    fn coeff(&self) -> Complex64 {
        self.inner.target_coeff
    }

    fn __repr__(&self) -> String {
        format!(
            "Pulse(m={}, n={}, duration={:.6}, laser_phase={:.6})",
            self.inner.m, self.inner.n, self.inner.duration, self.inner.laser_phase
        )
    }
}

/// Ordered pulse program.
#[pyclass(name = "PulseSequence", module = "ionsynth_py", skip_from_py_object)]
#[derive(Clone)]
struct PyPulseSequence {
    inner: PulseSequence,
}

#[pymethods]
impl PyPulseSequence {
    #[getter]
    fn pulses(&self) -> Vec<PyPulse> {
        self.inner
            .pulses
            .iter()
            .map(|p| PyPulse { inner: *p })
            .collect()
    }

    /// Diagonal positions skipped for zero coefficients.
    #[getter]
    fn skipped(&self) -> Vec<(usize, usize)> {
        self.inner.skipped.iter().map(|s| (s.m, s.n)).collect()
    }

    fn total_duration(&self) -> f64 {
        self.inner.total_duration()
    }

    /// JSON array of the pulses (bit-exact round trip).
    fn to_json(&self) -> String {
        self.inner.pulses_to_json()
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        PulseSequence::pulses_from_json(json)
            .map(|inner| PyPulseSequence { inner })
            .map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.pulses.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PulseSequence({} pulses, {} skipped)",
            self.inner.pulses.len(),
            self.inner.skipped.len()
        )
    }
}

/// Outcome of executing a sequence at one tier.
#[pyclass(name = "SimResult", module = "ionsynth_py")]
struct PySimResult {
    inner: SimResult,
}

#[pymethods]
impl PySimResult {
    #[getter]
    fn tier(&self) -> String {
        self.inner.tier.to_string()
    }

    #[getter]
    fn fidelity(&self) -> f64 {
        self.inner.fidelity
    }

    /// List of (pulse index, norm, overlap with target so far).
    #[getter]
    fn per_pulse_trace(&self) -> Vec<(usize, f64, f64)> {
        self.inner
            .per_pulse_trace
            .iter()
            .map(|t| (t.pulse, t.norm, t.overlap))
            .collect()
    }

    /// Nonzero final amplitudes as (level, n_x, n_y, amplitude).
    #[getter]
    fn final_state(&self) -> Vec<(String, usize, usize, Complex64)> {
        self.inner
            .final_state
            .iter()
            .filter(|(_, _, _, a)| a.norm_sqr() > 0.0)
            .map(|(level, nx, ny, a)| {
                let name = match level {
                    ionsynth::ElectronicLevel::G1 => "g1".to_string(),
                    ionsynth::ElectronicLevel::G2 => "g2".to_string(),
                };
                (name, nx, ny, a)
            })
            .collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    /// (steps, max error estimate) of the integrator, full tier only.
    #[getter]
    fn integrator_stats(&self) -> Option<(u64, f64)> {
        self.inner
            .integrator_stats
            .map(|s| (s.steps, s.max_error_estimate))
    }

    fn __repr__(&self) -> String {
        format!(
            "SimResult(tier={}, fidelity={:.12})",
            self.inner.tier, self.inner.fidelity
        )
    }
}

/// Compile a target into its pulse sequence.
#[pyfunction]
#[pyo3(signature = (target, trap, zero_tol=planner::DEFAULT_ZERO_TOL))]
fn plan(target: &PyTargetSpec, trap: &PyTrapConfig, zero_tol: f64) -> PyResult<PyPulseSequence> {
    planner::plan(&target.inner, &trap.inner, zero_tol)
        .map(|inner| PyPulseSequence { inner })
        .map_err(value_err)
}

/// Plan and execute at one tier ("ideal", "resonant" or "full").
#[pyfunction]
#[pyo3(signature = (target, trap, tier="ideal", zero_tol=planner::DEFAULT_ZERO_TOL, gap=0.0))]
fn simulate(
    target: &PyTargetSpec,
    trap: &PyTrapConfig,
    tier: &str,
    zero_tol: f64,
    gap: f64,
) -> PyResult<PySimResult> {
    let tier = parse_tier(tier)?;
    let seq = planner::plan(&target.inner, &trap.inner, zero_tol).map_err(value_err)?;
    let opts = SimOptions {
        inter_pulse_gap: gap,
        ..SimOptions::default()
    };
    simulator::run_sequence(&seq, &target.inner, &trap.inner, tier, &opts)
        .map(|inner| PySimResult { inner })
        .map_err(runtime_err)
}

/// Execute an existing pulse sequence against a target.
#[pyfunction]
#[pyo3(signature = (sequence, target, trap, tier="ideal", gap=0.0))]
fn run_pulses(
    sequence: &PyPulseSequence,
    target: &PyTargetSpec,
    trap: &PyTrapConfig,
    tier: &str,
    gap: f64,
) -> PyResult<PySimResult> {
    let tier = parse_tier(tier)?;
    let opts = SimOptions {
        inter_pulse_gap: gap,
        ..SimOptions::default()
    };
    simulator::run_sequence(&sequence.inner, &target.inner, &trap.inner, tier, &opts)
        .map(|inner| PySimResult { inner })
        .map_err(runtime_err)
}

/// Exact sideband coupling (magnitude, phase) between |g2,k,l> and
/// |g1,k+m,l+n>.
#[pyfunction]
#[pyo3(signature = (m, n, trap, k=0, l=0, laser_phase=0.0))]
fn rabi_exact(
    m: usize,
    n: usize,
    trap: &PyTrapConfig,
    k: usize,
    l: usize,
    laser_phase: f64,
) -> (f64, f64) {
    let c = coupling::rabi_exact(m, n, k, l, &trap.inner, laser_phase);
    (c.magnitude, c.phase)
}

/// Leading-order Lamb-Dicke coupling (magnitude, phase); omits the
/// sqrt(m! n!) Fock factor.
#[pyfunction]
#[pyo3(signature = (m, n, trap, laser_phase=0.0))]
fn rabi_leading_order(m: usize, n: usize, trap: &PyTrapConfig, laser_phase: f64) -> (f64, f64) {
    let c = coupling::rabi_leading_order(m, n, &trap.inner, laser_phase);
    (c.magnitude, c.phase)
}

/// The (m, n) visit order: anti-diagonals of increasing m + n.
#[pyfunction]
fn diagonal_order(total: usize) -> Vec<(usize, usize)> {
    planner::diagonal_order(total)
        .into_iter()
        .map(|i| (i.m, i.n))
        .collect()
}

/// Operation counts of published schemes for caps (M, N).
#[pyfunction]
fn scheme_comparison(py: Python<'_>, m: usize, n: usize) -> PyResult<Py<PyDict>> {
    let t = planner::scheme_comparison(m, n);
    let d = PyDict::new(py);
    d.set_item("gardiner", t.gardiner)?;
    d.set_item("kneer_law", t.kneer_law)?;
    d.set_item("drobny", t.drobny)?;
    d.set_item("zheng", t.zheng)?;
    d.set_item("this_work", t.this_work)?;
    Ok(d.into())
}

/// Sideband lines (m, n, frequency) sorted by frequency.
#[pyfunction]
#[pyo3(signature = (trap, m, n, margin=0))]
fn enumerate_lines(
    trap: &PyTrapConfig,
    m: usize,
    n: usize,
    margin: usize,
) -> Vec<(usize, usize, f64)> {
    spectrum::enumerate_lines(&trap.inner, m, n, margin)
        .into_iter()
        .map(|l| (l.m, l.n, l.frequency))
        .collect()
}

/// Trap-anisotropy and line-separation feasibility report.
#[pyfunction]
#[pyo3(signature = (trap, m, n, min_gap=None))]
fn check_separation(
    py: Python<'_>,
    trap: &PyTrapConfig,
    m: usize,
    n: usize,
    min_gap: Option<f64>,
) -> PyResult<Py<PyDict>> {
    let min_gap = min_gap.unwrap_or_else(|| spectrum::default_min_gap(&trap.inner));
    let r = spectrum::check_separation(&trap.inner, m, n, min_gap);
    let d = PyDict::new(py);
    d.set_item("anisotropy_ratio", r.anisotropy_ratio)?;
    d.set_item("required_ratio", r.required_ratio)?;
    d.set_item("anisotropy_ok", r.anisotropy_ok)?;
    d.set_item("min_gap_protocol", r.min_gap_protocol)?;
    d.set_item("min_gap_with_margin", r.min_gap_with_margin)?;
    d.set_item("min_gap", r.min_gap)?;
    type Collision = ((usize, usize), (usize, usize), f64);
    let collisions: Vec<Collision> = r.collisions.iter().map(|c| (c.a, c.b, c.gap)).collect();
    d.set_item("collisions", collisions)?;
    Ok(d.into())
}

/// Random-target self-test; returns a summary dict with a "passed" flag.
#[pyfunction]
#[pyo3(signature = (m, n, trials=50, seed=7, trap=None))]
fn selftest(
    py: Python<'_>,
    m: usize,
    n: usize,
    trials: u64,
    seed: u64,
    trap: Option<&PyTrapConfig>,
) -> PyResult<Py<PyDict>> {
    let default_trap = TrapConfig::default();
    let trap = trap.map(|t| &t.inner).unwrap_or(&default_trap);
    let r = cli::selftest(m, n, trials, seed, trap, false).map_err(runtime_err)?;
    let d = PyDict::new(py);
    d.set_item("passed", r.passed())?;
    d.set_item("trials", r.trials)?;
    d.set_item("max_ideal_infidelity", r.max_ideal_infidelity)?;
    d.set_item("max_tier_disagreement", r.max_tier_disagreement)?;
    d.set_item("max_pulse_count", r.max_pulse_count)?;
    let failures: Vec<(u64, String)> = r
        .failures
        .iter()
        .map(|f| (f.trial, f.detail.clone()))
        .collect();
    d.set_item("failures", failures)?;
    Ok(d.into())
}

#[pymodule]
fn ionsynth_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTargetSpec>()?;
    m.add_class::<PyTrapConfig>()?;
    m.add_class::<PyPulse>()?;
    m.add_class::<PyPulseSequence>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_pulses, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_exact, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_leading_order, m)?)?;
    m.add_function(wrap_pyfunction!(diagonal_order, m)?)?;
    m.add_function(wrap_pyfunction!(scheme_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_lines, m)?)?;
    m.add_function(wrap_pyfunction!(check_separation, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
