//! Execute pulse sequences at three fidelity tiers.
//!
//! * `Ideal` — analytic two-level rotation of the `{|g_2,0,0>, |g_1,m,n>}`
//!   pair; valid while all `|g_2>` population sits in the motional ground
//!   state, which the diagonal pulse ordering guarantees.
//! * `Resonant` — exact evolution under the resonant sideband Hamiltonian,
//!   evaluated as independent 2x2 block rotations over every coupled pair
//!   `{|g_2,k,l>, |g_1,k+m,l+n>}` (the Hamiltonian is block-diagonal, so no
//!   general matrix exponential is needed).
//! * `Full` — numerical integration of the time-dependent interaction with
//!   every sideband block present, which exposes the off-resonant terms the
//!   rotating-wave approximation discards.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::{build_full_interaction, coupling_amplitude, FullInteraction, TrapConfig};
use crate::error::Error;
use crate::fock::{ElectronicLevel, StateVector, TargetSpec};
use crate::planner::{Pulse, PulseSequence};

/// `|g_2>` population allowed outside `|0,0>` before the analytic tier
/// refuses to apply (the pair-rotation relations would not hold).
pub const PROTOCOL_TOL: f64 = 1e-12;

/// Unpaired `|g_2>` population above this gets a truncation-leak warning.
const LEAK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimTier {
    Ideal,
    Resonant,
    Full,
}

impl fmt::Display for SimTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimTier::Ideal => write!(f, "ideal"),
            SimTier::Resonant => write!(f, "resonant"),
            SimTier::Full => write!(f, "full"),
        }
    }
}

impl FromStr for SimTier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ideal" => Ok(SimTier::Ideal),
            "resonant" => Ok(SimTier::Resonant),
            "full" => Ok(SimTier::Full),
            other => Err(format!("unknown tier '{other}' (ideal|resonant|full)")),
        }
    }
}

/// Step control for the full-model integrator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorOpts {
    /// Initial steps per period of the fastest rotating entry.
    pub steps_per_period: f64,
    /// Accept once the fidelity between successive step-halved solutions
    /// changes by less than this.
    pub fidelity_tol: f64,
    /// Norm drift above this is a hard divergence.
    pub norm_drift_limit: f64,
    /// Smallest permitted step.
    pub min_step: f64,
}

impl Default for IntegratorOpts {
    fn default() -> Self {
        IntegratorOpts {
            steps_per_period: 8.0,
            fidelity_tol: 1e-8,
            norm_drift_limit: 1e-6,
            min_step: 1e-10,
        }
    }
}

/// Execution options shared by all tiers.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Idle time between consecutive pulses; free evolution contributes the
    /// known phases `exp(-i (m nu_x + n nu_y) gap)` on Fock amplitudes.
    pub inter_pulse_gap: f64,
    pub integrator: IntegratorOpts,
}

/// Per-pulse record: state norm and target overlap after the pulse.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PulseTrace {
    pub pulse: usize,
    pub norm: f64,
    pub overlap: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct IntegratorStats {
    /// Total integration steps across pulses and refinement passes.
    pub steps: u64,
    /// Largest accepted step-halving fidelity delta.
    pub max_error_estimate: f64,
    /// Number of step-halving refinements performed.
    pub refinements: u32,
}

/// Outcome of a sequence execution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimResult {
    pub tier: SimTier,
    /// `|<target x g_1 | final>|^2`.
    pub fidelity: f64,
    pub per_pulse_trace: Vec<PulseTrace>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub integrator_stats: Option<IntegratorStats>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    pub final_state: StateVector,
}

/// `|<a|b>|^2`, clamped into `[0, 1]`; global-phase invariant.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64, Error> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

fn g2_offsite_max(state: &StateVector) -> Option<(usize, usize, f64)> {
    state
        .iter()
        .filter(|(level, nx, ny, _)| {
            *level == ElectronicLevel::G2 && !(*nx == 0 && *ny == 0)
        })
        .map(|(_, nx, ny, a)| (nx, ny, a.norm_sqr()))
        .max_by(|x, y| x.2.total_cmp(&y.2))
        .filter(|&(_, _, pop)| pop > PROTOCOL_TOL)
}

/// Rotate the amplitude pair `(a, b)` coupled by the complex constant `w`
/// for time `t`: the transferred amplitude carries `-i e^{-i arg w}`.
fn rotate_pair(a: Complex64, b: Complex64, w: Complex64, t: f64) -> (Complex64, Complex64) {
    let theta = w.norm() * t;
    let (sin, cos) = theta.sin_cos();
    let dir = if w.norm() > 0.0 {
        w / w.norm()
    } else {
        Complex64::ONE
    };
    let i = Complex64::i();
    (
        cos * a - i * dir * sin * b,
        -i * dir.conj() * sin * a + cos * b,
    )
}

/// Analytic pair rotation of `{|g_2,0,0>, |g_1,m,n>}` (the idealized
/// single-sideband evolution). Errors if `|g_2>` amplitude exists outside
/// the motional ground state, where these relations do not apply.
pub fn apply_ideal(
    state: &StateVector,
    pulse: &Pulse,
    cfg: &TrapConfig,
) -> Result<StateVector, Error> {
    if let Some((nx, ny, population)) = g2_offsite_max(state) {
        return Err(Error::ProtocolInvariantViolation { nx, ny, population });
    }
    if pulse.m > state.cap_x() || pulse.n > state.cap_y() {
        return Err(Error::TruncationExceeded {
            nx: pulse.m,
            ny: pulse.n,
            cap_x: state.cap_x(),
            cap_y: state.cap_y(),
        });
    }
    let w = coupling_amplitude(pulse.m, pulse.n, 0, 0, cfg, pulse.laser_phase);
    let mut out = state.clone();
    let a = state.get(ElectronicLevel::G2, 0, 0);
    let b = state.get(ElectronicLevel::G1, pulse.m, pulse.n);
    let (a2, b2) = rotate_pair(a, b, w, pulse.duration);
    out.set(ElectronicLevel::G2, 0, 0, a2);
    out.set(ElectronicLevel::G1, pulse.m, pulse.n, b2);
    Ok(out)
}

/// Result of one resonant-tier pulse.
#[derive(Debug, Clone)]
pub struct ResonantStep {
    pub state: StateVector,
    /// `|g_2>` population sitting on pairs whose upper index would exceed
    /// the truncation; evolved as identity, which is only exact when zero.
    pub truncation_leak: f64,
}

/// Exact evolution under the resonant sideband Hamiltonian: independent
/// 2x2 rotations over every coupled pair.
pub fn apply_resonant(
    state: &StateVector,
    pulse: &Pulse,
    cfg: &TrapConfig,
) -> Result<ResonantStep, Error> {
    if pulse.m > state.cap_x() || pulse.n > state.cap_y() {
        return Err(Error::TruncationExceeded {
            nx: pulse.m,
            ny: pulse.n,
            cap_x: state.cap_x(),
            cap_y: state.cap_y(),
        });
    }
    let (cap_x, cap_y) = (state.cap_x(), state.cap_y());
    let mut out = state.clone();
    let mut truncation_leak = 0.0;
    for k in 0..=cap_x {
        for l in 0..=cap_y {
            if k + pulse.m > cap_x || l + pulse.n > cap_y {
                truncation_leak += state.get(ElectronicLevel::G2, k, l).norm_sqr();
                continue;
            }
            let w = coupling_amplitude(pulse.m, pulse.n, k, l, cfg, pulse.laser_phase);
            let a = state.get(ElectronicLevel::G2, k, l);
            let b = state.get(ElectronicLevel::G1, k + pulse.m, l + pulse.n);
            let (a2, b2) = rotate_pair(a, b, w, pulse.duration);
            out.set(ElectronicLevel::G2, k, l, a2);
            out.set(ElectronicLevel::G1, k + pulse.m, l + pulse.n, b2);
        }
    }
    Ok(ResonantStep {
        state: out,
        truncation_leak,
    })
}

/// Outcome bookkeeping of one full-model pulse.
#[derive(Debug, Clone, Copy)]
pub struct FullPulseOutcome {
    pub steps: u64,
    pub refinements: u32,
    pub error_estimate: f64,
    pub norm_drift: f64,
}

/// Integrate one pulse under the full time-dependent interaction with a
/// fixed-step classical 4th-order scheme; the step count doubles until the
/// fidelity between successive solutions moves by less than
/// `opts.fidelity_tol` (Richardson-style step-halving control).
pub fn apply_full(
    state: &StateVector,
    pulse: &Pulse,
    cfg: &TrapConfig,
    opts: &IntegratorOpts,
) -> Result<(StateVector, FullPulseOutcome), Error> {
    let caps = (state.cap_x(), state.cap_y());
    if pulse.duration == 0.0 {
        return Ok((
            state.clone(),
            FullPulseOutcome {
                steps: 0,
                refinements: 0,
                error_estimate: 0.0,
                norm_drift: 0.0,
            },
        ));
    }
    let interaction = build_full_interaction(cfg, pulse.detuning, pulse.laser_phase, caps);
    let cycles = interaction.max_frequency() / TAU * pulse.duration;
    let mut n: u64 = ((cycles * opts.steps_per_period).ceil() as u64).max(64);

    let mut total_steps: u64 = 0;
    let mut refinements: u32 = 0;
    let mut prev = rk4_run(state, &interaction, pulse.duration, n);
    total_steps += n;
    loop {
        let next = rk4_run(state, &interaction, pulse.duration, 2 * n);
        total_steps += 2 * n;
        let delta = solution_fidelity_delta(&prev.0, &next.0);
        let drift_ok = next.1 <= opts.norm_drift_limit;
        if drift_ok && delta < opts.fidelity_tol {
            let mut out = state.clone();
            out.amplitudes_mut().copy_from_slice(&next.0);
            out.normalize();
            return Ok((
                out,
                FullPulseOutcome {
                    steps: total_steps,
                    refinements,
                    error_estimate: delta,
                    norm_drift: next.1,
                },
            ));
        }
        n *= 2;
        refinements += 1;
        prev = next;
        if pulse.duration / ((2 * n) as f64) < opts.min_step {
            return Err(if drift_ok {
                Error::StepFloor {
                    step: pulse.duration / (2 * n) as f64,
                    min_step: opts.min_step,
                }
            } else {
                Error::IntegratorDiverged {
                    drift: prev.1,
                    limit: opts.norm_drift_limit,
                }
            });
        }
    }
}

/// `1 - |<a|b>|^2` between two (nearly unit) solution vectors.
fn solution_fidelity_delta(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    (1.0 - overlap.norm_sqr() / (na * nb)).abs()
}

/// One fixed-step RK4 pass over the pulse; entry phases advance by
/// recurrence (one rotor multiply per half step) and are re-anchored from
/// the exact `exp(i w t)` every 1024 steps. Returns the raw final
/// amplitudes and the norm drift.
fn rk4_run(
    state: &StateVector,
    interaction: &FullInteraction,
    duration: f64,
    n: u64,
) -> (Vec<Complex64>, f64) {
    let entries = interaction.entries();
    let phonon = interaction.phonon_dim();
    let dim = 2 * phonon;
    let h = duration / n as f64;

    let mut phases: Vec<Complex64> = vec![Complex64::ONE; entries.len()];
    let rot_half: Vec<Complex64> = entries
        .iter()
        .map(|e| Complex64::from_polar(1.0, e.freq * h / 2.0))
        .collect();

    let mut y = state.amplitudes().to_vec();
    let norm0 = state.norm();
    let mut k1 = vec![Complex64::ZERO; dim];
    let mut k2 = vec![Complex64::ZERO; dim];
    let mut k3 = vec![Complex64::ZERO; dim];
    let mut k4 = vec![Complex64::ZERO; dim];
    let mut tmp = vec![Complex64::ZERO; dim];

    let deriv = |phases: &[Complex64], y: &[Complex64], out: &mut [Complex64]| {
        out.fill(Complex64::ZERO);
        for (e, ph) in entries.iter().zip(phases) {
            let v = e.coeff * ph;
            // d/dt psi = -i H psi over the g1 (first) and g2 (second) halves
            let up = v * y[phonon + e.g2];
            out[e.g1] += Complex64::new(up.im, -up.re);
            let down = v.conj() * y[e.g1];
            out[phonon + e.g2] += Complex64::new(down.im, -down.re);
        }
    };

    for step in 0..n {
        deriv(&phases, &y, &mut k1);
        for (p, r) in phases.iter_mut().zip(&rot_half) {
            *p *= r;
        }
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        deriv(&phases, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        deriv(&phases, &tmp, &mut k3);
        for (p, r) in phases.iter_mut().zip(&rot_half) {
            *p *= r;
        }
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        deriv(&phases, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        if step % 1024 == 1023 {
            let t = (step + 1) as f64 * h;
            for (p, e) in phases.iter_mut().zip(entries) {
                *p = Complex64::from_polar(1.0, e.freq * t);
            }
        }
    }

    let norm: f64 = y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    (y, (norm - norm0).abs())
}

/// Execute a pulse sequence from `|g_2, 0, 0>` at the chosen tier and score
/// the result against `target (x) |g_1>`.
pub fn run_sequence(
    seq: &PulseSequence,
    target: &TargetSpec,
    cfg: &TrapConfig,
    tier: SimTier,
    opts: &SimOptions,
) -> Result<SimResult, Error> {
    cfg.validate()?;
    let (cap_x, cap_y) = match tier {
        SimTier::Ideal | SimTier::Resonant => (target.m_max(), target.n_max()),
        SimTier::Full => (
            target.m_max() + cfg.cap_margin,
            target.n_max() + cfg.cap_margin,
        ),
    };

    for (i, p) in seq.pulses.iter().enumerate() {
        if p.m > target.m_max() || p.n > target.n_max() {
            return Err(Error::PulseConfigMismatch {
                index: i,
                reason: format!(
                    "sideband ({}, {}) outside target caps ({}, {})",
                    p.m,
                    p.n,
                    target.m_max(),
                    target.n_max()
                ),
            });
        }
        let expected = cfg.sideband_detuning(p.m, p.n);
        if (p.detuning - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return Err(Error::PulseConfigMismatch {
                index: i,
                reason: format!(
                    "detuning {} does not satisfy the resonance condition (expected {expected})",
                    p.detuning
                ),
            });
        }
        if !(p.duration.is_finite() && p.duration >= 0.0) {
            return Err(Error::PulseConfigMismatch {
                index: i,
                reason: format!("invalid duration {}", p.duration),
            });
        }
    }

    let target_state = target.to_state(cap_x, cap_y)?;
    let mut state = StateVector::initial(cap_x, cap_y);
    let mut trace = Vec::with_capacity(seq.pulses.len());
    let mut warnings = Vec::new();
    let mut stats = IntegratorStats::default();

    for (i, pulse) in seq.pulses.iter().enumerate() {
        if i > 0 && opts.inter_pulse_gap > 0.0 {
            apply_gap_phases(&mut state, cfg, opts.inter_pulse_gap);
        }
        state = match tier {
            SimTier::Ideal => apply_ideal(&state, pulse, cfg).map_err(|e| e.at_pulse(i))?,
            SimTier::Resonant => {
                let step = apply_resonant(&state, pulse, cfg).map_err(|e| e.at_pulse(i))?;
                if step.truncation_leak > LEAK_TOL {
                    warnings.push(format!(
                        "pulse {i}: truncation leak {:.3e} on unpaired |g_2> states",
                        step.truncation_leak
                    ));
                }
                step.state
            }
            SimTier::Full => {
                let (next, outcome) =
                    apply_full(&state, pulse, cfg, &opts.integrator).map_err(|e| e.at_pulse(i))?;
                stats.steps += outcome.steps;
                stats.refinements += outcome.refinements;
                stats.max_error_estimate = stats.max_error_estimate.max(outcome.error_estimate);
                next
            }
        };
        if tier != SimTier::Full {
            if let Some((nx, ny, population)) = g2_offsite_max(&state) {
                return Err(
                    Error::ProtocolInvariantViolation { nx, ny, population }.at_pulse(i)
                );
            }
        }
        trace.push(PulseTrace {
            pulse: i,
            norm: state.norm(),
            overlap: fidelity(&target_state, &state)?,
        });
    }

    let fid = fidelity(&target_state, &state)?;
    Ok(SimResult {
        tier,
        fidelity: fid,
        per_pulse_trace: trace,
        integrator_stats: (tier == SimTier::Full).then_some(stats),
        warnings,
        final_state: state,
    })
}

/// Free evolution in the trap for `gap` contributes
/// `exp(-i (n_x nu_x + n_y nu_y) gap)` per Fock amplitude.
fn apply_gap_phases(state: &mut StateVector, cfg: &TrapConfig, gap: f64) {
    let (cap_x, cap_y) = (state.cap_x(), state.cap_y());
    for level in ElectronicLevel::ALL {
        for nx in 0..=cap_x {
            for ny in 0..=cap_y {
                let phase = -(nx as f64 * cfg.nu_x + ny as f64 * cfg.nu_y) * gap;
                let a = state.get(level, nx, ny);
                state.set(level, nx, ny, a * Complex64::from_polar(1.0, phase));
            }
        }
    }
}
