//! Compile a target coefficient table into an ordered pulse sequence.
//!
//! Pulses walk anti-diagonals of constant `m + n` with `m` increasing
//! inside each diagonal, so a pulse never disturbs previously deposited
//! components: the `(m, n)` sideband leaves `|g_1, k, l>` alone whenever
//! `k + l < m + n`, or `k + l = m + n` with `k != m`. Each pulse duration
//! consumes exactly one coefficient out of the residual ground-state
//! amplitude, and the laser phase steers the deposit onto the coefficient's
//! complex direction.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupling::{rabi_exact, wrap_phase, TrapConfig};
use crate::error::Error;
use crate::fock::{ModeIndex, TargetSpec};

/// Coefficients at or below this magnitude are skipped rather than pulsed.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// Slack allowed on `|c| / residual` before declaring the input
/// unnormalized.
const RESIDUAL_GUARD: f64 = 1e-9;

/// One laser operation: sideband order, detuning, phase and duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Sideband order in x.
    pub m: usize,
    /// Sideband order in y.
    pub n: usize,
    /// Laser detuning from the carrier, `-(m nu_x + n nu_y)`.
    pub detuning: f64,
    /// Laser phase in `(-pi, pi]`.
    pub laser_phase: f64,
    /// Pulse duration in units of the inverse base coupling.
    pub duration: f64,
    /// The coefficient this pulse deposits, for reporting.
    pub target_coeff: Complex64,
}

#[derive(Serialize, Deserialize)]
struct PulseJson {
    m: usize,
    n: usize,
    detuning: f64,
    laser_phase: f64,
    duration: f64,
    coeff_re: f64,
    coeff_im: f64,
}

impl Serialize for Pulse {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PulseJson {
            m: self.m,
            n: self.n,
            detuning: self.detuning,
            laser_phase: self.laser_phase,
            duration: self.duration,
            coeff_re: self.target_coeff.re,
            coeff_im: self.target_coeff.im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pulse {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = PulseJson::deserialize(deserializer)?;
        Ok(Pulse {
            m: raw.m,
            n: raw.n,
            detuning: raw.detuning,
            laser_phase: raw.laser_phase,
            duration: raw.duration,
            target_coeff: Complex64::new(raw.coeff_re, raw.coeff_im),
        })
    }
}

/// Ordered pulse program plus the diagonal positions that needed no pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
    /// Positions skipped for a zero coefficient (including positions beyond
    /// the target caps on mixed diagonals).
    pub skipped: Vec<ModeIndex>,
}

impl PulseSequence {
    /// Total drive time of the program.
    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }

    /// Serialize the pulse list alone as a JSON array.
    pub fn pulses_to_json(&self) -> String {
        serde_json::to_string_pretty(&self.pulses).expect("pulse serialization is infallible")
    }

    /// Parse a JSON array of pulses (the `skipped` list is not part of the
    /// wire format).
    pub fn pulses_from_json(json: &str) -> Result<Self, serde_json::Error> {
        let pulses: Vec<Pulse> = serde_json::from_str(json)?;
        Ok(PulseSequence {
            pulses,
            skipped: Vec::new(),
        })
    }
}

/// All `(m, n)` with `m + n <= total` in pulse order: position
/// `(m+n)(m+n+1)/2 + m + 1` (1-based), i.e. anti-diagonals of increasing
/// `m + n`, each scanned with `m` increasing.
pub fn diagonal_order(total: usize) -> Vec<ModeIndex> {
    let mut order = Vec::with_capacity((total + 1) * (total + 2) / 2);
    for diag in 0..=total {
        for m in 0..=diag {
            order.push(ModeIndex::new(m, diag - m));
        }
    }
    order
}

/// Compile `spec` into a pulse sequence for the given trap.
///
/// Walks [`diagonal_order`] over `M + N` diagonals keeping the residual
/// ground-state weight `R^2 = 1 - sum(placed |d|^2)`; each coefficient `c`
/// above `zero_tol` becomes one pulse with
/// `duration = arcsin(|c| / R) / |Omega_mn|` and laser phase
/// `-arg(c) - pi/2 - (m+n) pi/2`.
pub fn plan(
    spec: &TargetSpec,
    cfg: &TrapConfig,
    zero_tol: f64,
) -> Result<PulseSequence, Error> {
    cfg.validate()?;
    let mut pulses = Vec::new();
    let mut skipped = Vec::new();
    let mut residual_sq: f64 = 1.0;

    for idx in diagonal_order(spec.m_max() + spec.n_max()) {
        let c = spec.coeff(idx.m, idx.n);
        let c_abs = c.norm();
        if c_abs <= zero_tol {
            skipped.push(idx);
            continue;
        }
        let coupling = rabi_exact(idx.m, idx.n, 0, 0, cfg, 0.0);
        if coupling.magnitude <= f64::MIN_POSITIVE {
            return Err(Error::ZeroCoupling { m: idx.m, n: idx.n });
        }
        let residual = residual_sq.max(0.0).sqrt();
        if c_abs > residual * (1.0 + RESIDUAL_GUARD) {
            return Err(Error::UnnormalizedResidual {
                m: idx.m,
                n: idx.n,
                coeff_abs: c_abs,
                residual,
            });
        }
        let ratio = (c_abs / residual).min(1.0);
        let duration = ratio.asin() / coupling.magnitude;
        let laser_phase =
            wrap_phase(-c.arg() - FRAC_PI_2 - (idx.m + idx.n) as f64 * FRAC_PI_2);
        pulses.push(Pulse {
            m: idx.m,
            n: idx.n,
            detuning: cfg.sideband_detuning(idx.m, idx.n),
            laser_phase,
            duration,
            target_coeff: c,
        });
        residual_sq -= c_abs * c_abs;
    }

    Ok(PulseSequence { pulses, skipped })
}

/// Operation counts of published synthesis schemes for the same target
/// family, for comparison against the `(M+1)(N+1)` bound realized here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub gardiner: String,
    pub kneer_law: u64,
    pub drobny: u64,
    pub zheng: u64,
    pub this_work: u64,
}

pub fn scheme_comparison(m_max: usize, n_max: usize) -> SchemeComparison {
    let (m, n) = (m_max as u64, n_max as u64);
    SchemeComparison {
        gardiner: "exponential".to_string(),
        kneer_law: (2 * m + 1) * (n + 1) + 2 * n,
        drobny: 2 * (m + n) * (m + n),
        zheng: (m + 2) * (n + 1),
        this_work: (m + 1) * (n + 1),
    }
}
