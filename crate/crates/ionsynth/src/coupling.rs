//! Sideband coupling constants and Hamiltonians.
//!
//! Two flavors of the Raman coupling are provided: [`rabi_leading_order`],
//! the small-eta expression proportional to `eta_x^m eta_y^n / (m! n!)`,
//! and [`rabi_exact`], the exact two-mode displacement-operator matrix
//! element between Fock states. The two differ by the factor
//! `sqrt(m! n!)` at `k = l = 0`; the planner and simulator consume the
//! exact element so that plans and dynamics agree, while the leading-order
//! form is kept for diagnostics.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fock::ElectronicLevel;

/// Physical trap and drive parameters, in units where `hbar = 1` and the
/// base Raman coupling sets the frequency scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    /// Trap angular frequency of the x mode (rad per time unit).
    pub nu_x: f64,
    /// Trap angular frequency of the y mode.
    pub nu_y: f64,
    /// Lamb-Dicke parameter of the x mode.
    pub eta_x: f64,
    /// Lamb-Dicke parameter of the y mode.
    pub eta_y: f64,
    /// Base Raman coupling magnitude `|Omega|`.
    #[serde(rename = "omega")]
    pub omega_base: f64,
    /// Electronic splitting between the two ground levels.
    pub omega_0: f64,
    /// Extra phonon levels kept beyond `(M, N)` for full-model runs.
    #[serde(default = "default_cap_margin")]
    pub cap_margin: usize,
}

fn default_cap_margin() -> usize {
    4
}

/// Golden-ratio trap anisotropy: `nu_x / nu_y = 6 phi > 9`, enough
/// separation for targets up to `M + 2N = 9` and irrational so no two
/// sideband lines coincide.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

impl Default for TrapConfig {
    fn default() -> Self {
        let nu_y = 200.0;
        TrapConfig {
            nu_x: 6.0 * GOLDEN_RATIO * nu_y,
            nu_y,
            eta_x: 0.1,
            eta_y: 0.1,
            omega_base: 1.0,
            omega_0: 1.0e6,
            cap_margin: default_cap_margin(),
        }
    }
}

impl TrapConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fields = [
            self.nu_x,
            self.nu_y,
            self.eta_x,
            self.eta_y,
            self.omega_base,
            self.omega_0,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "trap config",
            });
        }
        if self.nu_x <= 0.0 || self.nu_y <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "trap frequencies must be positive",
            });
        }
        if self.eta_x <= 0.0 || self.eta_y <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "Lamb-Dicke parameters must be positive",
            });
        }
        if self.omega_base <= 0.0 {
            return Err(Error::InvalidConfig {
                reason: "base coupling must be positive",
            });
        }
        Ok(())
    }

    /// Laser detuning from the carrier selecting the `(m, n)` sideband:
    /// `Delta = -(m nu_x + n nu_y)`.
    pub fn sideband_detuning(&self, m: usize, n: usize) -> f64 {
        -(m as f64 * self.nu_x + n as f64 * self.nu_y)
    }
}

/// Amplitude and phase of one sideband Rabi coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandCoupling {
    pub m: usize,
    pub n: usize,
    /// Coupling magnitude (rad per time unit).
    pub magnitude: f64,
    /// Coupling phase in `(-pi, pi]`, at the stated laser phase.
    pub phase: f64,
}

impl SidebandCoupling {
    /// The complex coupling `magnitude * exp(i phase)`.
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.phase)
    }
}

/// Wrap an angle to the canonical branch `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Fock matrix element `<upper| exp(i eta (a + a^dag)) |lower>` of a single
/// mode, `upper >= lower`. Computed from the normal-ordered series, which
/// terminates after `lower + 1` terms on a Fock state.
fn displacement_element(eta: f64, upper: usize, lower: usize) -> Complex64 {
    debug_assert!(upper >= lower);
    let step = upper - lower;
    let mut series = 0.0;
    let mut sign = 1.0;
    for k1 in 0..=lower {
        let ln_term = 0.5 * (ln_factorial(lower) + ln_factorial(upper))
            - ln_factorial(k1)
            - ln_factorial(k1 + step)
            - ln_factorial(lower - k1);
        series += sign * eta.powi((2 * k1) as i32) * ln_term.exp();
        sign = -sign;
    }
    let envelope = (-eta * eta / 2.0).exp() * eta.powi(step as i32) * series;
    // (i)^step carries the phase
    Complex64::i().powu(step as u32) * envelope
}

/// Complex coupling between `|g_2, k, l>` and `|g_1, k+m, l+n>`, laser
/// phase included: `|Omega| e^{i phi} <k+m|D_x|k> <l+n|D_y|l>`.
pub fn coupling_amplitude(
    m: usize,
    n: usize,
    k: usize,
    l: usize,
    cfg: &TrapConfig,
    laser_phase: f64,
) -> Complex64 {
    Complex64::from_polar(cfg.omega_base, laser_phase)
        * displacement_element(cfg.eta_x, k + m, k)
        * displacement_element(cfg.eta_y, l + n, l)
}

/// Leading-order Lamb-Dicke coupling
/// `|Omega| e^{-(eta_x^2+eta_y^2)/2} (i eta_x)^m (i eta_y)^n / (m! n!)`.
/// This closed form omits the `sqrt(m! n!)` Fock matrix-element factor of
/// the exact ground-manifold coupling, so it understates high sidebands;
/// kept for diagnostics, never consumed by the planner or simulator.
pub fn rabi_leading_order(m: usize, n: usize, cfg: &TrapConfig, laser_phase: f64) -> SidebandCoupling {
    let magnitude = cfg.omega_base
        * (-(cfg.eta_x * cfg.eta_x + cfg.eta_y * cfg.eta_y) / 2.0).exp()
        * cfg.eta_x.powi(m as i32)
        * cfg.eta_y.powi(n as i32)
        * (-(ln_factorial(m) + ln_factorial(n))).exp();
    let phase = wrap_phase(laser_phase + (m + n) as f64 * FRAC_PI_2);
    SidebandCoupling {
        m,
        n,
        magnitude,
        phase,
    }
}

/// Exact sideband coupling between `|g_2, k, l>` and `|g_1, k+m, l+n>`
/// from the displacement-operator Fock matrix elements.
pub fn rabi_exact(
    m: usize,
    n: usize,
    k: usize,
    l: usize,
    cfg: &TrapConfig,
    laser_phase: f64,
) -> SidebandCoupling {
    let w = coupling_amplitude(m, n, k, l, cfg, laser_phase);
    SidebandCoupling {
        m,
        n,
        magnitude: w.norm(),
        phase: wrap_phase(w.arg()),
    }
}

/// Flat index into the 2-level x phonon space used by the dense matrices:
/// ordering matches [`StateVector`](crate::fock::StateVector).
fn flat(level: ElectronicLevel, nx: usize, ny: usize, cap_y: usize, phonon: usize) -> usize {
    level.index() * phonon + nx * (cap_y + 1) + ny
}

/// Dense Hamiltonian of the resonant `(m, n)` sideband on a truncated
/// space: the only nonzero entries couple `|g_2, k, l> <-> |g_1, k+m, l+n>`.
/// The `|g_1><g_2|` block carries the conjugated coupling so that
/// `exp(-iHt)` transfers amplitude with the `-i e^{-i phase}` convention.
pub fn build_resonant_hamiltonian(
    m: usize,
    n: usize,
    cfg: &TrapConfig,
    laser_phase: f64,
    caps: (usize, usize),
) -> Array2<Complex64> {
    let (cap_x, cap_y) = caps;
    assert!(cap_x >= m && cap_y >= n, "caps must contain the sideband order");
    let phonon = (cap_x + 1) * (cap_y + 1);
    let dim = 2 * phonon;
    let mut h = Array2::zeros((dim, dim));
    for k in 0..=(cap_x - m) {
        for l in 0..=(cap_y - n) {
            let w = coupling_amplitude(m, n, k, l, cfg, laser_phase);
            let row_g1 = flat(ElectronicLevel::G1, k + m, l + n, cap_y, phonon);
            let col_g2 = flat(ElectronicLevel::G2, k, l, cap_y, phonon);
            h[(row_g1, col_g2)] = w.conj();
            h[(col_g2, row_g1)] = w;
        }
    }
    h
}

/// One coupling entry of the full interaction-picture generator: the
/// `|g_1, k', l'><g_2, k, l|` element with constant coefficient and a
/// phase rotating at `(k'-k) nu_x + (l'-l) nu_y + Delta`.
#[derive(Debug, Clone, Copy)]
pub struct CouplingEntry {
    /// Phonon flat index of the `g_1` side (row).
    pub g1: usize,
    /// Phonon flat index of the `g_2` side (column).
    pub g2: usize,
    /// Time-independent coefficient of the entry.
    pub coeff: Complex64,
    /// Angular frequency of the entry's phase factor.
    pub freq: f64,
}

/// Full time-dependent interaction Hamiltonian of a single driving field at
/// a fixed detuning, in the interaction picture: every sideband block is
/// present and each entry rotates at its own frequency. At the resonance
/// `Delta = -(m nu_x + n nu_y)` the `(k+m, l+n; k, l)` entries freeze and
/// the generator time-averages to the resonant Hamiltonian.
#[derive(Debug, Clone)]
pub struct FullInteraction {
    cap_x: usize,
    cap_y: usize,
    entries: Vec<CouplingEntry>,
}

/// Build the descriptor for the drive at `laser_detuning` from the carrier.
pub fn build_full_interaction(
    cfg: &TrapConfig,
    laser_detuning: f64,
    laser_phase: f64,
    caps: (usize, usize),
) -> FullInteraction {
    let (cap_x, cap_y) = caps;
    let omega = Complex64::from_polar(cfg.omega_base, laser_phase);
    let mut entries = Vec::new();
    for kp in 0..=cap_x {
        for lp in 0..=cap_y {
            for k in 0..=cap_x {
                for l in 0..=cap_y {
                    let dx = symmetric_displacement(cfg.eta_x, kp, k);
                    let dy = symmetric_displacement(cfg.eta_y, lp, l);
                    let coeff = (omega * dx * dy).conj();
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    let freq = (kp as f64 - k as f64) * cfg.nu_x
                        + (lp as f64 - l as f64) * cfg.nu_y
                        + laser_detuning;
                    entries.push(CouplingEntry {
                        g1: kp * (cap_y + 1) + lp,
                        g2: k * (cap_y + 1) + l,
                        coeff,
                        freq,
                    });
                }
            }
        }
    }
    FullInteraction {
        cap_x,
        cap_y,
        entries,
    }
}

/// `<j| exp(i eta (a + a^dag)) |k>` for arbitrary index order; the operator
/// is symmetric in the Fock basis.
fn symmetric_displacement(eta: f64, j: usize, k: usize) -> Complex64 {
    if j >= k {
        displacement_element(eta, j, k)
    } else {
        displacement_element(eta, k, j)
    }
}

impl FullInteraction {
    pub fn cap_x(&self) -> usize {
        self.cap_x
    }

    pub fn cap_y(&self) -> usize {
        self.cap_y
    }

    pub fn phonon_dim(&self) -> usize {
        (self.cap_x + 1) * (self.cap_y + 1)
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    /// Largest entry rotation frequency; sets the integrator step scale.
    pub fn max_frequency(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.freq.abs())
            .fold(0.0, f64::max)
    }

    /// Dense Hamiltonian at time `t` on the full 2-level x phonon space.
    pub fn hamiltonian_at(&self, t: f64) -> Array2<Complex64> {
        let phonon = self.phonon_dim();
        let dim = 2 * phonon;
        let mut h = Array2::zeros((dim, dim));
        for e in &self.entries {
            let v = e.coeff * Complex64::from_polar(1.0, e.freq * t);
            // g1 block precedes g2 in the flat layout
            h[(e.g1, phonon + e.g2)] += v;
            h[(phonon + e.g2, e.g1)] += v.conj();
        }
        h
    }
}
