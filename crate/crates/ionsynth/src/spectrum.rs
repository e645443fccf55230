//! Resonance-frequency bookkeeping and trap-anisotropy feasibility checks.
//!
//! Each `(m, n)` sideband is addressed at the beat frequency
//! `omega_0 - m nu_x - n nu_y`; selective driving needs those lines well
//! separated, which constrains the trap frequency ratio. The anisotropy
//! gate is `nu_x / nu_y > M + 2N`, and incommensurate frequencies keep the
//! lines distinct at any order.

use serde::{Deserialize, Serialize};

use crate::coupling::TrapConfig;

/// Extra sideband orders inspected beyond the planner caps: off-protocol
/// lines neighboring protocol lines matter for full-model leakage.
pub const DEFAULT_LINE_MARGIN: usize = 2;

/// One addressable sideband resonance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandLine {
    pub m: usize,
    pub n: usize,
    /// Required Raman beat frequency `omega_0 - m nu_x - n nu_y`.
    pub frequency: f64,
}

/// All lines for `0 <= m <= M + margin`, `0 <= n <= N + margin`, sorted by
/// frequency.
pub fn enumerate_lines(
    cfg: &TrapConfig,
    m_max: usize,
    n_max: usize,
    margin: usize,
) -> Vec<SidebandLine> {
    let mut lines = Vec::with_capacity((m_max + margin + 1) * (n_max + margin + 1));
    for m in 0..=(m_max + margin) {
        for n in 0..=(n_max + margin) {
            lines.push(SidebandLine {
                m,
                n,
                frequency: cfg.omega_0 + cfg.sideband_detuning(m, n),
            });
        }
    }
    lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    lines
}

/// A pair of lines closer than the acceptable gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCollision {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub gap: f64,
}

/// Feasibility report for driving a target of caps `(M, N)` in this trap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationReport {
    /// `nu_x / nu_y`.
    pub anisotropy_ratio: f64,
    /// The gate `nu_x / nu_y > M + 2N`.
    pub required_ratio: f64,
    pub anisotropy_ok: bool,
    /// Minimum spacing among the lines the planner drives (`m <= M`,
    /// `n <= N`).
    pub min_gap_protocol: f64,
    /// Minimum spacing with [`DEFAULT_LINE_MARGIN`] extra orders included.
    pub min_gap_with_margin: f64,
    /// Acceptable spacing used for collision flagging.
    pub min_gap: f64,
    /// Pairs (from the margin-extended set) closer than `min_gap`.
    pub collisions: Vec<LineCollision>,
}

fn min_pairwise_gap(lines: &[SidebandLine]) -> f64 {
    // lines are sorted, so adjacent gaps suffice
    lines
        .windows(2)
        .map(|w| (w[1].frequency - w[0].frequency).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Check line separation for a target of caps `(M, N)` with the given
/// minimum acceptable spacing (a proxy for the pulse bandwidth; many Rabi
/// widths by default).
pub fn check_separation(
    cfg: &TrapConfig,
    m_max: usize,
    n_max: usize,
    min_gap: f64,
) -> SeparationReport {
    let protocol = enumerate_lines(cfg, m_max, n_max, 0);
    let extended = enumerate_lines(cfg, m_max, n_max, DEFAULT_LINE_MARGIN);
    let required_ratio = (m_max + 2 * n_max) as f64;

    let mut collisions = Vec::new();
    for (i, a) in extended.iter().enumerate() {
        for b in extended.iter().skip(i + 1) {
            let gap = (a.frequency - b.frequency).abs();
            if gap < min_gap {
                collisions.push(LineCollision {
                    a: (a.m, a.n),
                    b: (b.m, b.n),
                    gap,
                });
            }
        }
    }
    collisions.sort_by(|x, y| x.gap.total_cmp(&y.gap));

    SeparationReport {
        anisotropy_ratio: cfg.nu_x / cfg.nu_y,
        required_ratio,
        anisotropy_ok: cfg.nu_x / cfg.nu_y > required_ratio,
        min_gap_protocol: min_pairwise_gap(&protocol),
        min_gap_with_margin: min_pairwise_gap(&extended),
        min_gap,
        collisions,
    }
}

/// Default acceptable spacing: pulses must sit many Rabi widths apart.
pub fn default_min_gap(cfg: &TrapConfig) -> f64 {
    10.0 * cfg.omega_base
}
