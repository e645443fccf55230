//! Batch front-end: ingest a target and trap configuration, plan the pulse
//! program, simulate it at the selected tiers, and assemble a report.
//!
//! File formats:
//! * target — `{"M": int, "N": int, "coeffs": [{"m", "n", "re", "im"}]}`,
//!   absent entries zero;
//! * trap — `{"nu_x", "nu_y", "eta_x", "eta_y", "omega", "omega_0",
//!   "cap_margin"}`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coupling::TrapConfig;
use crate::error::Error;
use crate::fock::{ModeIndex, TargetSpec};
use crate::planner::{plan, scheme_comparison, SchemeComparison};
use crate::simulator::{run_sequence, SimOptions, SimResult, SimTier};
use crate::spectrum::{check_separation, default_min_gap, SeparationReport};

/// Errors grouped by exit code: 2 input, 3 planner, 4 simulator.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input: {0}")]
    Input(String),
    #[error("planner: {0}")]
    Planner(Error),
    #[error("simulator: {0}")]
    Simulator(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Planner(_) => 3,
            CliError::Simulator(_) => 4,
        }
    }
}

const RECOMPUTE_TOL: f64 = 1e-12;

/// On-disk target format.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    #[serde(rename = "M")]
    m_max: usize,
    #[serde(rename = "N")]
    n_max: usize,
    coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffEntry {
    m: usize,
    n: usize,
    re: f64,
    im: f64,
}

/// Parse a target specification from its JSON file format.
pub fn parse_target(json: &str) -> Result<TargetSpec, CliError> {
    let raw: TargetFile =
        serde_json::from_str(json).map_err(|e| CliError::Input(format!("target file: {e}")))?;
    let entries: Vec<(usize, usize, Complex64)> = raw
        .coeffs
        .iter()
        .map(|c| (c.m, c.n, Complex64::new(c.re, c.im)))
        .collect();
    TargetSpec::from_entries(raw.m_max, raw.n_max, &entries)
        .map_err(|e| CliError::Input(format!("target file: {e}")))
}

pub fn load_target(path: &Path) -> Result<TargetSpec, CliError> {
    let json = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_target(&json)
}

/// Parse a trap configuration, or fall back to the shipped default when no
/// path is given.
pub fn load_trap(path: Option<&Path>) -> Result<TrapConfig, CliError> {
    let cfg = match path {
        None => TrapConfig::default(),
        Some(p) => {
            let json = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&json)
                .map_err(|e| CliError::Input(format!("trap file: {e}")))?
        }
    };
    cfg.validate()
        .map_err(|e| CliError::Input(format!("trap config: {e}")))?;
    Ok(cfg)
}

/// A full synthesis run: what to plan, which tiers to execute, where to
/// write the report.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub target_path: PathBuf,
    pub trap_path: Option<PathBuf>,
    pub tiers: Vec<SimTier>,
    pub zero_tol: f64,
    pub min_gap: Option<f64>,
    /// Flag pulses longer than this (weak couplings make the sequence slow
    /// compared to coherence times).
    pub duration_budget: Option<f64>,
    pub out_path: Option<PathBuf>,
    pub sim: SimOptions,
}

/// Everything a synthesis run produced.
#[derive(Debug, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub target: TargetDims,
    pub pulses: Vec<crate::planner::Pulse>,
    pub skipped: Vec<ModeIndex>,
    pub pulse_count: usize,
    pub pulse_bound: usize,
    pub total_duration: f64,
    pub longest_pulse: f64,
    /// Indices of pulses exceeding the configured duration budget.
    pub over_budget: Vec<usize>,
    pub tiers: Vec<SimResult>,
    pub comparison: SchemeComparison,
    pub spectrum: SeparationReport,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TargetDims {
    #[serde(rename = "M")]
    pub m_max: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
}

impl SynthesisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Human summary table.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "target M={} N={}   pulses {} / bound {}   skipped {}",
            self.target.m_max,
            self.target.n_max,
            self.pulse_count,
            self.pulse_bound,
            self.skipped.len()
        );
        let _ = writeln!(
            s,
            "total duration {:.6}   longest pulse {:.6}",
            self.total_duration, self.longest_pulse
        );
        if !self.over_budget.is_empty() {
            let _ = writeln!(
                s,
                "WARNING: pulses {:?} exceed the duration budget",
                self.over_budget
            );
        }
        let _ = writeln!(
            s,
            "spectrum: ratio {:.4} (need > {:.0}: {})   protocol min gap {:.3e}   collisions {}",
            self.spectrum.anisotropy_ratio,
            self.spectrum.required_ratio,
            if self.spectrum.anisotropy_ok { "ok" } else { "FAIL" },
            self.spectrum.min_gap_protocol,
            self.spectrum.collisions.len()
        );
        for t in &self.tiers {
            let _ = writeln!(
                s,
                "tier {:<8} fidelity {:.12}   infidelity {:.3e}{}",
                t.tier.to_string(),
                t.fidelity,
                1.0 - t.fidelity,
                match &t.integrator_stats {
                    Some(st) => format!(
                        "   steps {} err~{:.1e}",
                        st.steps, st.max_error_estimate
                    ),
                    None => String::new(),
                }
            );
        }
        let c = &self.comparison;
        let _ = writeln!(
            s,
            "operation counts: gardiner {}  kneer_law {}  drobny {}  zheng {}  this_work {}",
            c.gardiner, c.kneer_law, c.drobny, c.zheng, c.this_work
        );
        s
    }
}

/// Plan, simulate at each requested tier, and assemble the report.
pub fn run(cfg: &RunConfig) -> Result<SynthesisReport, CliError> {
    if cfg.tiers.is_empty() {
        return Err(CliError::Input("at least one tier is required".into()));
    }
    let target = load_target(&cfg.target_path)?;
    let trap = load_trap(cfg.trap_path.as_deref())?;
    run_in_memory(&target, &trap, cfg)
}

/// Same as [`run`] but with pre-parsed inputs; used by the self-test and
/// the Python bindings.
pub fn run_in_memory(
    target: &TargetSpec,
    trap: &TrapConfig,
    cfg: &RunConfig,
) -> Result<SynthesisReport, CliError> {
    let sequence = plan(target, trap, cfg.zero_tol).map_err(CliError::Planner)?;

    let mut tiers = Vec::new();
    for &tier in &cfg.tiers {
        let result = run_sequence(&sequence, target, trap, tier, &cfg.sim)
            .map_err(CliError::Simulator)?;
        tiers.push(result);
    }

    let min_gap = cfg.min_gap.unwrap_or_else(|| default_min_gap(trap));
    let spectrum = check_separation(trap, target.m_max(), target.n_max(), min_gap);
    let over_budget = match cfg.duration_budget {
        None => Vec::new(),
        Some(budget) => sequence
            .pulses
            .iter()
            .enumerate()
            .filter(|(_, p)| p.duration > budget)
            .map(|(i, _)| i)
            .collect(),
    };
    let report = SynthesisReport {
        target: TargetDims {
            m_max: target.m_max(),
            n_max: target.n_max(),
        },
        pulse_count: sequence.pulses.len(),
        pulse_bound: (target.m_max() + 1) * (target.n_max() + 1),
        total_duration: sequence.total_duration(),
        longest_pulse: sequence
            .pulses
            .iter()
            .map(|p| p.duration)
            .fold(0.0, f64::max),
        over_budget,
        skipped: sequence.skipped.clone(),
        pulses: sequence.pulses,
        tiers,
        comparison: scheme_comparison(target.m_max(), target.n_max()),
        spectrum,
    };
    verify_report_fidelities(&report, target)?;
    Ok(report)
}

/// Every claimed fidelity must match a recomputation from the serialized
/// final state.
fn verify_report_fidelities(
    report: &SynthesisReport,
    target: &TargetSpec,
) -> Result<(), CliError> {
    for t in &report.tiers {
        let state = &t.final_state;
        let target_state = target
            .to_state(state.cap_x(), state.cap_y())
            .map_err(CliError::Simulator)?;
        let recomputed = crate::simulator::fidelity(&target_state, state)
            .map_err(CliError::Simulator)?;
        if (recomputed - t.fidelity).abs() > RECOMPUTE_TOL {
            return Err(CliError::Simulator(Error::Invariant {
                what: "reported fidelity does not match its final state",
            }));
        }
    }
    Ok(())
}

/// Outcome of one self-test trial.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelftestFailure {
    pub trial: u64,
    pub detail: String,
}

/// Aggregate self-test summary.
#[derive(Debug, Serialize, Deserialize)]
pub struct SelftestReport {
    pub m_max: usize,
    pub n_max: usize,
    pub trials: u64,
    pub seed: u64,
    pub max_ideal_infidelity: f64,
    pub max_tier_disagreement: f64,
    pub max_pulse_count: usize,
    pub failures: Vec<SelftestFailure>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Largest caps the self-test accepts; couplings above this shrink as
/// `eta^(m+n)/sqrt(m! n!)` and pulse durations blow up.
pub const SELFTEST_MAX_CAP: usize = 4;

/// Drive the exactness claim at scale: random normalized targets must reach
/// ideal fidelity 1 within 1e-12 and resonant agreement within 1e-10, with
/// never more than `(M+1)(N+1)` pulses.
pub fn selftest(
    m_max: usize,
    n_max: usize,
    trials: u64,
    seed: u64,
    trap: &TrapConfig,
    include_full: bool,
) -> Result<SelftestReport, CliError> {
    if m_max > SELFTEST_MAX_CAP || n_max > SELFTEST_MAX_CAP || trials == 0 {
        return Err(CliError::Input(format!(
            "selftest caps must satisfy M, N <= {SELFTEST_MAX_CAP} with trials >= 1"
        )));
    }
    let mut report = SelftestReport {
        m_max,
        n_max,
        trials,
        seed,
        max_ideal_infidelity: 0.0,
        max_tier_disagreement: 0.0,
        max_pulse_count: 0,
        failures: Vec::new(),
    };
    let opts = SimOptions::default();
    for trial in 0..trials {
        // independent, order-insensitive stream per trial
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let spec = TargetSpec::random(m_max, n_max, &mut rng);
        let sequence = match plan(&spec, trap, crate::planner::DEFAULT_ZERO_TOL) {
            Ok(s) => s,
            Err(e) => {
                report.failures.push(SelftestFailure {
                    trial,
                    detail: format!("planner: {e}"),
                });
                continue;
            }
        };
        report.max_pulse_count = report.max_pulse_count.max(sequence.pulses.len());
        if sequence.pulses.len() > (m_max + 1) * (n_max + 1) {
            report.failures.push(SelftestFailure {
                trial,
                detail: format!("pulse count {} exceeds bound", sequence.pulses.len()),
            });
        }

        let ideal = match run_sequence(&sequence, &spec, trap, SimTier::Ideal, &opts) {
            Ok(r) => r,
            Err(e) => {
                report.failures.push(SelftestFailure {
                    trial,
                    detail: format!("ideal tier: {e}"),
                });
                continue;
            }
        };
        let infidelity = (1.0 - ideal.fidelity).abs();
        report.max_ideal_infidelity = report.max_ideal_infidelity.max(infidelity);
        if infidelity > 1e-12 {
            report.failures.push(SelftestFailure {
                trial,
                detail: format!("ideal infidelity {infidelity:e}"),
            });
        }

        let resonant = match run_sequence(&sequence, &spec, trap, SimTier::Resonant, &opts) {
            Ok(r) => r,
            Err(e) => {
                report.failures.push(SelftestFailure {
                    trial,
                    detail: format!("resonant tier: {e}"),
                });
                continue;
            }
        };
        let disagreement = (resonant.fidelity - ideal.fidelity).abs();
        report.max_tier_disagreement = report.max_tier_disagreement.max(disagreement);
        if disagreement > 1e-10 {
            report.failures.push(SelftestFailure {
                trial,
                detail: format!("tier disagreement {disagreement:e}"),
            });
        }

        if include_full {
            match run_sequence(&sequence, &spec, trap, SimTier::Full, &opts) {
                Ok(full) => {
                    if full.fidelity < 0.99 {
                        report.failures.push(SelftestFailure {
                            trial,
                            detail: format!("full-tier fidelity {} below 0.99", full.fidelity),
                        });
                    }
                }
                Err(e) => {
                    report.failures.push(SelftestFailure {
                        trial,
                        detail: format!("full tier: {e}"),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parse_target_minimal() {
        let spec = parse_target(
            r#"{"M":0,"N":0,"coeffs":[{"m":0,"n":0,"re":1.0,"im":0.0}]}"#,
        )
        .unwrap();
        assert_eq!(spec.m_max(), 0);
        assert_eq!(spec.coeff(0, 0), Complex64::ONE);
    }

    #[test]
    fn parse_target_missing_field_names_it() {
        let err = parse_target(r#"{"N":0,"coeffs":[]}"#).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
        assert!(err.to_string().contains('M'), "message was: {err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn parse_target_rejects_out_of_cap_entries() {
        let err = parse_target(
            r#"{"M":0,"N":0,"coeffs":[{"m":1,"n":0,"re":1.0,"im":0.0}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }

    fn write_temp(name: &str, contents: &str) -> PathBuf {
        let dir = std::env::temp_dir().join("ionsynth-cli-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn run_single_carrier_target() {
        let path = write_temp(
            "carrier.json",
            r#"{"M":0,"N":0,"coeffs":[{"m":0,"n":0,"re":1.0,"im":0.0}]}"#,
        );
        let cfg = RunConfig {
            target_path: path,
            trap_path: None,
            tiers: vec![SimTier::Ideal],
            zero_tol: crate::planner::DEFAULT_ZERO_TOL,
            min_gap: None,
            duration_budget: None,
            out_path: None,
            sim: SimOptions::default(),
        };
        let report = run(&cfg).unwrap();
        assert_eq!(report.pulse_count, 1);
        assert_abs_diff_eq!(report.tiers[0].fidelity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn run_two_phonon_superposition_both_tiers() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let path = write_temp(
            "su2.json",
            &format!(
                r#"{{"M":1,"N":1,"coeffs":[{{"m":0,"n":1,"re":{r},"im":0.0}},{{"m":1,"n":0,"re":{r},"im":0.0}}]}}"#
            ),
        );
        let cfg = RunConfig {
            target_path: path,
            trap_path: None,
            tiers: vec![SimTier::Ideal, SimTier::Resonant],
            zero_tol: crate::planner::DEFAULT_ZERO_TOL,
            min_gap: None,
            duration_budget: None,
            out_path: None,
            sim: SimOptions::default(),
        };
        let report = run(&cfg).unwrap();
        assert_eq!(report.pulse_count, 2);
        for t in &report.tiers {
            assert!((1.0 - t.fidelity).abs() < 1e-10, "{:?}", t.tier);
        }
    }

    #[test]
    fn report_round_trip_is_byte_identical() {
        let path = write_temp(
            "roundtrip.json",
            r#"{"M":1,"N":0,"coeffs":[{"m":0,"n":0,"re":0.6,"im":0.0},{"m":1,"n":0,"re":0.0,"im":0.8}]}"#,
        );
        let cfg = RunConfig {
            target_path: path,
            trap_path: None,
            tiers: vec![SimTier::Ideal, SimTier::Resonant],
            zero_tol: crate::planner::DEFAULT_ZERO_TOL,
            min_gap: None,
            duration_budget: None,
            out_path: None,
            sim: SimOptions::default(),
        };
        let report = run(&cfg).unwrap();
        let json = report.to_json();
        let reparsed = SynthesisReport::from_json(&json).unwrap();
        assert_eq!(reparsed.to_json(), json);
    }

    #[test]
    fn selftest_small_configs_pass() {
        let trap = TrapConfig::default();
        let report = selftest(0, 0, 1, 1, &trap, false).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.max_pulse_count, 1);

        let report = selftest(2, 2, 50, 12345, &trap, false).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert!(report.max_pulse_count <= 9);
        assert!(report.max_ideal_infidelity < 1e-12);
        assert!(report.max_tier_disagreement < 1e-10);
    }

    #[test]
    fn selftest_rejects_oversized_caps() {
        let trap = TrapConfig::default();
        let err = selftest(5, 0, 1, 1, &trap, false).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(selftest(0, 0, 0, 1, &trap, false).is_err());
    }

    #[test]
    fn duration_budget_flags_slow_pulses() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let path = write_temp(
            "budget.json",
            &format!(
                r#"{{"M":1,"N":1,"coeffs":[{{"m":0,"n":1,"re":{r},"im":0.0}},{{"m":1,"n":0,"re":{r},"im":0.0}}]}}"#
            ),
        );
        let cfg = RunConfig {
            target_path: path,
            trap_path: None,
            tiers: vec![SimTier::Ideal],
            zero_tol: crate::planner::DEFAULT_ZERO_TOL,
            min_gap: None,
            duration_budget: Some(10.0),
            out_path: None,
            sim: SimOptions::default(),
        };
        let report = run(&cfg).unwrap();
        // the closing (1,0) pulse takes (pi/2) / |w_10| ~ 15.9 time units
        assert_eq!(report.over_budget, vec![1]);
        assert!(report.summary().contains("WARNING"));
    }

    #[test]
    fn tiers_required() {
        let cfg = RunConfig {
            target_path: PathBuf::from("/nonexistent"),
            trap_path: None,
            tiers: vec![],
            zero_tol: 1e-12,
            min_gap: None,
            duration_budget: None,
            out_path: None,
            sim: SimOptions::default(),
        };
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn trap_file_rejects_unknown_keys() {
        let err: Result<TrapConfig, _> =
            serde_json::from_str(r#"{"nu_x":1.0,"nu_y":1.0,"eta_x":0.1,"eta_y":0.1,"omega":1.0,"omega_0":10.0,"bogus":3}"#);
        assert!(err.is_err());
    }
}
