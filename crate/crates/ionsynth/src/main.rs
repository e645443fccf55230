//! Command-line front-end.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 input validation,
//! 3 planner error, 4 simulator error. Diagnostics go to stderr, summaries
//! to stdout.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ionsynth::cli::{
    load_target, load_trap, run, selftest, CliError, RunConfig,
};
use ionsynth::planner::{plan, scheme_comparison, DEFAULT_ZERO_TOL};
use ionsynth::simulator::{SimOptions, SimTier};
use ionsynth::spectrum::{check_separation, default_min_gap};

#[derive(Parser)]
#[command(
    name = "ionsynth",
    about = "Compile and simulate sideband pulse programs that synthesize \
             two-mode motional states of a trapped ion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TargetArgs {
    /// Target-state JSON file: {"M", "N", "coeffs": [{"m","n","re","im"}]}
    #[arg(long)]
    target: PathBuf,
    /// Trap configuration JSON file (defaults to the shipped golden-ratio
    /// trap)
    #[arg(long)]
    trap: Option<PathBuf>,
    /// Coefficients at or below this magnitude are skipped
    #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
    zero_tol: f64,
    /// Flag pulses longer than this duration
    #[arg(long)]
    duration_budget: Option<f64>,
    /// Write the JSON artifact here in addition to the stdout summary
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a target into its pulse sequence
    Plan {
        #[command(flatten)]
        common: TargetArgs,
    },
    /// Plan and execute at one or more fidelity tiers, emitting a report
    Simulate {
        #[command(flatten)]
        common: TargetArgs,
        /// Fidelity tier (repeatable): ideal | resonant | full
        #[arg(long = "tier")]
        tiers: Vec<SimTier>,
        /// Minimum acceptable sideband line spacing (default 10 |Omega|)
        #[arg(long)]
        min_gap: Option<f64>,
    },
    /// Exercise random targets: ideal fidelity must be 1 within 1e-12
    Selftest {
        /// Phonon cap M
        #[arg(long = "m", default_value_t = 2)]
        m_max: usize,
        /// Phonon cap N
        #[arg(long = "n", default_value_t = 2)]
        n_max: usize,
        #[arg(long, default_value_t = 50)]
        trials: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also run the (slow) full time-dependent tier
        #[arg(long)]
        full: bool,
        #[arg(long)]
        trap: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report sideband line positions and separation feasibility
    Spectrum {
        #[arg(long = "m", default_value_t = 3)]
        m_max: usize,
        #[arg(long = "n", default_value_t = 3)]
        n_max: usize,
        #[arg(long)]
        trap: Option<PathBuf>,
        #[arg(long)]
        min_gap: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the operation-count comparison against published schemes
    Compare {
        #[arg(long = "m", default_value_t = 3)]
        m_max: usize,
        #[arg(long = "n", default_value_t = 3)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_artifact(path: &Option<PathBuf>, json: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, json)
            .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Plan { common } => {
            let target = load_target(&common.target)?;
            let trap = load_trap(common.trap.as_deref())?;
            let seq = plan(&target, &trap, common.zero_tol).map_err(CliError::Planner)?;
            println!(
                "{:>3} {:>3} {:>3} {:>22} {:>22} {:>12}",
                "#", "m", "n", "duration", "laser_phase", "|coeff|"
            );
            for (i, p) in seq.pulses.iter().enumerate() {
                println!(
                    "{:>3} {:>3} {:>3} {:>22.15e} {:>22.15e} {:>12.6}",
                    i,
                    p.m,
                    p.n,
                    p.duration,
                    p.laser_phase,
                    p.target_coeff.norm()
                );
            }
            println!(
                "pulses {} / bound {}   skipped {}   total duration {:.6}",
                seq.pulses.len(),
                (target.m_max() + 1) * (target.n_max() + 1),
                seq.skipped.len(),
                seq.total_duration()
            );
            if let Some(budget) = common.duration_budget {
                let over: Vec<usize> = seq
                    .pulses
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.duration > budget)
                    .map(|(i, _)| i)
                    .collect();
                if !over.is_empty() {
                    println!("WARNING: pulses {over:?} exceed the duration budget {budget}");
                }
            }
            write_artifact(&common.out, &seq.pulses_to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            common,
            tiers,
            min_gap,
        } => {
            let tiers = if tiers.is_empty() {
                vec![SimTier::Ideal, SimTier::Resonant]
            } else {
                tiers
            };
            let cfg = RunConfig {
                target_path: common.target,
                trap_path: common.trap,
                tiers,
                zero_tol: common.zero_tol,
                min_gap,
                duration_budget: common.duration_budget,
                out_path: common.out.clone(),
                sim: SimOptions::default(),
            };
            let report = run(&cfg)?;
            print!("{}", report.summary());
            write_artifact(&common.out, &report.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest {
            m_max,
            n_max,
            trials,
            seed,
            full,
            trap,
            out,
        } => {
            let trap = load_trap(trap.as_deref())?;
            let report = selftest(m_max, n_max, trials, seed, &trap, full)?;
            println!(
                "selftest M={} N={} trials={} seed={}: max ideal infidelity {:.3e}, \
                 max tier disagreement {:.3e}, max pulses {} (bound {})",
                report.m_max,
                report.n_max,
                report.trials,
                report.seed,
                report.max_ideal_infidelity,
                report.max_tier_disagreement,
                report.max_pulse_count,
                (m_max + 1) * (n_max + 1)
            );
            write_artifact(
                &out,
                &serde_json::to_string_pretty(&report)
                    .map_err(|e| CliError::Input(e.to_string()))?,
            )?;
            if report.passed() {
                println!("selftest: PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                for f in &report.failures {
                    eprintln!("trial {}: {}", f.trial, f.detail);
                }
                println!("selftest: FAIL ({} failures)", report.failures.len());
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Spectrum {
            m_max,
            n_max,
            trap,
            min_gap,
            out,
        } => {
            let trap = load_trap(trap.as_deref())?;
            let min_gap = min_gap.unwrap_or_else(|| default_min_gap(&trap));
            let report = check_separation(&trap, m_max, n_max, min_gap);
            println!(
                "ratio nu_x/nu_y = {:.6} (require > {}): {}",
                report.anisotropy_ratio,
                report.required_ratio,
                if report.anisotropy_ok { "ok" } else { "FAIL" }
            );
            println!(
                "min line gap: protocol {:.6e}, with margin {:.6e} (acceptable {:.3e})",
                report.min_gap_protocol, report.min_gap_with_margin, report.min_gap
            );
            if report.collisions.is_empty() {
                println!("no colliding line pairs");
            } else {
                println!("{} colliding pairs; closest:", report.collisions.len());
                for c in report.collisions.iter().take(10) {
                    println!(
                        "  ({}, {}) vs ({}, {}): gap {:.6e}",
                        c.a.0, c.a.1, c.b.0, c.b.1, c.gap
                    );
                }
            }
            write_artifact(
                &out,
                &serde_json::to_string_pretty(&report)
                    .map_err(|e| CliError::Input(e.to_string()))?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { m_max, n_max, out } => {
            let table = scheme_comparison(m_max, n_max);
            println!("operation counts for M={m_max}, N={n_max}:");
            println!("  gardiner   {}", table.gardiner);
            println!("  kneer_law  {}", table.kneer_law);
            println!("  drobny     {}", table.drobny);
            println!("  zheng      {}", table.zheng);
            println!("  this_work  {}", table.this_work);
            write_artifact(
                &out,
                &serde_json::to_string_pretty(&table)
                    .map_err(|e| CliError::Input(e.to_string()))?,
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
