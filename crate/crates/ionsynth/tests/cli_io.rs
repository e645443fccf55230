//! End-to-end checks of the command-line interface: exit codes, JSON
//! artifacts, and report invariants, driving the real binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use ionsynth::cli::SynthesisReport;
use ionsynth::planner::PulseSequence;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionsynth"))
}

fn tmpdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ionsynth-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(name: &str, contents: &str) -> PathBuf {
    let path = tmpdir().join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

const SU2_TARGET: &str = r#"{"M":1,"N":1,"coeffs":[
  {"m":0,"n":1,"re":0.7071067811865476,"im":0.0},
  {"m":1,"n":0,"re":0.7071067811865476,"im":0.0}
]}"#;

#[test]
fn plan_emits_sequence_and_artifact() {
    let target = write("plan_target.json", SU2_TARGET);
    let out_path = tmpdir().join("plan_out.json");
    let out = bin()
        .args(["plan", "--target"])
        .arg(&target)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("pulses 2 / bound 4"));

    let json = std::fs::read_to_string(&out_path).unwrap();
    let seq = PulseSequence::pulses_from_json(&json).unwrap();
    assert_eq!(seq.pulses.len(), 2);
    assert_eq!((seq.pulses[0].m, seq.pulses[0].n), (0, 1));
    // bit-exact round trip of the artifact
    assert_eq!(seq.pulses_to_json(), json);
}

#[test]
fn simulate_reports_unit_fidelity() {
    let target = write("sim_target.json", SU2_TARGET);
    let report_path = tmpdir().join("sim_report.json");
    let out = bin()
        .args(["simulate", "--target"])
        .arg(&target)
        .args(["--tier", "ideal", "--tier", "resonant", "--out"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report = SynthesisReport::from_json(&std::fs::read_to_string(&report_path).unwrap())
        .unwrap();
    assert_eq!(report.pulse_count, 2);
    assert_eq!(report.tiers.len(), 2);
    for t in &report.tiers {
        assert!((1.0 - t.fidelity).abs() < 1e-10);
    }
    // the summary table goes to stdout
    let text = stdout(&out);
    assert!(text.contains("tier ideal"));
    assert!(text.contains("operation counts"));
}

#[test]
fn malformed_target_exits_2_naming_the_field() {
    let target = write("broken_target.json", r#"{"N":0,"coeffs":[]}"#);
    let out = bin()
        .args(["simulate", "--target"])
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('M'), "stderr was: {err}");
}

#[test]
fn unnormalized_target_exits_2() {
    let target = write(
        "unnorm_target.json",
        r#"{"M":0,"N":0,"coeffs":[{"m":0,"n":0,"re":0.5,"im":0.0}]}"#,
    );
    let out = bin()
        .args(["simulate", "--target"])
        .arg(&target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_passes_and_prints_summary() {
    let out = bin()
        .args(["selftest", "--m", "2", "--n", "2", "--trials", "25", "--seed", "9"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("selftest: PASS"), "stdout was: {text}");
}

#[test]
fn spectrum_flags_symmetric_trap() {
    let trap = write(
        "sym_trap.json",
        r#"{"nu_x":200.0,"nu_y":200.0,"eta_x":0.1,"eta_y":0.1,"omega":1.0,"omega_0":1000000.0,"cap_margin":4}"#,
    );
    let out = bin()
        .args(["spectrum", "--m", "2", "--n", "2", "--trap"])
        .arg(&trap)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("FAIL"), "stdout was: {text}");
    assert!(text.contains("colliding"));
}

#[test]
fn compare_prints_operation_counts() {
    let out = bin().args(["compare", "--m", "3", "--n", "3"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("kneer_law  34"));
    assert!(text.contains("drobny     72"));
    assert!(text.contains("zheng      20"));
    assert!(text.contains("this_work  16"));
}

#[test]
fn report_fidelities_recompute_from_serialized_state() {
    let target = write("recompute_target.json", SU2_TARGET);
    let report_path = tmpdir().join("recompute_report.json");
    let out = bin()
        .args(["simulate", "--target"])
        .arg(&target)
        .args(["--tier", "ideal", "--out"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success());

    let report = SynthesisReport::from_json(&std::fs::read_to_string(&report_path).unwrap())
        .unwrap();
    let t = &report.tiers[0];
    // rebuild |<target|final>|^2 from the serialized amplitudes
    let mut overlap = num_complex::Complex64::ZERO;
    for (level, nx, ny, amp) in t.final_state.iter() {
        if level == ionsynth::ElectronicLevel::G1 && nx <= 1 && ny <= 1 {
            let c = if (nx, ny) == (0, 1) || (nx, ny) == (1, 0) {
                num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
            } else {
                num_complex::Complex64::ZERO
            };
            overlap += c.conj() * amp;
        }
    }
    assert!((overlap.norm_sqr() - t.fidelity).abs() < 1e-12);
}
