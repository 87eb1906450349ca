//! End-to-end checks of the installed binary: the documented invocations,
//! exit-code contract, and byte-stable output.

use std::process::Command;

const ZETA_5_2: f64 = 1.341_487_257_250_917_2;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bose-ldp"))
}

#[test]
fn critical_point_ordering() {
    let out = bin()
        .args([
            "critical", "--model", "hyl", "-d", "3", "--beta", "1", "-a", "1", "-b", "0.1",
            "--alpha", "0", "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mu_p = v["mu_p"].as_f64().unwrap();
    let mu_tang = v["mu_tang"].as_f64().unwrap();
    let mu_star = v["mu_star"].as_f64().unwrap();
    assert!(mu_tang < mu_star && mu_star < mu_p, "{mu_tang} {mu_star} {mu_p}");
    assert!(v["b_star"].as_f64().unwrap() > 0.1);
}

#[test]
fn ideal_pressure_at_unit_normalisation() {
    // beta = 1/(4 pi) to six figures, where the weight prefactor is 1 and
    // beta * p reduces to zeta(5/2)
    let out = bin()
        .args([
            "pressure", "--model", "ideal", "-d", "3", "--beta", "0.0795775", "--alpha", "0",
            "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v[0]["pressure"].as_f64().unwrap();
    assert!((p * 0.0795775 - ZETA_5_2).abs() <= 1e-5, "beta p = {}", p * 0.0795775);
}

#[test]
fn pmf_phase_scan_plateaus() {
    let out = bin()
        .args([
            "phase-scan", "--model", "pmf", "--sweep", "mu:-2:8:0.05", "--alpha", "-0.5", "-a",
            "1", "--beta", "1",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_value,pressure,dpressure,density,condensate,n_minimizers,regime"
    );
    let rows: Vec<Vec<String>> =
        lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 201);

    let densities: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    for pair in densities.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12, "density must be non-decreasing");
    }
    // saturated plateau: the density column is flat at rho(alpha) on the right
    let last = *densities.last().unwrap();
    assert!((densities[densities.len() - 40] - last).abs() <= 1e-12);
    let saturated = rows.iter().filter(|r| r[6].contains("saturated")).count();
    assert!(saturated > 100, "expected a long saturated tail, got {saturated}");
    // condensate switches on past the saturation point
    let last_cond: f64 = rows.last().unwrap()[4].parse().unwrap();
    let first_cond: f64 = rows[0][4].parse().unwrap();
    assert!(first_cond == 0.0 && last_cond > 0.0);
}

#[test]
fn exit_code_contract() {
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--no-such-flag"]), 1);
    // alpha > 0 violates the model domain
    assert_eq!(code(&["pressure", "--model", "ideal", "--alpha", "0.5"]), 1);
    // couplings outside the solvable HYL regime
    assert_eq!(
        code(&["pressure", "--model", "hyl", "--mu", "0.05", "-a", "50", "-b", "45"]),
        2
    );
}

#[test]
fn alpha_rejection_names_the_constraint() {
    let out = bin().args(["pressure", "--model", "ideal", "--alpha", "0.5"]).output().unwrap();
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("alpha"), "stderr should explain the alpha constraint: {msg}");
}

#[test]
fn sample_runs_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let f1 = dir.path().join("a.csv");
    let f2 = dir.path().join("b.csv");
    for f in [&f1, &f2] {
        let out = bin()
            .args([
                "sample", "--model", "pmf", "--alpha", "-0.5", "--mu", "0.2", "-a", "1",
                "--volume", "50", "--k-max", "10", "--steps", "2000", "--burn-in", "100",
                "--seed", "5", "--output",
            ])
            .arg(f)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        // stats land on stderr as one JSON line
        let stats: serde_json::Value =
            serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
        assert!(stats["mean"][0].as_f64().unwrap() > 0.0);
    }
    let a = std::fs::read(&f1).unwrap();
    let b = std::fs::read(&f2).unwrap();
    assert!(!a.is_empty() && a == b);
}

#[test]
fn verify_passes() {
    let out = bin().args(["verify"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "verify failed:\n{text}");
    assert!(text.lines().filter(|l| l.contains("pass")).count() >= 8);
}
