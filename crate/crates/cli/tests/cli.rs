use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn solve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solve"))
        .args(args)
        .output()
        .expect("solve binary runs")
}

fn run_config(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    solve(&args)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn roundtrip_unforced_recovers_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("roundtrip", &configs().join("unforced.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = json(&dir.path().join("summary.json"));
    assert!(summary["a_integral_sup_error"].as_f64().unwrap() <= 1e-8);
    assert!(summary["a_interior_sup_error"].as_f64().unwrap() <= 1e-3);
    assert_eq!(summary["converged"], true);
    let result = std::fs::read_to_string(dir.path().join("result.csv")).unwrap();
    assert_eq!(result.lines().next(), Some("t,A,a"));
    assert_eq!(result.lines().count(), 202);
}

#[test]
fn out_of_range_flux_names_first_node() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.csv"), "t,g\n0,2\n0.5,2\n1,2\n").unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "[problem]\nh = { kind = \"sine_series\", params = [1.0, 1] }\n\n[grid]\nt_max = 1.0\nn = 50\n\n[solver]\nmodes = 8\n\n[data]\ng_csv = \"g.csv\"\n",
    )
    .unwrap();
    let out = run_config("invert", &config, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[data-inconsistent]: "), "{err}");
    assert!(err.contains("node 0"), "{err}");
}

#[test]
fn validate_reports_negative_source_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("validate", &configs().join("negative_source.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&dir.path().join("assumptions.json"));
    assert_eq!(report["f_coeff_nonnegativity"], "fail");
}

#[test]
fn config_errors_carry_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(configs().join("unforced.toml")).unwrap();
    let config = dir.path().join("bad.toml");

    std::fs::write(&config, src.replace("modes = 8", "modes = 8\ntol = -1")).unwrap();
    let out = run_config("invert", &config, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.starts_with("error[config]: solver.tol (line 13): solver.tol must be > 0"),
        "{err}"
    );

    std::fs::write(&config, src.replace("\"constant\"", "\"wavelet\"")).unwrap();
    let err = stderr(&run_config("invert", &config, dir.path(), &[]));
    assert!(err.contains("problem.a_true.kind") && err.contains("wavelet"), "{err}");

    let out = run_config(
        "invert",
        &configs().join("unforced.toml"),
        dir.path(),
        &["--set", "solver.tol=-1"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    // noise can lift g above Q0(0) near t = 0
    let extra = [
        "--set",
        "data.noise=1e-4",
        "--set",
        "data.seed=7",
        "--set",
        "solver.saturate=true",
    ];
    for dir in [&a, &b] {
        let out = run_config("roundtrip", &configs().join("forced.toml"), dir.path(), &extra);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let out = run_config("forward", &configs().join("unforced.toml"), dir.path(), &[]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    for name in ["g.csv", "result.csv", "field_1.csv", "field_0.5.csv", "summary.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn non_convergence_still_writes_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(
        "invert",
        &configs().join("forced.toml"),
        dir.path(),
        &["--set", "solver.max_iter=2"],
    );
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).starts_with("error[not-converged]: "));
    assert!(dir.path().join("result.csv").exists());
    assert_eq!(json(&dir.path().join("report.json"))["converged"], false);
}

#[test]
fn oracle_mismatch_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("varying.toml");
    let out = run_config("forward", &config, dir.path(), &["--set", "grid.n=100"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run_config(
        "forward",
        &config,
        dir.path(),
        &["--set", "grid.n=100", "--set", "oracle.tolerance=1e-9"],
    );
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).starts_with("error[oracle-failure]: "));
}

#[test]
fn closed_form_command_recovers_linear_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config("closedform", &configs().join("closed_form.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(dir.path().join("closedform.csv")).unwrap();
    let mut worst = 0.0f64;
    for record in reader.records() {
        let record = record.unwrap();
        let t: f64 = record[0].parse().unwrap();
        let a: f64 = record[1].parse().unwrap();
        worst = worst.max((a - (1.0 + t)).abs() / (1.0 + t));
    }
    assert!(worst <= 1e-4, "{worst}");

    let out = run_config("closedform", &configs().join("unforced.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_documents_exit_codes() {
    let out = solve(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in [
        "Exit codes",
        "3  flux data inconsistent",
        "4  fixed point not converged",
        "--set",
    ] {
        assert!(text.contains(needle), "{needle}");
    }
}
