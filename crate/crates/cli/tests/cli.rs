use std::path::Path;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("srspiral").chain(args.iter().copied());
    let code = spiral_cli::run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn first_two_lines(path: &Path) -> (String, String) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut l = text.lines();
    (l.next().unwrap().to_string(), l.next().unwrap().to_string())
}

#[test]
fn validate_reports_and_exits_zero() {
    let (code, out, _) = cli(&["validate", "--model", "heisenberg", "--points", "20"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passes"], true);
    assert_eq!(v["points"], 20);
}

#[test]
fn failing_threshold_is_a_numerical_failure() {
    let (code, _, err) = cli(&["validate", "--model", "s3", "--points", "5", "--threshold", "1e-30"]);
    assert_eq!(code, 2);
    assert!(err.contains("numerical failure"));
}

#[test]
fn usage_errors_list_flags() {
    let (code, _, err) = cli(&["spiral-scan", "--frobnicate"]);
    assert_eq!(code, 1);
    assert!(err.contains("valid flags:") && err.contains("--h0") && err.contains("--config"));
    let (code, _, err) = cli(&["validate", "--model", "torus"]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown model"));
    let (code, _, _) = cli(&["spiral-scan", "--h0", "1,2,3"]);
    assert_eq!(code, 1);
    let (code, _, _) = cli(&[]);
    assert_eq!(code, 1);
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    for sub in [
        "validate",
        "geodesic",
        "reeb-orbit",
        "monodromy",
        "spiral-scan",
        "adiabatic-scan",
        "spectrum",
        "polyalg",
    ] {
        assert!(out.contains(sub), "{sub}");
    }
}

#[test]
fn missing_period_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let (code, _, err) = cli(&["spectrum", "--model", "heisenberg", "--tau-max", "2", "--out", p(&out)]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn geodesic_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let svg = dir.path().join("g.svg");
    let (code, stdout, err) = cli(&[
        "geodesic",
        "--model",
        "s3",
        "--q",
        "0.1,0.2,-0.3",
        "--lifts",
        "1,-1,4",
        "--T",
        "3",
        "--out",
        p(&out),
        "--svg",
        p(&svg),
    ]);
    assert_eq!(code, 0, "{err}");
    let (config, header) = first_two_lines(&out);
    assert!(
        config.starts_with("# srspiral geodesic ") && config.contains("model=s3") && config.contains("lifts=1,-1,4")
    );
    assert_eq!(header, "t,x,y,z,px,py,pz,gstar,hZ");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert!(v["oracle_error"].is_null());
    assert!(v["max_gstar_deviation"].as_f64().unwrap() < 1e-8);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn characteristic_covector_is_rejected() {
    let (code, _, err) = cli(&["geodesic", "--model", "heisenberg", "--lifts", "0,0,1"]);
    assert_eq!(code, 2);
    assert!(err.contains("characteristic"));
}

#[test]
fn csv_to_stdout_without_out() {
    let (code, out, _) = cli(&["reeb-orbit", "--model", "heisenberg-quotient", "--T0", "3"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# srspiral reeb-orbit"));
    assert_eq!(lines.next().unwrap(), "tau,x,y,z,E1x,E1y,E1z,E2x,E2y,E2z");
    assert!(out.contains("\"period\": 3"));
}

#[test]
fn config_file_with_command_line_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("m.csv");
    std::fs::write(
        &cfg,
        format!(
            "# monodromy probe\nmodel = heisenberg-quotient\npoints = 3\nalong-fiber = true\nout = {}\n",
            p(&out)
        ),
    )
    .unwrap();
    let (code, stdout, err) = cli(&["monodromy", "--config", p(&cfg), "--points", "4", "--q", "0,0,0"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["points"], 4);
    assert_eq!(v["model"], "heisenberg-quotient");
    let (config, _) = first_two_lines(&out);
    assert!(
        config.contains("along-fiber=true") && config.contains("points=4"),
        "{config}"
    );
    assert!(!config.contains("config="));

    std::fs::write(&cfg, "speed = 3\n").unwrap();
    let (code, _, err) = cli(&["monodromy", "--config", p(&cfg)]);
    assert_eq!(code, 1);
    assert!(err.contains("unknown config key `speed`") && err.contains("tau-max"));
    let (code, _, _) = cli(&["monodromy", "--config", p(&dir.path().join("absent.cfg"))]);
    assert_eq!(code, 1);
}

#[test]
fn config_and_flags_give_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let args = [
        "adiabatic-scan",
        "--model",
        "heisenberg",
        "--h0",
        "10,20,40",
        "--out",
        p(&out),
    ];
    assert_eq!(cli(&args).0, 0);
    let a = std::fs::read(&out).unwrap();
    let cfg = dir.path().join("a.cfg");
    std::fs::write(&cfg, format!("model = heisenberg\nh0 = 10,20,40\nout = {}\n", p(&out))).unwrap();
    assert_eq!(cli(&["adiabatic-scan", "--config", p(&cfg)]).0, 0);
    assert_eq!(std::fs::read(&out).unwrap(), a);
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let (code, _, err) = cli(&[
        "reeb-orbit",
        "--model",
        "heisenberg-quotient",
        "--out",
        "/nonexistent/dir/o.csv",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot write"));
}

#[test]
fn polyalg_formats() {
    assert_eq!(cli(&["polyalg", "bracket", "--p", "1,0", "--q", "0,1"]).1, "1\n");
    assert_eq!(cli(&["polyalg", "aop", "--p", "0,1,0"]).1, "1,0,-1\n");
    assert_eq!(cli(&["polyalg", "decompose", "--p", "1/2,0,3"]).1, "-5/4,0,5/4\n7/4\n");
    assert_eq!(cli(&["polyalg", "solve", "--p", "1,0,-1"]).1, "0,1,0\n");
    let (code, out, _) = cli(&["polyalg", "solve", "--p", "2,0,-2", "--float"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0,2,0\n");
    assert_eq!(cli(&["polyalg", "solve", "--p", "1,0,1"]).0, 2);
    assert_eq!(cli(&["polyalg", "aop", "--p", "1,x"]).0, 1);
    assert_eq!(cli(&["polyalg", "aop"]).0, 1);
    assert_eq!(cli(&["polyalg", "bracket", "--p", "-1,2", "--q", "0,1"]).1, "-1\n");
}

#[test]
fn spiral_scan_summary_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let (code, stdout, err) = cli(&[
        "spiral-scan",
        "--model",
        "heisenberg",
        "--h0",
        "10,20,40",
        "--out",
        p(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(first_two_lines(&out).1, "h0,J0,pos_err,vel_err,J_drift");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    for k in ["slope", "intercept", "r2", "points_used"] {
        assert!(v["pos_fit"].get(k).is_some(), "{k}");
    }
    assert_eq!(v["signs"]["eps"], -1);
    assert_eq!(v["exact"], true);
}
