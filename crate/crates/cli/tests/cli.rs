use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_specsing"));
    c.env_remove("SPECSING_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("specsing-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn identity_with_defaults_passes() {
    let o = run(&["verify-identity"]);
    assert_eq!(o.status.code(), Some(0));
    let res = column(&stdout(&o), "residual");
    assert_eq!(res.len(), 4);
    assert!(res.iter().all(|r| r.parse::<f64>().unwrap() <= 1e-6));
}

#[test]
fn empty_grid_is_a_validation_error() {
    assert_eq!(run(&["kernel-eval", "--grid-x"]).status.code(), Some(1));
    let cfg = scratch("empty.toml");
    std::fs::write(&cfg, "command = \"kernel-eval\"\ngrid_x = []\n").unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["density-eval", "--beta", "1"]).status.code(), Some(1));
    assert_eq!(run(&["kernel-eval", "--p", "-1"]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two() {
    assert_eq!(run(&["density-limit", "--grid-x", "1e4"]).status.code(), Some(2));
}

#[test]
fn verification_failure_exits_with_three() {
    let cfg = scratch("strict.toml");
    std::fs::write(&cfg, "command = \"verify-identity\"\n[tolerances]\nidentity = 1e-30\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("false"));
}

#[test]
fn uniform_case_converges_at_rate_two() {
    let o = run(&["converge", "--p", "0", "--q", "0", "--grid-x", "1", "--grid-y", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let series = column(&csv, "series");
    let slopes = column(&csv, "slope");
    let i = series.iter().position(|s| s == "order0").unwrap();
    let s: f64 = slopes[i].parse().unwrap();
    assert!((s + 2.0).abs() < 0.1, "{s}");
}

#[test]
fn output_is_deterministic_across_threads() {
    let args = ["kernel-eval", "--n-list", "20,40", "--grid-x", "0.5,1,2", "--grid-y", "1.5,3"];
    let a = bin().args(args).args(["--threads", "1"]).output().unwrap();
    let b = bin().args(args).env("SPECSING_THREADS", "3").output().unwrap();
    let c = bin().args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn json_round_trips() {
    let out = scratch("limit.json");
    let o = run(&[
        "kernel-limit",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
        "--grid-x",
        "1,2",
        "--grid-y",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], "kernel-limit");
    let cols = v["columns"].as_array().unwrap();
    assert_eq!(cols[2], "k_inf_re");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let csv = stdout(&run(&["kernel-limit", "--grid-x", "1,2", "--grid-y", "0.5"]));
    let k: Vec<f64> = column(&csv, "k_inf_re").iter().map(|s| s.parse().unwrap()).collect();
    for (r, want) in rows.iter().zip(k) {
        assert_eq!(r[2].as_f64().unwrap(), want);
    }
}

#[test]
fn floats_carry_seventeen_digits() {
    let csv = stdout(&run(&["density-limit", "--grid-x", "1"]));
    let v = &column(&csv, "rho_inf")[0];
    let mantissa = v.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{v}");
}

#[test]
fn flags_override_config() {
    let cfg = scratch("over.toml");
    std::fs::write(&cfg, "command = \"density-limit\"\np = 0.0\nq = 0.0\ngrid_x = [1.0]\n").unwrap();
    let base = stdout(&run(&["--config", cfg.to_str().unwrap()]));
    let rho: f64 = column(&base, "rho_inf")[0].parse().unwrap();
    assert!((rho - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
    let over = stdout(&run(&["--config", cfg.to_str().unwrap(), "--p", "1.5"]));
    assert_ne!(base, over);
}

#[test]
fn morris_and_ortho_checks_pass() {
    assert_eq!(run(&["morris-check", "--n-list", "1,2"]).status.code(), Some(0));
    let o = run(&["ortho-check", "--p", "0.5", "--q", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(column(&stdout(&o), "rel_err").len(), 28);
}

#[test]
fn density_expansion_and_totals() {
    let o = run(&["converge", "--target", "density"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(column(&csv, "gap_decreasing").iter().all(|g| g == "true"));
    let s: f64 = column(&csv, "slope_after_l1")[0].parse().unwrap();
    assert!((-2.4..=-1.6).contains(&s));
    let t = stdout(&run(&["density-eval", "--target", "total", "--beta", "4", "--n-list", "3"]));
    let err: f64 = column(&t, "abs_err")[0].parse().unwrap();
    assert!(err < 1e-4);
}

#[test]
fn confluent_rate_halves() {
    let csv = stdout(&run(&["converge", "--target", "confluent"]));
    let ratios = column(&csv, "ratio");
    assert_eq!(ratios[0], "");
    assert!(ratios[1..].iter().all(|r| (0.4..=0.6).contains(&r.parse::<f64>().unwrap())));
}

#[test]
fn bessel_column_matches_gauged_limit() {
    let csv = stdout(&run(&["kernel-limit", "--p", "1.5", "--q", "0"]));
    for (g, b) in column(&csv, "k_inf_gauged").iter().zip(column(&csv, "closed_form")) {
        let (g, b): (f64, f64) = (g.parse().unwrap(), b.parse().unwrap());
        assert!((g - b).abs() < 1e-8);
    }
    assert_eq!(run(&["kernel-eval", "--target", "total"]).status.code(), Some(1));
}
