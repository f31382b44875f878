use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disclosure-eq"))
        .args(args)
        .env_remove("DISCLOSURE_EQ_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing in {v}"))
}

const FIG3A: [&str; 12] = [
    "--beta", "0.5", "--q", "0.8", "--r", "0.5", "--r0", "1", "--mu0", "1", "--sigma", "0.5",
];

#[test]
fn solve_matches_fixture() {
    let mut args = vec!["solve", "--json"];
    args.extend(FIG3A);
    let v = json(&args);
    assert_eq!(v["case"], "short");
    assert!((num(&v, "x_low") - 1.126_419_921_560_437_7).abs() < 1e-10);
    assert!((num(&v, "x_high") - 2.097_064_453_159_951_4).abs() < 1e-10);
    assert!(num(&v, "bayes_gap") < 1e-8);
}

#[test]
fn solve_human_table_and_config_echo() {
    let mut args = vec!["solve"];
    args.extend(FIG3A);
    let out = run(&args);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("x_low            1.12641992156"),
        "{stdout}"
    );
    assert!(stdout.contains("regions"));
    let stderr = String::from_utf8(out.stderr).unwrap();
    let echo = stderr
        .lines()
        .find(|l| l.starts_with("# config: "))
        .unwrap();
    let cfg: Value = serde_json::from_str(&echo["# config: ".len()..]).unwrap();
    assert_eq!(cfg["point"]["alpha"], 1.0);
    assert_eq!(cfg["seed"], 20240601);
    assert_eq!(cfg["model"], "baseline");
}

#[test]
fn degenerate_r_fails() {
    let out = run(&["solve", "--r", "1", "--r0", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("degenerate case"), "{stderr}");
}

#[test]
fn invalid_parameter_is_usage_error() {
    let out = run(&["solve", "--beta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
    assert_eq!(run(&["solve", "--grid", "beta=1:0"]).status.code(), Some(2));
}

#[test]
fn extension_reports_cutoff_and_case() {
    let v = json(&[
        "solve",
        "--model",
        "extension",
        "--beta",
        "0.7",
        "--p",
        "0.5",
        "--r",
        "0.5",
        "--json",
    ]);
    assert_eq!(v["case"], "below_r_bar");
    assert!((num(&v, "r_bar") - 1.160_112_863_648_332_1).abs() < 1e-9);
    assert!((num(&v, "x_low") - 1.096_057_174_470_101_2).abs() < 1e-10);
    assert!((num(&v, "x_high") - 2.301_314_275_176_632_9).abs() < 1e-10);
    assert_eq!(num(&v, "firm_threshold"), num(&v, "mu_nd"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"beta": 0.9, "q": 0.8, "r": 2.0, "alpha": 0.5}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = json(&["solve", "--config", c, "--json"]);
    assert_eq!(num(&from_file, "beta"), 0.9);
    assert_eq!(from_file["case"], "long");
    let flagged = json(&["solve", "--config", c, "--beta", "0.5", "--json"]);
    assert_eq!(num(&flagged, "beta"), 0.5);
    assert_eq!(num(&flagged, "r"), 2.0);

    std::fs::write(&cfg, r#"{"betta": 0.9}"#).unwrap();
    assert_eq!(run(&["solve", "--config", c]).status.code(), Some(2));
}

#[test]
fn dist_file_sets_family() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("x.json");
    std::fs::write(&d, r#"{"family": "logistic", "mu": 1.0, "scale": 0.3}"#).unwrap();
    let v = json(&["solve", "--dist-file", d.to_str().unwrap(), "--json"]);
    assert_eq!(num(&v, "sigma"), 0.3);
    let normal = json(&["solve", "--sigma", "0.3", "--json"]);
    assert_ne!(num(&v, "x_low"), num(&normal, "x_low"));
}

#[test]
fn sweep_rows_follow_grid_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = out.to_str().unwrap();
    let args = [
        "sweep",
        "--grid",
        "beta=0.1:0.9:3",
        "--grid",
        "r=0.5,1,2",
        "--out",
        o,
    ];
    let status = Command::new(env!("CARGO_BIN_EXE_disclosure-eq"))
        .args(args)
        .env("DISCLOSURE_EQ_THREADS", "3")
        .output()
        .unwrap();
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# equilibrium sweep"));
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("# columns: alpha, beta"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 9);
    let cells: Vec<(String, String)> = rows
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[1].to_string(), f[3].to_string())
        })
        .collect();
    assert_eq!(cells[0], ("0.1".into(), "0.5".into()));
    assert_eq!(cells[1], ("0.1".into(), "1".into()));
    assert_eq!(cells[3], ("0.5".into(), "0.5".into()));
    // r = r0 cells are reported, not fatal.
    assert!(rows[1].contains("degenerate case"));
    assert!(rows[0].ends_with(",ok"));

    // Same config, same bytes.
    assert!(run(&args).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn sweep_requires_grid() {
    assert_ne!(run(&["sweep"]).status.code(), Some(0));
}

#[test]
fn sensitivity_methods_agree() {
    let v = json(&["sensitivity", "--method", "both", "--r", "2", "--json"]);
    for k in [
        "d_xlow_d_beta",
        "d_xhigh_d_q",
        "d_misleading_d_q",
        "d_price_reaction_d_beta",
    ] {
        let (a, f) = (num(&v, k), num(&v, &format!("fd_{k}")));
        assert!((a - f).abs() <= 1e-4 * a.abs().max(1e-6), "{k}: {a} vs {f}");
    }
    assert!(num(&v, "d_misleading_d_beta") < 0.0);
}

#[test]
fn deviation_check_exit_codes() {
    let ok = run(&["check-deviations", "--grid", "r=0.5,2"]);
    assert!(ok.status.success());
    assert!(String::from_utf8(ok.stdout)
        .unwrap()
        .contains(",equilibrium,ok"));

    let bad = run(&[
        "check-deviations",
        "--model",
        "extension",
        "--beta",
        "0.7",
        "--p",
        "0.5",
        "--r",
        "1.1",
        "--json",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["verdict"], "violated");
    assert_eq!(v["worst_state"], "partially informed");
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate", "--alpha", "0.5", "--paths", "20000", "--seed", "7", "--json",
    ];
    let a = json(&args);
    assert_eq!(a, json(&args));
    assert_eq!(a["n_paths"], 20000);
    assert_eq!(num(&a, "uninformed_max_abs_profit"), 0.0);
    let other = json(&[
        "simulate", "--alpha", "0.5", "--paths", "20000", "--seed", "8", "--json",
    ]);
    assert_ne!(a["empirical_mu_nd"], other["empirical_mu_nd"]);
    assert_ne!(run(&["simulate", "--grid", "q=0,1"]).status.code(), Some(0));
}

fn figure(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(dir.join(format!("{name}.csv"))).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn figures_written_and_stable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("figs");
    let ds = d.to_str().unwrap();
    assert!(run(&["figures", "--out", ds]).status.success());
    for name in ["fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d"] {
        assert!(d.join(format!("{name}.csv")).exists(), "{name}");
    }
    let (cols, rows) = figure(&d, "fig3a");
    assert_eq!(cols, ["q", "x_low", "x_high", "elaborateness"]);
    assert_eq!(rows.len(), 21);
    assert!(rows.windows(2).all(|w| w[1][3] >= w[0][3]));

    // Thresholds converge toward r0 from below and diverge above it.
    let (_, a) = figure(&d, "fig4a");
    let width = |row: &Vec<f64>| row[2] - row[1];
    let below: Vec<f64> = a.iter().filter(|r| r[0] < 1.0).map(width).collect();
    let above: Vec<f64> = a.iter().filter(|r| r[0] > 1.0).map(width).collect();
    assert!(below.windows(2).all(|w| w[1] < w[0]));
    assert!(above.windows(2).all(|w| w[1] > w[0]));

    let (_, wide) = figure(&d, "fig4d");
    assert!(wide[1][1] < wide[0][1]);

    let first = std::fs::read(d.join("fig4b.csv")).unwrap();
    assert!(run(&["figures", "--out", ds]).status.success());
    assert_eq!(std::fs::read(d.join("fig4b.csv")).unwrap(), first);
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "").unwrap();
    let target = file.join("sub");
    let out = run(&["figures", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
