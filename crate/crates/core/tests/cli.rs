use std::path::Path;
use std::process::{Command, Output};

fn pmefront(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmefront"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn wave_reports_m2_constants() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmefront(&["wave", "--m", "2", "--out", "w"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["c"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["cstar"].as_f64().unwrap() - 0.5).abs() < 2e-3);
    assert!((v["c_prime"].as_f64().unwrap() + 0.5).abs() < 1e-3);
    assert!((v["gamma"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    for key in ["m", "alpha", "residuals"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let csv = std::fs::read_to_string(dir.path().join("w/profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,phi,Phi"));
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(last, vec![0.0, 0.0, 0.0]);
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("w/wave.json")).unwrap()).unwrap();
    assert_eq!(file, v);
}

#[test]
fn wave_rejects_m_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pmefront(&["wave", "--m", "1.0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn wave_speeds_obey_the_lipschitz_bound() {
    let dir = tempfile::tempdir().unwrap();
    let c = |alpha: &str| json(&pmefront(&["wave", "--m", "2", "--alpha", alpha], dir.path()))["c"].as_f64().unwrap();
    let (c3, c2) = (c("0.3"), c("0.2"));
    let drop = c2 - c3;
    assert!(drop >= -2e-10 && drop <= 2.0 * 0.1 + 2e-10, "c(0.2) - c(0.3) = {drop}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pmefront(&["verify", "--bogus"], dir.path()).status.code(), Some(2));
    assert_eq!(pmefront(&["nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(pmefront(&["wave"], dir.path()).status.code(), Some(2));
    assert_eq!(pmefront(&["fit", "--series", "missing.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let out = pmefront(&["verify", "--quick", "--json", "v.json"], dir.path());
    assert!(start.elapsed().as_secs() < 60);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 5);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    let ids: Vec<u64> = summary["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![1, 2, 3, 4, 5]);
}

fn write_config(dir: &Path, name: &str, body: &str) {
    std::fs::write(dir.join(name), body).unwrap();
}

#[test]
fn simulate_1d_spreads_at_unit_speed() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.cfg", "m = 2\ndim = 1\ndr = 0.1\nt_end = 200\nout_dir = res\n");
    let out = pmefront(&["simulate", "--config", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("res");
    for f in ["series.csv", "config.txt", "summary.json", "metadata.json"] {
        assert!(res.join(f).exists(), "missing {f}");
    }
    let series = pmefront::sim::read_series(&res.join("series.csv")).unwrap();
    let last = series.rows.last().unwrap();
    assert_eq!(last.t, 200.0);
    assert!((last.h / last.t - 1.0).abs() < 0.03, "h/t = {}", last.h / last.t);
}

#[test]
fn simulate_extends_small_domain_and_notes_it() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "run.cfg", "t_end = 20\nr_max = 5\ndr = 0.1\nout_dir = res\n");
    let out = pmefront(&["simulate", "--config", "run.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("extended"), "{stderr}");
}

#[test]
fn simulate_rejects_zero_data_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "zero.cfg", "plateau_height = 0\n");
    assert_eq!(pmefront(&["simulate", "--config", "zero.cfg"], dir.path()).status.code(), Some(2));
    write_config(dir.path(), "typo.cfg", "t_ned = 5\n");
    assert_eq!(pmefront(&["simulate", "--config", "typo.cfg"], dir.path()).status.code(), Some(2));
    assert_eq!(pmefront(&["simulate", "--config", "absent.cfg"], dir.path()).status.code(), Some(2));
}

#[test]
fn simulate_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_config(
        dir.path(),
        "run.cfg",
        "dim = 2\ndr = 0.1\nt_end = 30\nsnapshot_times = 15, 30\nout_dir = a\n",
    );
    for out_dir in ["a", "b"] {
        let out = pmefront(&["simulate", "--config", "run.cfg", "--out", out_dir], dir.path());
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["series.csv", "summary.json", "snap_t15.csv", "snap_t30.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
    // the echoed config reproduces the run
    let echoed = dir.path().join("a/config.txt");
    let out = pmefront(
        &["simulate", "--config", echoed.to_str().unwrap(), "--out", "c"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("a/series.csv")).unwrap(),
        std::fs::read(dir.path().join("c/series.csv")).unwrap()
    );
}

fn synthetic_series(path: &Path, rows: usize, c: f64, b: f64, r0: f64) {
    let mut text = String::from("t,h,hdot,front_flux,max_flux\n");
    for k in 0..rows {
        let t = 10.0 + 0.5 * k as f64;
        let h = c * t - b * t.ln() + r0;
        text.push_str(&format!("{t},{h},{},{},0.25\n", c - b / t, -(c - b / t)));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn fit_recovers_synthetic_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_series(&dir.path().join("s.csv"), 200, 1.0, 0.5, 3.0);
    let out = pmefront(
        &["fit", "--series", "s.csv", "--window", "10,110", "--predicted-B", "0.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!((v["c_hat"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((v["B_hat"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!((v["r0_hat"].as_f64().unwrap() - 3.0).abs() < 1e-7);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert_eq!(v["predicted_B"].as_f64(), Some(0.5));
    assert_eq!(v["window"], serde_json::json!([10.0, 110.0]));
    assert!(v.get("rms").is_some());
}

#[test]
fn fit_on_three_rows_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    synthetic_series(&dir.path().join("s.csv"), 200, 1.0, 0.5, 3.0);
    let out = pmefront(&["fit", "--series", "s.csv", "--window", "10,11"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let out = pmefront(&["fit", "--series", "s.csv", "--window", "11,10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
