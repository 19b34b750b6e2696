use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(format!("{name}.toml"))
}

fn run(args: &[&str], out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_boolrv"));
    cmd.args(args).arg("--out").arg(out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd.records().map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn bernoulli_square_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["invert", "--config", config("bernoulli_sum").to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_rows(&dir.path().join("invert_s_atoms.csv"));
    assert_eq!(header, ["location", "mass"]);
    assert_eq!(rows.len(), 2);
    let s = 2f64.sqrt();
    for (row, at) in rows.iter().zip([-s, s]) {
        assert!((row[0] - at).abs() < 1e-6 && (row[1] - 0.5).abs() < 1e-6, "{row:?}");
    }
    assert!(dir.path().join("summary.report").exists());
}

#[test]
fn empty_pipeline_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["report", "--config", config("empty_pipeline").to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let rep: toml::Value = fs::read_to_string(dir.path().join("error.report")).unwrap().parse().unwrap();
    assert_eq!(rep["kind"].as_str(), Some("config"));
    assert_eq!(rep["exit_code"].as_integer(), Some(2));
}

#[test]
fn failing_verification_writes_tables_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "--config", config("pareto_remainder").to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let csv_path = dir.path().join("verify_0_T3.1_0.csv");
    let text = fs::read_to_string(&csv_path).unwrap();
    let first = text.lines().nth(1).unwrap();
    // 17 significant digits in every field
    for field in first.split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{field}");
    }
    let (header, rows) = read_rows(&csv_path);
    assert_eq!(header, ["y", "lhs", "rhs", "ratio"]);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[1] / r[2] - r[3]).abs() <= 1e-12 * r[3].abs());
    }
    let rep: toml::Value = fs::read_to_string(dir.path().join("verify_0_T3.1_0.report")).unwrap().parse().unwrap();
    assert_eq!(rep["theorem"].as_str(), Some("T3.1"));
    assert_eq!(rep["verdict"].as_str(), Some("fail"));
    let summary: toml::Value = fs::read_to_string(dir.path().join("summary.report")).unwrap().parse().unwrap();
    assert_eq!(summary["precision"].as_str(), Some("extended"));
    assert_eq!(summary["all_passed"].as_bool(), Some(false));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = config("heavy_tails");
    for d in [&a, &b] {
        let out = run(&["report", "--config", cfg.to_str().unwrap(), "--workers", "2"], d.path(), &[]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 5);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn seed_flag_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["report", "--config", config("heavy_tails").to_str().unwrap(), "--seed", "99"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let summary: toml::Value = fs::read_to_string(dir.path().join("summary.report")).unwrap().parse().unwrap();
    assert_eq!(summary["seed"].as_integer(), Some(99));
}

#[test]
fn tolerance_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "T3.4"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["verify", "T3.4"], dir.path(), &[("BOOLRV_TOLERANCE", "1e-6")]);
    assert_eq!(out.status.code(), Some(1));
    let rep: toml::Value = fs::read_to_string(dir.path().join("verify_0_T3.4_0.report")).unwrap().parse().unwrap();
    assert_eq!(rep["tolerance"].as_float(), Some(1e-6));
}

#[test]
fn eval_writes_transform_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["eval", "--config", config("transforms").to_str().unwrap()], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_rows(&dir.path().join("eval_0_d0_cauchy.csv"));
    assert_eq!(header, ["z_re", "z_im", "value_re", "value_im"]);
    // G of the point mass at 0 is 1/z
    assert_eq!(rows[0], [0.0, 1.0, 0.0, -1.0]);
    let (_, rows) = read_rows(&dir.path().join("eval_1_d2_eta.csv"));
    // eta of the point mass at 2 is 2z
    assert!((rows[1][3] - 1.0).abs() < 1e-14);
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["verify", "T9.9"], dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run(&["report", "--config", "/definitely/missing.toml"], dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run(&["verify", "T3.4", "--workers", "0"], dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"], dir.path(), &[]).status.code(), Some(2));
    let help = Command::new(env!("CARGO_BIN_EXE_boolrv")).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
