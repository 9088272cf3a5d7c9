use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pencil::mtx::{read_matrix, write_matrix};
use pencil_core::linalg::{diag_real, identity, solve};
use pencil_core::{c64, CMatrix};

fn pencil(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pencil")).args(args).current_dir(cwd).output().unwrap()
}

fn write(dir: &Path, name: &str, m: &CMatrix) -> PathBuf {
    let path = dir.join(name);
    write_matrix(&path, m).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn diagonalize_diagonal_pencil() {
    let dir = tempfile::tempdir().unwrap();
    let values = [0.5, -0.25, 0.75, 0.1];
    write(dir.path(), "A.mtx", &diag_real(&values));
    write(dir.path(), "B.mtx", &identity(4));
    let out = pencil(&["diagonalize", "A.mtx", "B.mtx", "--eps", "1e-4", "--seed", "3", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let d: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("res/D.json")).unwrap()).unwrap();
    let mut got: Vec<f64> = d["eigenvalues"].as_array().unwrap().iter().map(|e| e["re"].as_f64().unwrap()).collect();
    got.sort_by(f64::total_cmp);
    let mut want = values.to_vec();
    want.sort_by(f64::total_cmp);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-4, "{g} vs {w}");
    }
    assert!(d["metrics"]["success"].as_bool().unwrap());

    // B·T = S up to the residual.
    let s = read_matrix(&dir.path().join("res/S.mtx")).unwrap();
    let t = read_matrix(&dir.path().join("res/T.mtx")).unwrap();
    let r = &t - &s;
    assert!(r.norm_l2() <= 1e-3 * s.norm_l2());
}

#[test]
fn fixed_seed_reproduces_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = CMatrix::from_fn(5, 5, |i, j| c64::new(((i * 7 + j * 3) % 5) as f64 / 5.0 - 0.4, (i as f64 - j as f64) / 10.0));
    write(dir.path(), "A.mtx", &a);
    write(dir.path(), "B.mtx", &identity(5));
    for run in ["r1", "r2"] {
        let out = pencil(&["diagonalize", "A.mtx", "B.mtx", "--eps", "1e-5", "--seed", "11", "--out", run], dir.path());
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    for file in ["S.mtx", "T.mtx", "D.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("r1").join(file)).unwrap(),
            std::fs::read(dir.path().join("r2").join(file)).unwrap(),
            "{file} differs"
        );
    }
}

#[test]
fn mismatched_sizes_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "A.mtx", &identity(3));
    write(dir.path(), "B.mtx", &identity(4));
    let out = pencil(&["diagonalize", "A.mtx", "B.mtx", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr(&out);
    assert!(msg.contains("3x3") && msg.contains("4x4"), "{msg}");
    assert!(!dir.path().join("res").exists());
}

#[test]
fn malformed_input_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("A.mtx"), "not a matrix\n").unwrap();
    write(dir.path(), "B.mtx", &identity(2));
    let out = pencil(&["diagonalize", "A.mtx", "B.mtx"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("A.mtx"));
}

#[test]
fn bad_flags_exit_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "A.mtx", &identity(2));
    write(dir.path(), "B.mtx", &identity(2));
    for args in [
        vec!["diagonalize", "A.mtx", "B.mtx", "--eps", "0", "--out", "res"],
        vec!["diagonalize", "A.mtx", "B.mtx", "--mode", "fast", "--out", "res"],
        vec!["diagonalize", "A.mtx", "B.mtx", "--cutoff", "0", "--out", "res"],
        vec!["pseudospectrum", "A.mtx", "B.mtx", "--resolution", "1", "--out", "res"],
        vec!["experiment", "fig4", "--out", "res"],
    ] {
        let out = pencil(&args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
    }
    assert!(!dir.path().join("res").exists());
}

#[test]
fn theoretical_mode_is_rejected_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "A.mtx", &diag_real(&[0.5, -0.5]));
    write(dir.path(), "B.mtx", &identity(2));
    let out = pencil(&["diagonalize", "A.mtx", "B.mtx", "--mode", "theoretical", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn clustered_spectrum_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = CMatrix::from_fn(5, 5, |i, j| c64::new(if i == j { 0.3 + 0.01 * i as f64 } else { 0.0 }, 0.0));
    write(dir.path(), "A.mtx", &a);
    write(dir.path(), "B.mtx", &identity(5));
    let args = ["diagonalize", "A.mtx", "B.mtx", "--eps", "1e-3", "--omega", "1", "--out", "res"];
    let out = pencil(&args, dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn help_lists_exit_codes() {
    let out = pencil(&["--help"], Path::new("."));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for code in ["0  success", "1  usage", "2  no admissible split", "3  I/O", "4  accuracy"] {
        assert!(text.contains(code), "missing '{code}'");
    }
}

#[test]
fn pseudospectrum_of_identity_pencil() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "I.mtx", &identity(3));
    let out = pencil(
        &["pseudospectrum", "I.mtx", "I.mtx", "--region", "-1.5,2.5,-1.3,1.7", "--resolution", "5", "--product", "--out", "f.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let mut reader = csv::Reader::from_path(dir.path().join("f.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["re", "im", "pencil", "product"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 25);
    for row in rows.iter().step_by(5) {
        let z = c64::new(row[0].parse().unwrap(), row[1].parse().unwrap());
        let want = ((1.0 + z.norm()) / (c64::new(1.0, 0.0) - z).norm()).log10();
        let got: f64 = row[2].parse().unwrap();
        assert!((got - want).abs() <= 1e-10, "{z}: {got} vs {want}");
        let product: f64 = row[3].parse().unwrap();
        assert!((product + (c64::new(1.0, 0.0) - z).norm().log10()).abs() <= 1e-10);
    }
}

#[test]
fn shatter_check_on_separated_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "A.mtx", &diag_real(&[-1.25, 0.75, 1.75]));
    write(dir.path(), "B.mtx", &identity(3));
    let args = ["shatter-check", "A.mtx", "B.mtx", "--eps", "1e-3", "--omega", "0.5", "--origin", "-4,-3.75", "--out", "s.json"];
    let out = pencil(&args, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(s["report"]["shattered"], true);
    assert_eq!(s["report"]["eigenvalue_boxes"].as_array().unwrap().len(), 3);

    // An eigenvalue on a grid line is reported as an accuracy miss.
    let args = ["shatter-check", "A.mtx", "B.mtx", "--eps", "1e-3", "--omega", "0.5", "--origin", "-4.25,-4", "--out", "t.json"];
    let out = pencil(&args, dir.path());
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn experiment_and_compare_bundles() {
    let dir = tempfile::tempdir().unwrap();
    let out = pencil(&["experiment", "planted", "--n", "10", "--runs", "3", "--eps", "1e-5", "--out", "exp"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("exp/summary.json")).unwrap()).unwrap();
    assert!(s["failures"].as_u64().unwrap() <= 3);
    assert_eq!(s["config"]["n"], 10);
    assert_eq!(s["runs"].as_array().unwrap().len(), 3);
    assert!(dir.path().join("exp/runs.csv").exists() && dir.path().join("exp/histograms.csv").exists());

    let out = pencil(&["compare", "singular-b", "--n", "12", "--cutoff", "4", "--runs", "2", "--out", "cmp"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("cmp/summary.json")).unwrap()).unwrap();
    assert!(s["runs"][0]["comparator"].is_object());
}

#[test]
fn custom_experiment_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let b = CMatrix::from_fn(4, 4, |i, j| c64::new(if i == j { 1.0 } else { 0.1 }, 0.0));
    let a = &b * diag_real(&[0.9, -0.4, 0.2, -0.7]);
    write(dir.path(), "A.mtx", &a);
    write(dir.path(), "B.mtx", &b);
    let out = pencil(&["experiment", "custom", "--a", "A.mtx", "--b", "B.mtx", "--runs", "2", "--eps", "1e-4", "--out", "c"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("c/summary.json")).unwrap()).unwrap();
    assert_eq!(s["config"]["n"], 4);
    assert_eq!(s["failures"], 0);
    let oracle = solve(&b, &a).unwrap();
    assert!(s["runs"][0]["eigen_error"].as_f64().unwrap() <= 1e-3 * oracle.norm_l2());
}

#[test]
fn planted_experiment_scaled() {
    let dir = tempfile::tempdir().unwrap();
    let out = pencil(&["experiment", "planted", "--runs", "20", "--eps", "1e-6", "--seed", "2", "--out", "p"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("p/summary.json")).unwrap()).unwrap();
    assert!(s["failures"].as_u64().unwrap() <= 1, "{}", s["failures"]);
    assert_eq!(s["config"]["cutoff"], 1);
}
