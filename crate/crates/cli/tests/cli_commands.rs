use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clda::eval::{default_grid, kfold_cv, CvConfig, Method, DEFAULT_QUANTILES};
use clda::synth::derive_seed;
use clda::Dataset;
use tempfile::TempDir;

fn iris() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv")
}

fn clda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clda"))
        .args(args)
        .env_remove("CLDA_THREADS")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parses an output file the same way inputs are read.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

fn iris_dataset() -> Dataset {
    let (_, rows) = read_csv(&iris());
    let mut x = ndarray::Array2::zeros((4, rows.len()));
    let mut labels = Vec::new();
    for (j, row) in rows.iter().enumerate() {
        for i in 0..4 {
            x[[i, j]] = row[i].parse().unwrap();
        }
        labels.push(row[4].clone());
    }
    Dataset::new(x, &labels).unwrap()
}

#[test]
fn fit_writes_projection_and_trace() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.csv");
    let t = dir.path().join("t.csv");
    let out = clda(&[
        "fit", "--method", "clda", "--input", s(&iris()), "--label-col", "species", "--d", "2",
        "--epsilon-quantile", "0.9", "--out", s(&w), "--trace-out", s(&t),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(fs::read_to_string(&w).unwrap().starts_with("# schema=1\n"));
    let (headers, rows) = read_csv(&w);
    assert_eq!(headers, vec!["w1", "w2"]);
    assert_eq!(rows.len(), 4);
    let (_, trace) = read_csv(&t);
    let values: Vec<f64> = trace.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values.len() >= 2);
    assert!(values.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-10)));
}

#[test]
fn fit_lda_with_label_index() {
    let dir = TempDir::new().unwrap();
    let w = dir.path().join("w.csv");
    let out = clda(&["fit", "--method", "lda", "--input", s(&iris()), "--label-col", "4", "--d", "2", "--out", s(&w)]);
    assert!(out.status.success());
    assert_eq!(read_csv(&w).1.len(), 4);
}

#[test]
fn missing_input_exits_2_naming_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = clda(&["fit", "--input", s(&missing), "--out", s(&dir.path().join("w.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
}

#[test]
fn non_numeric_cell_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b,label\n1,2,x\n3,oops,y\n").unwrap();
    let out = clda(&["fit", "--input", s(&bad), "--out", s(&dir.path().join("w.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oops"));
}

#[test]
fn zero_dimension_exits_1() {
    let dir = TempDir::new().unwrap();
    let out = clda(&["fit", "--input", s(&iris()), "--d", "0", "--out", s(&dir.path().join("w.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("d must be"));
}

#[test]
fn bad_thread_count_exits_1() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_clda"))
        .args(["fit", "--input", s(&iris()), "--out", s(&dir.path().join("w.csv"))])
        .env("CLDA_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_rows_match_library() {
    let dir = TempDir::new().unwrap();
    let e = dir.path().join("e.csv");
    let out = clda(&["eval", "--input", s(&iris()), "--repetitions", "3", "--seed", "5", "--out", s(&e)]);
    assert!(out.status.success());
    let (headers, rows) = read_csv(&e);
    assert_eq!(headers[2], "accuracy");
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[3][0], "mean");

    let data = iris_dataset();
    let grid = default_grid(Method::Clda, 4, 3, &DEFAULT_QUANTILES);
    for r in 0..3u64 {
        let report = kfold_cv(&data, &CvConfig::new(Method::Clda, grid.clone(), derive_seed(5, 2 * r))).unwrap();
        assert_eq!(rows[r as usize][2], report.accuracy.to_string());
    }
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains('±'));
}

#[test]
fn eval_records_noise_spec() {
    let dir = TempDir::new().unwrap();
    let e = dir.path().join("e.csv");
    let out = clda(&[
        "eval", "--method", "lda", "--input", s(&iris()), "--folds", "5", "--noise-features", "0.3",
        "--noise-samples", "0.1", "--noise-variance", "0.05", "--out", s(&e),
    ]);
    assert!(out.status.success());
    let (headers, rows) = read_csv(&e);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    assert_eq!(rows[0][col("noise_features")], "0.3");
    assert_eq!(rows[0][col("noise_samples")], "0.1");
    assert_eq!(rows[0][col("noise_variance")], "0.05");
    assert_eq!(rows[0][col("noise_seed")], derive_seed(0, 1).to_string());
}

#[test]
fn partial_noise_flags_exit_1() {
    let dir = TempDir::new().unwrap();
    let out = clda(&[
        "eval", "--input", s(&iris()), "--noise-features", "0.3", "--out", s(&dir.path().join("e.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn artificial_schema_and_gap() {
    let dir = TempDir::new().unwrap();
    let out = clda(&["artificial", "--out-dir", s(dir.path())]);
    assert!(out.status.success());
    let (headers, rows) = read_csv(&dir.path().join("results.csv"));
    assert_eq!(&headers[..5], &["run", "data_seed", "method", "accuracy", "angle_deg"]);
    assert_eq!(rows.len(), 20);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][2], "LDA");
        assert_eq!(pair[1][2], "CLDA");
        assert_eq!(pair[1][3], "100");
        let lda_angle: f64 = pair[0][4].parse().unwrap();
        let clda_angle: f64 = pair[1][4].parse().unwrap();
        assert!(lda_angle > clda_angle);
    }
    let (_, points) = read_csv(&dir.path().join("points.csv"));
    assert_eq!(points.len(), 10 * 246);
    let (_, dirs) = read_csv(&dir.path().join("directions.csv"));
    assert_eq!(dirs.len(), 20);
}

#[test]
fn noise_command_changes_expected_cells() {
    let dir = TempDir::new().unwrap();
    let n = dir.path().join("n.csv");
    let out = clda(&["noise", "--input", s(&iris()), "--seed", "9", "--out", s(&n)]);
    assert!(out.status.success());
    let (h0, r0) = read_csv(&iris());
    let (h1, r1) = read_csv(&n);
    assert_eq!(h0, h1);
    let changed: usize = r0
        .iter()
        .zip(&r1)
        .map(|(a, b)| a.iter().zip(b).filter(|(x, y)| x != y).count())
        .sum();
    // ceil(0.1 * 150) samples times ceil(0.3 * 4) features
    assert_eq!(changed, 15 * 2);
    assert!(r0.iter().zip(&r1).all(|(a, b)| a[4] == b[4]));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(clda(&["eval", "--input", s(&iris()), "--repetitions", "2", "--out", s(&a)]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_clda"))
        .args(["eval", "--input", s(&iris()), "--repetitions", "2", "--out", s(&b)])
        .env("CLDA_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
