use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mixfactor::linalg::singular_values;
use mixfactor::matgen::gen_kahan;
use mixfactor::mmio::{read_matrix_market_file, write_matrix_market_file};
use mixfactor::RealMatrix;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixfactor")).args(args).output().unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("mixfactor-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Header and records of a CSV written by the binary.
fn csv_rows(out: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out);
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn gen_kahan_matches_generator() {
    let dir = Scratch::new("kahan");
    let out = dir.path("k.mtx");
    let o = bin(&["--out", s(&out), "gen", "--family", "kahan", "--m", "4", "--c", "0.1", "--tau", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let a = read_matrix_market_file(&out).unwrap();
    assert_eq!(a, gen_kahan(4, 0.1, 0.0).unwrap());
    let sv = 0.99f64.sqrt();
    assert!((a[(1, 1)] - sv).abs() < 1e-15);
    assert!((a[(0, 3)] + 0.1).abs() < 1e-15);
}

#[test]
fn gen_condition_one_is_orthogonal() {
    let dir = Scratch::new("cond");
    let out = dir.path("c.mtx");
    let o = bin(&["--out", s(&out), "gen", "--family", "condition", "--m", "12", "--kappa", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let a = read_matrix_market_file(&out).unwrap();
    for sv in singular_values(&a).unwrap() {
        assert!((sv - 1.0).abs() < 1e-13);
    }
}

#[test]
fn solve_identity_has_zero_residual() {
    let dir = Scratch::new("ident");
    let a = dir.path("i.mtx");
    write_matrix_market_file(&a, &RealMatrix::identity(6), &[]).unwrap();
    let o = bin(&["--no-timestamp", "solve", "--a", s(&a)]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&o.stdout);
    let res = header.iter().position(|h| h == "residual").unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let r: f64 = row[res].parse().unwrap();
        // Unmixed methods solve I x = b exactly; mixing costs a few roundings.
        if row[0] == "rurv-ros-overdet" {
            assert!(r < 1e-14, "{row:?}");
        } else {
            assert_eq!(r, 0.0, "{row:?}");
        }
        assert!(row.iter().skip(5).take(4).all(|c| c == "NA"));
    }
}

#[test]
fn solve_reads_rhs_and_reports_methods() {
    let dir = Scratch::new("rhs");
    let a = dir.path("a.mtx");
    let b = dir.path("b.mtx");
    assert_eq!(
        bin(&["--out", s(&a), "gen", "--family", "correlated", "--m", "40", "--n", "60", "--p", "3"]).status.code(),
        Some(0)
    );
    write_matrix_market_file(&b, &RealMatrix::from_column(&[1.0; 40]), &[]).unwrap();
    let o = bin(&["--no-timestamp", "solve", "--a", s(&a), "--b", s(&b), "--methods", "qrcp,rurv-ros-basic,rvlu-minnorm"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv_rows(&o.stdout);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["qrcp", "rurv-ros-basic", "rvlu-minnorm"]);
    for r in &rows {
        assert!(r[3].parse::<f64>().unwrap() < 1e-10);
        assert_eq!(r.last().unwrap(), "ok");
    }
}

#[test]
fn factor_writes_triangular_factor() {
    let dir = Scratch::new("factor");
    let a = dir.path("a.mtx");
    let r = dir.path("r.mtx");
    assert_eq!(bin(&["--out", s(&a), "gen", "--family", "gap", "--m", "16", "--k", "8"]).status.code(), Some(0));
    let o = bin(&["--out", s(&r), "factor", "--input", s(&a), "--method", "rurv-ros", "--rank", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let r = read_matrix_market_file(&r).unwrap();
    assert_eq!(r.shape(), (8, 16));
    for j in 0..8 {
        for i in j + 1..8 {
            assert_eq!(r[(i, j)], 0.0);
        }
    }
}

#[test]
fn timestamps_only_in_comments() {
    let o = bin(&["exp", "mix-norms", "--m", "20", "--reps", "1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# generated-unix-time: ")));
    let (header, rows) = csv_rows(text.as_bytes());
    assert_eq!(header[0], "row");
    assert_eq!(rows.iter().filter(|r| r[0] == "mean").count(), 2);
}

#[test]
fn exit_codes() {
    let dir = Scratch::new("exit");
    // Usage.
    assert_eq!(bin(&["exp", "bogus"]).status.code(), Some(2));
    assert_eq!(bin(&["--mixes", "0", "gen", "--family", "gap"]).status.code(), Some(2));
    assert_eq!(bin(&["--format", "mm", "exp", "qlp"]).status.code(), Some(2));
    // I/O.
    assert_eq!(bin(&["factor", "--input", "/nonexistent/a.mtx"]).status.code(), Some(4));
    assert_eq!(
        bin(&["--out", "/nonexistent/dir/x.mtx", "gen", "--family", "kahan"]).status.code(),
        Some(4)
    );
    let bad = dir.path("bad.mtx");
    fs::write(&bad, "%%MatrixMarket matrix array real general\n2 2\n1\n").unwrap();
    let o = bin(&["solve", "--a", s(&bad)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.mtx"));
    // Numerical: a zero leading block defeats unpivoted QR.
    let a = dir.path("z.mtx");
    let mut m = RealMatrix::zeros(2, 3);
    m[(0, 2)] = 1.0;
    m[(1, 1)] = 1.0;
    write_matrix_market_file(&a, &m, &[]).unwrap();
    let o = bin(&["--no-timestamp", "solve", "--a", s(&a), "--methods", "qr-basic,qrcp"]);
    assert_eq!(o.status.code(), Some(3));
    let (_, rows) = csv_rows(&o.stdout);
    assert!(rows[0].last().unwrap().starts_with("failed"));
    assert_eq!(rows[1].last().unwrap(), "ok");
}
