use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use num_complex::Complex64;
use qdeflect::{ChannelHeader, SMatrixBlock};
use tempfile::TempDir;

fn qdeflect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdeflect")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn two_wave(dir: &TempDir) -> PathBuf {
    let one = Complex64::new(1.0, 0.0);
    let block = SMatrixBlock::new(ChannelHeader::new(1.0, 0, 0, 1), [(0, 0, 0, one), (1, 0, 0, one)]).unwrap();
    write(dir, "two_wave.dat", &block.to_text())
}

#[test]
fn superunitary_entries_only_warn() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "big.dat", "k 1.0\nchannel j=0 jp=0 v=0 vp=0 Jmax=0\n0 0 0 2.0 0.0\n");
    let out = qdeflect(&["dcs", s(&input), "--grid-deg", "90"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn output_carries_provenance_header() {
    let dir = TempDir::new().unwrap();
    let input = two_wave(&dir);
    let text = stdout(&qdeflect(&["dcs", s(&input), "--grid-deg", "30"]));
    let header: Vec<&str> = text.lines().take(4).collect();
    assert!(header[0].starts_with("# qdeflect "));
    assert_eq!(header[1], format!("# command: dcs {} --grid-deg 30", s(&input)));
    assert!(header[2].contains("sha256="));
    assert_eq!(header[3], "# parameters: grid_deg=30");
    let body = rows(&text);
    assert_eq!(body.len(), 7);
    assert_eq!(body[0], vec!["0.000000", "4.00000000e0"]);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = TempDir::new().unwrap();
    let input = two_wave(&dir);
    let out = dir.path().join("q.csv");
    assert!(qdeflect(&["qmdf", s(&input), "--grid-deg", "10", "--out", s(&out)]).status.success());
    let printed = stdout(&qdeflect(&["qmdf", s(&input), "--grid-deg", "10"]));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), printed);
}

#[test]
fn qmdf_rows_sum_to_sum_j() {
    let dir = TempDir::new().unwrap();
    let input = two_wave(&dir);
    let map = rows(&stdout(&qdeflect(&["qmdf", s(&input), "--grid-deg", "5"])));
    let sums = rows(&stdout(&qdeflect(&["sum-j", s(&input), "--grid-deg", "5"])));
    assert_eq!(map.len(), 2 * sums.len());
    for (i, row) in sums.iter().enumerate() {
        let terms: Vec<f64> = map[2 * i..2 * i + 2].iter().map(|r| r[2].parse().unwrap()).collect();
        let expect: f64 = row[1].parse().unwrap();
        let scale = terms.iter().map(|t| t.abs()).sum::<f64>();
        assert!((terms.iter().sum::<f64>() - expect).abs() <= 1e-8 * scale, "row {i}");
    }
    let negative = map.iter().any(|r| r[2].starts_with('-'));
    assert!(negative);
}

#[test]
fn cqdf_of_linear_model_is_constant() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "linear.model", "kind = linear\nJ_max = 20\neta = 0, -0.2\n");
    let block = stdout(&qdeflect(&["synth", s(&spec)]));
    let input = write(&dir, "linear.dat", &block);
    let curve = rows(&stdout(&qdeflect(&["cqdf", s(&input)])));
    assert_eq!(curve.len(), 21);
    for r in &curve {
        let t: f64 = r[1].parse().unwrap();
        assert!((t - (std::f64::consts::PI - 0.4)).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn unwrap_tie_exits_with_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let one = Complex64::new(1.0, 0.0);
    let block = SMatrixBlock::new(ChannelHeader::new(1.0, 0, 0, 4), (0..=4).map(|j| (j, 0, 0, one))).unwrap();
    let input = write(&dir, "tie.dat", &block.to_text());
    let out = qdeflect(&["cqdf", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let one_sided = stdout(&qdeflect(&["cqdf", s(&input), "--unwrap", "one-sided"]));
    assert_eq!(rows(&one_sided).len(), 5);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.dat", "k 1.0\nchannel j=0 jp=0 v=0 vp=0 Jmax=2\n0 1 0 0.1 0.0\n");
    assert_eq!(qdeflect(&["dcs", s(&bad)]).status.code(), Some(1));
    let garbled = write(&dir, "garbled.dat", "k 1.0\nchannel j=0 jp=0 v=0 vp=0 Jmax=2\n0 0 0 one 0.0\n");
    let out = qdeflect(&["dcs", s(&garbled)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(qdeflect(&["dcs", "/nonexistent/block.dat"]).status.code(), Some(1));
    assert_eq!(qdeflect(&["frobnicate"]).status.code(), Some(1));
    let input = two_wave(&dir);
    assert_eq!(qdeflect(&["sum-j", s(&input), "--jmin", "0", "--jmax", "5"]).status.code(), Some(1));
    assert_eq!(qdeflect(&["dcs", s(&input), "--grid-deg", "7"]).status.code(), Some(1));
    assert_eq!(qdeflect(&["--help"]).status.code(), Some(0));
}

#[test]
fn synthetic_trajectories_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "traj.model",
        "kind = classical\nJ_max = 30\nbranches = linear 170 20\nnoise_deg = 4\ncount = 2000\nseed = 5\n",
    );
    let a = stdout(&qdeflect(&["synth", s(&spec)]));
    assert_eq!(a, stdout(&qdeflect(&["synth", s(&spec)])));
    assert_ne!(a, stdout(&qdeflect(&["synth", s(&spec), "--seed", "6"])));
    let ens = write(&dir, "traj.dat", &a);
    for method in ["legendre", "gaussian"] {
        let map = rows(&stdout(&qdeflect(&["qct-df", s(&ens), "--method", method, "--grid-deg", "5"])));
        assert_eq!(map.len(), 37 * 31);
    }
    let sigma = rows(&stdout(&qdeflect(&["qct-sigma-j", s(&ens)])));
    assert!(!sigma.is_empty());
}
