use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roundness"))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn mgr_of_small_metrics() {
    let dir = TempDir::new().unwrap();
    let p3 = write(&dir, "p3.csv", "# path on three points\n0,1,2\n1,0,1\n2,1,0\n");
    let r = rows(&run(&["mgr", "--metric", path(&p3)]));
    assert!((f(&r[0][0]) - 2.0).abs() < 1e-6);

    let c4 = write(&dir, "c4.csv", "0, 1, 2, 1\n1, 0, 1, 2\n2, 1, 0, 1\n1, 2, 1, 0\n");
    let r = rows(&run(&["mgr", "--metric", path(&c4)]));
    assert!((f(&r[0][0]) - 1.0).abs() < 1e-6);

    let tri = write(&dir, "tri.csv", "0,1,1\n1,0,1\n1,1,0\n");
    let r = rows(&run(&["mgr", "--metric", path(&tri)]));
    assert_eq!(r[0][0], "≥ 20");
}

#[test]
fn malformed_metrics_are_parse_errors() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("word.csv", "0,1\n1,zero\n"),
        ("ragged.csv", "0,1,2\n1,0\n2,1,0\n"),
        ("asym.csv", "0,1\n2,0\n"),
        ("triangle.csv", "0,1,5\n1,0,1\n5,1,0\n"),
        ("empty.csv", "# nothing\n"),
    ] {
        let p = write(&dir, name, text);
        let out = run(&["mgr", "--metric", path(&p)]);
        assert_eq!(out.status.code(), Some(3), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let p = write(&dir, "word.csv", "0,1\n1,zero\n");
    let err = String::from_utf8(run(&["mgr", "--metric", path(&p)]).stderr).unwrap();
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn hilbert_nu_curve() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "lp2.spec", "kind = lp\np = 2\ndim = 2\n");
    let r = rows(&run(&["nu-curve", "--space", path(&spec), "--p", "1:4:0.1"]));
    assert_eq!(r.len(), 31);
    for row in &r {
        let p = f(&row[0]);
        assert!((f(&row[1]) - 2f64.max(2f64.powf(p - 1.0))).abs() < 1e-3, "{row:?}");
        assert_eq!(f(&row[2]), 2f64.max(2f64.powf(p - 1.0)));
        assert_eq!(f(&row[3]), 2f64.powf(p));
    }
    let r = rows(&run(&["nu-curve", "--space", path(&spec), "--p", "1:1:0.1"]));
    assert_eq!(r.len(), 1);
    assert!((f(&r[0][1]) - 2.0).abs() < 1e-12);
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "lp2.spec", "kind = lp\np = 2\ndim = 2\n");
    for args in [
        vec!["nu-curve", "--space", path(&spec), "--p", "2:1:0.1"],
        vec!["nu-curve", "--space", path(&spec), "--p", "1:2:-0.1"],
        vec!["nu-curve", "--space", path(&spec)],
        vec!["nu-curve", "--p", "1:2:0.5"],
        vec!["mr", "--space", path(&spec), "--svg", "x.svg"],
        vec!["mgr"],
        vec!["bogus"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_spec_is_parse_error_with_line() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "bad.spec", "kind = lp\np = two\ndim = 2\n");
    let out = run(&["mr", "--space", path(&spec)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn dump_spec_round_trips() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("a.spec", "# blocks\nkind=lplq\n  q = 3\np = 1.5\nouter = 2\ninner = 2\n"),
        ("b.spec", "kind = orlicz\norlicz_fn = example1(p=1.5, t0=0.09)\ndim = 2\n"),
        ("c.spec", "kind = numerical_dual\nbase = lp\np = 1.5\ndim = 2\nresolution = 500\n"),
        ("d.spec", "kind = racetrack_dual\n"),
        ("e.spec", "kind = schatten\np = 0.15e1\ndim = 2\n"),
    ] {
        let p = write(&dir, name, text);
        let first = run(&["mr", "--space", path(&p), "--dump-spec"]);
        assert!(first.status.success(), "{name}");
        let q = write(&dir, &format!("{name}.dump"), &String::from_utf8(first.stdout.clone()).unwrap());
        let second = run(&["mr", "--space", path(&q), "--dump-spec"]);
        assert_eq!(first.stdout, second.stdout, "{name}");
    }
}

#[test]
fn reruns_are_bit_identical() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "r.spec", "kind = racetrack\n");
    let outputs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let csv = dir.path().join(format!("out{i}.csv"));
            let out = run(&[
                "rho", "--space", path(&spec), "--t", "0.02:0.16:0.02", "--seed", "7",
                "--budget-starts", "64", "--csv", path(&csv),
            ]);
            assert!(out.status.success());
            fs::read(&csv).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    assert!(!outputs[0].is_empty());
}

#[test]
fn racetrack_smoothness_bounds() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "r.spec", "kind = racetrack\n");
    let svg = dir.path().join("rho.svg");
    let r = rows(&run(&["rho", "--space", path(&spec), "--t", "0.01:0.1666:0.0166", "--svg", path(&svg)]));
    assert_eq!(r.len(), 10);
    for row in &r {
        let (t, rho) = (f(&row[0]), f(&row[1]));
        assert!(rho >= (1.0 + t * t).sqrt() - 1.0 - 1e-6 && rho <= 18.0 * t * t + 1e-6, "{row:?}");
    }
    let svg = fs::read_to_string(svg).unwrap();
    assert!(svg.contains("<svg") && svg.contains("<polyline") && svg.trim_end().ends_with("</svg>"));

    let dual = write(&dir, "rs.spec", "kind = racetrack_dual\n");
    let r = rows(&run(&["rho", "--space", path(&dual), "--t", "0.1"]));
    assert!(f(&r[0][1]) >= 0.05);
}

#[test]
fn mr_mc_brackets() {
    let dir = TempDir::new().unwrap();
    let l3 = write(&dir, "l3.spec", "kind = lp\np = 3\ndim = 4\n");
    let r = rows(&run(&["mr", "--space", path(&l3)]));
    assert!(f(&r[0][0]) <= 1.5 && 1.5 <= f(&r[0][1]), "{r:?}");
    assert_eq!((r[0][2].as_str(), r[0][3].as_str()), ("true", "false"));

    let l2 = write(&dir, "l2.spec", "kind = lp\np = 2\ndim = 3\n");
    let r = rows(&run(&["mr", "--space", path(&l2)]));
    assert_eq!((f(&r[0][0]), f(&r[0][1])), (2.0, 2.0));

    let l1 = write(&dir, "l1.spec", "kind = lp\np = 1\ndim = 2\n");
    let r = rows(&run(&["mc", "--space", path(&l1), "--pmax", "12", "--budget-starts", "64"]));
    assert_eq!(r[0][0], "≥ 12");
}

#[test]
fn delta_and_frechet() {
    let dir = TempDir::new().unwrap();
    let l2 = write(&dir, "l2.spec", "kind = lp\np = 2\ndim = 2\n");
    let r = rows(&run(&["delta", "--space", path(&l2), "--eps", "1"]));
    assert!((f(&r[0][1]) - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-4, "{r:?}");

    let r = rows(&run(&["frechet", "--space", path(&l2)]));
    assert!((f(&r[0][0]) - 2.0).abs() < 0.05, "{r:?}");
    assert_eq!(r[0][3], "false");

    let l1 = write(&dir, "l1.spec", "kind = lp\np = 1\ndim = 2\n");
    let r = rows(&run(&["frechet", "--space", path(&l1), "--x", "1,0", "--y", "0,1"]));
    assert_eq!(r[0][3], "true");

    let r = rows(&run(&["clarkson", "--space", path(&l2), "--p", "1.5:2:0.5"]));
    assert_eq!(r.len(), 2);
}
