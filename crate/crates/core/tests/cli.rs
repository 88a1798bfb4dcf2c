use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kbf_core::initial::parse_profile_csv;

const BENCHMARK_CFG: &str = "\
# all coefficients one
nu = 1
mu = 1
gamma = 1
eps_conv = 1
eps_react = 1
n_modes = 256
t_final = 1
";

fn kbf(args: &[&str]) -> Output {
    kbf_in(Path::new("."), args)
}

fn kbf_in(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kbf"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn kbf")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn heat_args<'a>(out: &'a str, dt: &'a str) -> Vec<&'a str> {
    vec![
        "solve", "--nu", "1", "--mu", "0", "--gamma", "0", "--eps-conv", "0", "--eps-react", "0",
        "--n-modes", "64", "--dt", dt, "--t-final", "1", "--output", out, "--set",
        "snapshot_stride=100",
    ]
}

fn read_rows(path: &Path) -> Vec<(f64, f64)> {
    parse_profile_csv(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn heat_solve_matches_exact_decay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = kbf(&heat_args(out, "0.01"));
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_rows(&dir.path().join("snapshot_000100.csv"));
    assert_eq!(rows.len(), 64);
    for (x, y) in rows {
        assert!((y - (0.5 + 0.25 * (-1.0f64).exp() * x.sin())).abs() <= 1e-10);
    }
    let text = fs::read_to_string(dir.path().join("snapshot_000000.csv")).unwrap();
    assert!(text.contains("# nu = 1\n") && text.contains("# scheme = strang\n"));
}

#[test]
fn solve_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        fs::write(d.path().join("run.cfg"), format!("{BENCHMARK_CFG}dt = 0.02\nsnapshot_stride = 10\n"))
            .unwrap();
        let o = kbf_in(d.path(), &["solve", "--config", "run.cfg", "--output", "out"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let names = ["snapshot_000000.csv", "snapshot_000030.csv", "snapshot_000050.csv"];
    for n in names {
        assert_eq!(
            fs::read(a.path().join("out").join(n)).unwrap(),
            fs::read(b.path().join("out").join(n)).unwrap()
        );
    }
}

#[test]
fn file_initial_condition_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = kbf(&heat_args(first.to_str().unwrap(), "0.5"));
    assert!(o.status.success(), "{}", stderr(&o));
    let profile = first.join("snapshot_000000.csv");

    let second = dir.path().join("second");
    let set_path = format!("ic.path={}", profile.display());
    let mut args = heat_args(second.to_str().unwrap(), "0.5");
    args.extend(["--ic", "file", "--set", &set_path]);
    let o = kbf(&args);
    assert!(o.status.success(), "{}", stderr(&o));

    let a = read_rows(&profile);
    let b = read_rows(&second.join("snapshot_000000.csv"));
    for ((xa, ya), (xb, yb)) in a.iter().zip(&b) {
        assert_eq!(xa, xb);
        assert!((ya - yb).abs() <= 1e-12);
    }
}

#[test]
fn bad_file_profile_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("short.csv");
    fs::write(&csv, "x,y\n0,1\n1,1\n").unwrap();
    let set_path = format!("ic.path={}", csv.display());
    let out = dir.path().join("o");
    let mut args = heat_args(out.to_str().unwrap(), "0.5");
    args.extend(["--ic", "file", "--set", &set_path]);
    let o = kbf(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error kind=FileFormatError"));
}

#[test]
fn negative_viscosity_exits_one_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = heat_args(dir.path().to_str().unwrap(), "0.1");
    args[2] = "-1";
    let o = kbf(&args);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error kind=ValidationError"));
    assert!(err.contains("nu must be ≥ 0"));
}

#[test]
fn unknown_key_and_subcommand_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = heat_args(dir.path().to_str().unwrap(), "0.1");
    args.extend(["--set", "viscosity=2"]);
    let o = kbf(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("viscosity"));

    let o = kbf(&["integrate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn blow_up_exits_two() {
    // Negative reaction from y = 2 runs away in finite time (t = ln 2).
    let dir = tempfile::tempdir().unwrap();
    let o = kbf(&[
        "solve", "--nu", "0", "--mu", "0", "--gamma", "0", "--eps-conv", "0", "--eps-react", "-1",
        "--n-modes", "16", "--dt", "0.01", "--t-final", "2", "--ic", "constant", "--set", "ic.c=2",
        "--output", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error kind=BlowUp"));
}

#[test]
fn converge_time_reproduces_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("benchmark.cfg");
    fs::write(&cfg, BENCHMARK_CFG).unwrap();
    let out = dir.path().join("out");
    let o = kbf(&[
        "converge-time",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("converge_time.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("axis,dt_or_n,error,order"));
    let orders: Vec<f64> = lines
        .filter_map(|l| l.rsplit(',').next().unwrap().parse().ok())
        .collect();
    assert_eq!(orders.len(), 5);
    assert!(orders.iter().all(|o| (1.85..=2.15).contains(o)), "{orders:?}");
    assert!(out.join("converge_time.txt").exists());
}

#[test]
fn converge_space_and_oracle_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("space");
    let o = kbf(&[
        "converge-space", "--nu", "1", "--mu", "1", "--gamma", "1", "--eps-conv", "1",
        "--eps-react", "1", "--n-modes", "64", "--t-final", "0.25", "--modes", "8,16,32",
        "--output", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("converge_space.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    let o = kbf(&["oracle-check"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}
