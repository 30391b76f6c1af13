use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vsn_offload::metrics::read_metrics_csv;
use vsn_offload::mobility::{build_udg, load_trace_csv, RadioParams};
use vsn_offload::selection::brute_force_min_dominating_set;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsn-offload"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_trace(dir: &Path, vehicles: &str) -> std::path::PathBuf {
    let p = dir.join("trace.csv");
    ok(&[
        "gen-trace",
        "--vehicles",
        vehicles,
        "--area",
        "500",
        "--duration",
        "30",
        "--seed",
        "7",
        "--out",
        path(&p),
    ]);
    p
}

#[test]
fn gen_trace_is_reproducible() {
    let a = ok(&["gen-trace", "--vehicles", "100", "--duration", "20", "--seed", "7"]);
    let b = ok(&["gen-trace", "--vehicles", "100", "--duration", "20", "--seed", "7"]);
    assert_eq!(a, b);
    assert!(a.starts_with("time,id,x,y\n"));
    assert_eq!(a.lines().count(), 1 + 100 * 20);
    let c = ok(&["gen-trace", "--vehicles", "100", "--duration", "20", "--seed", "8"]);
    assert_ne!(a, c);
}

#[test]
fn run_three_algorithms() {
    let dir = tempfile::tempdir().unwrap();
    let trace = small_trace(dir.path(), "30");
    let out = dir.path().join("res");
    ok(&[
        "run",
        "--trace",
        path(&trace),
        "--algo",
        "centrality",
        "--algo",
        "rb",
        "--algo",
        "exact",
        "--out",
        path(&out),
    ]);
    let read = |name: &str| read_metrics_csv(fs::File::open(out.join(name)).unwrap()).unwrap();
    let (c, r, e) = (read("centrality_d1_k4.csv"), read("rb_t256.csv"), read("exact_d1.csv"));
    assert_eq!(c.len(), 3);
    for i in 0..3 {
        assert!(e[i].n_aps <= c[i].n_aps && e[i].n_aps <= r[i].n_aps);
    }
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let trace = small_trace(dir.path(), "40");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        ok(&[
            "compare",
            "--trace",
            path(&trace),
            "--algo",
            "rb",
            "--algo",
            "centrality:d=2,direction",
            "--seed",
            "5",
            "--out",
            path(&out),
        ]);
        outputs
            .push(["rb_t256.csv", "centrality_d2_k4_dir.csv", "summary.csv"].map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn exact_matches_brute_force() {
    let dir = tempfile::tempdir().unwrap();
    let trace = small_trace(dir.path(), "12");
    let stdout = ok(&["exact", "--trace", path(&trace), "--time", "10", "--d", "1"]);
    let size: usize = stdout
        .lines()
        .find_map(|l| l.strip_prefix("|S| = "))
        .expect("size line")
        .parse()
        .unwrap();
    let snap = load_trace_csv(&trace).unwrap().snapshot_at(10.0).unwrap();
    let g = build_udg(&snap, &RadioParams::default());
    assert_eq!(size, brute_force_min_dominating_set(&g, 1).unwrap().len());
}

#[test]
fn tune_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let trace = small_trace(dir.path(), "40");
    let traj = dir.path().join("traj.csv");
    let stdout = ok(&["tune", "--trace", path(&trace), "--out", path(&traj)]);
    assert!(stdout.starts_with("d = "));
    let text = fs::read_to_string(&traj).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,d,k,objective"));
    let rows = lines.count();
    assert!((1..=501).contains(&rows));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let trace = small_trace(dir.path(), "30");
    let cfg = dir.path().join("exp.conf");
    fs::write(
        &cfg,
        format!(
            "trace = {}\nalgo = rb\nseed = 1\nout = {}\n",
            path(&trace),
            path(&dir.path().join("from_file"))
        ),
    )
    .unwrap();
    let flag_out = dir.path().join("from_flag");
    ok(&[
        "run",
        "--config",
        path(&cfg),
        "--algo",
        "exact:d=2",
        "--out",
        path(&flag_out),
    ]);
    assert!(flag_out.join("exact_d2.csv").exists());
    assert!(!flag_out.join("rb_t256.csv").exists());
    assert!(!dir.path().join("from_file").exists());
}

#[test]
fn errors_exit_non_zero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = cli(&["run", "--trace", path(&missing), "--algo", "rb"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    let trace = small_trace(dir.path(), "10");
    for args in [
        vec!["run", "--trace", path(&trace)],
        vec!["run", "--trace", path(&trace), "--algo", "greedy"],
        vec!["run", "--trace", path(&trace), "--algo", "centrality", "--d", "0"],
        vec!["run", "--trace", path(&trace), "--algo", "rb", "--radius", "-1"],
        vec!["run", "--trace", path(&trace), "--algo", "rb", "--window", "0,500"],
    ] {
        let out = cli(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
}
