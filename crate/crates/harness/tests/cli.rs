use std::path::Path;
use std::process::{Command, Output};

use ipc_harness::{read_trace, run_single, run_sweep, ExperimentSpec, Settings};

fn bench(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ipc-bench"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn spec(pairs: &[(&str, &str)]) -> ExperimentSpec {
    let mut s = Settings::new();
    for (k, v) in pairs {
        s.set(k, *v).unwrap();
    }
    ExperimentSpec::from_settings(&s).unwrap()
}

#[test]
fn solve_writes_a_readable_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = bench(
        &[
            "solve",
            "--problem",
            "quadratic",
            "--n",
            "10",
            "--cond",
            "10",
            "--h",
            "0.09",
            "--beta",
            "0.9",
            "--out",
            path_str(&out),
        ],
        &[],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("status=converged"));
    assert!(stderr.contains("fejer_ok=true ergodic_ok=true h_floor_ok=true"));
    let t = read_trace(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(t.meta("generator"), Some("quadratic"));
    assert_eq!(t.meta("algorithm"), Some("ipc-constant"));
    assert!(t.records.last().unwrap().grad_norm < 1e-3);
}

#[test]
fn trace_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let out_s = out.display().to_string();
    let run = run_single(&spec(&[
        ("profile", "exp2"),
        ("n", "30"),
        ("beta", "0.5"),
        ("out", &out_s),
    ]))
    .unwrap();
    let back = read_trace(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    assert_eq!(back.records.len(), run.trace.records.len());
    for (a, b) in run.trace.records.iter().zip(&back.records) {
        assert_eq!(a.f.to_bits(), b.f.to_bits());
        assert_eq!(a.grad_norm.to_bits(), b.grad_norm.to_bits());
        assert_eq!(a.h_k.map(f64::to_bits), b.h_k.map(f64::to_bits));
        assert_eq!(a.alpha_k.map(f64::to_bits), b.alpha_k.map(f64::to_bits));
        assert_eq!(a.r_k.map(f64::to_bits), b.r_k.map(f64::to_bits));
        assert_eq!((a.k, a.ls_evals), (b.k, b.ls_evals));
        assert_eq!(a.dist_sq, b.dist_sq);
    }
}

#[test]
fn out_of_range_beta_is_a_validation_error() {
    let o = bench(
        &["solve", "--profile", "exp1", "--n", "20", "--beta", "0.2"],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(0.5359, 1]"));
}

#[test]
fn whole_sweep_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = bench(
        &[
            "sweep",
            "--profile",
            "exp1",
            "--n",
            "20",
            "--betas",
            "0.6,0.3,0.9",
            "--out",
            path_str(&out),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn non_convergence_and_io_exit_codes() {
    let o = bench(
        &[
            "solve",
            "--problem",
            "quadratic",
            "--n",
            "5",
            "--h",
            "0.001",
            "--beta",
            "0.9",
            "--max-iters",
            "3",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(3));
    let o = bench(
        &[
            "solve",
            "--problem",
            "quadratic",
            "--n",
            "5",
            "--h",
            "0.009",
            "--beta",
            "0.9",
            "--out",
            "/nonexistent-dir/x/t.csv",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(4));
    let o = bench(
        &[
            "solve",
            "--problem-file",
            "/nonexistent-dir/p.bin",
            "--beta",
            "0.9",
            "--h",
            "0.001",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_reports_are_byte_identical_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "sweep",
            "--profile",
            "exp2",
            "--n",
            "40",
            "--seed",
            "3",
            "--betas",
            "1,0,0.5,0.25",
            "--out",
        ]
        .into_iter()
        .map(String::from)
        .chain(std::iter::once(p.display().to_string()))
        .collect::<Vec<_>>()
    };
    let run = |p: &Path, threads: &str| {
        let owned = args(p);
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        let o = bench(&refs, &[("IPC_THREADS", threads)]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    };
    run(&a, "1");
    run(&b, "3");
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    assert!(ta.starts_with("# created: "));
    let body = |t: &str| t.lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&ta), body(&tb));
    let rows: Vec<&str> = ta.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    let betas: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(betas, ["0", "0.25", "0.5", "1"]);
    assert!(ta.contains("# argmin-beta: 0.5"));
}

#[test]
fn single_beta_sweep_matches_single_run() {
    let pairs = [
        ("problem", "quadratic"),
        ("n", "12"),
        ("cond", "20"),
        ("h", "0.04"),
        ("beta", "0.8"),
    ];
    let s = spec(&pairs);
    let single = run_single(&s).unwrap();
    let report = run_sweep(&s).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.rows[0], single.summary(s.epsilon));
    assert_eq!(report.argmin_beta, Some(0.8));
    assert_eq!(report.rows[0].fejer_ok, Some(true));
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# quadratic run\nproblem = quadratic\nn = 8\ncond = 10\nh = 0.05\nbeta = 0.2\n",
    )
    .unwrap();
    // beta = 0.2 is below the bound for h*L = 0.5; the flag fixes it
    let o = bench(&["solve", "--config", path_str(&cfg)], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = bench(&["solve", "--config", path_str(&cfg), "--beta", "0.8"], &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("# beta: 0.8"));
}

#[test]
fn generated_problem_file_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.bin");
    let o = bench(
        &[
            "gen-problem",
            "--problem",
            "exp1",
            "--n",
            "25",
            "--seed",
            "4",
            "--out",
            path_str(&file),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let file_s = file.display().to_string();
    let from_file = run_single(&spec(&[
        ("profile", "exp1"),
        ("problem-file", &file_s),
        ("beta", "0.6"),
    ]))
    .unwrap();
    let generated = run_single(&spec(&[
        ("profile", "exp1"),
        ("n", "25"),
        ("seed", "4"),
        ("beta", "0.6"),
    ]))
    .unwrap();
    assert_eq!(from_file.trace, generated.trace);
}

#[test]
fn ode_order_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orders.csv");
    let o = bench(&["ode-order", "--out", path_str(&out)], &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scheme,slope,err_h=0.1,err_h=0.05,err_h=0.025,err_h=0.0125"
    );
    for line in lines {
        let mut cells = line.split(',');
        let scheme = cells.next().unwrap();
        let slope: f64 = cells.next().unwrap().parse().unwrap();
        let expected = if scheme.ends_with("euler") { 1.0 } else { 2.0 };
        assert!((slope - expected).abs() <= 0.15, "{scheme} {slope}");
    }
    let o = bench(&["ode-order", "--hs", "0.1,0.2,0.05"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fractional_profile_parameters_converge() {
    let run = run_single(&spec(&[
        ("profile", "exp1"),
        ("n", "200"),
        ("seed", "1"),
        ("beta", "0.54"),
    ]))
    .unwrap();
    assert!(run.trace.converged());
    assert!(run.report.is_none());
    let max_ls = run.trace.records.iter().map(|r| r.ls_evals).max().unwrap();
    assert!(max_ls <= 100);
}
