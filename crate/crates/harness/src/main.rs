use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ipc_core::gradient_flow::SchemeKind;
use ipc_core::problems::{Problem, ProblemKind};
use ipc_core::{GradientOracle, TerminationStatus};
use ipc_harness::output::write_atomic;
use ipc_harness::run::{save_order_table, write_order_csv};
use ipc_harness::{
    run_order_study, run_single, run_sweep, scalar_flow, ExperimentSpec, HarnessError, Result,
    Settings,
};

#[derive(Parser)]
#[command(
    name = "ipc-bench",
    version,
    about = "Prediction-correction solver benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write its trace CSV.
    Solve(RunArgs),
    /// Run one solver per beta and write a summary CSV.
    Sweep(RunArgs),
    /// Estimate the global error order of the flow discretizations.
    OdeOrder(OrderArgs),
    /// Generate a problem and save it as a binary problem file.
    GenProblem(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key=value file with the same keys as the long flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Condition number of the quadratic problem.
    #[arg(long)]
    cond: Option<f64>,
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// exp1 or exp2.
    #[arg(long)]
    profile: Option<String>,
    /// ipc-constant, ipc-adaptive or convex-ipc.
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    /// Constant step size.
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    #[arg(long)]
    h_lo: Option<f64>,
    #[arg(long)]
    h_hi: Option<f64>,
    #[arg(long)]
    ls_max_evals: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Per-iteration eta = 1/alpha_k (convex-ipc).
    #[arg(long)]
    trapezoid: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::new(),
        };
        let mut cli = Settings::new();
        let pairs: [(&str, Option<String>); 22] = [
            ("problem", self.problem.clone()),
            ("n", self.n.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("cond", self.cond.map(|v| v.to_string())),
            (
                "problem-file",
                self.problem_file.as_ref().map(|p| p.display().to_string()),
            ),
            ("profile", self.profile.clone()),
            ("algorithm", self.algorithm.clone()),
            ("beta", self.beta.map(|v| v.to_string())),
            ("betas", self.betas.clone()),
            ("eta", self.eta.map(|v| v.to_string())),
            ("h", self.h.map(|v| v.to_string())),
            ("mu", self.mu.map(|v| v.to_string())),
            ("nu", self.nu.map(|v| v.to_string())),
            ("theta", self.theta.map(|v| v.to_string())),
            ("tau", self.tau.map(|v| v.to_string())),
            ("gamma0", self.gamma0.map(|v| v.to_string())),
            ("h-lo", self.h_lo.map(|v| v.to_string())),
            ("h-hi", self.h_hi.map(|v| v.to_string())),
            ("ls-max-evals", self.ls_max_evals.map(|v| v.to_string())),
            ("epsilon", self.epsilon.map(|v| v.to_string())),
            ("max-iters", self.max_iters.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cli.set(k, v)?;
            }
        }
        if self.trapezoid {
            cli.set("trapezoid", "true")?;
        }
        s = s.merged(&cli);
        Ok(s)
    }
}

#[derive(Args)]
struct OrderArgs {
    /// Comma-separated scheme names; all schemes by default.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Comma-separated, strictly decreasing step sizes.
    #[arg(long, default_value = "0.1,0.05,0.025,0.0125")]
    hs: String,
    /// Rate of the scalar flow x' = -lambda x.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100.0)]
    cond: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("bad number '{t}': {e}")))
        })
        .collect()
}

fn solve_cmd(args: &RunArgs) -> Result<()> {
    let spec = ExperimentSpec::from_settings(&args.settings()?)?;
    let run = run_single(&spec)?;
    if spec.output_path.is_none() {
        let stdout = std::io::stdout();
        ipc_harness::write_trace(&mut stdout.lock(), &run.meta, &run.trace.records)?;
    }
    let t = &run.trace;
    eprintln!(
        "status={} iterations={} grad_evals={} final_grad_norm={:e}",
        t.status,
        t.iterations(),
        t.total_grad_evals,
        t.final_grad_norm()
    );
    if let Some(r) = &run.report {
        eprintln!(
            "fejer_ok={} ergodic_ok={} h_floor_ok={} alpha_floor_ok={}",
            r.fejer_ok,
            r.ergodic_ok,
            r.h_floor_ok,
            r.alpha_floor_ok.map_or("n/a".into(), |b| b.to_string())
        );
    }
    if t.status != TerminationStatus::Converged {
        return Err(HarnessError::NotConverged(format!(
            "run ended with status {}",
            t.status
        )));
    }
    Ok(())
}

fn sweep_cmd(args: &RunArgs) -> Result<()> {
    let spec = ExperimentSpec::from_settings(&args.settings()?)?;
    let report = run_sweep(&spec)?;
    if spec.output_path.is_none() {
        report.write_csv(&mut std::io::stdout().lock(), None)?;
    }
    match report.argmin_beta {
        Some(b) => eprintln!("argmin beta = {b}"),
        None => eprintln!("no beta converged"),
    }
    let failed = report.rows.iter().filter(|r| r.flagged).count();
    if failed > 0 {
        return Err(HarnessError::NotConverged(format!(
            "{failed} of {} rows did not converge",
            report.rows.len()
        )));
    }
    Ok(())
}

fn order_cmd(args: &OrderArgs) -> Result<()> {
    let schemes = match &args.schemes {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<SchemeKind>())
            .collect::<ipc_core::Result<Vec<_>>>()?,
        None => SchemeKind::ALL.to_vec(),
    };
    let hs = parse_f64_list(&args.hs)?;
    let rows = run_order_study(&schemes, &scalar_flow(args.lambda), args.t_end, &hs)?;
    match &args.out {
        Some(path) => save_order_table(path, &rows)?,
        None => write_order_csv(&mut std::io::stdout().lock(), &rows)?,
    }
    for r in &rows {
        eprintln!("{:<22} slope {:.4}", r.scheme.as_str(), r.slope);
    }
    Ok(())
}

fn gen_cmd(args: &GenArgs) -> Result<()> {
    let kind: ProblemKind = args.problem.parse()?;
    if args.n == 0 {
        return Err(HarnessError::Config("n must be positive".into()));
    }
    let problem = Problem::generate(kind, args.n, args.seed, args.cond);
    let file = problem.to_file();
    write_atomic(&args.out, |w| {
        file.write_to(w).map_err(|e| HarnessError::io(&args.out, e))
    })?;
    eprintln!(
        "wrote {} (n={}, seed={}, lipschitz={})",
        args.out.display(),
        problem.dim(),
        args.seed,
        problem
            .lipschitz()
            .map_or("unknown".into(), |l| format!("{l:e}"))
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::OdeOrder(a) => order_cmd(a),
        Command::GenProblem(a) => gen_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
