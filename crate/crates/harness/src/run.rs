//! Single runs, β sweeps and the discretization-order study.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ipc_core::gradient_flow::{estimate_order, global_error, FlowScheme, SchemeKind};
use ipc_core::numerics::contraction_constants;
use ipc_core::problems::{Problem, QuadraticProblem};
use ipc_core::{
    solve, verify_trace, GradientOracle, IpcError, RunTrace, TerminationStatus, VerificationReport,
};
use log::{info, warn};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::output::write_atomic;
use crate::spec::ExperimentSpec;
use crate::trace::{fmt_f64, write_meta, write_trace};

/// Environment variable capping the number of concurrent sweep rows.
pub const THREADS_ENV: &str = "IPC_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct SingleRun {
    pub beta: f64,
    pub trace: RunTrace,
    /// Present when the oracle knows its minimizer.
    pub report: Option<VerificationReport>,
    pub meta: Vec<(String, String)>,
}

impl SingleRun {
    pub fn summary(&self, epsilon: f64) -> SweepRow {
        SweepRow::from_run(self.beta, &self.trace, self.report.as_ref(), epsilon)
    }
}

fn verify_if_possible(
    trace: &RunTrace,
    oracle: &dyn GradientOracle,
    cfg: &ipc_core::SolverConfig,
) -> Result<Option<VerificationReport>> {
    match verify_trace(trace, oracle, cfg) {
        Ok(r) => Ok(Some(r)),
        Err(IpcError::MissingSolution) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn start_point(problem: &Problem) -> Result<DVector<f64>> {
    problem
        .default_start()
        .ok_or_else(|| HarnessError::Config("problem has no starting point".into()))
}

fn run_with(spec: &ExperimentSpec, problem: &Problem, beta: f64) -> Result<SingleRun> {
    let cfg = spec.solver_config(beta, problem)?;
    let x0 = start_point(problem)?;
    let trace = solve(problem, &cfg, &x0)?;
    let report = verify_if_possible(&trace, problem, &cfg)?;
    let mut meta = spec.describe(problem, &cfg);
    meta.push(("status".into(), trace.status.as_str().into()));
    meta.push((
        "total-grad-evals".into(),
        trace.total_grad_evals.to_string(),
    ));
    Ok(SingleRun {
        beta,
        trace,
        report,
        meta,
    })
}

/// Builds the oracle, runs the configured solver and writes the trace CSV
/// when an output path is set.
pub fn run_single(spec: &ExperimentSpec) -> Result<SingleRun> {
    let problem = spec.build_problem()?;
    let run = run_with(spec, &problem, spec.single_beta()?)?;
    info!(
        "beta={} status={} iterations={} grad_evals={}",
        run.beta,
        run.trace.status,
        run.trace.iterations(),
        run.trace.total_grad_evals
    );
    if let Some(path) = &spec.output_path {
        write_atomic(path, |w| write_trace(w, &run.meta, &run.trace.records))?;
    }
    Ok(run)
}

/// One sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    /// `None` when the run ended with an error.
    pub status: Option<TerminationStatus>,
    pub iterations: usize,
    pub grad_evals: usize,
    pub final_grad_norm: f64,
    pub fejer_ok: Option<bool>,
    pub ergodic_ok: Option<bool>,
    pub h_floor_ok: Option<bool>,
    pub alpha_floor_ok: Option<bool>,
    /// Did not converge below `epsilon`.
    pub flagged: bool,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn from_run(
        beta: f64,
        trace: &RunTrace,
        report: Option<&VerificationReport>,
        epsilon: f64,
    ) -> Self {
        let final_grad_norm = trace.final_grad_norm();
        Self {
            beta,
            status: Some(trace.status),
            iterations: trace.iterations(),
            grad_evals: trace.total_grad_evals,
            final_grad_norm,
            fejer_ok: report.map(|r| r.fejer_ok),
            ergodic_ok: report.map(|r| r.ergodic_ok),
            h_floor_ok: report.map(|r| r.h_floor_ok),
            alpha_floor_ok: report.and_then(|r| r.alpha_floor_ok),
            flagged: trace.status != TerminationStatus::Converged
                || final_grad_norm.is_nan()
                || final_grad_norm >= epsilon,
            error: None,
        }
    }

    fn failed(beta: f64, err: &HarnessError) -> Self {
        Self {
            beta,
            status: None,
            iterations: 0,
            grad_evals: 0,
            final_grad_norm: f64::NAN,
            fejer_ok: None,
            ergodic_ok: None,
            h_floor_ok: None,
            alpha_floor_ok: None,
            flagged: true,
            error: Some(err.to_string()),
        }
    }

    pub fn converged(&self) -> bool {
        self.status == Some(TerminationStatus::Converged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub meta: Vec<(String, String)>,
    /// Sorted by β.
    pub rows: Vec<SweepRow>,
    /// β with the fewest iterations among converged rows; lowest β on ties.
    pub argmin_beta: Option<f64>,
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "beta",
    "status",
    "iterations",
    "grad_evals",
    "final_grad_norm",
    "fejer_ok",
    "ergodic_ok",
    "h_floor_ok",
    "alpha_floor_ok",
    "flagged",
    "error",
];

fn opt_bool(b: Option<bool>) -> String {
    b.map(|v| v.to_string()).unwrap_or_default()
}

impl SweepReport {
    pub fn row(&self, beta: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.beta == beta)
    }

    /// `timestamp` goes on the first line; everything after it depends only
    /// on the sweep's inputs.
    pub fn write_csv(&self, w: &mut dyn Write, timestamp: Option<&str>) -> Result<()> {
        let io = |e| HarnessError::io("sweep report", e);
        if let Some(ts) = timestamp {
            writeln!(w, "# created: {ts}").map_err(io)?;
        }
        write_meta(w, &self.meta).map_err(io)?;
        let argmin = self
            .argmin_beta
            .map(|b| b.to_string())
            .unwrap_or_else(|| "none".into());
        writeln!(w, "# argmin-beta: {argmin}").map_err(io)?;
        let mut csv = csv::Writer::from_writer(&mut *w);
        csv.write_record(SWEEP_COLUMNS)?;
        for r in &self.rows {
            csv.write_record([
                r.beta.to_string(),
                r.status.map_or("error", |s| s.as_str()).to_string(),
                r.iterations.to_string(),
                r.grad_evals.to_string(),
                fmt_f64(r.final_grad_norm),
                opt_bool(r.fejer_ok),
                opt_bool(r.ergodic_ok),
                opt_bool(r.h_floor_ok),
                opt_bool(r.alpha_floor_ok),
                r.flagged.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        csv.flush().map_err(io)?;
        Ok(())
    }
}

/// Worker count from `IPC_THREADS`; `None` leaves the choice to rayon.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
}

fn unix_timestamp() -> String {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_else(|_| "0".into())
}

/// Runs every β of the spec from the same start point. All β values are
/// checked before any run starts; failures of individual runs are recorded
/// in their rows.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepReport> {
    let problem = spec.build_problem()?;
    let mut betas = spec.sweep_betas()?;
    betas.sort_by(f64::total_cmp);
    betas.dedup();

    let mut rejected = Vec::new();
    for &beta in &betas {
        let check = spec.solver_config(beta, &problem).and_then(|cfg| {
            cfg.validate(problem.lipschitz())?;
            contraction_constants(&cfg, &problem)?;
            Ok(())
        });
        if let Err(e) = check {
            rejected.push(format!("beta={beta}: {e}"));
        }
    }
    if !rejected.is_empty() {
        return Err(IpcError::Validation(format!(
            "sweep rejected before any run: {}",
            rejected.join("; ")
        ))
        .into());
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        betas
            .par_iter()
            .map(|&beta| match run_with(spec, &problem, beta) {
                Ok(run) => run.summary(spec.epsilon),
                Err(e) => {
                    warn!("beta={beta}: {e}");
                    SweepRow::failed(beta, &e)
                }
            })
            .collect()
    });
    for r in rows.iter().filter(|r| r.flagged) {
        warn!(
            "beta={} flagged: status {}",
            r.beta,
            r.status.map_or("error", |s| s.as_str())
        );
    }

    let argmin_beta = rows
        .iter()
        .filter(|r| r.converged())
        .min_by(|a, b| {
            a.iterations
                .cmp(&b.iterations)
                .then(a.beta.total_cmp(&b.beta))
        })
        .map(|r| r.beta);

    let cfg = spec.solver_config(betas[0], &problem)?;
    let meta = spec
        .describe(&problem, &cfg)
        .into_iter()
        .filter(|(k, _)| k != "beta")
        .chain(std::iter::once((
            "betas".to_string(),
            betas
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        )))
        .collect();
    let report = SweepReport {
        meta,
        rows,
        argmin_beta,
    };
    if let Some(path) = &spec.output_path {
        let ts = unix_timestamp();
        write_atomic(path, |w| report.write_csv(w, Some(&ts)))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub scheme: SchemeKind,
    pub slope: f64,
    /// `(h, max-over-grid error)` per step size.
    pub errors: Vec<(f64, f64)>,
}

/// The scalar linear flow `ẋ = −λx`, `x(0) = 1`.
pub fn scalar_flow(lambda: f64) -> QuadraticProblem {
    QuadraticProblem::new(
        DVector::from_element(1, lambda),
        DVector::zeros(1),
        DVector::from_element(1, 1.0),
    )
}

/// Empirical error order of every scheme on `oracle`.
pub fn run_order_study(
    schemes: &[SchemeKind],
    oracle: &dyn GradientOracle,
    t_end: f64,
    h_list: &[f64],
) -> Result<Vec<OrderRow>> {
    schemes
        .iter()
        .map(|&kind| {
            let scheme = FlowScheme::new(kind);
            let slope = estimate_order(&scheme, oracle, t_end, h_list)?;
            let errors = h_list
                .iter()
                .map(|&h| Ok((h, global_error(&scheme, oracle, t_end, h)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(OrderRow {
                scheme: kind,
                slope,
                errors,
            })
        })
        .collect()
}

pub fn write_order_csv(w: &mut dyn Write, rows: &[OrderRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["scheme".to_string(), "slope".to_string()];
    if let Some(first) = rows.first() {
        header.extend(first.errors.iter().map(|(h, _)| format!("err_h={h}")));
    }
    csv.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.scheme.as_str().to_string(), format!("{:.6}", r.slope)];
        rec.extend(r.errors.iter().map(|(_, e)| fmt_f64(*e)));
        csv.write_record(&rec)?;
    }
    csv.flush()
        .map_err(|e| HarnessError::io("order table", e))?;
    Ok(())
}

/// Writes an order table to `path` atomically.
pub fn save_order_table(path: &Path, rows: &[OrderRow]) -> Result<()> {
    write_atomic(path, |w| write_order_csv(w, rows))
}
