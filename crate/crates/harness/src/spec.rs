//! Experiment specifications, parameter profiles and the `key=value` config
//! format.
//!
//! Settings from a config file and from the command line share one key space
//! (the long flag names without dashes in front). Later sources override
//! earlier ones.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ipc_core::config::{DEFAULT_EPSILON, DEFAULT_LS_MAX_EVALS, DEFAULT_MAX_ITERS};
use ipc_core::problems::{Problem, ProblemFile, ProblemKind};
use ipc_core::{Algorithm, GradientOracle, LineSearchParams, SolverConfig, StepRule};

use crate::error::{HarnessError, Result};

/// Every key accepted in a config file or on the command line.
pub const KEYS: &[&str] = &[
    "problem",
    "n",
    "seed",
    "cond",
    "problem-file",
    "profile",
    "algorithm",
    "beta",
    "betas",
    "eta",
    "h",
    "mu",
    "nu",
    "theta",
    "tau",
    "gamma0",
    "h-lo",
    "h-hi",
    "ls-max-evals",
    "epsilon",
    "max-iters",
    "trapezoid",
    "out",
];

/// Ordered `key → value` settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

fn normalize_key(key: &str) -> String {
    key.trim()
        .trim_start_matches("--")
        .to_ascii_lowercase()
        .replace('_', "-")
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Settings::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key=value, got '{line}'", i + 1))
            })?;
            out.set(k, v.trim())?;
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(HarnessError::Config(format!("unknown setting '{key}'")));
        }
        self.0.insert(key, value.into());
        Ok(())
    }

    /// Values in `other` win.
    pub fn merged(mut self, other: &Settings) -> Self {
        self.0
            .extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| HarnessError::Config(format!("bad value '{v}' for {key}: {e}")))
            })
            .transpose()
    }
}

/// Named parameter presets of the two benchmark studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Fractional program, line-search method.
    Exp1,
    /// Arctan-quadratic operator, convex method.
    Exp2,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Exp1 => "exp1",
            Profile::Exp2 => "exp2",
        }
    }

    pub fn algorithm(self) -> Algorithm {
        match self {
            Profile::Exp1 => Algorithm::IpcAdaptive,
            Profile::Exp2 => Algorithm::ConvexIpc,
        }
    }

    pub fn problem(self) -> ProblemKind {
        match self {
            Profile::Exp1 => ProblemKind::Fractional,
            Profile::Exp2 => ProblemKind::ArctanQuadratic,
        }
    }

    pub fn line_search(self) -> LineSearchSettings {
        match self {
            Profile::Exp1 => LineSearchSettings {
                mu: 0.3,
                nu: 0.5,
                theta: 0.67,
                tau: 1.5,
                gamma0: Some(1.0),
                h_lo: 1e-6,
                h_hi: Some(3.0),
                max_evals: DEFAULT_LS_MAX_EVALS,
            },
            Profile::Exp2 => LineSearchSettings {
                mu: 0.4,
                nu: 0.9,
                theta: 0.7,
                tau: 1.5,
                gamma0: None,
                h_lo: 1e-6,
                h_hi: None,
                max_evals: DEFAULT_LS_MAX_EVALS,
            },
        }
    }

    pub fn eta(self) -> f64 {
        match self {
            Profile::Exp1 => 1.0,
            Profile::Exp2 => 1.9,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exp1" => Ok(Profile::Exp1),
            "exp2" => Ok(Profile::Exp2),
            other => Err(HarnessError::Config(format!(
                "unknown profile '{other}' (expected exp1 or exp2)"
            ))),
        }
    }
}

/// Line-search parameters before the oracle is known. `None` for `gamma0`
/// or `h_hi` means `2/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchSettings {
    pub mu: f64,
    pub nu: f64,
    pub theta: f64,
    pub tau: f64,
    pub gamma0: Option<f64>,
    pub h_lo: f64,
    pub h_hi: Option<f64>,
    pub max_evals: usize,
}

impl LineSearchSettings {
    pub fn resolve(&self, lipschitz: Option<f64>) -> Result<LineSearchParams> {
        let two_over_l = || {
            lipschitz.map(|l| 2.0 / l).ok_or_else(|| {
                HarnessError::Config(
                    "gamma0 and h-hi default to 2/L, but the oracle has no Lipschitz constant"
                        .into(),
                )
            })
        };
        let h_hi = match self.h_hi {
            Some(v) => v,
            None => two_over_l()?,
        };
        let gamma0 = match self.gamma0 {
            Some(v) => v,
            None => h_hi,
        };
        Ok(LineSearchParams {
            mu: self.mu,
            nu: self.nu,
            theta: self.theta,
            tau: self.tau,
            gamma0_init: gamma0,
            h_lo: self.h_lo,
            h_hi,
            max_evals: self.max_evals,
        })
    }
}

/// Everything needed to build an oracle and run one solver or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemKind,
    pub n: usize,
    pub seed: u64,
    /// Condition number; quadratic problems only.
    pub cond: f64,
    /// Load the oracle from a problem file instead of generating it.
    pub problem_file: Option<PathBuf>,
    pub profile: Option<Profile>,
    pub algorithm: Algorithm,
    pub beta: Option<f64>,
    pub beta_list: Vec<f64>,
    pub eta: f64,
    /// Constant step; selects a constant step rule for convex-ipc.
    pub h: Option<f64>,
    pub line_search: LineSearchSettings,
    pub epsilon: f64,
    pub max_iters: usize,
    pub trapezoid: bool,
    pub output_path: Option<PathBuf>,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("bad beta '{t}': {e}")))
        })
        .collect()
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(HarnessError::Config(format!("bad boolean '{other}'"))),
    }
}

impl ExperimentSpec {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let profile: Option<Profile> = s.parsed("profile")?;
        let h: Option<f64> = s.parsed("h")?;
        let algorithm = match s.parsed::<Algorithm>("algorithm")? {
            Some(a) => a,
            None => match (profile, h) {
                (Some(p), _) => p.algorithm(),
                (None, Some(_)) => Algorithm::IpcConstant,
                (None, None) => Algorithm::IpcAdaptive,
            },
        };
        let base = profile.unwrap_or(match algorithm {
            Algorithm::ConvexIpc => Profile::Exp2,
            _ => Profile::Exp1,
        });
        let problem = match s.parsed::<ProblemKind>("problem")? {
            Some(p) => p,
            None => profile.map_or(ProblemKind::Quadratic, Profile::problem),
        };

        let mut ls = base.line_search();
        ls.mu = s.parsed("mu")?.unwrap_or(ls.mu);
        ls.nu = s.parsed("nu")?.unwrap_or(ls.nu);
        ls.theta = s.parsed("theta")?.unwrap_or(ls.theta);
        ls.tau = s.parsed("tau")?.unwrap_or(ls.tau);
        ls.h_lo = s.parsed("h-lo")?.unwrap_or(ls.h_lo);
        ls.max_evals = s.parsed("ls-max-evals")?.unwrap_or(ls.max_evals);
        if let Some(v) = s.parsed("gamma0")? {
            ls.gamma0 = Some(v);
        }
        if let Some(v) = s.parsed("h-hi")? {
            ls.h_hi = Some(v);
        }

        let beta_list = s
            .get("betas")
            .map(parse_list)
            .transpose()?
            .unwrap_or_default();
        let n = s.parsed("n")?.unwrap_or(200);
        if n == 0 {
            return Err(HarnessError::Config("n must be positive".into()));
        }

        Ok(Self {
            problem,
            n,
            seed: s.parsed("seed")?.unwrap_or(1),
            cond: s.parsed("cond")?.unwrap_or(100.0),
            problem_file: s.get("problem-file").map(PathBuf::from),
            profile,
            algorithm,
            beta: s.parsed("beta")?,
            beta_list,
            eta: s.parsed("eta")?.unwrap_or(base.eta()),
            h,
            line_search: ls,
            epsilon: s.parsed("epsilon")?.unwrap_or(DEFAULT_EPSILON),
            max_iters: s.parsed("max-iters")?.unwrap_or(DEFAULT_MAX_ITERS),
            trapezoid: s
                .get("trapezoid")
                .map(parse_bool)
                .transpose()?
                .unwrap_or(false),
            output_path: s.get("out").map(PathBuf::from),
        })
    }

    /// Builds the oracle, from the problem file if one is set.
    pub fn build_problem(&self) -> Result<Problem> {
        match &self.problem_file {
            Some(path) => {
                let f = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
                let file = ProblemFile::read_from(std::io::BufReader::new(f))?;
                Ok(Problem::from_file(&file)?)
            }
            None => Ok(Problem::generate(
                self.problem,
                self.n,
                self.seed,
                self.cond,
            )),
        }
    }

    /// The single `beta` for a run, or the lone entry of `betas`.
    pub fn single_beta(&self) -> Result<f64> {
        match (self.beta, self.beta_list.as_slice()) {
            (Some(b), _) => Ok(b),
            (None, [b]) => Ok(*b),
            _ => Err(HarnessError::Config("a single run needs --beta".into())),
        }
    }

    /// The β values of a sweep: `betas`, or `beta` alone.
    pub fn sweep_betas(&self) -> Result<Vec<f64>> {
        if !self.beta_list.is_empty() {
            return Ok(self.beta_list.clone());
        }
        self.beta
            .map(|b| vec![b])
            .ok_or_else(|| HarnessError::Config("a sweep needs --betas (comma separated)".into()))
    }

    pub fn solver_config(&self, beta: f64, oracle: &dyn GradientOracle) -> Result<SolverConfig> {
        let l = oracle.lipschitz();
        let cfg = match self.algorithm {
            Algorithm::IpcConstant => {
                let h = self.h.ok_or_else(|| {
                    HarnessError::Config("ipc-constant needs a step size (--h)".into())
                })?;
                SolverConfig::ipc_constant(h, beta)
            }
            Algorithm::IpcAdaptive => {
                if self.h.is_some() {
                    return Err(HarnessError::Config(
                        "--h applies to constant-step runs only".into(),
                    ));
                }
                SolverConfig::ipc_adaptive(self.line_search.resolve(l)?, beta)
            }
            Algorithm::ConvexIpc => {
                let step = match self.h {
                    Some(h) => StepRule::Constant(h),
                    None => StepRule::Adaptive(self.line_search.resolve(l)?),
                };
                SolverConfig::convex_ipc(step, beta, self.eta)
            }
        };
        Ok(cfg
            .with_epsilon(self.epsilon)
            .with_max_iters(self.max_iters)
            .with_trapezoid_mode(self.trapezoid))
    }

    /// `key: value` pairs for file headers; enough to rebuild the run.
    pub fn describe(&self, problem: &Problem, cfg: &SolverConfig) -> Vec<(String, String)> {
        let mut out = vec![
            ("generator".to_string(), problem.kind().as_str().to_string()),
            ("n".into(), problem.dim().to_string()),
            ("seed".into(), problem.seed().to_string()),
        ];
        if let Some(path) = &self.problem_file {
            out.push(("problem-file".into(), path.display().to_string()));
        }
        match problem {
            Problem::Quadratic(q) => {
                out.push(("cond".into(), format!("{}", q.lipschitz / q.diag.min())))
            }
            Problem::ArctanQuadratic(p) => {
                out.push((
                    "skew-part".into(),
                    "B = (C - C^T)/2, C uniform(-5,5)".into(),
                ));
                out.push(("lipschitz".into(), format!("{:.16e}", p.lipschitz)));
            }
            Problem::Fractional(_) => {}
        }
        if let Some(p) = self.profile {
            out.push(("profile".into(), p.as_str().into()));
        }
        out.push(("algorithm".into(), cfg.algorithm.as_str().into()));
        out.push(("beta".into(), format!("{}", cfg.beta)));
        if cfg.algorithm == Algorithm::ConvexIpc {
            out.push(("eta".into(), format!("{}", cfg.eta)));
            out.push(("trapezoid".into(), cfg.trapezoid_mode.to_string()));
        }
        match &cfg.step {
            StepRule::Constant(h) => out.push(("h".into(), format!("{h}"))),
            StepRule::Adaptive(p) => {
                out.push(("mu".into(), format!("{}", p.mu)));
                out.push(("nu".into(), format!("{}", p.nu)));
                out.push(("theta".into(), format!("{}", p.theta)));
                out.push(("tau".into(), format!("{}", p.tau)));
                out.push(("gamma0".into(), format!("{}", p.gamma0_init)));
                out.push(("h-lo".into(), format!("{}", p.h_lo)));
                out.push(("h-hi".into(), format!("{}", p.h_hi)));
                out.push(("ls-max-evals".into(), p.max_evals.to_string()));
            }
        }
        out.push(("epsilon".into(), format!("{}", cfg.epsilon)));
        out.push(("max-iters".into(), cfg.max_iters.to_string()));
        out
    }
}
