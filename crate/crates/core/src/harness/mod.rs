//! Experiment configuration, sweeps over `β`, trace files and plots.

mod plot;
mod traceio;

pub use plot::{plot_convergence, save_plot, XAxis, YAxis};
pub use traceio::{load_trace_csv, read_trace_csv, save_trace_csv, write_trace_csv, CSV_HEADER};

use std::path::{Path, PathBuf};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{minimize_heuristic, HeuristicConfig, DEFAULT_MAX_EVALS};
use crate::descent::{minimize_bisection, minimize_fast, RunConfig};
use crate::error::{Error, Result};
use crate::goldstein::ExactOracle;
use crate::ledger::OracleLedger;
use crate::objectives::{InstanceSpec, Objective, Point};
use crate::trace::{Algorithm, StopReason, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `half_sq_norm`, `scaled_norm` or `quartic`.
    Builtin { name: String, alpha: f64, dimension: usize },
    MaxAffine {
        slopes: Vec<Vec<f64>>,
        intercepts: Vec<f64>,
        #[serde(default)]
        minimizer: Option<Vec<f64>>,
    },
    MaxQuadratics(InstanceSpec),
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Objective> {
        match self {
            ObjectiveSpec::Builtin { name, alpha, dimension } => Objective::builtin(name, *alpha, *dimension),
            ObjectiveSpec::MaxAffine {
                slopes,
                intercepts,
                minimizer,
            } => {
                let slopes = slopes.iter().map(|a| Point::from_column_slice(a)).collect();
                let f = Objective::max_affine(slopes, intercepts.clone())?;
                match minimizer {
                    Some(m) => f.with_minimizer(Point::from_column_slice(m)),
                    None => Ok(f),
                }
            }
            ObjectiveSpec::MaxQuadratics(spec) => Objective::max_quadratics(spec),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StartSpec {
    Given(Vec<f64>),
    RandomUnitSphere { seed: u64 },
}

/// Uniform point on the unit sphere of `R^d`.
pub fn random_unit_sphere(seed: u64, d: usize) -> Result<Point> {
    if d == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = Point::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        let n = v.norm();
        if n > 0.0 {
            return Ok(v / n);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub algorithm: Algorithm,
    /// Defaults to the objective's Lipschitz bound.
    #[serde(default)]
    pub lipschitz: Option<f64>,
    /// Oracle budget of `alg3` / `alg4`.
    #[serde(default)]
    pub max_oracle_calls: Option<u64>,
    #[serde(default)]
    pub stop_eps: f64,
    /// Outer iterations of `alg7`.
    #[serde(default)]
    pub max_iterations: Option<u64>,
    /// Stationarity tolerance of `alg7`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Sampling seed of `alg7`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_evals")]
    pub max_evals_per_call: u64,
    /// One run per entry; `alg3` takes no `β` and runs once.
    #[serde(default)]
    pub betas: Vec<f64>,
    pub x0: StartSpec,
    pub output_dir: PathBuf,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_evals() -> u64 {
    DEFAULT_MAX_EVALS
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        match self.algorithm {
            Algorithm::Alg3 | Algorithm::Alg4 => {
                if self.max_oracle_calls.is_none() {
                    return Err(Error::invalid(format!(
                        "{} needs max_oracle_calls",
                        self.algorithm.name()
                    )));
                }
                if self.max_iterations.is_some() {
                    return Err(Error::invalid("max_iterations only applies to alg7"));
                }
            }
            Algorithm::Alg7 => {
                if self.max_iterations.is_none() {
                    return Err(Error::invalid("alg7 needs max_iterations"));
                }
                if self.max_oracle_calls.is_some() {
                    return Err(Error::invalid("max_oracle_calls only applies to alg3 and alg4"));
                }
            }
        }
        if self.algorithm != Algorithm::Alg3 && self.betas.is_empty() {
            return Err(Error::invalid("betas must be nonempty"));
        }
        for (i, &b) in self.betas.iter().enumerate() {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::invalid(format!("beta must lie in (0, 1], got {b}")));
            }
            if self.betas[..i].contains(&b) {
                return Err(Error::invalid(format!("beta {b} listed twice")));
            }
        }
        if let Some(l) = self.lipschitz {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid(format!("Lipschitz constant must be positive, got {l}")));
            }
        }
        Ok(())
    }

    fn start(&self, d: usize) -> Result<Point> {
        match &self.x0 {
            StartSpec::Given(v) => {
                if v.len() != d {
                    return Err(Error::invalid(format!(
                        "x0 has {} coordinates, objective has dimension {d}",
                        v.len()
                    )));
                }
                Ok(Point::from_column_slice(v))
            }
            StartSpec::RandomUnitSphere { seed } => random_unit_sphere(*seed, d),
        }
    }

    /// The `β` values actually run: a single placeholder for `alg3`.
    fn sweep(&self) -> Vec<Option<f64>> {
        match self.algorithm {
            Algorithm::Alg3 => vec![None],
            _ => self.betas.iter().map(|&b| Some(b)).collect(),
        }
    }
}

/// Trace file name for one run of a sweep.
pub fn trace_file_name(algorithm: Algorithm, beta: Option<f64>) -> String {
    match beta {
        Some(b) => format!("{}_beta_{b}.csv", algorithm.name()),
        None => format!("{}.csv", algorithm.name()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub beta: Option<f64>,
    pub trace_file: Option<String>,
    pub steps: usize,
    /// `None` when unknown (no minimizer, or no trace).
    pub final_gap: Option<f64>,
    pub final_dist: Option<f64>,
    pub total_calls: u64,
    pub total_subgrad_evals: u64,
    pub seed: u64,
    pub stop: Option<StopReason>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub lipschitz: f64,
    pub x0: Vec<f64>,
    pub runs: Vec<RunRecord>,
}

/// Runs one configured algorithm from `x0` with the given `β`.
pub fn run_single(
    cfg: &ExperimentConfig,
    f: &Objective,
    x0: &Point,
    lipschitz: f64,
    beta: Option<f64>,
    ledger: &OracleLedger,
) -> Result<(Point, Trace)> {
    match cfg.algorithm {
        Algorithm::Alg3 | Algorithm::Alg4 => {
            let mut rc = RunConfig::new(lipschitz, cfg.max_oracle_calls.unwrap_or(0)).with_stop_eps(cfg.stop_eps);
            if let Some(b) = beta {
                rc = rc.with_beta(b);
            }
            let oracle = ExactOracle::new(f)?;
            if cfg.algorithm == Algorithm::Alg3 {
                minimize_bisection(f, x0, &rc, &oracle, ledger)
            } else {
                minimize_fast(f, x0, &rc, &oracle, ledger)
            }
        }
        Algorithm::Alg7 => {
            let mut hc = HeuristicConfig::new(lipschitz, cfg.max_iterations.unwrap_or(0))
                .with_tol(cfg.tol)
                .with_seed(cfg.seed);
            hc.max_evals_per_call = cfg.max_evals_per_call;
            if let Some(b) = beta {
                hc = hc.with_beta(b);
            }
            minimize_heuristic(f, x0, &hc, ledger)
        }
    }
}

/// Runs the sweep in parallel, writing one CSV per run and `summary.json`
/// into the output directory. A failing run is recorded in the summary and
/// does not stop the others.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let f = cfg.objective.build()?;
    let x0 = cfg.start(f.dimension())?;
    let lipschitz = cfg.lipschitz.unwrap_or_else(|| f.lipschitz_bound());
    std::fs::create_dir_all(&cfg.output_dir)?;

    let runs: Vec<RunRecord> = cfg
        .sweep()
        .into_par_iter()
        .map(|beta| -> Result<RunRecord> {
            let ledger = OracleLedger::new();
            let mut rec = RunRecord {
                beta,
                trace_file: None,
                steps: 0,
                final_gap: None,
                final_dist: None,
                total_calls: 0,
                total_subgrad_evals: 0,
                seed: cfg.seed,
                stop: None,
                error: None,
            };
            match run_single(cfg, &f, &x0, lipschitz, beta, &ledger) {
                Ok((_, trace)) => {
                    let name = trace_file_name(cfg.algorithm, beta);
                    save_trace_csv(&trace, &cfg.output_dir.join(&name))?;
                    let snap = ledger.snapshot();
                    if let Some(last) = trace.last() {
                        rec.final_gap = Some(last.gap).filter(|v| v.is_finite());
                        rec.final_dist = Some(last.dist).filter(|v| v.is_finite());
                    }
                    rec.trace_file = Some(name);
                    rec.steps = trace.accepted_steps();
                    rec.total_calls = snap.goldstein_calls + snap.approx_calls;
                    rec.total_subgrad_evals = snap.subgrad_evals;
                    if let StopReason::Failed(msg) = &trace.stop {
                        rec.error = Some(msg.clone());
                    }
                    rec.stop = Some(trace.stop);
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;

    let summary = RunSummary {
        algorithm: cfg.algorithm,
        lipschitz,
        x0: x0.iter().copied().collect(),
        runs,
    };
    let text = serde_json::to_string_pretty(&summary)?;
    std::fs::write(cfg.output_dir.join("summary.json"), text + "\n")?;
    Ok(summary)
}
