//! Goldstein subgradients from raw subgradient samples, and the descent
//! heuristic built on them.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::descent::step;
use crate::error::{Error, Result};
use crate::ledger::OracleLedger;
use crate::minnorm::segment_min_norm_weight;
use crate::objectives::{Objective, Point};
use crate::trace::{Algorithm, Recorder, StopReason, Trace};

/// Default cap on subgradient evaluations inside a single approximation.
pub const DEFAULT_MAX_EVALS: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproxStatus {
    /// The step `x - ε g/|g|` decreases `f` by more than `ε|g|/2`.
    DescentCertified,
    /// `|g| < ε`.
    SmallNorm,
}

/// A sampled point and its weight in the returned combination.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPoint {
    pub weight: f64,
    pub z: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub g: Point,
    pub eps: f64,
    pub status: ApproxStatus,
    pub subgrad_evals: u64,
    pub value_evals: u64,
    /// `g = Σ weight·∂f(z)` over these points, all within `ε` of `x`.
    pub support: Vec<SupportPoint>,
}

impl ApproxResult {
    pub fn norm(&self) -> f64 {
        self.g.norm()
    }
}

/// Approximate Goldstein subgradient at radius `eps` with the default cap.
pub fn approx_goldstein<R: Rng + ?Sized>(
    f: &Objective,
    x: &Point,
    eps: f64,
    rng: &mut R,
) -> Result<ApproxResult> {
    approx_goldstein_capped(f, x, eps, rng, DEFAULT_MAX_EVALS)
}

/// Starts from a subgradient at `x` and, while `|g| ≥ ε` and the trial step
/// fails the half-descent test, folds in a subgradient at a uniform point of
/// the trial segment, keeping the shortest vector on the segment.
pub fn approx_goldstein_capped<R: Rng + ?Sized>(
    f: &Objective,
    x: &Point,
    eps: f64,
    rng: &mut R,
    max_evals: u64,
) -> Result<ApproxResult> {
    f.check_point(x)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive and finite, got {eps}")));
    }
    if max_evals < 1 {
        return Err(Error::invalid("evaluation cap must be at least 1"));
    }
    let fx = f.value_unchecked(x);
    let mut value_evals = 1;
    let mut g = f.subgradient_unchecked(x);
    let mut subgrad_evals = 1;
    let mut support = vec![SupportPoint {
        weight: 1.0,
        z: x.clone(),
    }];
    let done = |g: Point, status, subgrad_evals, value_evals, support| ApproxResult {
        g,
        eps,
        status,
        subgrad_evals,
        value_evals,
        support,
    };
    loop {
        let gamma = g.norm();
        if gamma < eps {
            return Ok(done(g, ApproxStatus::SmallNorm, subgrad_evals, value_evals, support));
        }
        let y = step(x, &g, eps / gamma);
        let fy = f.value_unchecked(&y);
        value_evals += 1;
        if fx - fy > eps * gamma / 2.0 {
            return Ok(done(g, ApproxStatus::DescentCertified, subgrad_evals, value_evals, support));
        }
        if subgrad_evals >= max_evals {
            return Err(Error::NoConvergence {
                routine: "approx_goldstein",
                detail: format!("|g| = {gamma:e} ≥ ε = {eps:e} after {subgrad_evals} subgradients"),
            });
        }
        let t: f64 = rng.random();
        let mut z = x * (1.0 - t);
        z.axpy(t, &y, 1.0);
        let h = f.subgradient_unchecked(&z);
        subgrad_evals += 1;
        let (tau, next) = segment_min_norm_weight(&g, &h)?;
        if tau > 0.0 {
            for p in &mut support {
                p.weight *= 1.0 - tau;
            }
            support.retain(|p| p.weight > 0.0);
            support.push(SupportPoint { weight: tau, z });
        }
        g = next;
    }
}

/// Independent per-call random streams derived from one seed.
#[derive(Debug, Clone)]
pub struct SampleStreams {
    seed: u64,
    next: u64,
}

impl SampleStreams {
    pub fn new(seed: u64) -> Self {
        SampleStreams { seed, next: 0 }
    }

    pub fn next_rng(&mut self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.next);
        self.next += 1;
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModulusOutcome {
    /// First halved radius with `|g| ≥ ε`.
    Estimate { eps: f64, result: ApproxResult },
    /// `|g| < ε < ε̄`: the point is treated as stationary.
    Stationary { eps: f64, result: ApproxResult },
}

impl ModulusOutcome {
    pub fn eps(&self) -> f64 {
        match self {
            ModulusOutcome::Estimate { eps, .. } | ModulusOutcome::Stationary { eps, .. } => *eps,
        }
    }

    pub fn result(&self) -> &ApproxResult {
        match self {
            ModulusOutcome::Estimate { result, .. } | ModulusOutcome::Stationary { result, .. } => result,
        }
    }
}

/// Approximation calls for one run: objective, sampling streams, ledger.
pub struct ApproxOracle<'a> {
    f: &'a Objective,
    ledger: &'a OracleLedger,
    streams: SampleStreams,
    max_evals: u64,
}

impl<'a> ApproxOracle<'a> {
    pub fn new(f: &'a Objective, ledger: &'a OracleLedger, seed: u64) -> Self {
        ApproxOracle {
            f,
            ledger,
            streams: SampleStreams::new(seed),
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    pub fn with_max_evals(mut self, max_evals: u64) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn approx(&mut self, x: &Point, eps: f64) -> Result<ApproxResult> {
        let mut rng = self.streams.next_rng();
        self.ledger.record_approx();
        let r = approx_goldstein_capped(self.f, x, eps, &mut rng, self.max_evals)?;
        self.ledger.record_subgrad_evals(r.subgrad_evals);
        self.ledger.record_value_evals(r.value_evals);
        Ok(r)
    }

    /// Halves `ε` starting from `eps0` until the approximation has
    /// `|g| ≥ ε`, or until `|g| < ε < eps_bar`.
    pub fn estimate_modulus(&mut self, x: &Point, eps0: f64, eps_bar: f64) -> Result<ModulusOutcome> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Error::invalid(format!("initial radius must be positive, got {eps0}")));
        }
        if !(eps_bar >= 0.0) {
            return Err(Error::invalid("stationarity tolerance must be nonnegative"));
        }
        let mut eps = eps0;
        loop {
            eps /= 2.0;
            if eps < f64::MIN_POSITIVE {
                return Err(Error::NoConvergence {
                    routine: "estimate_modulus",
                    detail: format!("radius underflowed from {eps0:e}"),
                });
            }
            let result = self.approx(x, eps)?;
            let n = result.norm();
            if n < eps && eps < eps_bar {
                return Ok(ModulusOutcome::Stationary { eps, result });
            }
            if n >= eps {
                return Ok(ModulusOutcome::Estimate { eps, result });
            }
        }
    }
}

/// Modulus estimation with a fresh [`ApproxOracle`] seeded by `seed`.
pub fn estimate_modulus(
    f: &Objective,
    x: &Point,
    eps0: f64,
    eps_bar: f64,
    seed: u64,
    ledger: &OracleLedger,
) -> Result<ModulusOutcome> {
    ApproxOracle::new(f, ledger, seed).estimate_modulus(x, eps0, eps_bar)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub lipschitz: f64,
    /// Stationarity tolerance `ε̄`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    pub max_iterations: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_evals")]
    pub max_evals_per_call: u64,
}

fn default_tol() -> f64 {
    1e-10
}

fn default_beta() -> f64 {
    0.25
}

fn default_max_evals() -> u64 {
    DEFAULT_MAX_EVALS
}

impl HeuristicConfig {
    pub fn new(lipschitz: f64, max_iterations: u64) -> Self {
        HeuristicConfig {
            lipschitz,
            tol: default_tol(),
            beta: default_beta(),
            max_iterations,
            seed: 0,
            max_evals_per_call: DEFAULT_MAX_EVALS,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::invalid(format!(
                "Lipschitz constant must be positive, got {}",
                self.lipschitz
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::invalid("stationarity tolerance must be nonnegative"));
        }
        if self.max_evals_per_call < 1 {
            return Err(Error::invalid("evaluation cap must be at least 1"));
        }
        Ok(())
    }
}

/// Descent with approximate Goldstein subgradients.
///
/// Each iteration estimates the modulus from `L`, estimates it again starting
/// one halving above `β` times the first estimate, and steps a distance `ε`
/// along the second approximation. A failing child routine ends the run with
/// [`StopReason::Failed`] and the trace so far.
pub fn minimize_heuristic(
    f: &Objective,
    x0: &Point,
    cfg: &HeuristicConfig,
    ledger: &OracleLedger,
) -> Result<(Point, Trace)> {
    cfg.validate()?;
    let mut value = f.evaluate(x0)?;
    let mut x = x0.clone();
    let mut rec = Recorder::new(f, ledger, Algorithm::Alg7);
    let mut oracle = ApproxOracle::new(f, ledger, cfg.seed).with_max_evals(cfg.max_evals_per_call);

    let stop = 'outer: {
        for _ in 0..cfg.max_iterations {
            let first = match oracle.estimate_modulus(&x, cfg.lipschitz, cfg.tol) {
                Ok(ModulusOutcome::Estimate { eps, .. }) => eps,
                Ok(ModulusOutcome::Stationary { eps, result }) => {
                    rec.push(&x, value, eps, result.norm());
                    break 'outer StopReason::Stationary;
                }
                Err(e) => {
                    rec.push(&x, value, 0.0, 0.0);
                    break 'outer StopReason::Failed(e.to_string());
                }
            };
            let (eps, result) = match oracle.estimate_modulus(&x, 2.0 * cfg.beta * first, cfg.tol) {
                Ok(ModulusOutcome::Estimate { eps, result }) => (eps, result),
                Ok(ModulusOutcome::Stationary { eps, result }) => {
                    rec.push(&x, value, eps, result.norm());
                    break 'outer StopReason::Stationary;
                }
                Err(e) => {
                    rec.push(&x, value, 0.0, 0.0);
                    break 'outer StopReason::Failed(e.to_string());
                }
            };
            let n = result.norm();
            rec.push(&x, value, eps, n);
            rec.bracket(first);
            x = step(&x, &result.g, eps / n);
            value = f.value_unchecked(&x);
        }
        rec.push(&x, value, 0.0, 0.0);
        StopReason::Iterations
    };
    Ok((x, rec.finish(stop)))
}
