//! Idealized Goldstein descent driven by an exact oracle.

mod diagnostics;

pub use diagnostics::{gap_recursion_violations, linear_fit, log_dist_fit, rate_diagnostics, LinearFit, RateReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goldstein::{bisect, Bracket, GoldsteinOracle, GoldsteinResult, CRITICAL_NORM};
use crate::ledger::OracleLedger;
use crate::objectives::{Objective, Point};
use crate::trace::{Algorithm, Recorder, StopReason, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub lipschitz: f64,
    pub max_oracle_calls: u64,
    /// Step multiplier of [`minimize_fast`]; ignored by [`minimize_bisection`].
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Halt once the modulus bracket drops below this; `0` disables it.
    #[serde(default)]
    pub stop_eps: f64,
}

fn default_beta() -> f64 {
    0.5
}

impl RunConfig {
    pub fn new(lipschitz: f64, max_oracle_calls: u64) -> Self {
        RunConfig {
            lipschitz,
            max_oracle_calls,
            beta: default_beta(),
            stop_eps: 0.0,
        }
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_stop_eps(mut self, stop_eps: f64) -> Self {
        self.stop_eps = stop_eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::invalid(format!(
                "Lipschitz constant must be positive, got {}",
                self.lipschitz
            )));
        }
        if self.max_oracle_calls < 1 {
            return Err(Error::invalid("oracle budget must be at least 1"));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        if !(self.stop_eps >= 0.0) {
            return Err(Error::invalid("stop_eps must be nonnegative"));
        }
        Ok(())
    }
}

/// `x - ε g/|g|`, computed as `x - (ε/|g|) g`.
pub fn goldstein_update(x: &Point, g: &Point, eps: f64) -> Result<Point> {
    if x.len() != g.len() {
        return Err(Error::invalid("point and subgradient differ in dimension"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("step radius must be positive, got {eps}")));
    }
    let n = g.norm();
    if n == 0.0 {
        return Err(Error::invalid("Goldstein update needs a nonzero subgradient"));
    }
    Ok(step(x, g, eps / n))
}

pub(crate) fn step(x: &Point, g: &Point, scale: f64) -> Point {
    let mut y = x.clone();
    y.axpy(-scale, g, 1.0);
    y
}

/// Forwards to an oracle and books every call in the ledger.
struct Ledgered<'a, O: ?Sized> {
    inner: &'a O,
    ledger: &'a OracleLedger,
}

impl<O: GoldsteinOracle + ?Sized> GoldsteinOracle for Ledgered<'_, O> {
    fn goldstein(&self, x: &Point, eps: f64) -> Result<GoldsteinResult> {
        self.ledger.record_goldstein();
        self.inner.goldstein(x, eps)
    }
}

fn start<'a>(
    f: &'a Objective,
    x0: &Point,
    cfg: &RunConfig,
    ledger: &'a OracleLedger,
    algorithm: Algorithm,
) -> Result<(Point, f64, Recorder<'a>)> {
    cfg.validate()?;
    let value = f.evaluate(x0)?;
    Ok((x0.clone(), value, Recorder::new(f, ledger, algorithm)))
}

/// Goldstein descent with a fresh bisection search before every step.
///
/// Each outer iteration probes `g_0(x)`, then halves `ε` from `L/2` while
/// `|g_ε(x)| ≤ ε`, and steps `x ← x - ε g/|g|` with the first `g` that
/// exits. Every oracle call counts against `max_oracle_calls`; the run
/// returns as soon as the count exceeds it, at a critical point, or (when
/// enabled) once the bracket drops below `stop_eps`.
pub fn minimize_bisection<O: GoldsteinOracle + ?Sized>(
    f: &Objective,
    x0: &Point,
    cfg: &RunConfig,
    oracle: &O,
    ledger: &OracleLedger,
) -> Result<(Point, Trace)> {
    let (mut x, mut value, mut rec) = start(f, x0, cfg, ledger, Algorithm::Alg3)?;
    let counted = Ledgered { inner: oracle, ledger };
    let mut s = 0u64;
    let stop = loop {
        match bisect(&counted, &x, cfg.lipschitz, &mut s, cfg.max_oracle_calls)? {
            Bracket::Critical => {
                rec.push(&x, value, 0.0, 0.0);
                break StopReason::Critical;
            }
            Bracket::Exhausted { eps, g_norm } => {
                rec.push(&x, value, eps, g_norm);
                break StopReason::Budget;
            }
            Bracket::Found { eps, g } => {
                rec.push(&x, value, eps, g.norm());
                if eps < cfg.stop_eps {
                    break StopReason::StopEps;
                }
                rec.bracket(eps);
                x = goldstein_update(&x, &g, eps)?;
                value = f.evaluate(&x)?;
            }
        }
    };
    Ok((x, rec.finish(stop)))
}

/// Bisection for the modulus bracket, then a step of radius `β·ε`.
///
/// The bracket search and the step's oracle call share one budget. A zero
/// subgradient at the scaled radius (impossible with an exact oracle) halves
/// the radius and retries; retries are counted on the trace.
pub fn minimize_fast<O: GoldsteinOracle + ?Sized>(
    f: &Objective,
    x0: &Point,
    cfg: &RunConfig,
    oracle: &O,
    ledger: &OracleLedger,
) -> Result<(Point, Trace)> {
    let (mut x, mut value, mut rec) = start(f, x0, cfg, ledger, Algorithm::Alg4)?;
    let counted = Ledgered { inner: oracle, ledger };
    let budget = cfg.max_oracle_calls;
    let mut s = 0u64;
    let stop = 'outer: loop {
        let bracket = match bisect(&counted, &x, cfg.lipschitz, &mut s, budget)? {
            Bracket::Critical => {
                rec.push(&x, value, 0.0, 0.0);
                break StopReason::Critical;
            }
            Bracket::Exhausted { eps, g_norm } => {
                rec.push(&x, value, eps, g_norm);
                break StopReason::Budget;
            }
            Bracket::Found { eps, g } => {
                if eps < cfg.stop_eps {
                    rec.push(&x, value, eps, g.norm());
                    break StopReason::StopEps;
                }
                eps
            }
        };
        let mut eps = cfg.beta * bracket;
        let g = loop {
            let g = counted.goldstein(&x, eps)?.g;
            s += 1;
            if s > budget {
                rec.push(&x, value, eps, g.norm());
                break 'outer StopReason::Budget;
            }
            if g.norm() > CRITICAL_NORM {
                break g;
            }
            rec.retry();
            eps *= 0.5;
            if eps < f64::MIN_POSITIVE {
                return Err(Error::NoConvergence {
                    routine: "minimize_fast",
                    detail: "zero Goldstein subgradient at every scaled radius".into(),
                });
            }
        };
        rec.push(&x, value, eps, g.norm());
        rec.bracket(bracket);
        x = goldstein_update(&x, &g, eps)?;
        value = f.evaluate(&x)?;
    };
    Ok((x, rec.finish(stop)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goldstein::ExactOracle;
    use approx::assert_abs_diff_eq;

    fn p(v: &[f64]) -> Point {
        Point::from_column_slice(v)
    }

    #[test]
    fn update_examples() {
        assert_eq!(
            goldstein_update(&p(&[1.0, 0.0]), &p(&[2.0, 0.0]), 0.5).unwrap(),
            p(&[0.5, 0.0])
        );
        assert_eq!(
            goldstein_update(&p(&[0.0, 0.0]), &p(&[0.0, 1.0]), 1.0).unwrap(),
            p(&[0.0, -1.0])
        );
        assert!(matches!(
            goldstein_update(&p(&[1.0]), &p(&[0.0]), 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(goldstein_update(&p(&[1.0]), &p(&[1.0]), 0.0).is_err());
    }

    #[test]
    fn update_descends_on_half_sq_norm() {
        let f = Objective::half_sq_norm(1.0, 2).unwrap();
        let x = p(&[1.0, 0.0]);
        let g = crate::goldstein::exact_goldstein_radial(&f, &x, 0.25).unwrap().g;
        let y = goldstein_update(&x, &g, 0.25).unwrap();
        let fy = f.evaluate(&y).unwrap();
        assert_abs_diff_eq!(fy, 0.28125, epsilon = 1e-15);
        assert!(fy <= 0.5 - 0.25 * g.norm());
    }

    #[test]
    fn bisection_run_at_minimizer_is_one_row() {
        let f = Objective::half_sq_norm(1.0, 2).unwrap();
        let oracle = ExactOracle::new(&f).unwrap();
        let ledger = OracleLedger::new();
        let cfg = RunConfig::new(1.0, 100);
        let (x, trace) = minimize_bisection(&f, &Point::zeros(2), &cfg, &oracle, &ledger).unwrap();
        assert_eq!(x, Point::zeros(2));
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.stop, StopReason::Critical);
        assert_eq!(trace.rows[0].gap, 0.0);
        assert_eq!(trace.rows[0].s_goldstein, 1);
    }

    #[test]
    fn bisection_on_abs() {
        let f = Objective::max_affine(vec![p(&[1.0]), p(&[-1.0])], vec![0.0, 0.0])
            .unwrap()
            .with_minimizer(p(&[0.0]))
            .unwrap();
        let oracle = ExactOracle::new(&f).unwrap();
        let ledger = OracleLedger::new();
        let cfg = RunConfig::new(1.0, 400);
        let (_, trace) = minimize_bisection(&f, &p(&[1.0]), &cfg, &oracle, &ledger).unwrap();
        assert!(trace.last().unwrap().gap <= 2f64.powi(-10));
        assert_eq!(trace.descent_violations(1.0, 1e-10), 0);
        for w in trace.rows.windows(2) {
            // step length is exactly the bracket radius
            assert_abs_diff_eq!(w[0].dist - w[1].dist, w[0].eps, epsilon = 1e-15);
        }
    }

    #[test]
    fn budget_is_respected() {
        let f = Objective::half_sq_norm(1.0, 3).unwrap();
        let oracle = ExactOracle::new(&f).unwrap();
        for budget in [1u64, 2, 3, 7, 50] {
            let ledger = OracleLedger::new();
            let cfg = RunConfig::new(1.0, budget);
            let (_, trace) =
                minimize_bisection(&f, &p(&[0.6, 0.0, 0.8]), &cfg, &oracle, &ledger).unwrap();
            assert_eq!(trace.stop, StopReason::Budget);
            assert_eq!(ledger.goldstein_calls(), budget + 1);
            assert_eq!(trace.last().unwrap().s_goldstein, budget + 1);

            let ledger = OracleLedger::new();
            let (_, trace) =
                minimize_fast(&f, &p(&[0.6, 0.0, 0.8]), &cfg.with_beta(0.5), &oracle, &ledger)
                    .unwrap();
            assert_eq!(trace.stop, StopReason::Budget);
            assert_eq!(ledger.goldstein_calls(), budget + 1);
        }
    }

    #[test]
    fn stop_eps_halts_early() {
        let f = Objective::half_sq_norm(1.0, 2).unwrap();
        let oracle = ExactOracle::new(&f).unwrap();
        let ledger = OracleLedger::new();
        let cfg = RunConfig::new(1.0, 10_000).with_stop_eps(1e-3);
        let (x, trace) = minimize_bisection(&f, &p(&[1.0, 0.0]), &cfg, &oracle, &ledger).unwrap();
        assert_eq!(trace.stop, StopReason::StopEps);
        assert!(trace.last().unwrap().eps < 1e-3);
        assert!(x.norm() < 1e-2);
    }

    #[test]
    fn fast_with_beta_one_steps_the_bracket() {
        let f = Objective::half_sq_norm(1.0, 2).unwrap();
        let oracle = ExactOracle::new(&f).unwrap();
        let cfg = RunConfig::new(1.0, 60).with_beta(1.0);
        let (_, fast) =
            minimize_fast(&f, &p(&[1.0, 0.0]), &cfg, &oracle, &OracleLedger::new()).unwrap();
        let (_, bis) =
            minimize_bisection(&f, &p(&[1.0, 0.0]), &cfg, &oracle, &OracleLedger::new()).unwrap();
        let n = fast.rows.len().min(bis.rows.len()) - 1;
        assert!(n >= 5);
        for k in 0..n {
            assert_eq!(fast.rows[k].eps, bis.rows[k].eps);
            assert_eq!(fast.rows[k].dist, bis.rows[k].dist);
        }
    }

    #[test]
    fn invalid_config() {
        let f = Objective::half_sq_norm(1.0, 2).unwrap();
        let oracle = ExactOracle::new(&f).unwrap();
        let ledger = OracleLedger::new();
        let x0 = p(&[1.0, 0.0]);
        assert!(minimize_fast(&f, &x0, &RunConfig::new(1.0, 10).with_beta(0.0), &oracle, &ledger).is_err());
        assert!(minimize_fast(&f, &x0, &RunConfig::new(1.0, 10).with_beta(1.5), &oracle, &ledger).is_err());
        assert!(minimize_bisection(&f, &x0, &RunConfig::new(0.0, 10), &oracle, &ledger).is_err());
        assert!(minimize_bisection(&f, &x0, &RunConfig::new(1.0, 0), &oracle, &ledger).is_err());
        assert!(minimize_bisection(&f, &p(&[1.0]), &RunConfig::new(1.0, 10), &oracle, &ledger).is_err());
    }
}
