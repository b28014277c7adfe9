//! Quick oracle-agreement and invariant checks, run by `goldstein selftest`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approx::{minimize_heuristic, HeuristicConfig};
use crate::descent::{minimize_bisection, minimize_fast, RunConfig};
use crate::goldstein::{modulus_bisection, sampled_goldstein, uniform_in_ball, ExactOracle, GoldsteinOracle};
use crate::harness::{read_trace_csv, write_trace_csv};
use crate::ledger::OracleLedger;
use crate::minnorm::{min_norm_point, DEFAULT_TOL};
use crate::objectives::{InstanceSpec, Objective, Point};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> crate::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: e.to_string(),
        },
    }
}

/// Brute-force minimum of `|Σ λ_i p_i|` over a simplex grid of `n` cells per
/// edge, for three points.
fn grid_min_norm3(p: &[Point], n: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=n - i {
            let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
            let v = &p[0] * a + &p[1] * b + &p[2] * (1.0 - a - b);
            best = best.min(v.norm());
        }
    }
    best
}

pub fn run() -> Vec<Check> {
    let mut out = Vec::new();

    out.push(check("exact_vs_sampled_oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for name in ["half_sq_norm", "scaled_norm", "quartic"] {
            let f = Objective::builtin(name, 1.0, 2)?;
            let exact = ExactOracle::new(&f)?;
            for k in 0..5 {
                let x = uniform_in_ball(&mut rng, 2) * 2.0;
                let eps = rng.random_range(0.05..1.0);
                let a = exact.goldstein(&x, eps)?.norm();
                let b = sampled_goldstein(&f, &x, eps, 2000, k)?.norm();
                worst = worst.max((a - b).abs());
            }
        }
        Ok((worst <= 0.05, format!("max |difference| = {worst:.3e}")))
    }));

    out.push(check("min_norm_vs_grid", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let pts: Vec<Point> = (0..3).map(|_| Point::from_fn(2, |_, _| rng.random_range(-1.0..1.0))).collect();
            let w = min_norm_point(&pts, DEFAULT_TOL)?.norm();
            worst = worst.max((w - grid_min_norm3(&pts, 200)).abs());
        }
        Ok((worst <= 2e-2, format!("max |difference| = {worst:.3e}")))
    }));

    out.push(check("bisection_bracket_and_count", || {
        let f = Objective::half_sq_norm(1.0, 2)?;
        let oracle = ExactOracle::new(&f)?;
        let x = Point::from_column_slice(&[1.0, 0.0]);
        let est = modulus_bisection(&oracle, &x, 1.0)?;
        let gamma: f64 = 0.5;
        let want = 2 + (1.0f64.log2() - gamma.log2()).floor() as u64;
        let ok = est.eps >= gamma / 2.0 && est.eps < gamma && est.oracle_calls == want;
        Ok((ok, format!("eps = {}, calls = {} (expected {want})", est.eps, est.oracle_calls)))
    }));

    out.push(check("exact_descent_certificate", || {
        let f = Objective::scaled_norm(1.0, 3)?;
        let oracle = ExactOracle::new(&f)?;
        let x0 = Point::from_column_slice(&[0.6, -0.8, 0.0]);
        let mut violations = 0;
        for beta in [None, Some(0.5)] {
            let ledger = OracleLedger::new();
            let cfg = RunConfig::new(1.0, 100);
            let (_, t) = match beta {
                None => minimize_bisection(&f, &x0, &cfg, &oracle, &ledger)?,
                Some(b) => minimize_fast(&f, &x0, &cfg.with_beta(b), &oracle, &ledger)?,
            };
            violations += t.descent_violations(1.0, 1e-10);
        }
        Ok((violations == 0, format!("{violations} violations")))
    }));

    out.push(check("heuristic_decrease_and_trace_round_trip", || {
        let f = Objective::max_quadratics(&InstanceSpec {
            seed: 1,
            dimension: 4,
            pieces: 3,
        })?;
        let ledger = OracleLedger::new();
        let x0 = Point::from_element(4, 0.5);
        let cfg = HeuristicConfig::new(f.lipschitz_bound(), 10).with_seed(1);
        let (_, t) = minimize_heuristic(&f, &x0, &cfg, &ledger)?;
        let mut buf = Vec::new();
        write_trace_csv(&t, &mut buf)?;
        let back = read_trace_csv(&buf[..])?;
        let ok = t.descent_violations(0.5, 0.0) == 0
            && back.gap_non_increasing()
            && back.counters_non_decreasing()
            && back.rows.iter().zip(&t.rows).all(|(a, b)| a.gap == b.gap && a.dist == b.dist);
        Ok((ok, format!("{} steps", t.accepted_steps())))
    }));

    out
}
