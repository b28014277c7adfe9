use serde::Serialize;

use crate::trace::Trace;

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// `None` with fewer than two points or a degenerate abscissa.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: n,
    })
}

/// Fit of `ln |x_k - x̄|` against `k` (or `√k`) over rows `k ∈ [from, to]`.
/// Rows with a non-positive or unknown distance are skipped.
pub fn log_dist_fit(trace: &Trace, from: u64, to: u64, sqrt_index: bool) -> Option<LinearFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .rows
        .iter()
        .filter(|r| r.k >= from && r.k <= to && r.dist > 0.0 && r.dist.is_finite())
        .map(|r| {
            let k = r.k as f64;
            (if sqrt_index { k.sqrt() } else { k }, r.dist.ln())
        })
        .unzip();
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    /// `sup_k gap_k · s_k / log₂(s_k + 2)`.
    pub sublinear_statistic: f64,
    /// `ln dist` against `√k`.
    pub sqrt_fit: Option<LinearFit>,
    /// `ln dist` against `k`.
    pub linear_fit: Option<LinearFit>,
    /// Steps missing the guaranteed decrease `c·ε|g|` (tolerance `1e-10`),
    /// with `c = 1` for exact-oracle runs and `c = ½` for the heuristic.
    pub descent_violations: usize,
}

pub fn rate_diagnostics(trace: &Trace) -> RateReport {
    let sublinear_statistic = trace
        .rows
        .iter()
        .filter(|r| r.gap.is_finite())
        .map(|r| {
            let s = r.calls() as f64;
            r.gap * s / (s + 2.0).log2()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let factor = trace.inferred_algorithm().descent_factor();
    RateReport {
        sublinear_statistic,
        sqrt_fit: log_dist_fit(trace, 0, u64::MAX, true),
        linear_fit: log_dist_fit(trace, 0, u64::MAX, false),
        descent_violations: trace.descent_violations(factor, 1e-10),
    }
}

/// Checks the rescaled gap recursion `γ̂_{k+1} ≤ γ̂_k − γ̂_k²` step by step,
/// where `γ̂ = (a / 2L)² · gap` and `a` is a linear growth constant of the
/// Goldstein modulus (`Γf(x) ≥ a|x - x̄|`). Returns the number of failing steps.
pub fn gap_recursion_violations(trace: &Trace, growth: f64, lipschitz: f64, tol: f64) -> usize {
    let c = (growth / (2.0 * lipschitz)).powi(2);
    trace
        .rows
        .windows(2)
        .filter(|w| {
            let (now, next) = (c * w[0].gap, c * w[1].gap);
            next > now - now * now + tol
        })
        .count()
}
