//! Goldstein subgradient oracles and the modulus bisection.
//!
//! The Goldstein subgradient `g_ε(x)` is the shortest vector of
//! `conv ∂f(x + εB)`. It is available in closed form for the radial
//! builtins and exactly (up to solver tolerance) for piecewise-affine
//! maxima. [`sampled_goldstein`] is a brute-force reference used by tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minnorm::{min_norm_point, polyhedron_distance, Polyhedron, DEFAULT_TOL};
use crate::objectives::{Objective, ObjectiveKind, Point, Radial};

/// Absolute slack on the ε-activity test of the polyhedral oracle.
pub const ACTIVITY_TOL: f64 = 1e-9;

/// A probe whose Goldstein subgradient is at most this long counts as Clarke critical.
pub const CRITICAL_NORM: f64 = 1e-13;

const PROJECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleSource {
    ExactClosedForm,
    ExactPolyhedral,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldsteinResult {
    pub g: Point,
    pub eps: f64,
    pub source: OracleSource,
}

impl GoldsteinResult {
    pub fn norm(&self) -> f64 {
        self.g.norm()
    }
}

/// Anything that answers `(x, ε) ↦ g_ε(x)`.
pub trait GoldsteinOracle {
    fn goldstein(&self, x: &Point, eps: f64) -> Result<GoldsteinResult>;
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("radius must be finite and nonnegative, got {eps}")));
    }
    Ok(())
}

/// Closed-form `g_ε(x)` for the radial builtins.
pub fn exact_goldstein_radial(f: &Objective, x: &Point, eps: f64) -> Result<GoldsteinResult> {
    let (shape, alpha) = f
        .radial_shape()
        .ok_or_else(|| Error::invalid("closed-form oracle needs a radial builtin"))?;
    f.check_point(x)?;
    check_eps(eps)?;

    let r = x.norm();
    let d = x.len();
    let g = if r == 0.0 || eps >= r {
        // the ball contains the minimizer
        Point::zeros(d)
    } else {
        let unit = x / r;
        let length = match shape {
            Radial::HalfSqNorm => alpha * (r - eps),
            // min-norm point of the hull of the cap of gradient directions
            Radial::ScaledNorm if d >= 2 => alpha * (1.0 - (eps / r).powi(2)).sqrt(),
            Radial::ScaledNorm => alpha,
            Radial::Quartic => alpha * (r - eps).powi(3),
        };
        unit * length
    };
    Ok(GoldsteinResult {
        g,
        eps,
        source: OracleSource::ExactClosedForm,
    })
}

/// Region of `R^d` where piece `i` of a max-affine function attains the max.
pub fn piece_region(slopes: &[Point], intercepts: &[f64], i: usize) -> Polyhedron {
    let mut normals = Vec::with_capacity(slopes.len().saturating_sub(1));
    let mut offsets = Vec::with_capacity(slopes.len().saturating_sub(1));
    for j in 0..slopes.len() {
        if j != i {
            normals.push(&slopes[i] - &slopes[j]);
            offsets.push(intercepts[j] - intercepts[i]);
        }
    }
    Polyhedron { normals, offsets }
}

/// Exact `g_ε(x)` for `max_i {a_i·x + b_i}`: the shortest point of the hull
/// of the slopes of every piece that attains the max within distance
/// `ε + tol` of `x`.
pub fn exact_goldstein_max_affine(
    f: &Objective,
    x: &Point,
    eps: f64,
    tol: f64,
) -> Result<GoldsteinResult> {
    let ObjectiveKind::MaxAffine { slopes, intercepts } = f.kind() else {
        return Err(Error::invalid("polyhedral oracle needs a max-affine objective"));
    };
    f.check_point(x)?;
    check_eps(eps)?;

    let mut active = Vec::new();
    for i in 0..slopes.len() {
        let region = piece_region(slopes, intercepts, i);
        let dist = polyhedron_distance(&region, x, PROJECTION_TOL)?;
        if dist <= eps + tol {
            active.push(slopes[i].clone());
        }
    }
    if active.is_empty() {
        return Err(Error::Internal(
            "no ε-active piece, but the piece active at x always is".into(),
        ));
    }
    let hull = min_norm_point(&active, DEFAULT_TOL)?;
    Ok(GoldsteinResult {
        g: hull.point,
        eps,
        source: OracleSource::ExactPolyhedral,
    })
}

/// Brute-force reference: min-norm point of raw subgradients at `x`, at the
/// `2d` axis points `x ± ε e_j`, and at `n_samples` uniform draws from
/// `x + εB`. Overestimates `|g_ε(x)|`.
pub fn sampled_goldstein(
    f: &Objective,
    x: &Point,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<GoldsteinResult> {
    f.check_point(x)?;
    check_eps(eps)?;
    if n_samples == 0 {
        return Err(Error::invalid("sampled oracle needs at least one sample"));
    }
    let d = x.len();
    let mut subgrads = Vec::with_capacity(1 + 2 * d + n_samples);
    subgrads.push(f.subgradient_unchecked(x));
    if eps > 0.0 {
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[j] += sign * eps;
                subgrads.push(f.subgradient_unchecked(&y));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_samples {
            let y = x + uniform_in_ball(&mut rng, d) * eps;
            subgrads.push(f.subgradient_unchecked(&y));
        }
    }
    let hull = min_norm_point(&subgrads, DEFAULT_TOL)?;
    Ok(GoldsteinResult {
        g: hull.point,
        eps,
        source: OracleSource::Sampled,
    })
}

/// Uniform draw from the closed unit ball of `R^d`.
pub fn uniform_in_ball(rng: &mut impl Rng, d: usize) -> Point {
    loop {
        let dir = Point::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = dir.norm();
        if n > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / d as f64);
            return dir * (radius / n);
        }
    }
}

/// The exact oracle for an objective that has one (radial or max-affine).
#[derive(Debug, Clone, Copy)]
pub struct ExactOracle<'a> {
    f: &'a Objective,
}

impl<'a> ExactOracle<'a> {
    pub fn new(f: &'a Objective) -> Result<Self> {
        match f.kind() {
            ObjectiveKind::Radial { .. } | ObjectiveKind::MaxAffine { .. } => Ok(ExactOracle { f }),
            ObjectiveKind::MaxQuadratics { .. } => Err(Error::invalid(
                "no exact Goldstein oracle for a maximum of quadratics",
            )),
        }
    }

    pub fn objective(&self) -> &'a Objective {
        self.f
    }
}

impl GoldsteinOracle for ExactOracle<'_> {
    fn goldstein(&self, x: &Point, eps: f64) -> Result<GoldsteinResult> {
        match self.f.kind() {
            ObjectiveKind::Radial { .. } => exact_goldstein_radial(self.f, x, eps),
            _ => exact_goldstein_max_affine(self.f, x, eps, ACTIVITY_TOL),
        }
    }
}

/// [`sampled_goldstein`] behind the oracle trait, with a fixed seed.
#[derive(Debug, Clone, Copy)]
pub struct SampledOracle<'a> {
    pub f: &'a Objective,
    pub n_samples: usize,
    pub seed: u64,
}

impl GoldsteinOracle for SampledOracle<'_> {
    fn goldstein(&self, x: &Point, eps: f64) -> Result<GoldsteinResult> {
        sampled_goldstein(self.f, x, eps, self.n_samples, self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub eps: f64,
    pub oracle_calls: u64,
    pub critical: bool,
}

/// Outcome of one bisection search, as consumed by the descent loops.
#[derive(Debug, Clone)]
pub(crate) enum Bracket {
    Critical,
    /// `|g_ε(x)| > ε` at this `ε`, and `|g_{2ε}(x)| ≤ 2ε`.
    Found { eps: f64, g: Point },
    /// The call budget ran out; carries the last radius probed and its `|g|`.
    Exhausted { eps: f64, g_norm: f64 },
}

/// Halving search for the Goldstein modulus. `calls` is incremented per
/// oracle call; the search gives up as soon as `*calls > budget`.
pub(crate) fn bisect<O: GoldsteinOracle + ?Sized>(
    oracle: &O,
    x: &Point,
    lipschitz: f64,
    calls: &mut u64,
    budget: u64,
) -> Result<Bracket> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(Error::invalid(format!(
            "Lipschitz constant must be positive, got {lipschitz}"
        )));
    }
    let g0 = oracle.goldstein(x, 0.0)?.g;
    *calls += 1;
    if g0.norm() <= CRITICAL_NORM {
        return Ok(Bracket::Critical);
    }
    if *calls > budget {
        return Ok(Bracket::Exhausted {
            eps: 0.0,
            g_norm: g0.norm(),
        });
    }
    let mut eps = 0.5 * lipschitz;
    loop {
        let g = oracle.goldstein(x, eps)?.g;
        *calls += 1;
        let g_norm = g.norm();
        if *calls > budget {
            return Ok(Bracket::Exhausted { eps, g_norm });
        }
        if g_norm > eps {
            return Ok(Bracket::Found { eps, g });
        }
        eps *= 0.5;
        if eps < f64::MIN_POSITIVE {
            return Err(Error::NoConvergence {
                routine: "modulus_bisection",
                detail: "radius underflowed; x is numerically critical for this oracle".into(),
            });
        }
    }
}

/// Goldstein modulus bracket by halving from `L/2`.
///
/// Returns `ε ∈ [Γf(x)/2, Γf(x))` after `2 + ⌊log₂ L − log₂ Γf(x)⌋` oracle
/// calls, or `(0, critical)` after one call when `g_0(x) = 0`.
pub fn modulus_bisection<O: GoldsteinOracle + ?Sized>(
    oracle: &O,
    x: &Point,
    lipschitz: f64,
) -> Result<ModulusEstimate> {
    let mut calls = 0;
    match bisect(oracle, x, lipschitz, &mut calls, u64::MAX)? {
        Bracket::Critical => Ok(ModulusEstimate {
            eps: 0.0,
            oracle_calls: calls,
            critical: true,
        }),
        Bracket::Found { eps, .. } => Ok(ModulusEstimate {
            eps,
            oracle_calls: calls,
            critical: false,
        }),
        Bracket::Exhausted { .. } => unreachable!("unbounded budget"),
    }
}
