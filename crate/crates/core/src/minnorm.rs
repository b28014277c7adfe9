//! Shortest vectors in convex sets.
//!
//! * [`min_norm_point`]: Wolfe's algorithm for the shortest point of the
//!   convex hull of finitely many vectors, with certifying weights.
//! * [`segment_min_norm`]: closed form on a segment `[g, h]`.
//! * [`polyhedron_distance`]: distance from a point to
//!   `{y : a_j·y ≥ b_j}` by Hildreth's dual coordinate ascent, with an LP
//!   feasibility check when the ascent stalls.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::objectives::Point;

/// Default stopping tolerance for [`min_norm_point`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// A point of a convex hull together with the weights producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCombination {
    pub weights: Vec<f64>,
    pub point: Point,
}

impl ConvexCombination {
    pub fn norm(&self) -> f64 {
        self.point.norm()
    }
}

fn check_point_set(points: &[Point]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("point set must be nonempty"))?;
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("points must share one dimension"));
    }
    if points.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("point coordinates must be finite"));
    }
    Ok(d)
}

/// Minimizer of `|Σ μ_i p_i|` over the affine hull `Σ μ_i = 1` of the corral.
/// Returns `None` when the corral is affinely dependent.
fn affine_minimizer(points: &[Point], corral: &[usize]) -> Option<Vec<f64>> {
    let base = &points[corral[0]];
    if corral.len() == 1 {
        return Some(vec![1.0]);
    }
    let d = base.len();
    let cols = corral.len() - 1;
    let v = DMatrix::from_fn(d, cols, |r, c| points[corral[c + 1]][r] - base[r]);
    let svd = v.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if cols > d || smin <= 1e-12 * smax.max(f64::MIN_POSITIVE) {
        return None;
    }
    let rhs = -base.clone();
    let c = svd.solve(&rhs, 0.0).ok()?;
    let mut mu = Vec::with_capacity(corral.len());
    mu.push(1.0 - c.sum());
    mu.extend(c.iter().copied());
    Some(mu)
}

fn combine(points: &[Point], corral: &[usize], weights: &[f64]) -> Point {
    let mut x = Point::zeros(points[0].len());
    for (&i, &w) in corral.iter().zip(weights) {
        x.axpy(w, &points[i], 1.0);
    }
    x
}

/// Shortest point of `conv(points)` by Wolfe's algorithm.
///
/// Stops once `⟨x, p⟩ - |x|² ≥ -tol · min(max|p|², 1 + |x|)` for every input
/// point `p`. Affinely dependent corrals drop their smallest-weight member.
pub fn min_norm_point(points: &[Point], tol: f64) -> Result<ConvexCombination> {
    let d = check_point_set(points)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let n = points.len();
    let scale = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);

    let start = (0..n)
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut corral = vec![start];
    let mut lambda = vec![1.0];
    let mut x = points[start].clone();

    let max_major = 50 * (n + d) + 100;
    for _ in 0..max_major {
        let xx = x.norm_squared();
        if xx == 0.0 {
            break;
        }
        let (j, xp) = points
            .iter()
            .map(|p| x.dot(p))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let threshold = tol * scale.min(1.0 + xx.sqrt());
        if xp - xx >= -threshold || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        // minor cycles
        loop {
            let mu = match affine_minimizer(points, &corral) {
                Some(mu) => mu,
                None => {
                    let drop = argmin(&lambda);
                    corral.remove(drop);
                    lambda.remove(drop);
                    renormalize(&mut lambda);
                    continue;
                }
            };
            if mu.iter().all(|&m| m > 0.0) {
                lambda = mu;
                break;
            }
            let mut theta = f64::INFINITY;
            let mut leaving = 0;
            for (i, (&l, &m)) in lambda.iter().zip(&mu).enumerate() {
                if m <= 0.0 {
                    let t = if l - m > 0.0 { l / (l - m) } else { 0.0 };
                    if t < theta {
                        theta = t;
                        leaving = i;
                    }
                }
            }
            let theta = theta.min(1.0);
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * m;
            }
            lambda[leaving] = 0.0;
            let mut keep = 0;
            for i in 0..corral.len() {
                if lambda[i] > 0.0 {
                    corral[keep] = corral[i];
                    lambda[keep] = lambda[i];
                    keep += 1;
                }
            }
            corral.truncate(keep);
            lambda.truncate(keep);
            renormalize(&mut lambda);
        }
        let next = combine(points, &corral, &lambda);
        if next.norm_squared() >= xx {
            // no progress in floating point
            break;
        }
        x = next;
    }

    let mut weights = vec![0.0; n];
    for (&i, &w) in corral.iter().zip(&lambda) {
        weights[i] += w;
    }
    let point = combine(points, &corral, &lambda);
    Ok(ConvexCombination { weights, point })
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

fn renormalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter_mut().for_each(|v| *v /= s);
    }
}

/// Shortest vector on the segment `[g, h]`.
pub fn segment_min_norm(g: &Point, h: &Point) -> Result<Point> {
    Ok(segment_min_norm_weight(g, h)?.1)
}

/// Shortest vector `(1 - t) g + t h` on `[g, h]` together with its `t`,
/// `t = clamp(⟨g, g - h⟩ / |g - h|², 0, 1)`.
pub fn segment_min_norm_weight(g: &Point, h: &Point) -> Result<(f64, Point)> {
    if g.len() != h.len() {
        return Err(Error::invalid("segment endpoints differ in dimension"));
    }
    let diff = g - h;
    let dd = diff.norm_squared();
    if dd == 0.0 {
        return Ok((0.0, g.clone()));
    }
    let t = (g.dot(&diff) / dd).clamp(0.0, 1.0);
    Ok((t, g * (1.0 - t) + h * t))
}

/// The polyhedron `{y : a_j·y ≥ b_j for all j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub normals: Vec<Point>,
    pub offsets: Vec<f64>,
}

impl Polyhedron {
    pub fn new(normals: Vec<Point>, offsets: Vec<f64>) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(Error::invalid("polyhedron needs one offset per normal"));
        }
        if let Some(first) = normals.first() {
            if normals.iter().any(|a| a.len() != first.len()) {
                return Err(Error::invalid("polyhedron normals must share one dimension"));
            }
        }
        Ok(Polyhedron { normals, offsets })
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, &b)| a.dot(x) >= b)
    }

    /// Exact feasibility of the inequality system (phase-1 LP).
    pub fn is_feasible(&self) -> bool {
        self.feasible_point().is_some()
    }

    fn feasible_point(&self) -> Option<Point> {
        let Some(first) = self.normals.first() else {
            return Some(Point::zeros(0));
        };
        let d = first.len();
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..d)
            .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
            .collect();
        for (a, &b) in self.normals.iter().zip(&self.offsets) {
            let terms: Vec<_> = vars
                .iter()
                .zip(a.iter())
                .filter(|(_, &c)| c != 0.0)
                .map(|(&v, &c)| (v, c))
                .collect();
            if terms.is_empty() {
                if b > 0.0 {
                    return None;
                }
                continue;
            }
            lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, b);
        }
        let solution = lp.solve().ok()?;
        Some(DVector::from_iterator(d, vars.iter().map(|&v| solution[v])))
    }
}

/// Distance from `x` to `P`, `f64::INFINITY` when `P` is empty.
///
/// Hildreth's method runs on the dual of `min ½|y - x|²` subject to
/// `A y ≥ b`. It stops once every constraint is violated by at most
/// `tol/10` (in distance units) and complementary slackness is below
/// `tol · (1 + |y - x|)`. After `10·k·d` sweeps without convergence the
/// system is checked for feasibility by LP.
pub fn polyhedron_distance(p: &Polyhedron, x: &Point, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let d = x.len();
    if p.normals.iter().any(|a| a.len() != d) {
        return Err(Error::invalid("polyhedron and point differ in dimension"));
    }
    if p.contains(x) {
        return Ok(0.0);
    }

    // Zero normals are either vacuous or contradictory.
    let mut rows: Vec<(&Point, f64, f64)> = Vec::with_capacity(p.normals.len());
    for (a, &b) in p.normals.iter().zip(&p.offsets) {
        let aa = a.norm_squared();
        if aa == 0.0 {
            if b > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        rows.push((a, b, aa));
    }
    let k = rows.len();
    let stall = 10 * k * d.max(1);
    let hard_cap = 200 * stall + 10_000;

    let mut lambda = vec![0.0; k];
    let mut y = x.clone();
    let mut checked_feasible = false;
    let mut feasible_upper = f64::INFINITY;

    for sweep in 1..=hard_cap {
        for (j, (a, b, aa)) in rows.iter().enumerate() {
            let step = ((b - a.dot(&y)) / aa).max(-lambda[j]);
            if step != 0.0 {
                lambda[j] += step;
                y.axpy(step, a, 1.0);
            }
        }

        let mut violation = 0.0f64;
        let mut slackness = 0.0f64;
        for (j, (a, b, aa)) in rows.iter().enumerate() {
            let r = a.dot(&y) - b;
            violation = violation.max(-r / aa.sqrt());
            slackness += lambda[j] * r;
        }
        let dist = (&y - x).norm();
        if violation <= 0.1 * tol && slackness.abs() <= tol * (1.0 + dist) {
            return Ok(dist);
        }

        if sweep % stall == 0 && !checked_feasible {
            match p.feasible_point() {
                None => return Ok(f64::INFINITY),
                Some(z) => {
                    checked_feasible = true;
                    feasible_upper = (z - x).norm();
                }
            }
        }
    }

    // Dual objective is a lower bound on ½ dist².
    let ay = &y - x;
    let dual = lambda
        .iter()
        .zip(&rows)
        .map(|(l, (a, b, _))| l * (b - a.dot(x)))
        .sum::<f64>()
        - 0.5 * ay.norm_squared();
    Err(Error::NoConvergence {
        routine: "polyhedron_distance",
        detail: format!(
            "distance bracket [{}, {}] after {hard_cap} sweeps",
            (2.0 * dual.max(0.0)).sqrt(),
            feasible_upper
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(v: &[f64]) -> Point {
        Point::from_column_slice(v)
    }

    #[test]
    fn symmetric_pair() {
        let c = min_norm_point(&[p(&[1.0, 0.0]), p(&[0.0, 1.0])], DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(c.point[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.point[1], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.weights[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.weights[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn nearest_vertex() {
        let c = min_norm_point(&[p(&[2.0, 0.0]), p(&[3.0, 0.0])], DEFAULT_TOL).unwrap();
        assert_eq!(c.point, p(&[2.0, 0.0]));
        assert_eq!(c.weights, vec![1.0, 0.0]);
    }

    #[test]
    fn origin_inside_hull() {
        let pts = [p(&[1.0, 0.0]), p(&[-1.0, 1.0]), p(&[-1.0, -1.0])];
        let c = min_norm_point(&pts, DEFAULT_TOL).unwrap();
        assert!(c.norm() <= DEFAULT_TOL);
    }

    #[test]
    fn duplicate_and_collinear_points() {
        let pts = [
            p(&[1.0, 1.0]),
            p(&[1.0, 1.0]),
            p(&[2.0, 2.0]),
            p(&[1.0, -1.0]),
            p(&[3.0, -3.0]),
        ];
        let c = min_norm_point(&pts, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(c.point[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.point[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn small_scale_points_are_not_truncated() {
        let pts = [p(&[1e-8, 1e-8]), p(&[1e-8, -1e-8])];
        let c = min_norm_point(&pts, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(c.point[0], 1e-8, epsilon = 1e-20);
        assert_abs_diff_eq!(c.point[1], 0.0, epsilon = 1e-20);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(min_norm_point(&[], DEFAULT_TOL).is_err());
        assert!(min_norm_point(&[p(&[f64::NAN])], DEFAULT_TOL).is_err());
        assert!(min_norm_point(&[p(&[1.0]), p(&[1.0, 2.0])], DEFAULT_TOL).is_err());
    }

    #[test]
    fn segment_cases() {
        assert_eq!(
            segment_min_norm(&p(&[1.0, 0.0]), &p(&[-1.0, 0.0])).unwrap(),
            p(&[0.0, 0.0])
        );
        assert_eq!(
            segment_min_norm(&p(&[2.0, 0.0]), &p(&[2.0, 0.0])).unwrap(),
            p(&[2.0, 0.0])
        );
        assert_eq!(
            segment_min_norm(&p(&[1.0, 1.0]), &p(&[1.0, -1.0])).unwrap(),
            p(&[1.0, 0.0])
        );
        assert!(segment_min_norm(&p(&[1.0]), &p(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn halfspace_distance() {
        let poly = Polyhedron::new(vec![p(&[1.0])], vec![1.0]).unwrap();
        assert_abs_diff_eq!(
            polyhedron_distance(&poly, &p(&[0.0]), 1e-10).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        assert_eq!(polyhedron_distance(&poly, &p(&[3.0]), 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn empty_polyhedron_is_infinite() {
        let poly = Polyhedron::new(vec![p(&[1.0]), p(&[-1.0])], vec![0.0, 1.0]).unwrap();
        for x in [-3.0, 0.0, 0.5, 4.0] {
            assert_eq!(
                polyhedron_distance(&poly, &p(&[x]), 1e-10).unwrap(),
                f64::INFINITY
            );
        }
        assert!(!poly.is_feasible());
        let zero = Polyhedron::new(vec![p(&[0.0, 0.0])], vec![0.5]).unwrap();
        assert_eq!(
            polyhedron_distance(&zero, &p(&[1.0, 1.0]), 1e-10).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn corner_projection() {
        // y1 ≥ 1, y2 ≥ 2 from the origin: nearest point (1, 2)
        let poly =
            Polyhedron::new(vec![p(&[1.0, 0.0]), p(&[0.0, 1.0])], vec![1.0, 2.0]).unwrap();
        let d = polyhedron_distance(&poly, &p(&[0.0, 0.0]), 1e-10).unwrap();
        assert_abs_diff_eq!(d, 5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn lower_dimensional_polyhedron() {
        // y1 ≥ 1 and -y1 ≥ -1: the line y1 = 1
        let poly =
            Polyhedron::new(vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0])], vec![1.0, -1.0]).unwrap();
        let d = polyhedron_distance(&poly, &p(&[-2.0, 5.0]), 1e-10).unwrap();
        assert_abs_diff_eq!(d, 3.0, epsilon = 1e-9);
    }
}
