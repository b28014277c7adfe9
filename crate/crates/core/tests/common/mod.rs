//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use goldstein::Point;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn p(v: &[f64]) -> Point {
    Point::from_column_slice(v)
}

pub fn random_point(rng: &mut impl Rng, d: usize, scale: f64) -> Point {
    Point::from_fn(d, |_, _| rng.random_range(-scale..scale))
}

/// Minimum of `|Σ λ_i p_i|` over the simplex grid with `n` cells per edge.
pub fn grid_min_norm(points: &[Point], n: usize) -> f64 {
    fn rec(points: &[Point], n: usize, left: usize, acc: &Point, best: &mut f64) {
        let (first, rest) = points.split_first().unwrap();
        if rest.is_empty() {
            let v = acc + first * (left as f64 / n as f64);
            *best = best.min(v.norm());
            return;
        }
        for i in 0..=left {
            let v = acc + first * (i as f64 / n as f64);
            rec(rest, n, left - i, &v, best);
        }
    }
    let mut best = f64::INFINITY;
    rec(points, n, n, &Point::zeros(points[0].len()), &mut best);
    best
}

/// Exact min-norm over the hull by enumerating every subset, solving the
/// affine-hull problem on it, and keeping nonnegative solutions.
pub fn face_min_norm(points: &[Point]) -> f64 {
    let k = points.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let m = idx.len();
        let mut a = DMatrix::zeros(m + 1, m + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[(r, c)] = points[i].dot(&points[j]);
            }
            a[(r, m)] = 1.0;
            a[(m, r)] = 1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs[m] = 1.0;
        let Ok(sol) = a.svd(true, true).solve(&rhs, 1e-13) else {
            continue;
        };
        let lam = sol.rows(0, m);
        if lam.iter().any(|&l| l < -1e-12) || (lam.sum() - 1.0).abs() > 1e-8 {
            continue;
        }
        let mut v = Point::zeros(points[0].len());
        for (r, &i) in idx.iter().enumerate() {
            v += &points[i] * lam[r].max(0.0);
        }
        best = best.min(v.norm());
    }
    best
}

/// Fourier-Motzkin feasibility of `{y : a_j·y ≥ b_j}`.
pub fn fm_feasible(normals: &[Point], offsets: &[f64]) -> bool {
    let Some(first) = normals.first() else {
        return true;
    };
    let d = first.len();
    let mut rows: Vec<(Vec<f64>, f64)> = normals
        .iter()
        .zip(offsets)
        .map(|(a, &b)| (a.iter().copied().collect(), b))
        .collect();
    for j in 0..d {
        let (mut pos, mut neg, mut next) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.0[j] > 1e-14 {
                pos.push(r);
            } else if r.0[j] < -1e-14 {
                neg.push(r);
            } else {
                next.push(r);
            }
        }
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                let (s, t) = (-na[j], pa[j]);
                let a: Vec<f64> = pa.iter().zip(na).map(|(x, y)| s * x + t * y).collect();
                let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
                next.push((a.iter().map(|v| v / scale).collect(), (s * pb + t * nb) / scale));
            }
        }
        rows = next;
    }
    rows.iter().all(|(_, b)| *b <= 1e-9)
}

fn satisfies(normals: &[Point], offsets: &[f64], y: &Point, slack: f64) -> bool {
    normals.iter().zip(offsets).all(|(a, &b)| a.dot(y) >= b - slack)
}

/// Exact distance to a planar polyhedron: the nearest of `x` itself, the
/// feasible projections onto each boundary line, and the feasible vertices.
pub fn planar_distance(normals: &[Point], offsets: &[f64], x: &Point) -> f64 {
    let mut cands = vec![x.clone()];
    for (a, &b) in normals.iter().zip(offsets) {
        let aa = a.norm_squared();
        if aa > 0.0 {
            cands.push(x + a * ((b - a.dot(x)) / aa));
        }
    }
    for i in 0..normals.len() {
        for j in i + 1..normals.len() {
            let (a, c) = (&normals[i], &normals[j]);
            let det = a[0] * c[1] - a[1] * c[0];
            if det.abs() > 1e-12 {
                let (b1, b2) = (offsets[i], offsets[j]);
                cands.push(p(&[(b1 * c[1] - b2 * a[1]) / det, (a[0] * b2 - c[0] * b1) / det]));
            }
        }
    }
    cands
        .iter()
        .filter(|y| satisfies(normals, offsets, y, 1e-9))
        .map(|y| (y - x).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `x` to the feasible points of a planar grid of spacing
/// `step` over the square of half-width `radius` around `x`.
pub fn grid_distance(normals: &[Point], offsets: &[f64], x: &Point, radius: f64, step: f64) -> f64 {
    let n = (radius / step).ceil() as i64;
    let mut best = f64::INFINITY;
    for i in -n..=n {
        for j in -n..=n {
            let y = p(&[x[0] + i as f64 * step, x[1] + j as f64 * step]);
            if satisfies(normals, offsets, &y, 0.0) {
                best = best.min((&y - x).norm());
            }
        }
    }
    best
}

/// Closed-form Goldstein modulus of the radial builtins.
pub fn radial_modulus(name: &str, alpha: f64, r: f64, d: usize) -> f64 {
    match name {
        "half_sq_norm" => alpha * r / (1.0 + alpha),
        "scaled_norm" if d == 1 => r.min(alpha),
        "scaled_norm" => alpha * r / (r * r + alpha * alpha).sqrt(),
        "quartic" => {
            // α (r − ε)³ = ε has a unique root in (0, r).
            let (mut lo, mut hi) = (0.0, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if alpha * (r - mid).powi(3) > mid {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
        _ => panic!("unknown builtin {name}"),
    }
}

/// Expected bisection call count `2 + ⌊log₂ L − log₂ Γ⌋`.
pub fn bisection_calls(lipschitz: f64, gamma: f64) -> u64 {
    2 + (lipschitz.log2() - gamma.log2()).floor() as u64
}

/// The three fixed piecewise-affine test instances: `|x|` on the line,
/// `max(x₁, −x₁, x₂ − 10)`, and a six-piece planar function.
pub fn affine_instances() -> Vec<(&'static str, Vec<Point>, Vec<f64>)> {
    vec![
        ("abs", vec![p(&[1.0]), p(&[-1.0])], vec![0.0, 0.0]),
        (
            "abs_x1_and_shifted_x2",
            vec![p(&[1.0, 0.0]), p(&[-1.0, 0.0]), p(&[0.0, 1.0])],
            vec![0.0, 0.0, -10.0],
        ),
        (
            "hexagonal",
            (0..6)
                .map(|i| {
                    let t = std::f64::consts::PI * i as f64 / 3.0 + 0.3;
                    p(&[t.cos(), 0.8 * t.sin()])
                })
                .collect(),
            vec![0.0, 0.1, -0.05, 0.2, 0.0, -0.1],
        ),
    ]
}
