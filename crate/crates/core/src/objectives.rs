//! Objective functions: a value oracle plus one Clarke subgradient per point.
//!
//! The builtins are the three radial test functions
//! `½α|x|²`, `α|x|` and `¼α|x|⁴`, piecewise-affine maxima, and the seeded
//! random maximum of quadratics `max_i { g_iᵀx + xᵀH_i x }` whose global
//! minimizer is the origin.

use nalgebra::{DMatrix, DVector};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point (or subgradient) in `R^d`.
pub type Point = DVector<f64>;

/// Radial builtin test functions, all minimized at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radial {
    /// `½ α |x|²`
    HalfSqNorm,
    /// `α |x|`
    ScaledNorm,
    /// `¼ α |x|⁴`
    Quartic,
}

impl Radial {
    pub fn name(self) -> &'static str {
        match self {
            Radial::HalfSqNorm => "half_sq_norm",
            Radial::ScaledNorm => "scaled_norm",
            Radial::Quartic => "quartic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "half_sq_norm" => Some(Radial::HalfSqNorm),
            "scaled_norm" => Some(Radial::ScaledNorm),
            "quartic" => Some(Radial::Quartic),
            _ => None,
        }
    }
}

/// Reproducible description of a random max-of-quadratics instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub dimension: usize,
    pub pieces: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            seed: 1,
            dimension: 10,
            pieces: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveKind {
    Radial { shape: Radial, alpha: f64 },
    /// `max_i { a_i·x + b_i }`
    MaxAffine { slopes: Vec<Point>, intercepts: Vec<f64> },
    /// `max_i { g_i·x + xᵀH_i x }`
    MaxQuadratics {
        spec: InstanceSpec,
        linear: Vec<Point>,
        quadratic: Vec<DMatrix<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub point: Point,
    pub value: f64,
}

/// An immutable objective together with its Lipschitz bound on the working
/// region and, when known, its global minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    kind: ObjectiveKind,
    dimension: usize,
    lipschitz: f64,
    minimizer: Option<Minimizer>,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Uniform draw on `[-1, 1]` from the top 53 bits of one `u64`.
fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    2.0 * unit - 1.0
}

impl Objective {
    fn radial(shape: Radial, alpha: f64, dimension: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if dimension == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        // Exact Lipschitz constant over the unit ball: |∇f| ≤ α there for all three.
        Ok(Objective {
            kind: ObjectiveKind::Radial { shape, alpha },
            dimension,
            lipschitz: alpha,
            minimizer: Some(Minimizer {
                point: Point::zeros(dimension),
                value: 0.0,
            }),
        })
    }

    pub fn half_sq_norm(alpha: f64, dimension: usize) -> Result<Self> {
        Self::radial(Radial::HalfSqNorm, alpha, dimension)
    }

    pub fn scaled_norm(alpha: f64, dimension: usize) -> Result<Self> {
        Self::radial(Radial::ScaledNorm, alpha, dimension)
    }

    pub fn quartic(alpha: f64, dimension: usize) -> Result<Self> {
        Self::radial(Radial::Quartic, alpha, dimension)
    }

    /// Radial builtin by name (`half_sq_norm`, `scaled_norm`, `quartic`).
    pub fn builtin(name: &str, alpha: f64, dimension: usize) -> Result<Self> {
        let shape = Radial::from_name(name)
            .ok_or_else(|| Error::invalid(format!("unknown builtin objective `{name}`")))?;
        Self::radial(shape, alpha, dimension)
    }

    /// `max_i { a_i·x + b_i }`. No minimizer is recorded; attach one with
    /// [`Objective::with_minimizer`] when it is known.
    pub fn max_affine(slopes: Vec<Point>, intercepts: Vec<f64>) -> Result<Self> {
        if slopes.is_empty() {
            return Err(Error::invalid("max_affine needs at least one piece"));
        }
        if slopes.len() != intercepts.len() {
            return Err(Error::invalid(format!(
                "max_affine has {} slopes but {} intercepts",
                slopes.len(),
                intercepts.len()
            )));
        }
        let dimension = slopes[0].len();
        if dimension == 0 || slopes.iter().any(|a| a.len() != dimension) {
            return Err(Error::invalid("max_affine slopes must share a positive dimension"));
        }
        if slopes.iter().any(|a| a.iter().any(|v| !v.is_finite()))
            || intercepts.iter().any(|b| !b.is_finite())
        {
            return Err(Error::invalid("max_affine coefficients must be finite"));
        }
        let lipschitz = slopes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if lipschitz <= 0.0 {
            return Err(Error::invalid("max_affine with all-zero slopes is constant"));
        }
        Ok(Objective {
            kind: ObjectiveKind::MaxAffine { slopes, intercepts },
            dimension,
            lipschitz,
            minimizer: None,
        })
    }

    /// Random `max_i { g_iᵀx + xᵀH_i x }` with `Σ g_i = 0` and `Σ H_i = I`.
    ///
    /// Stream order from `ChaCha8Rng::seed_from_u64(seed)`, one `u64` per
    /// coefficient mapped to `[-1, 1]`: the entries of `g_1 .. g_{m-1}`, then
    /// the upper triangles (row-major, diagonal included) of
    /// `H_1 .. H_{m-1}`. The last piece completes both sums.
    pub fn max_quadratics(spec: &InstanceSpec) -> Result<Self> {
        if spec.pieces < 2 {
            return Err(Error::invalid(format!(
                "max_quadratics needs at least 2 pieces, got {}",
                spec.pieces
            )));
        }
        let d = spec.dimension;
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        let m = spec.pieces;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

        let mut linear: Vec<Point> = (0..m - 1)
            .map(|_| Point::from_fn(d, |_, _| uniform_pm1(&mut rng)))
            .collect();
        let mut quadratic: Vec<DMatrix<f64>> = Vec::with_capacity(m);
        for _ in 0..m - 1 {
            let mut h = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in i..d {
                    let v = uniform_pm1(&mut rng);
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
            quadratic.push(h);
        }
        let g_last = -linear.iter().fold(Point::zeros(d), |acc, g| acc + g);
        let h_last = quadratic
            .iter()
            .fold(DMatrix::identity(d, d), |acc, h| acc - h);
        linear.push(g_last);
        quadratic.push(h_last);

        // |∇f_i(x)| ≤ |g_i| + 2‖H_i‖ on the unit ball.
        let lipschitz = linear
            .iter()
            .zip(&quadratic)
            .map(|(g, h)| g.norm() + 2.0 * spectral_norm(h))
            .fold(0.0, f64::max);

        Ok(Objective {
            kind: ObjectiveKind::MaxQuadratics {
                spec: *spec,
                linear,
                quadratic,
            },
            dimension: d,
            lipschitz,
            minimizer: Some(Minimizer {
                point: Point::zeros(d),
                value: 0.0,
            }),
        })
    }

    /// Records a known minimizer; its stored value is `evaluate(point)`.
    pub fn with_minimizer(mut self, point: Point) -> Result<Self> {
        let value = self.evaluate(&point)?;
        self.minimizer = Some(Minimizer { point, value });
        Ok(self)
    }

    /// Overrides the Lipschitz bound (e.g. for a working region larger than
    /// the unit ball).
    pub fn with_lipschitz_bound(mut self, lipschitz: f64) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz > 0.0) {
            return Err(Error::invalid(format!(
                "Lipschitz bound must be positive, got {lipschitz}"
            )));
        }
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz
    }

    pub fn minimizer(&self) -> Option<&Minimizer> {
        self.minimizer.as_ref()
    }

    pub fn radial_shape(&self) -> Option<(Radial, f64)> {
        match self.kind {
            ObjectiveKind::Radial { shape, alpha } => Some((shape, alpha)),
            _ => None,
        }
    }

    pub(crate) fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::invalid(format!(
                "point has dimension {} but the objective has dimension {}",
                x.len(),
                self.dimension
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.value_unchecked(x))
    }

    /// One element of the Clarke subdifferential at `x`.
    pub fn raw_subgradient(&self, x: &Point) -> Result<Point> {
        self.check_point(x)?;
        Ok(self.subgradient_unchecked(x))
    }

    /// Values of all pieces of a max function at `x`; `None` for radial builtins.
    pub fn piece_values(&self, x: &Point) -> Result<Option<Vec<f64>>> {
        self.check_point(x)?;
        Ok(match &self.kind {
            ObjectiveKind::Radial { .. } => None,
            ObjectiveKind::MaxAffine { slopes, intercepts } => Some(
                slopes
                    .iter()
                    .zip(intercepts)
                    .map(|(a, b)| a.dot(x) + b)
                    .collect(),
            ),
            ObjectiveKind::MaxQuadratics {
                linear, quadratic, ..
            } => Some(
                linear
                    .iter()
                    .zip(quadratic)
                    .map(|(g, h)| quadratic_piece(g, h, x))
                    .collect(),
            ),
        })
    }

    /// `f(x) - f(x̄)`, or NaN without a known minimizer.
    pub fn gap(&self, value: f64) -> f64 {
        self.minimizer
            .as_ref()
            .map_or(f64::NAN, |m| value - m.value)
    }

    /// `|x - x̄|`, or NaN without a known minimizer.
    pub fn dist(&self, x: &Point) -> f64 {
        self.minimizer
            .as_ref()
            .map_or(f64::NAN, |m| (x - &m.point).norm())
    }

    pub(crate) fn value_unchecked(&self, x: &Point) -> f64 {
        match &self.kind {
            ObjectiveKind::Radial { shape, alpha } => {
                let r = x.norm();
                match shape {
                    Radial::HalfSqNorm => 0.5 * alpha * r * r,
                    Radial::ScaledNorm => alpha * r,
                    Radial::Quartic => 0.25 * alpha * (r * r) * (r * r),
                }
            }
            ObjectiveKind::MaxAffine { slopes, intercepts } => slopes
                .iter()
                .zip(intercepts)
                .map(|(a, b)| a.dot(x) + b)
                .fold(f64::NEG_INFINITY, f64::max),
            ObjectiveKind::MaxQuadratics {
                linear, quadratic, ..
            } => linear
                .iter()
                .zip(quadratic)
                .map(|(g, h)| quadratic_piece(g, h, x))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub(crate) fn subgradient_unchecked(&self, x: &Point) -> Point {
        match &self.kind {
            ObjectiveKind::Radial { shape, alpha } => {
                let r = x.norm();
                if r == 0.0 {
                    return Point::zeros(self.dimension);
                }
                match shape {
                    Radial::HalfSqNorm => x * *alpha,
                    Radial::ScaledNorm => x * (alpha / r),
                    Radial::Quartic => x * (alpha * r * r),
                }
            }
            ObjectiveKind::MaxAffine { slopes, intercepts } => {
                let values = slopes.iter().zip(intercepts).map(|(a, b)| a.dot(x) + b);
                slopes[first_argmax(values)].clone()
            }
            ObjectiveKind::MaxQuadratics {
                linear, quadratic, ..
            } => {
                let values = linear
                    .iter()
                    .zip(quadratic)
                    .map(|(g, h)| quadratic_piece(g, h, x));
                let i = first_argmax(values);
                &linear[i] + (&quadratic[i] * x) * 2.0
            }
        }
    }
}

fn quadratic_piece(g: &Point, h: &DMatrix<f64>, x: &Point) -> f64 {
    g.dot(x) + x.dot(&(h * x))
}

/// Lowest index attaining the maximum, compared exactly.
fn first_argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

fn spectral_norm(h: &DMatrix<f64>) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}
