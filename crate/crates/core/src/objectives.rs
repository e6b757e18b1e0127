//! Convex test functions with exactly known optimization metadata.
//!
//! Every objective is centred at a point `c` and carries an additive offset,
//! so `f* = offset` and (except for the singular quadratic) `x* = c`:
//!
//! | kind                       | f(x) - offset                          | α            | β        |
//! |----------------------------|----------------------------------------|--------------|----------|
//! | `quadratic`                | ½ Σ λᵢ (xᵢ - cᵢ)²                      | min λ        | max λ    |
//! | `scaled-euclidean-norm`    | s ‖x - c‖                              | 0            | ∞        |
//! | `singular-quadratic`       | ½ Σ λᵢ (xᵢ - cᵢ)², some λᵢ = 0         | 0            | max λ    |
//! | `strongly-convex-plus-l1`  | (a/2) ‖x - c‖² + w ‖x - c‖₁            | a            | ∞        |
//!
//! The singular quadratic is minimized on an affine subspace. Its `x_star`
//! starts out as `c` and is re-targeted to the minimizer nearest a given
//! start point by [`ObjectiveSpec::bind_to_start`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Absolute tolerance below which a negative suboptimality is treated as round-off.
pub const GAP_TOLERANCE: f64 = 1e-12;

/// A function that gradient descent can be run on.
///
/// `optimal_value` and `minimizer` are optional metadata; when present, runs
/// record the suboptimality `h` and distance `d` of each iterate.
pub trait Objective {
    fn dimension(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// A (sub)gradient at `x`.
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn optimal_value(&self) -> Option<f64> {
        None
    }

    fn minimizer(&self) -> Option<&[f64]> {
        None
    }
}

/// Suboptimality `f_value - f_star`, with round-off above `-GAP_TOLERANCE` clamped to zero.
pub fn gap_from_value(f_value: f64, f_star: f64) -> Result<f64> {
    let gap = f_value - f_star;
    if gap < -GAP_TOLERANCE {
        return Err(Error::InvalidFStar { gap });
    }
    Ok(gap.max(0.0))
}

/// `n` eigenvalues evenly spaced over `[min, max]`.
pub fn linear_spectrum(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let step = (max - min) / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| min + step * i as f64).collect();
            out[n - 1] = max;
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Diagonal positive-definite quadratic.
    Quadratic { eigenvalues: Vec<f64> },
    /// `scale · ‖x - c‖`, Lipschitz with constant `scale`.
    ScaledEuclideanNorm { scale: f64 },
    /// Diagonal positive-semidefinite quadratic with at least one zero eigenvalue.
    SingularQuadratic { eigenvalues: Vec<f64> },
    /// `(quadratic/2)·‖x - c‖² + l1_weight·‖x - c‖₁`.
    StronglyConvexPlusL1 { quadratic: f64, l1_weight: f64 },
}

impl ObjectiveKind {
    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::Quadratic { .. } => "quadratic",
            ObjectiveKind::ScaledEuclideanNorm { .. } => "scaled-euclidean-norm",
            ObjectiveKind::SingularQuadratic { .. } => "singular-quadratic",
            ObjectiveKind::StronglyConvexPlusL1 { .. } => "strongly-convex-plus-l1",
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(
            self,
            ObjectiveKind::Quadratic { .. } | ObjectiveKind::SingularQuadratic { .. }
        )
    }
}

/// A convex test function together with its moduli and optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    kind: ObjectiveKind,
    dimension: usize,
    alpha: f64,
    /// `None` means the function is not smooth.
    beta: Option<f64>,
    /// `None` means the subgradients are not globally bounded.
    lipschitz_g: Option<f64>,
    f_star: f64,
    x_star: Vec<f64>,
    center: Vec<f64>,
    offset: f64,
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

impl ObjectiveSpec {
    /// Builds an objective centred at `center` and derives its metadata.
    pub fn new(kind: ObjectiveKind, dimension: usize, center: Vec<f64>, offset: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if center.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: center.len(),
            });
        }
        if let Some(bad) = center.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("x_star", format!("non-finite coordinate {bad}")));
        }
        check_finite("offset", offset)?;

        let (alpha, beta, lipschitz_g) = match &kind {
            ObjectiveKind::Quadratic { eigenvalues } => {
                let (min, max) = spectrum_bounds(eigenvalues, dimension)?;
                if min <= 0.0 {
                    return Err(Error::invalid(
                        "eigenvalues",
                        "quadratic needs a positive minimum eigenvalue; use singular-quadratic",
                    ));
                }
                (min, Some(max), None)
            }
            ObjectiveKind::SingularQuadratic { eigenvalues } => {
                let (min, max) = spectrum_bounds(eigenvalues, dimension)?;
                if min != 0.0 {
                    return Err(Error::invalid(
                        "eigenvalues",
                        "singular-quadratic needs at least one zero eigenvalue",
                    ));
                }
                if max <= 0.0 {
                    return Err(Error::invalid(
                        "eigenvalues",
                        "singular-quadratic needs at least one positive eigenvalue",
                    ));
                }
                (0.0, Some(max), None)
            }
            ObjectiveKind::ScaledEuclideanNorm { scale } => {
                check_finite("scale", *scale)?;
                if *scale <= 0.0 {
                    return Err(Error::invalid("scale", "must be positive"));
                }
                (0.0, None, Some(*scale))
            }
            ObjectiveKind::StronglyConvexPlusL1 { quadratic, l1_weight } => {
                check_finite("quadratic", *quadratic)?;
                check_finite("l1_weight", *l1_weight)?;
                if *quadratic <= 0.0 {
                    return Err(Error::invalid("quadratic", "must be positive"));
                }
                if *l1_weight < 0.0 {
                    return Err(Error::invalid("l1_weight", "must be nonnegative"));
                }
                (*quadratic, None, None)
            }
        };

        Ok(Self {
            kind,
            dimension,
            alpha,
            beta,
            lipschitz_g,
            f_star: offset,
            x_star: center.clone(),
            center,
            offset,
        })
    }

    pub fn kind(&self) -> &ObjectiveKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Strong-convexity modulus; zero when the function is not strongly convex.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Smoothness modulus; `None` for nonsmooth kinds.
    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    /// Global subgradient bound; `None` when gradients grow without bound.
    pub fn lipschitz_g(&self) -> Option<f64> {
        self.lipschitz_g
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Both moduli available with `α > 0`.
    pub fn is_well_conditioned(&self) -> bool {
        self.alpha > 0.0 && self.beta.is_some()
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let c = &self.center;
        let value = match &self.kind {
            ObjectiveKind::Quadratic { eigenvalues } | ObjectiveKind::SingularQuadratic { eigenvalues } => {
                0.5 * x
                    .iter()
                    .zip(c)
                    .zip(eigenvalues)
                    .map(|((xi, ci), l)| l * (xi - ci) * (xi - ci))
                    .sum::<f64>()
            }
            ObjectiveKind::ScaledEuclideanNorm { scale } => scale * linalg::dist_sq(x, c).sqrt(),
            ObjectiveKind::StronglyConvexPlusL1 { quadratic, l1_weight } => {
                let l1: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).abs()).sum();
                0.5 * quadratic * linalg::dist_sq(x, c) + l1_weight * l1
            }
        };
        Ok(value + self.offset)
    }

    /// A subgradient at `x`. At kinks the zero element of the subdifferential
    /// is chosen (per coordinate for the l1 term), so the optimum is a fixed point.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let c = &self.center;
        let grad = match &self.kind {
            ObjectiveKind::Quadratic { eigenvalues } | ObjectiveKind::SingularQuadratic { eigenvalues } => x
                .iter()
                .zip(c)
                .zip(eigenvalues)
                .map(|((xi, ci), l)| l * (xi - ci))
                .collect(),
            ObjectiveKind::ScaledEuclideanNorm { scale } => {
                let diff = linalg::sub(x, c);
                let norm = linalg::norm_sq(&diff).sqrt();
                if norm == 0.0 {
                    vec![0.0; self.dimension]
                } else {
                    diff.into_iter().map(|v| scale * v / norm).collect()
                }
            }
            ObjectiveKind::StronglyConvexPlusL1 { quadratic, l1_weight } => x
                .iter()
                .zip(c)
                .map(|(xi, ci)| {
                    let v = xi - ci;
                    let sign = if v > 0.0 {
                        1.0
                    } else if v < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    quadratic * v + l1_weight * sign
                })
                .collect(),
        };
        Ok(grad)
    }

    /// `h(x) = f(x) - f*`, clamped at zero for round-off.
    pub fn suboptimality(&self, x: &[f64]) -> Result<f64> {
        gap_from_value(self.evaluate(x)?, self.f_star)
    }

    /// `‖x - x*‖₂`.
    pub fn distance_to_opt(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(linalg::dist_sq(x, &self.x_star).sqrt())
    }

    /// Maximum over coordinates of `|analytic - numeric| / max(1, |analytic|)`
    /// using central differences of width `step`.
    pub fn check_gradient_fd(&self, x: &[f64], step: f64) -> Result<f64> {
        self.check_dim(x)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid("step", "must be positive and finite"));
        }
        let required = 10.0 * step;
        match &self.kind {
            ObjectiveKind::ScaledEuclideanNorm { .. } => {
                let distance = linalg::dist_sq(x, &self.center).sqrt();
                if distance < required {
                    return Err(Error::NonDifferentiable { distance, required });
                }
            }
            ObjectiveKind::StronglyConvexPlusL1 { l1_weight, .. } if *l1_weight > 0.0 => {
                let distance = x
                    .iter()
                    .zip(&self.center)
                    .map(|(xi, ci)| (xi - ci).abs())
                    .fold(f64::INFINITY, f64::min);
                if distance < required {
                    return Err(Error::NonDifferentiable { distance, required });
                }
            }
            _ => {}
        }

        let analytic = self.gradient(x)?;
        let mut probe = x.to_vec();
        let mut worst: f64 = 0.0;
        for (i, a) in analytic.iter().enumerate() {
            probe[i] = x[i] + step;
            let up = self.evaluate(&probe)?;
            probe[i] = x[i] - step;
            let down = self.evaluate(&probe)?;
            probe[i] = x[i];
            let numeric = (up - down) / (2.0 * step);
            worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
        }
        Ok(worst)
    }

    /// Copy whose `x_star` is the minimizer nearest `x0`.
    ///
    /// Only the singular quadratic has a non-unique minimizer; for the other
    /// kinds this is a plain clone.
    pub fn bind_to_start(&self, x0: &[f64]) -> Result<Self> {
        self.check_dim(x0)?;
        let mut bound = self.clone();
        if let ObjectiveKind::SingularQuadratic { eigenvalues } = &self.kind {
            bound.x_star = eigenvalues
                .iter()
                .zip(&self.center)
                .zip(x0)
                .map(|((l, c), x)| if *l == 0.0 { *x } else { *c })
                .collect();
        }
        Ok(bound)
    }

    /// Upper bound on subgradient norms over the ball `‖x - x*‖ ≤ radius`.
    pub fn gradient_bound_on_ball(&self, radius: f64) -> f64 {
        match &self.kind {
            ObjectiveKind::Quadratic { .. } | ObjectiveKind::SingularQuadratic { .. } => {
                self.beta.unwrap_or(0.0) * radius
            }
            ObjectiveKind::ScaledEuclideanNorm { scale } => *scale,
            ObjectiveKind::StronglyConvexPlusL1 { quadratic, l1_weight } => {
                quadratic * radius + l1_weight * (self.dimension as f64).sqrt()
            }
        }
    }

    /// The objective `c·f`: values, gradients, moduli and `f*` all scale by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("scale factor", "must be positive and finite"));
        }
        let kind = match &self.kind {
            ObjectiveKind::Quadratic { eigenvalues } => ObjectiveKind::Quadratic {
                eigenvalues: eigenvalues.iter().map(|l| l * c).collect(),
            },
            ObjectiveKind::SingularQuadratic { eigenvalues } => ObjectiveKind::SingularQuadratic {
                eigenvalues: eigenvalues.iter().map(|l| l * c).collect(),
            },
            ObjectiveKind::ScaledEuclideanNorm { scale } => ObjectiveKind::ScaledEuclideanNorm { scale: scale * c },
            ObjectiveKind::StronglyConvexPlusL1 { quadratic, l1_weight } => ObjectiveKind::StronglyConvexPlusL1 {
                quadratic: quadratic * c,
                l1_weight: l1_weight * c,
            },
        };
        let mut out = Self::new(kind, self.dimension, self.center.clone(), self.offset * c)?;
        out.x_star = self.x_star.clone();
        Ok(out)
    }

    /// The objective `x ↦ f(x - shift)`, whose optimum moves by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        self.check_dim(shift)?;
        let center = self.center.iter().zip(shift).map(|(c, s)| c + s).collect();
        let mut out = Self::new(self.kind.clone(), self.dimension, center, self.offset)?;
        out.x_star = self.x_star.iter().zip(shift).map(|(x, s)| x + s).collect();
        Ok(out)
    }
}

/// Builds an objective of `kind`; `x_star` is the centre of the function.
pub fn make_objective(kind: ObjectiveKind, dimension: usize, x_star: Vec<f64>, offset: f64) -> Result<ObjectiveSpec> {
    ObjectiveSpec::new(kind, dimension, x_star, offset)
}

fn spectrum_bounds(eigenvalues: &[f64], dimension: usize) -> Result<(f64, f64)> {
    if eigenvalues.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            actual: eigenvalues.len(),
        });
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &l in eigenvalues {
        check_finite("eigenvalues", l)?;
        if l < 0.0 {
            return Err(Error::invalid("eigenvalues", format!("negative eigenvalue {l}")));
        }
        min = min.min(l);
        max = max.max(l);
    }
    Ok((min, max))
}

impl Objective for ObjectiveSpec {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        ObjectiveSpec::evaluate(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        ObjectiveSpec::gradient(self, x)
    }

    fn optimal_value(&self) -> Option<f64> {
        Some(self.f_star)
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.x_star)
    }
}
