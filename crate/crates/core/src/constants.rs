//! Geometric constants of the quantization and the spherical Liouville solutions.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{RadialField, RadialGrid};

/// Polyharmonic order `m` together with the ambient dimension `n = 2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension {
    m: usize,
}

impl Dimension {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension(m));
        }
        Ok(Self { m })
    }

    /// Polyharmonic order.
    pub fn m(self) -> usize {
        self.m
    }

    /// Ambient dimension, always `2m`.
    pub fn n(self) -> usize {
        2 * self.m
    }

    /// `(2m-1)!`, the constant in front of the Liouville nonlinearity.
    pub fn liouville_factor(self) -> f64 {
        factorial(2 * self.m - 1)
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(m: usize) -> Result<Self> {
        Dimension::new(m)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.m
    }
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Double factorial with the conventions `0!! = (-1)!! = (-2)!! = 1`.
pub fn double_factorial(k: i64) -> f64 {
    let mut acc = 1.0;
    let mut i = k;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}

/// `Γ(k/2)` for a positive integer `k`, by the integer / half-integer recursion.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "gamma_half needs a positive argument");
    if k % 2 == 0 {
        factorial(k / 2 - 1)
    } else {
        // Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
        let mut acc = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            acc *= x;
            x += 1.0;
        }
        acc
    }
}

/// Surface area of the unit sphere `S^k ⊂ ℝ^{k+1}`.
pub fn sphere_area(k: usize) -> f64 {
    let half = (k + 1) as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half(k + 1)
}

/// `|S^{2m}|`, `|S^{2m-1}|`, `Λ₁ = (2m-1)!|S^{2m}|` and `γ_{2m} = Λ₁/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricConstants {
    pub sphere_area_n: f64,
    pub sphere_area_nm1: f64,
    pub lambda1: f64,
    pub gamma: f64,
}

pub fn constants_for(dim: Dimension) -> GeometricConstants {
    let n = dim.n();
    let sphere_area_n = sphere_area(n);
    let lambda1 = dim.liouville_factor() * sphere_area_n;
    GeometricConstants {
        sphere_area_n,
        sphere_area_nm1: sphere_area(n - 1),
        lambda1,
        gamma: lambda1 / 2.0,
    }
}

/// Spherical solution `log(2λ / (1 + λ²|x - x₀|²))` of the Liouville equation
/// `(-Δ)^m u = (2m-1)! e^{2mu}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    pub scale: f64,
    pub center: Vec<f64>,
}

impl Bubble {
    pub fn new(scale: f64, center: Vec<f64>) -> Self {
        assert!(scale > 0.0, "bubble scale must be positive");
        Self { scale, center }
    }

    /// The standard bubble `η₀ = log(2 / (1 + |x|²))` centered at the origin of ℝ^n.
    pub fn standard(dim: Dimension) -> Self {
        Self::new(1.0, vec![0.0; dim.n()])
    }

    /// Value as a function of the distance to the center.
    pub fn profile(&self, dist: f64) -> f64 {
        let l = self.scale;
        (2.0 * l).ln() - (l * l * dist * dist).ln_1p()
    }

    /// Radial derivative of [`Bubble::profile`].
    pub fn profile_derivative(&self, dist: f64) -> f64 {
        let l2 = self.scale * self.scale;
        -2.0 * l2 * dist / (1.0 + l2 * dist * dist)
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.center.len(), "point dimension mismatch");
        x.iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn bubble_eval(b: &Bubble, x: &[f64]) -> f64 {
    b.profile(b.distance(x))
}

/// `∫_{B_radius(x₀)} e^{2m·bubble} dx`; `radius = ∞` returns `|S^{2m}|`.
///
/// After `s = λr`, `s = tan θ` the integrand becomes `(sin θ cos θ)^{2m-1}`,
/// which Gauss-Legendre integrates to machine precision.
pub fn bubble_mass(b: &Bubble, dim: Dimension, radius: f64) -> Result<f64> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::Domain(format!("mass radius must be positive, got {radius}")));
    }
    let c = constants_for(dim);
    if radius.is_infinite() {
        return Ok(c.sphere_area_n);
    }
    let m = dim.m();
    let upper = (b.scale * radius).atan();
    let integrand = |theta: f64| (theta.sin() * theta.cos()).powi(2 * m as i32 - 1);
    let rule = |deg: usize| GaussLegendre::new(NonZeroUsize::new(deg).unwrap());
    let coarse = rule(24).integrate(0.0, upper, integrand);
    let fine = rule(48).integrate(0.0, upper, integrand);
    if (coarse - fine).abs() > 1e-13 * fine.abs().max(1e-300) {
        return Err(Error::QuadratureNonConvergence { coarse, fine });
    }
    Ok(c.sphere_area_nm1 * 2f64.powi(2 * m as i32) * fine)
}

/// Max over sample distances of `|(-Δ)^m f - (2m-1)! e^{2mf}|` for a radial profile
/// sampled on `grid`, with the polyharmonic operator taken from the grid's
/// differentiation stack.
pub fn radial_liouville_residual(
    grid: &Arc<RadialGrid>,
    profile: impl Fn(f64) -> f64,
    sample_dists: &[f64],
) -> f64 {
    let field = RadialField::from_fn(grid, &profile);
    let lhs = field.polyharmonic();
    let factor = grid.dim().liouville_factor();
    let two_m = grid.dim().n() as f64;
    sample_dists
        .iter()
        .map(|&r| (lhs.eval(r) - factor * (two_m * profile(r)).exp()).abs())
        .fold(0.0, f64::max)
}

/// Liouville-equation residual of a bubble at the given points.
pub fn bubble_residual(b: &Bubble, grid: &Arc<RadialGrid>, sample_points: &[Vec<f64>]) -> f64 {
    let dists: Vec<f64> = sample_points.iter().map(|x| b.distance(x)).collect();
    radial_liouville_residual(grid, |r| b.profile(r), &dists)
}
