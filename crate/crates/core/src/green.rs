//! Dirichlet Green function of `(-Δ)^m` on a ball, centered at the origin.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::constants::{constants_for, double_factorial, Dimension};
use crate::error::{Error, Result};
use crate::radial::RadialField;

/// Radial function `a·log(1/r) + Σ_p c_p r^p` in ℝ^n, closed under `∂_r` and `Δ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPowerSeries {
    n: usize,
    log_coeff: f64,
    powers: BTreeMap<i32, f64>,
}

impl LogPowerSeries {
    pub fn new(n: usize, log_coeff: f64, powers: impl IntoIterator<Item = (i32, f64)>) -> Self {
        let mut s = Self { n, log_coeff, powers: BTreeMap::new() };
        for (p, c) in powers {
            s.add_power(p, c);
        }
        s
    }

    fn add_power(&mut self, p: i32, c: f64) {
        if c != 0.0 {
            *self.powers.entry(p).or_insert(0.0) += c;
        }
    }

    pub fn log_coeff(&self) -> f64 {
        self.log_coeff
    }

    /// Coefficient of `r^p`.
    pub fn coeff(&self, p: i32) -> f64 {
        self.powers.get(&p).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let mut v = if self.log_coeff != 0.0 { -self.log_coeff * r.ln() } else { 0.0 };
        for (&p, &c) in &self.powers {
            v += c * r.powi(p);
        }
        v
    }

    pub fn derivative(&self) -> Self {
        let mut d = Self { n: self.n, log_coeff: 0.0, powers: BTreeMap::new() };
        d.add_power(-1, -self.log_coeff);
        for (&p, &c) in &self.powers {
            d.add_power(p - 1, p as f64 * c);
        }
        d
    }

    pub fn nth_derivative(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |s, _| s.derivative())
    }

    /// `r f'(r)`, i.e. `x·∇f`.
    pub fn dilation(&self) -> Self {
        let mut d = Self { n: self.n, log_coeff: 0.0, powers: BTreeMap::new() };
        d.add_power(0, -self.log_coeff);
        for (&p, &c) in &self.powers {
            d.add_power(p, p as f64 * c);
        }
        d
    }

    /// `f'' + (n-1)/r f'`.
    pub fn laplacian(&self) -> Self {
        let n = self.n as f64;
        let mut l = Self { n: self.n, log_coeff: 0.0, powers: BTreeMap::new() };
        l.add_power(-2, -(n - 2.0) * self.log_coeff);
        for (&p, &c) in &self.powers {
            l.add_power(p - 2, p as f64 * (p as f64 + n - 2.0) * c);
        }
        l
    }

    pub fn laplacian_power(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |s, _| s.laplacian())
    }

    /// True when every coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.log_coeff == 0.0 && self.powers.values().all(|&c| c == 0.0)
    }
}

/// `g(r) = log(1/r) / γ_{2m}`, the fundamental solution of `(-Δ)^m` in ℝ^{2m}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSolution {
    pub dim: Dimension,
    pub gamma: f64,
}

impl FundamentalSolution {
    pub fn new(dim: Dimension) -> Self {
        Self { dim, gamma: constants_for(dim).gamma }
    }

    pub fn eval(&self, r: f64) -> f64 {
        -r.ln() / self.gamma
    }

    pub fn series(&self) -> LogPowerSeries {
        LogPowerSeries::new(self.dim.n(), 1.0 / self.gamma, [])
    }
}

/// Closed-form `(Δ^k g(r), ∂_rΔ^k g(r))` for `0 ≤ k ≤ m-1`.
pub fn fundamental_derivatives(dim: Dimension, k: usize, r: f64) -> Result<(f64, f64)> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!("fundamental solution needs r > 0, got {r}")));
    }
    let m = dim.m() as i64;
    let k_i = k as i64;
    if k_i >= m {
        return Err(Error::Domain(format!("derivative order {k} exceeds m - 1 = {}", m - 1)));
    }
    let gamma = constants_for(dim).gamma;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let ratio = double_factorial(2 * m - 2) / double_factorial(2 * m - 2 * k_i - 2);
    let value = if k == 0 {
        -r.ln() / gamma
    } else {
        sign * double_factorial(2 * k_i - 2) * ratio * r.powi(-2 * k as i32) / gamma
    };
    let slope = -sign * double_factorial(2 * k_i) * ratio * r.powi(-2 * k as i32 - 1) / gamma;
    Ok((value, slope))
}

/// `G = g + Σ_j c_j r^{2j}` with `∂_r^k G(R) = 0` for `k < m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenFunctionBall {
    pub dim: Dimension,
    pub radius: f64,
    pub regular_coeffs: Vec<f64>,
}

pub fn build_green(dim: Dimension, radius: f64) -> Result<GreenFunctionBall> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::Domain(format!("ball radius must be positive, got {radius}")));
    }
    let m = dim.m();
    let g = FundamentalSolution::new(dim).series();
    let mut a = DMatrix::zeros(m, m);
    let mut rhs = DVector::zeros(m);
    for k in 0..m {
        rhs[k] = -g.nth_derivative(k).eval(radius);
        for j in 0..m {
            let mono = LogPowerSeries::new(dim.n(), 0.0, [(2 * j as i32, 1.0)]);
            a[(k, j)] = mono.nth_derivative(k).eval(radius);
        }
    }
    let coeffs = a.lu().solve(&rhs).ok_or(Error::Singular("green boundary system"))?;
    Ok(GreenFunctionBall { dim, radius, regular_coeffs: coeffs.iter().copied().collect() })
}

impl GreenFunctionBall {
    pub fn fundamental(&self) -> FundamentalSolution {
        FundamentalSolution::new(self.dim)
    }

    pub fn regular_part(&self) -> LogPowerSeries {
        LogPowerSeries::new(
            self.dim.n(),
            0.0,
            self.regular_coeffs.iter().enumerate().map(|(j, &c)| (2 * j as i32, c)),
        )
    }

    pub fn series(&self) -> LogPowerSeries {
        let mut s = self.regular_part();
        s.log_coeff = 1.0 / self.fundamental().gamma;
        s
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.fundamental().eval(r) + self.regular_part().eval(r)
    }

    /// `∂_r^k G(r)`.
    pub fn derivative(&self, k: usize, r: f64) -> f64 {
        self.series().nth_derivative(k).eval(r)
    }

    /// `Δ^m` of the regular part, which must vanish identically.
    pub fn regular_polyharmonic_defect(&self) -> f64 {
        let s = self.regular_part().laplacian_power(self.dim.m());
        s.powers.values().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Max over `k < m` of `|∂_r^k G(R)|`.
    pub fn boundary_defect(&self) -> f64 {
        (0..self.dim.m())
            .map(|k| self.derivative(k, self.radius).abs())
            .fold(0.0, f64::max)
    }
}

/// `(-1)^m |S^{2m-1}| r^{2m-1} ∂_r Δ^{m-1} G(r)`, the mass of `(-Δ)^m G` inside `B_r`.
pub fn flux_check(g: &GreenFunctionBall, r: f64) -> f64 {
    let m = g.dim.m();
    let n = g.dim.n();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let slope = g.series().laplacian_power(m - 1).derivative().eval(r);
    sign * constants_for(g.dim).sphere_area_nm1 * r.powi(n as i32 - 1) * slope
}

/// `(2m-1)! ∫_{B_R} G₀(y) e^{2m û(y)} dy - α`, i.e. the representation formula at `x = 0`.
pub fn representation(u_hat: &RadialField, alpha: f64, g: &GreenFunctionBall) -> Result<f64> {
    let grid = u_hat.grid();
    if (grid.radius() - g.radius).abs() > 1e-14 * g.radius || grid.dim() != g.dim {
        return Err(Error::InvalidInput(
            "field and Green function live on different balls".into(),
        ));
    }
    let two_m = g.dim.n() as f64;
    let kernel = |r: f64| g.eval(r);
    let integral = grid.composed_ball_integral(u_hat.values(), g.radius, Some(&kernel), |v| (two_m * v).exp());
    Ok(g.dim.liouville_factor() * integral - alpha)
}

/// `sup_r r^ℓ |∂_r^ℓ G(r)|` over the samples.
pub fn decay_estimate_probe(g: &GreenFunctionBall, order: usize, samples: &[f64]) -> Result<f64> {
    if order == 0 || order >= g.dim.n() {
        return Err(Error::Domain(format!("decay order must lie in 1..2m, got {order}")));
    }
    let d = g.series().nth_derivative(order);
    Ok(samples
        .iter()
        .map(|&r| (r.powi(order as i32) * d.eval(r)).abs())
        .fold(0.0, f64::max))
}

/// Dirichlet Green function of `-Δ` on the disk of the given radius in ℝ²,
/// by Möbius reflection of the pole.
pub fn disk_green(x: [f64; 2], y: [f64; 2], radius: f64) -> f64 {
    let (x, y) = ([x[0] / radius, x[1] / radius], [y[0] / radius, y[1] / radius]);
    let dist = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    let y2 = y[0] * y[0] + y[1] * y[1];
    let x2 = x[0] * x[0] + x[1] * x[1];
    // |y|·|x - y*| = sqrt(|x|²|y|² - 2x·y + 1)
    let reflected = (x2 * y2 - 2.0 * (x[0] * y[0] + x[1] * y[1]) + 1.0).sqrt();
    (reflected / dist).ln() / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{RadialGrid, RadialMap};

    fn dim(m: usize) -> Dimension {
        Dimension::new(m).unwrap()
    }

    #[test]
    fn fundamental_derivative_examples() {
        let (v, s) = fundamental_derivatives(dim(1), 0, 0.3).unwrap();
        assert!((v - (1.0f64 / 0.3).ln() / (2.0 * PI)).abs() < 1e-15);
        assert!((s + 1.0 / (2.0 * PI * 0.3)).abs() < 1e-15);
        let (v, _) = fundamental_derivatives(dim(2), 1, 1.0).unwrap();
        assert!((v + 2.0 / (8.0 * PI * PI)).abs() < 1e-15);
        assert!(fundamental_derivatives(dim(2), 1, 0.0).is_err());
        assert!(fundamental_derivatives(dim(2), 2, 1.0).is_err());
    }

    #[test]
    fn closed_forms_match_series() {
        for m in 1..=4 {
            let s = FundamentalSolution::new(dim(m)).series();
            for k in 0..m {
                let lk = s.laplacian_power(k);
                for &r in &[0.1, 0.7, 2.5] {
                    let (v, d) = fundamental_derivatives(dim(m), k, r).unwrap();
                    assert!((v - lk.eval(r)).abs() <= 1e-12 * v.abs().max(1.0));
                    assert!((d - lk.derivative().eval(r)).abs() <= 1e-12 * d.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn collocation_laplacian_matches_closed_form() {
        // g itself has no even polynomial interpolant, so the collocation Laplacian is
        // checked on the regularised g_eps = log(1/√(r² + eps²))/γ.
        let m = dim(2);
        let grid = RadialGrid::linear(m, 64, 1.0).unwrap();
        let eps: f64 = 0.3;
        let gamma = constants_for(m).gamma;
        let f = RadialField::from_fn(&grid, |r| -0.5 * (r * r + eps * eps).ln() / gamma);
        let lap = f.laplacian();
        for &r in &[0.5, 0.8, 1.0] {
            let s = r * r + eps * eps;
            // Δ log(1/√s) in ℝ⁴ = -(2s + 2eps²)/s²
            let exact = -(2.0 * s + 2.0 * eps * eps) / (s * s) / gamma;
            assert!((lap.eval(r) - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn green_coefficients() {
        let g1 = build_green(dim(1), 1.0).unwrap();
        assert!(g1.regular_coeffs[0].abs() < 1e-15);
        let g2 = build_green(dim(2), 1.0).unwrap();
        let c = 1.0 / (16.0 * PI * PI);
        assert!((g2.regular_coeffs[0] + c).abs() < 1e-15);
        assert!((g2.regular_coeffs[1] - c).abs() < 1e-15);
        let g12 = build_green(dim(1), 2.0).unwrap();
        assert!((g12.regular_coeffs[0] - 2f64.ln() / (2.0 * PI)).abs() < 1e-15);
        for m in 1..=3 {
            for &r in &[0.5, 1.0, 3.0] {
                let g = build_green(dim(m), r).unwrap();
                assert!(g.boundary_defect() < 1e-12);
                assert_eq!(g.regular_polyharmonic_defect(), 0.0);
            }
        }
        assert!(build_green(dim(1), 0.0).is_err());
    }

    #[test]
    fn m2_closed_form() {
        let g = build_green(dim(2), 1.0).unwrap();
        for &r in &[0.1f64, 0.5, 0.9] {
            let exact = ((1.0 / r).ln() + (r * r - 1.0) / 2.0) / (8.0 * PI * PI);
            assert!((g.eval(r) - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn flux_is_unit() {
        assert!((flux_check(&build_green(dim(1), 1.0).unwrap(), 0.5) - 1.0).abs() < 1e-14);
        for m in 1..=3 {
            let g = build_green(dim(m), 1.0).unwrap();
            for &r in &[0.05, 0.3, 0.999] {
                assert!((flux_check(&g, r) - 1.0).abs() < 1e-10);
            }
        }
        // independent oracle for m = 2: central differences of the closed form
        let g = build_green(dim(2), 1.0).unwrap();
        let r = 0.3;
        let h = 1e-3;
        let lap = |r: f64| {
            let f = |s: f64| g.eval(s);
            let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
            let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
            d2 + 3.0 * d1 / r
        };
        let slope = (lap(r + h) - lap(r - h)) / (2.0 * h);
        let flux = 2.0 * PI * PI * r.powi(3) * slope;
        assert!((flux - 1.0).abs() < 1e-3);
    }

    #[test]
    fn boggio_positivity() {
        for m in 1..=2 {
            let g = build_green(dim(m), 1.0).unwrap();
            assert!((1..100).all(|i| g.eval(i as f64 / 100.0) > 0.0));
        }
    }

    #[test]
    fn decay_probe() {
        let samples: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
        let g1 = build_green(dim(1), 1.0).unwrap();
        let p = decay_estimate_probe(&g1, 1, &samples).unwrap();
        assert!((p - 1.0 / (2.0 * PI)).abs() < 1e-14);
        let g2 = build_green(dim(2), 1.0).unwrap();
        assert!(decay_estimate_probe(&g2, 1, &samples).unwrap() < 0.02);
        assert!(decay_estimate_probe(&g2, 3, &samples).unwrap().is_finite());
        assert!(decay_estimate_probe(&g2, 4, &samples).is_err());
    }

    #[test]
    fn representation_of_exact_disk_solution() {
        // u_b = log((1+b)/(1+b r²)) solves -Δu = λ e^{2u}, λ = 4b/(1+b)².
        let b: f64 = 3.0;
        let lambda = 4.0 * b / ((1.0 + b) * (1.0 + b));
        let grid = RadialGrid::new(dim(1), 48, 1.0, RadialMap::Linear).unwrap();
        let u = RadialField::from_fn(&grid, |r| ((1.0 + b) / (1.0 + b * r * r)).ln());
        // û = u - α with (2m-1)! e^{2mû} = λ e^{2mu}
        let alpha = -0.5 * lambda.ln();
        let u_hat = u.map_values(|v| v - alpha);
        let g = build_green(dim(1), 1.0).unwrap();
        let rec = representation(&u_hat, alpha, &g).unwrap();
        assert!((rec - u_hat.value_at_origin()).abs() < 1e-10, "{rec}");

        let zero = RadialField::constant(&grid, -1e3);
        assert!((representation(&zero, 3.0, &g).unwrap() + 3.0).abs() < 1e-15);
    }

    #[test]
    fn disk_green_properties() {
        let y = [0.3, -0.2];
        for &th in &[0.0f64, 1.0, 2.5] {
            let x = [th.cos(), th.sin()];
            assert!(disk_green(x, y, 1.0).abs() < 1e-14);
        }
        // symmetric, and centered pole reduces to log(1/r)/(2π)
        let a = [0.1, 0.4];
        assert!((disk_green(a, y, 1.0) - disk_green(y, a, 1.0)).abs() < 1e-14);
        let r: f64 = 0.37;
        assert!((disk_green([r, 0.0], [0.0, 0.0], 1.0) + r.ln() / (2.0 * PI)).abs() < 1e-14);
    }
}
