//! Pohozaev-type identities on origin-centered balls, the pointwise divergence
//! identity behind them, and the boundary functionals of the Green function.

use serde::{Deserialize, Serialize};

use crate::constants::{constants_for, Dimension};
use crate::error::{Error, Result};
use crate::green::{fundamental_derivatives, FundamentalSolution, GreenFunctionBall, LogPowerSeries};
use crate::polynomial::Polynomial;
use crate::radial::{LaplacianStack, RadialField};

/// Relative equation residual above which the identity is reported as meaningless.
pub const EQUATION_RESIDUAL_LIMIT: f64 = 1e-6;

/// Relative size of `∂_r^k u(R)` tolerated by [`dirichlet_boundary_structure`].
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Terms of the identity
/// `∫ Qe^{2mu} = (1/2m)·term_volume + term_square + Σ_j term_f[j]` on `B_δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub delta: f64,
    pub interior: f64,
    pub term_volume: f64,
    pub term_square: f64,
    pub term_f: Vec<f64>,
    pub residual: f64,
    pub relative_residual: f64,
    /// Max relative residual of `(-Δ)^m u = Qe^{2mu}` at the nodes inside `B_δ`.
    pub equation_residual: f64,
    pub valid: bool,
}

impl PohozaevReport {
    pub fn boundary_total(&self) -> f64 {
        let two_m = self.term_f.len() as f64 * 2.0;
        self.term_volume / two_m + self.term_square + self.term_f.iter().sum::<f64>()
    }
}

/// Pohozaev identity on `B_δ` with `y = 0` for a sampled radial field.
pub fn pohozaev_ball(u: &RadialField, q: f64, delta: f64) -> Result<PohozaevReport> {
    pohozaev_stack(&LaplacianStack::from_field(u), q, delta)
}

/// Same as [`pohozaev_ball`] for a field given through its Laplacian levels.
pub fn pohozaev_stack(stack: &LaplacianStack, q: f64, delta: f64) -> Result<PohozaevReport> {
    let u = stack.base();
    let grid = u.grid();
    if !(delta > 0.0 && delta <= grid.radius() * (1.0 + 1e-14)) {
        return Err(Error::Domain(format!(
            "sphere radius {delta} must lie in (0, {}]",
            grid.radius()
        )));
    }
    let dim = u.dim();
    let m = dim.m();
    let two_m = dim.n() as f64;
    let delta = delta.min(grid.radius());
    let sphere = constants_for(dim).sphere_area_nm1 * delta.powi(dim.n() as i32 - 1);

    let interior = q * u.composed_ball_integral(delta, |v| (two_m * v).exp());
    let term_volume = delta * sphere * q * (two_m * u.eval(delta)).exp();
    let top = stack.half_power(m).eval(delta);
    let term_square = -0.5 * delta * sphere * top * top;
    let term_f: Vec<f64> = (0..m)
        .map(|j| {
            let a = stack.half_power_of_dilation(j).eval(delta);
            let b = stack.half_power(2 * m - 1 - j).eval(delta);
            sign(m + j + 1) * sphere * a * b
        })
        .collect();

    let equation_residual = equation_residual(stack, q, delta);
    let boundary = term_volume / two_m + term_square + term_f.iter().sum::<f64>();
    let residual = (interior - boundary).abs();
    Ok(PohozaevReport {
        delta,
        interior,
        term_volume,
        term_square,
        term_f,
        residual,
        relative_residual: residual / interior.abs(),
        equation_residual,
        valid: equation_residual.is_finite() && equation_residual <= EQUATION_RESIDUAL_LIMIT,
    })
}

fn equation_residual(stack: &LaplacianStack, q: f64, delta: f64) -> f64 {
    let m = stack.levels().len();
    let u = stack.base();
    let two_m = 2.0 * m as f64;
    let lhs = sign(m) * &stack.level(m - 1).laplacian();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for ((&r, &l), &v) in u.grid().nodes().iter().zip(lhs.values()).zip(u.values()) {
        if r <= delta {
            let rhs = q * (two_m * v).exp();
            worst = worst.max((l - rhs).abs());
            scale = scale.max(rhs.abs());
        }
    }
    if !(worst.is_finite() && scale.is_finite()) {
        return f64::INFINITY;
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

/// Max relative discrepancy of `½ div((x-y)|Δ^{m/2}u|²) = Δ^{m/2}((x-y)·∇u)·Δ^{m/2}u`
/// over the samples, with the left side from a fourth-order central difference.
///
/// Each discrepancy is divided by `max(|rhs(x)|, 1e-3·max_x |rhs|)` so zero
/// crossings of the right side do not dominate; samples where both sides vanish
/// exactly score zero.
pub fn lemma_alg_check(u: &Polynomial, y: &[f64], samples: &[Vec<f64>]) -> f64 {
    let n = u.vars();
    assert!(n % 2 == 0 && n > 0, "test fields live in even dimension");
    assert_eq!(y.len(), n);
    let m = n / 2;
    let top = u.half_power(m);
    let dilated = u.directional_dilation(y).half_power(m);

    let square = |x: &[f64]| top.iter().map(|c| c.eval(x).powi(2)).sum::<f64>();
    let lhs = |x: &[f64]| {
        let h = 1e-3 * x.iter().map(|v| v.abs()).fold(1.0, f64::max);
        let mut div = 0.0;
        for i in 0..n {
            let component = |s: f64| {
                let mut p = x.to_vec();
                p[i] += s;
                (p[i] - y[i]) * square(&p)
            };
            div += (-component(2.0 * h) + 8.0 * component(h) - 8.0 * component(-h) + component(-2.0 * h))
                / (12.0 * h);
        }
        0.5 * div
    };
    let rhs = |x: &[f64]| top.iter().zip(&dilated).map(|(a, b)| a.eval(x) * b.eval(x)).sum::<f64>();

    let pairs: Vec<(f64, f64)> = samples.iter().map(|x| (lhs(x), rhs(x))).collect();
    let floor = 1e-3 * pairs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    pairs
        .iter()
        .map(|&(l, r)| {
            if l == 0.0 && r == 0.0 {
                0.0
            } else {
                (l - r).abs() / r.abs().max(floor).max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

/// Split of the Dirichlet boundary integrand `f = f⁽¹⁾ + f⁽²⁾` on `∂B_R` for the
/// shifted center `y = y_offset·e₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletBoundary {
    /// `∫_{∂B_R} f⁽¹⁾ dσ`.
    pub f1_integral: f64,
    /// Max of `|f⁽¹⁾|` over the sphere.
    pub f1_max: f64,
    /// `∫_{∂B_R} f⁽²⁾ dσ`.
    pub f2_value: f64,
    /// Max over the sphere of `|f⁽²⁾ - ν·(x-y)|Δ^{m/2}u|²|`.
    pub identity_gap: f64,
}

/// Evaluates the split on the outer sphere of a field satisfying all Dirichlet conditions.
///
/// Every integrand is affine in `c = y·x̂`, so its extremes sit at `c = ±|y|` and
/// its sphere integral is the value at `c = 0` times the area.
pub fn dirichlet_boundary_structure(stack: &LaplacianStack, y_offset: f64) -> Result<DirichletBoundary> {
    let u = stack.base();
    let dim = u.dim();
    let m = dim.m();
    let big_r = u.grid().radius();

    let scale = u.values().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut d = u.clone();
    for k in 0..m {
        let v = d.eval(big_r);
        if !(v.abs() <= BOUNDARY_TOLERANCE * scale) {
            return Err(Error::InvalidInput(format!(
                "boundary condition of order {k} violated: {v:e} at r = {big_r}"
            )));
        }
        d = d.radial_derivative();
    }

    // Radial data at r = R.
    let dil: Vec<f64> = (0..m).map(|j| stack.half_power_of_dilation(j).eval(big_r)).collect();
    let other: Vec<f64> = (0..m).map(|j| stack.half_power(2 * m - 1 - j).eval(big_r)).collect();
    let slope: Vec<f64> = (0..m).map(|k| stack.level(k).radial_derivative().eval(big_r)).collect();
    let curvature: Vec<f64> = (0..m)
        .map(|k| stack.level(k).radial_derivative().radial_derivative().eval(big_r))
        .collect();
    let top = stack.half_power(m).eval(big_r);

    let f = |c: f64| {
        (0..m)
            .map(|j| {
                let k = j / 2;
                // Δ^{j/2}(y·∇u) has radial part c·∂_rΔ^k u (even j) or c·∂_r²Δ^k u (odd j).
                let shift = if j % 2 == 0 { slope[k] } else { curvature[k] };
                sign(m + j + 1) * (dil[j] - c * shift) * other[j]
            })
            .sum::<f64>()
    };
    let f2 = |c: f64| {
        if m % 2 == 1 {
            let s = slope[(m - 1) / 2];
            s * s * (big_r - c)
        } else {
            let k = (m - 2) / 2;
            curvature[k] * (big_r - c) * stack.level(k + 1).eval(big_r)
        }
    };
    let target = |c: f64| (big_r - c) * top * top;

    let area = constants_for(dim).sphere_area_nm1 * big_r.powi(dim.n() as i32 - 1);
    let cs = [-y_offset.abs(), 0.0, y_offset.abs()];
    let f1 = |c: f64| f(c) - f2(c);
    Ok(DirichletBoundary {
        f1_integral: area * f1(0.0),
        f1_max: cs.iter().map(|&c| f1(c).abs()).fold(0.0, f64::max),
        f2_value: area * f2(0.0),
        identity_gap: cs.iter().map(|&c| (f2(c) - target(c)).abs()).fold(0.0, f64::max),
    })
}

/// The functionals `II_δ`, `III_δ = Σ_j III_δ^{(j)}` of the fundamental solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFunctionals {
    pub delta: f64,
    pub ii: f64,
    pub iii: f64,
    pub iii_terms: Vec<f64>,
    /// `1 / (II + III)`.
    pub sum_inverse: f64,
}

impl BoundaryFunctionals {
    pub fn sum(&self) -> f64 {
        self.ii + self.iii
    }

    /// Largest `|III^{(j)}|` with `j ≥ 1`.
    pub fn higher_terms_max(&self) -> f64 {
        self.iii_terms.iter().skip(1).map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// `II_δ(g)` and `III_δ(g)` from the closed-form radial derivatives of `g`.
pub fn green_boundary_functionals(dim: Dimension, delta: f64) -> Result<BoundaryFunctionals> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("sphere radius must be positive, got {delta}")));
    }
    let m = dim.m();
    let levels = (0..m)
        .map(|k| fundamental_derivatives(dim, k, delta))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let half = |j: usize| if j % 2 == 0 { levels[j / 2].0 } else { levels[j / 2].1 };
    let dilation = |j: usize| {
        let k = j / 2;
        let (value, slope) = levels[k];
        if j % 2 == 0 {
            2.0 * k as f64 * value + delta * slope
        } else {
            // ∂_rΔ^k g ∝ r^{-2k-1}, so ∂_r²Δ^k g = -(2k+1)/r·∂_rΔ^k g.
            let curvature = -((2 * k + 1) as f64) * slope / delta;
            (2 * k + 1) as f64 * slope + delta * curvature
        }
    };
    Ok(assemble(dim, delta, half, dilation))
}

fn assemble(
    dim: Dimension,
    delta: f64,
    half: impl Fn(usize) -> f64,
    dilation: impl Fn(usize) -> f64,
) -> BoundaryFunctionals {
    let m = dim.m();
    let sphere = constants_for(dim).sphere_area_nm1 * delta.powi(dim.n() as i32 - 1);
    let top = half(m);
    let ii = -0.5 * delta * sphere * top * top;
    let iii_terms: Vec<f64> = (0..m)
        .map(|j| sign(m + j + 1) * sphere * dilation(j) * half(2 * m - 1 - j))
        .collect();
    let iii = iii_terms.iter().sum::<f64>();
    BoundaryFunctionals { delta, ii, iii, iii_terms, sum_inverse: 1.0 / (ii + iii) }
}

/// The functionals of an arbitrary radial series, differentiated exactly.
pub fn series_boundary_functionals(dim: Dimension, series: &LogPowerSeries, delta: f64) -> BoundaryFunctionals {
    let half_of = |s: &LogPowerSeries, j: usize| {
        let level = s.laplacian_power(j / 2);
        if j % 2 == 0 {
            level.eval(delta)
        } else {
            level.derivative().eval(delta)
        }
    };
    let dilated = series.dilation();
    assemble(dim, delta, |j| half_of(series, j), |j| half_of(&dilated, j))
}

/// Gaps between the functionals of the full Green function and of `g` alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationGaps {
    pub delta: f64,
    pub ii_gap: f64,
    pub iii_gap: f64,
    pub iii_term_gaps: Vec<f64>,
}

pub fn regular_part_perturbation(g: &GreenFunctionBall, delta: f64) -> Result<PerturbationGaps> {
    if !(delta > 0.0 && delta < g.radius) {
        return Err(Error::Domain(format!("sphere radius {delta} must lie in (0, {})", g.radius)));
    }
    let full = series_boundary_functionals(g.dim, &g.series(), delta);
    let bare = series_boundary_functionals(g.dim, &FundamentalSolution::new(g.dim).series(), delta);
    Ok(PerturbationGaps {
        delta,
        ii_gap: full.ii - bare.ii,
        iii_gap: full.iii - bare.iii,
        iii_term_gaps: full.iii_terms.iter().zip(&bare.iii_terms).map(|(a, b)| a - b).collect(),
    })
}

/// Least-squares slope of `log|y|` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::build_green;
    use crate::radial::{RadialGrid, RadialMap};
    use std::f64::consts::PI;

    fn dim(m: usize) -> Dimension {
        Dimension::new(m).unwrap()
    }

    #[test]
    fn hand_computed_disk_fixture() {
        // u = log((1+b)/(1+br²)) solves -Δu = λe^{2u} with λ = 4b/(1+b)²; b = 1 gives λ = 1, u'(1) = -1.
        let b = 1.0;
        let lambda = 4.0 * b / (1.0f64 + b).powi(2);
        let grid = RadialGrid::new(dim(1), 48, 1.0, RadialMap::Linear).unwrap();
        let u = RadialField::from_fn(&grid, |r| ((1.0 + b) / (1.0 + b * r * r)).ln());
        let rep = pohozaev_ball(&u, lambda, 1.0).unwrap();
        assert!(rep.valid);
        assert!(rep.residual < 1e-9, "{rep:?}");
        assert!((rep.interior - 2.0 * PI).abs() < 1e-9);
        assert!((rep.term_square + PI).abs() < 1e-9);
        assert!((rep.term_f[0] - 2.0 * PI).abs() < 1e-9);
        assert!((rep.term_volume / 2.0 - PI).abs() < 1e-9);
    }

    #[test]
    fn non_solution_is_flagged() {
        let grid = RadialGrid::new(dim(1), 32, 1.0, RadialMap::Linear).unwrap();
        let u = RadialField::from_fn(&grid, |r| 1.0 - r * r);
        assert!(!pohozaev_ball(&u, 1.0, 0.5).unwrap().valid);
    }

    #[test]
    fn alg_identity_on_polynomials() {
        let u = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 3.0)]);
        // at x = (1, 1): ½div(x|∇u|²) = |∇u|² + ½x·∇|∇u|² = 40 + 80 and ∇(x·∇u)·∇u = 2|∇u|² + ... = 120 too
        let err = lemma_alg_check(&u, &[0.0, 0.0], &[vec![1.0, 1.0], vec![-0.3, 2.0], vec![0.7, -1.1]]);
        assert!(err < 1e-6, "{err}");
        let r4 = Polynomial::radial_power(4, 2);
        let pts = vec![vec![0.3, -0.2, 0.5, 1.0], vec![1.2, 0.1, -0.4, 0.0], vec![-0.5, 0.5, 0.5, -0.5]];
        let err = lemma_alg_check(&r4, &[1.0, 0.0, 0.0, 0.0], &pts);
        assert!(err < 1e-6, "{err}");
        let harmonic = Polynomial::from_terms(2, [(vec![1, 0], 2.0), (vec![0, 0], 1.0)]).laplacian();
        assert_eq!(lemma_alg_check(&harmonic, &[0.0, 0.0], &pts[..1].iter().map(|p| p[..2].to_vec()).collect::<Vec<_>>()), 0.0);
    }

    #[test]
    fn green_functionals() {
        let f = green_boundary_functionals(dim(1), 0.4).unwrap();
        assert!((f.ii + 1.0 / (4.0 * PI)).abs() < 1e-14);
        assert!((f.iii - 1.0 / (2.0 * PI)).abs() < 1e-14);
        for m in 1..=3 {
            let lambda1 = constants_for(dim(m)).lambda1;
            for delta in [0.1, 0.3, 0.5] {
                let f = green_boundary_functionals(dim(m), delta).unwrap();
                assert!((f.sum() - 1.0 / lambda1).abs() < 1e-10, "m={m} {f:?}");
                assert!(f.higher_terms_max() < 1e-10);
                let s = series_boundary_functionals(dim(m), &FundamentalSolution::new(dim(m)).series(), delta);
                assert!((s.sum() - f.sum()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regular_part_gaps() {
        let g1 = build_green(dim(1), 1.0).unwrap();
        let p = regular_part_perturbation(&g1, 0.3).unwrap();
        assert_eq!((p.ii_gap, p.iii_gap), (0.0, 0.0));
        let g2 = build_green(dim(2), 1.0).unwrap();
        let deltas = [0.4, 0.2, 0.1];
        let gaps: Vec<_> = deltas.iter().map(|&d| regular_part_perturbation(&g2, d).unwrap()).collect();
        let slope = log_log_slope(&deltas, &gaps.iter().map(|g| g.ii_gap).collect::<Vec<_>>());
        assert!((slope - 2.0).abs() < 0.6, "{slope}");
    }
}
