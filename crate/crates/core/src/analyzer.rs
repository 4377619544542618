//! Inductive extraction of concentration points and the blow-up diagnostics
//! evaluated at each of them.

use serde::{Deserialize, Serialize};

use crate::constants::{constants_for, Bubble, Dimension};
use crate::error::{Error, Result};
use crate::green::GreenFunctionBall;
use crate::radial::RadialField;
use crate::solver::{normalize, SolutionState};

/// Uniform 2D table on `[x0, x0 + (nx-1)h] × [y0, y0 + (ny-1)h]`, row-major in `y`.
#[derive(Debug, Clone)]
pub struct CartesianTable {
    pub h: f64,
    pub origin: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl CartesianTable {
    pub fn from_fn(h: f64, lower: [f64; 2], upper: [f64; 2], f: impl Fn([f64; 2]) -> f64) -> Self {
        let nx = ((upper[0] - lower[0]) / h).round() as usize + 1;
        let ny = ((upper[1] - lower[1]) / h).round() as usize + 1;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f([lower[0] + i as f64 * h, lower[1] + j as f64 * h]));
            }
        }
        Self { h, origin: lower, nx, ny, values }
    }

    fn point(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx % self.nx, idx / self.nx);
        [self.origin[0] + i as f64 * self.h, self.origin[1] + j as f64 * self.h]
    }

    fn upper(&self) -> [f64; 2] {
        [
            self.origin[0] + (self.nx - 1) as f64 * self.h,
            self.origin[1] + (self.ny - 1) as f64 * self.h,
        ]
    }

    /// Trapezoid weight of node `idx`.
    fn weight(&self, idx: usize) -> f64 {
        let (i, j) = (idx % self.nx, idx / self.nx);
        let edge = |k: usize, n: usize| if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        edge(i, self.nx) * edge(j, self.ny) * self.h * self.h
    }

    fn bilinear(&self, x: [f64; 2]) -> Option<f64> {
        let fx = (x[0] - self.origin[0]) / self.h;
        let fy = (x[1] - self.origin[1]) / self.h;
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > (self.nx - 1) as f64 + eps || fy > (self.ny - 1) as f64 + eps {
            return None;
        }
        let i = (fx.floor().max(0.0) as usize).min(self.nx - 2);
        let j = (fy.floor().max(0.0) as usize).min(self.ny - 2);
        let (a, b) = (fx - i as f64, fy - j as f64);
        let v = |i: usize, j: usize| self.values[j * self.nx + i];
        Some(
            (1.0 - a) * (1.0 - b) * v(i, j)
                + a * (1.0 - b) * v(i + 1, j)
                + (1.0 - a) * b * v(i, j + 1)
                + a * b * v(i + 1, j + 1),
        )
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    /// Radial field on the ball of the grid radius.
    Radial(RadialField),
    /// Sampled table on a rectangle; only for `m = 1`.
    Cartesian2d(CartesianTable),
}

/// A normalized field `û` together with its sampling backend.
#[derive(Debug, Clone)]
pub struct SampledField {
    backend: Backend,
    dim: Dimension,
}

impl SampledField {
    pub fn radial(u_hat: RadialField) -> Self {
        let dim = u_hat.dim();
        Self { backend: Backend::Radial(u_hat), dim }
    }

    pub fn cartesian2d(dim: Dimension, table: CartesianTable) -> Result<Self> {
        if dim.m() != 1 {
            return Err(Error::Unsupported("cartesian sampling is only available for m = 1"));
        }
        if table.nx < 2 || table.ny < 2 || table.values.len() != table.nx * table.ny {
            return Err(Error::InvalidInput("cartesian table shape mismatch".into()));
        }
        Ok(Self { backend: Backend::Cartesian2d(table), dim })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    fn sample_count(&self) -> usize {
        match &self.backend {
            Backend::Radial(f) => f.grid().node_count() + 1,
            Backend::Cartesian2d(t) => t.values.len(),
        }
    }

    /// Sample `idx`: the origin first, then the radial nodes along `e₁`.
    fn sample(&self, idx: usize) -> (Vec<f64>, f64) {
        match &self.backend {
            Backend::Radial(f) => {
                let mut x = vec![0.0; self.dim.n()];
                if idx == 0 {
                    (x, f.value_at_origin())
                } else {
                    x[0] = f.grid().nodes()[idx - 1];
                    (x, f.values()[idx - 1])
                }
            }
            Backend::Cartesian2d(t) => (t.point(idx).to_vec(), t.values[idx]),
        }
    }

    /// Interpolated value; `None` outside the domain.
    pub fn eval(&self, x: &[f64]) -> Option<f64> {
        match &self.backend {
            Backend::Radial(f) => {
                let r = norm(x);
                (r <= f.grid().radius() * (1.0 + 1e-12)).then(|| f.eval(r.min(f.grid().radius())))
            }
            Backend::Cartesian2d(t) => t.bilinear([x[0], x[1]]),
        }
    }

    /// Distance from `x` to the boundary of the domain.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match &self.backend {
            Backend::Radial(f) => f.grid().radius() - norm(x),
            Backend::Cartesian2d(t) => {
                let up = t.upper();
                (x[0] - t.origin[0]).min(up[0] - x[0]).min(x[1] - t.origin[1]).min(up[1] - x[1])
            }
        }
    }

    /// `∫ e^{2mû}` over `B_radius(center) ∩ Ω`.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> Result<f64> {
        let two_m = self.dim.n() as f64;
        match &self.backend {
            Backend::Radial(f) => {
                if norm(center) > 0.0 {
                    return Err(Error::Unsupported("radial ball integrals are centered at the origin"));
                }
                let r = radius.min(f.grid().radius());
                Ok(f.composed_ball_integral(r, |v| (two_m * v).exp()))
            }
            Backend::Cartesian2d(t) => Ok((0..t.values.len())
                .filter(|&k| dist(&t.point(k), center) <= radius)
                .map(|k| t.weight(k) * (two_m * t.values[k]).exp())
                .sum()),
        }
    }

    /// `∫_Ω e^{2mû}`.
    pub fn total_mass(&self) -> f64 {
        let two_m = self.dim.n() as f64;
        match &self.backend {
            Backend::Radial(f) => f.composed_ball_integral(f.grid().radius(), |v| (two_m * v).exp()),
            Backend::Cartesian2d(t) => (0..t.values.len())
                .map(|k| t.weight(k) * (two_m * t.values[k]).exp())
                .sum(),
        }
    }

    /// `∫ e^{2mû}` over the collar `{dist(x, ∂Ω) < width}`.
    pub fn collar_mass(&self, width: f64) -> f64 {
        let two_m = self.dim.n() as f64;
        match &self.backend {
            Backend::Radial(f) => {
                let radius = f.grid().radius();
                if width >= radius {
                    return self.total_mass();
                }
                f.composed_shell_integral(radius - width, radius, |v| (two_m * v).exp())
            }
            Backend::Cartesian2d(t) => (0..t.values.len())
                .filter(|&k| self.boundary_distance(&t.point(k)) < width)
                .map(|k| t.weight(k) * (two_m * t.values[k]).exp())
                .sum(),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationPoint {
    pub location: Vec<f64>,
    /// `μ = 2e^{-û(x)}`.
    pub scale: f64,
    pub local_mass: f64,
    pub profile_dev: Option<f64>,
    /// `dist(x, ∂Ω)/μ`.
    pub boundary_ratio: f64,
    /// `|x - x_j|/μ` for the previously extracted points `x_j`.
    pub separation_ratios: Vec<f64>,
    /// `(w(x)/2^{2m})^{1/2m}` at insertion, the lower bound expected for every
    /// separation ratio of the earlier points.
    pub separation_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub points: Vec<ConcentrationPoint>,
    /// `sup_x min_i |x - x_i|^{2m} e^{2mû(x)}` over the samples after the last point.
    pub a5_sup: f64,
    /// False when `max_points` stopped the loop before the threshold was met.
    pub terminated_normally: bool,
}

/// Lemma-style extraction: the global maximum first, then repeatedly the maximizer
/// of `w(x) = min_i |x - x_i|^{2m} e^{2mû(x)}` while `sup w > threshold`.
/// Ties go to the lowest sample index.
pub fn extract_points(field: &SampledField, threshold_c: f64, max_points: usize) -> Result<Extraction> {
    if !(threshold_c > 0.0) {
        return Err(Error::InvalidInput(format!("threshold must be positive, got {threshold_c}")));
    }
    let n = field.sample_count();
    let m2 = field.dim.n() as i32;
    let samples: Vec<(Vec<f64>, f64)> = (0..n).map(|k| field.sample(k)).collect();
    let mut points: Vec<ConcentrationPoint> = Vec::new();
    if max_points == 0 {
        return Ok(Extraction { points, a5_sup: f64::INFINITY, terminated_normally: false });
    }

    let make_point = |idx: usize, prev: &[ConcentrationPoint], w: f64| {
        let (x, v) = &samples[idx];
        let scale = 2.0 * (-v).exp();
        ConcentrationPoint {
            location: x.clone(),
            scale,
            local_mass: 0.0,
            profile_dev: None,
            boundary_ratio: field.boundary_distance(x) / scale,
            separation_ratios: prev.iter().map(|p| dist(&p.location, x) / p.scale).collect(),
            separation_bound: (w / 2f64.powi(m2)).powf(1.0 / m2 as f64),
        }
    };

    let first = argmax(samples.iter().map(|(_, v)| *v));
    points.push(make_point(first, &[], f64::INFINITY));
    // running minimum of |x - x_i|^{2m}
    let mut dist_pow: Vec<f64> = samples.iter().map(|(x, _)| dist(x, &points[0].location).powi(m2)).collect();
    loop {
        let w: Vec<f64> = samples
            .iter()
            .zip(&dist_pow)
            .map(|((_, v), d)| d * (m2 as f64 * v).exp())
            .collect();
        let best = argmax(w.iter().copied());
        let sup = w[best];
        if sup <= threshold_c {
            return Ok(Extraction { points, a5_sup: sup, terminated_normally: true });
        }
        if points.len() >= max_points {
            return Ok(Extraction { points, a5_sup: sup, terminated_normally: false });
        }
        let p = make_point(best, &points, sup);
        for ((x, _), d) in samples.iter().zip(dist_pow.iter_mut()) {
            *d = d.min(dist(x, &p.location).powi(m2));
        }
        points.push(p);
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// `sup_{|x| ≤ R_cmp} |û(p + μx) + log μ - η₀(x)|`.
pub fn rescaled_profile_dev(field: &SampledField, p: &ConcentrationPoint, r_cmp: f64) -> Result<f64> {
    if p.boundary_ratio < r_cmp {
        return Err(Error::BallExitsDomain { ratio: p.boundary_ratio, needed: r_cmp });
    }
    let eta0 = Bubble::standard(field.dim);
    let mu = p.scale;
    let log_mu = mu.ln();
    let dev = |x: &[f64]| -> Result<f64> {
        let y: Vec<f64> = p.location.iter().zip(x).map(|(a, b)| a + mu * b).collect();
        let v = field
            .eval(&y)
            .ok_or_else(|| Error::BallExitsDomain { ratio: p.boundary_ratio, needed: r_cmp })?;
        Ok((v + log_mu - eta0.profile(norm(x))).abs())
    };
    let mut sup: f64 = 0.0;
    match field.backend() {
        Backend::Radial(f) => {
            let mut radii: Vec<f64> = (0..=400).map(|i| r_cmp * i as f64 / 400.0).collect();
            radii.extend(f.grid().nodes().iter().map(|r| r / mu).filter(|&s| s <= r_cmp));
            for s in radii {
                let mut x = vec![0.0; field.dim.n()];
                x[0] = s;
                sup = sup.max(dev(&x)?);
            }
        }
        Backend::Cartesian2d(t) => {
            for k in 0..t.values.len() {
                let y = t.point(k);
                let x = [(y[0] - p.location[0]) / mu, (y[1] - p.location[1]) / mu];
                if norm(&x) <= r_cmp {
                    sup = sup.max((t.values[k] + log_mu - eta0.profile(norm(&x))).abs());
                }
            }
        }
    }
    Ok(sup)
}

/// `(2m-1)! ∫_{B_{R_loc μ}(x)} e^{2mû}`.
pub fn local_mass(field: &SampledField, p: &ConcentrationPoint, r_loc: f64) -> Result<f64> {
    if !(r_loc >= 1.0) {
        return Err(Error::InvalidInput(format!("mass radius multiplier must be at least 1, got {r_loc}")));
    }
    Ok(field.dim.liouville_factor() * field.ball_mass(&p.location, r_loc * p.scale)?)
}

/// `|ρ - NΛ₁|/Λ₁`.
pub fn quantization_residual(dim: Dimension, rho: f64, count: usize) -> f64 {
    let l1 = constants_for(dim).lambda1;
    (rho - count as f64 * l1).abs() / l1
}

/// Above this `u(0)` a state without concentration points is inconsistent.
pub const BLOWUP_U_MAX: f64 = 5.0;

pub fn quantization_check(s: &SolutionState, report: &ConcentrationReport) -> Result<f64> {
    if report.n == 0 && s.u_max > BLOWUP_U_MAX {
        return Err(Error::Inconsistent(format!(
            "no concentration point found although u(0) = {:.3}",
            s.u_max
        )));
    }
    Ok(quantization_residual(s.u().dim(), s.rho, report.n))
}

/// `sup_{r₁ ≤ r ≤ r₂} |u(r) - NΛ₁G(r)|` for a radial state concentrating at 0.
pub fn green_limit_dev(
    s: &SolutionState,
    report: &ConcentrationReport,
    g: &GreenFunctionBall,
    annulus: [f64; 2],
) -> Result<f64> {
    if report.points.iter().any(|p| norm(&p.location) > 0.0) {
        return Err(Error::Unsupported("green limit needs every point at the origin"));
    }
    let u = s.u();
    green_limit_dev_of(|r| u.eval(r), u.grid().nodes(), report.n, g, annulus)
}

/// Same supremum for any radial profile, sampled uniformly and at `extra` radii.
pub fn green_limit_dev_of(
    u: impl Fn(f64) -> f64,
    extra: &[f64],
    count: usize,
    g: &GreenFunctionBall,
    annulus: [f64; 2],
) -> Result<f64> {
    let [r1, r2] = annulus;
    if !(0.0 < r1 && r1 < r2 && r2 <= g.radius) {
        return Err(Error::InvalidInput(format!("bad annulus [{r1}, {r2}]")));
    }
    let weight = count as f64 * constants_for(g.dim).lambda1;
    let mut radii: Vec<f64> = (0..=200).map(|i| r1 + (r2 - r1) * i as f64 / 200.0).collect();
    radii.extend(extra.iter().copied().filter(|&r| r1 <= r && r <= r2));
    Ok(radii
        .into_iter()
        .map(|r| (u(r) - weight * g.eval(r)).abs())
        .fold(0.0, f64::max))
}

/// Smallest boundary ratio and `(2m-1)!` times the mass in the collar.
pub fn boundary_diagnostics(report: &ConcentrationReport, field: &SampledField, collar_width: f64) -> (f64, f64) {
    let ratio = report.points.iter().map(|p| p.boundary_ratio).fold(f64::INFINITY, f64::min);
    (ratio, field.dim.liouville_factor() * field.collar_mass(collar_width))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzerConfig {
    /// `None` selects [`default_threshold`].
    pub threshold_c: Option<f64>,
    pub max_points: usize,
    pub r_loc: f64,
    pub r_cmp: f64,
    /// Collar width as a fraction of the domain radius.
    pub collar_width_fraction: f64,
    pub annulus: [f64; 2],
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            threshold_c: None,
            max_points: 16,
            r_loc: 50.0,
            r_cmp: 5.0,
            collar_width_fraction: 0.1,
            annulus: [0.3, 0.9],
        }
    }
}

/// `2^{2m}`: a single bubble keeps `sup w` at 1, so anything above flags a second
/// concentration region.
pub fn default_threshold(dim: Dimension) -> f64 {
    2f64.powi(dim.n() as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub points: Vec<ConcentrationPoint>,
    pub n: usize,
    pub rho: f64,
    pub quantization_residual: f64,
    pub a5_sup: f64,
    pub threshold_c: f64,
    pub terminated_normally: bool,
    pub green_limit_dev: Option<f64>,
    pub min_boundary_ratio: f64,
    pub collar_mass: f64,
    /// `Σ local masses ≤ (2m-1)! ∫ e^{2mû}` up to quadrature error.
    pub total_mass: f64,
}

/// Full analysis of one normalized field with mean-field parameter `rho`.
/// `domain_radius` sets the collar width.
pub fn analyze_field(field: &SampledField, rho: f64, domain_radius: f64, cfg: &AnalyzerConfig) -> Result<ConcentrationReport> {
    let threshold = cfg.threshold_c.unwrap_or_else(|| default_threshold(field.dim));
    let ex = extract_points(field, threshold, cfg.max_points)?;
    let mut points = ex.points;
    for p in &mut points {
        p.local_mass = local_mass(field, p, cfg.r_loc)?;
        p.profile_dev = rescaled_profile_dev(field, p, cfg.r_cmp).ok();
    }
    let n = points.len();
    let mut report = ConcentrationReport {
        points,
        n,
        rho,
        quantization_residual: quantization_residual(field.dim, rho, n),
        a5_sup: ex.a5_sup,
        threshold_c: threshold,
        terminated_normally: ex.terminated_normally,
        green_limit_dev: None,
        min_boundary_ratio: f64::INFINITY,
        collar_mass: 0.0,
        total_mass: field.dim.liouville_factor() * field.total_mass(),
    };
    let (ratio, collar) = boundary_diagnostics(&report, field, cfg.collar_width_fraction * domain_radius);
    report.min_boundary_ratio = ratio;
    report.collar_mass = collar;
    Ok(report)
}

/// Analysis of a converged radial state, including the Green-function limit.
pub fn analyze_state(s: &SolutionState, g: &GreenFunctionBall, cfg: &AnalyzerConfig) -> Result<ConcentrationReport> {
    let (u_hat, _) = normalize(s);
    let radius = u_hat.grid().radius();
    let field = SampledField::radial(u_hat);
    let mut report = analyze_field(&field, s.rho, radius, cfg)?;
    quantization_check(s, &report)?;
    report.green_limit_dev = Some(green_limit_dev(s, &report, g, cfg.annulus)?);
    Ok(report)
}
