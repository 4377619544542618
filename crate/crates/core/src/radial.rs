//! Radial collocation on balls of ℝ^{2m}.
//!
//! Fields are represented by their values at the positive half of a Chebyshev
//! Gauss-Lobatto grid with an odd number of intervals on `t ∈ [-1, 1]`, extended
//! to the negative half by parity. The physical radius is `r = R sinh(κt)/sinh(κ)`
//! (`r = Rt` when `κ = 0`), which clusters nodes at the origin; the Lobatto
//! endpoints cluster them at `r = R`. The origin itself is never a node.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::{DMatrix, DVector};

use crate::constants::{sphere_area, Dimension};
use crate::error::{Error, Result};

/// Minimum node count accepted by [`RadialGrid::new`].
pub const MIN_NODES: usize = 8;

/// Reflection symmetry of a radial quantity through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Scalar radial functions and their even Laplacian powers.
    Even,
    /// Radial components of gradients.
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Node clustering towards the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialMap {
    /// `r = R t`.
    Linear,
    /// `r = R sinh(κt)/sinh(κ)`.
    Sinh { stretch: f64 },
}

impl RadialMap {
    /// Map whose spacing at the origin resolves features of width `scale`.
    pub fn resolving(radius: f64, scale: f64) -> Self {
        if scale >= radius {
            return RadialMap::Linear;
        }
        RadialMap::Sinh {
            stretch: (radius / scale).asinh(),
        }
    }

    pub fn stretch(self) -> f64 {
        match self {
            RadialMap::Linear => 0.0,
            RadialMap::Sinh { stretch } => stretch,
        }
    }

    pub fn from_stretch(stretch: f64) -> Self {
        if stretch == 0.0 {
            RadialMap::Linear
        } else {
            RadialMap::Sinh { stretch }
        }
    }
}

#[derive(Debug)]
pub struct RadialGrid {
    dim: Dimension,
    radius: f64,
    map: RadialMap,
    /// Computational coordinate of each node, increasing.
    t: Vec<f64>,
    nodes: Vec<f64>,
    /// Barycentric weights of the positive nodes and of their mirrors.
    bary: Vec<(f64, f64)>,
    deriv_even: DMatrix<f64>,
    deriv_odd: DMatrix<f64>,
    laplacian: DMatrix<f64>,
    quad_weights: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: Dimension, node_count: usize, radius: f64, map: RadialMap) -> Result<Arc<Self>> {
        if node_count < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "node count must be at least {MIN_NODES}, got {node_count}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if let RadialMap::Sinh { stretch } = map {
            if !(stretch > 0.0 && stretch.is_finite()) {
                return Err(Error::InvalidGrid(format!("invalid stretch {stretch}")));
            }
        }
        let n = node_count;
        let intervals = 2 * n - 1;
        // sin form keeps the nodes exactly antisymmetric
        let full: Vec<f64> = (0..=intervals)
            .map(|j| {
                let k = intervals as f64;
                (std::f64::consts::PI * (k - 2.0 * j as f64) / (2.0 * k)).sin()
            })
            .collect();
        let cheb = chebyshev_matrix(intervals);

        // full index of the positive node with increasing position i
        let full_index = |i: usize| n - 1 - i;
        let mirror = |j: usize| intervals - j;

        let t: Vec<f64> = (0..n).map(|i| full[full_index(i)]).collect();
        let bary_full = |j: usize| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == intervals {
                0.5 * s
            } else {
                s
            }
        };
        let bary: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let j = full_index(i);
                (bary_full(j), bary_full(mirror(j)))
            })
            .collect();

        let mut fold_even = DMatrix::zeros(n, n);
        let mut fold_odd = DMatrix::zeros(n, n);
        for i in 0..n {
            let fi = full_index(i);
            for k in 0..n {
                let fk = full_index(k);
                fold_even[(i, k)] = cheb[(fi, fk)] + cheb[(fi, mirror(fk))];
                fold_odd[(i, k)] = cheb[(fi, fk)] - cheb[(fi, mirror(fk))];
            }
            // constants have zero derivative exactly
            let off: f64 = (0..n).filter(|&k| k != i).map(|k| fold_even[(i, k)]).sum();
            fold_even[(i, i)] = -off;
        }

        let (nodes, r_t): (Vec<f64>, Vec<f64>) = t
            .iter()
            .map(|&ti| (map_r(map, radius, ti), map_r_t(map, radius, ti)))
            .unzip();
        let inv_rt = DMatrix::from_diagonal(&DVector::from_iterator(n, r_t.iter().map(|v| 1.0 / v)));
        let deriv_even = &inv_rt * fold_even;
        let deriv_odd = &inv_rt * fold_odd;

        let inv_r = DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            nodes.iter().map(|r| (dim.n() - 1) as f64 / r),
        ));
        let laplacian = &deriv_odd * &deriv_even + inv_r * &deriv_even;

        let mut grid = RadialGrid {
            dim,
            radius,
            map,
            t,
            nodes,
            bary,
            deriv_even,
            deriv_odd,
            laplacian,
            quad_weights: Vec::new(),
        };
        grid.quad_weights = grid.integration_row(1.0, |t| grid.volume_density(t), false);
        Ok(Arc::new(grid))
    }

    /// Plain Chebyshev nodes (`κ = 0`).
    pub fn linear(dim: Dimension, node_count: usize, radius: f64) -> Result<Arc<Self>> {
        Self::new(dim, node_count, radius, RadialMap::Linear)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn map(&self) -> RadialMap {
        self.map
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights of `∫₀^R f(r) r^{2m-1} dr`.
    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_weights
    }

    pub fn to_t(&self, r: f64) -> f64 {
        match self.map {
            RadialMap::Linear => r / self.radius,
            RadialMap::Sinh { stretch } => (r * stretch.sinh() / self.radius).asinh() / stretch,
        }
    }

    fn volume_density(&self, t: f64) -> f64 {
        map_r(self.map, self.radius, t).powi(self.dim.n() as i32 - 1) * map_r_t(self.map, self.radius, t)
    }

    /// `Δ` as a matrix acting on even nodal values.
    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    /// `∂_r` for even (`Parity::Even`) or odd inputs.
    pub fn radial_derivative(&self, parity: Parity) -> &DMatrix<f64> {
        match parity {
            Parity::Even => &self.deriv_even,
            Parity::Odd => &self.deriv_odd,
        }
    }

    /// `∂_r` of even nodal values in difference form `Σ_k D_ik (v_k - v_i)`,
    /// exact on constants and less sensitive to cancellation than the plain product.
    fn derivative_of_even(&self, v: &DVector<f64>) -> DVector<f64> {
        let d = &self.deriv_even;
        let n = v.len();
        DVector::from_iterator(
            n,
            (0..n).map(|i| {
                (0..n)
                    .filter(|&k| k != i)
                    .map(|k| d[(i, k)] * (v[k] - v[i]))
                    .sum::<f64>()
            }),
        )
    }

    /// Interpolation weights reproducing the value at radius `r` of an interpolant
    /// with the given parity.
    pub fn interpolation_row(&self, r: f64, parity: Parity) -> Vec<f64> {
        self.interpolation_row_t(self.to_t(r), parity)
    }

    fn interpolation_row_t(&self, t: f64, parity: Parity) -> Vec<f64> {
        let n = self.t.len();
        let mut row = vec![0.0; n];
        for (i, &ti) in self.t.iter().enumerate() {
            if t == ti {
                row[i] = 1.0;
                return row;
            }
            if t == -ti {
                row[i] = parity.sign();
                return row;
            }
        }
        let sign = parity.sign();
        let mut denom = 0.0;
        for (i, (&ti, &(wp, wm))) in self.t.iter().zip(&self.bary).enumerate() {
            let a = wp / (t - ti);
            let b = wm / (t + ti);
            denom += a + b;
            row[i] = a + sign * b;
        }
        row.iter_mut().for_each(|v| *v /= denom);
        row
    }

    /// Gauss points `(t, w·weight(t))` on `[0, t_max]`. `graded` refines geometrically
    /// towards `t = 0` for weights with a logarithmic singularity there.
    fn quadrature(&self, t_max: f64, weight: impl Fn(f64) -> f64, graded: bool) -> Vec<(f64, f64)> {
        self.quadrature_on(0.0, t_max, weight, graded)
    }

    fn quadrature_on(&self, t_min: f64, t_max: f64, weight: impl Fn(f64) -> f64, graded: bool) -> Vec<(f64, f64)> {
        let n = self.node_count();
        let degree = match self.map {
            RadialMap::Linear => n + self.dim.n() + 8,
            RadialMap::Sinh { .. } => 2 * n + 32,
        };
        let rule = GaussLegendre::new(NonZeroUsize::new(degree).unwrap());
        let mut panels = Vec::new();
        if graded {
            let mut hi = t_max;
            for _ in 0..48 {
                panels.push((0.5 * hi, hi));
                hi *= 0.5;
            }
            panels.push((0.0, hi));
        } else {
            panels.push((t_min, t_max));
        }
        let mut out = Vec::with_capacity(panels.len() * degree);
        for (a, b) in panels {
            let half = 0.5 * (b - a);
            for &(x, w) in rule.as_node_weight_pairs() {
                let t = a + half * (x + 1.0);
                let scale = w * half * weight(t);
                if scale != 0.0 {
                    out.push((t, scale));
                }
            }
        }
        out
    }

    /// Row `q` such that `q · f ≈ ∫₀^{t_max} p_f(t) w(t) dt`, where `p_f` is the even
    /// interpolant of the nodal values `f`.
    fn integration_row(&self, t_max: f64, weight: impl Fn(f64) -> f64, graded: bool) -> Vec<f64> {
        let mut acc = vec![0.0; self.node_count()];
        for (t, scale) in self.quadrature(t_max, weight, graded) {
            let row = self.interpolation_row_t(t, Parity::Even);
            acc.iter_mut().zip(&row).for_each(|(q, l)| *q += scale * l);
        }
        acc
    }

    /// `|S^{2m-1}| ∫₀^{r_max} K(r) F(p(r)) r^{2m-1} dr` with `p` the even interpolant of
    /// `values`. Composing after interpolation keeps steep profiles such as `e^{2mu}`
    /// as accurate as `u` itself.
    pub fn composed_ball_integral(
        &self,
        values: &[f64],
        r_max: f64,
        kernel: Option<&dyn Fn(f64) -> f64>,
        f: impl Fn(f64) -> f64,
    ) -> f64 {
        let t_max = self.to_t(r_max.min(self.radius));
        let points = match kernel {
            Some(k) => self.quadrature(t_max, |t| k(map_r(self.map, self.radius, t)) * self.volume_density(t), true),
            None => self.quadrature(t_max, |t| self.volume_density(t), false),
        };
        self.sum_composed(values, points, f)
    }

    /// Same over the shell `r_min ≤ r ≤ r_max`, without a kernel.
    pub fn composed_shell_integral(&self, values: &[f64], r_min: f64, r_max: f64, f: impl Fn(f64) -> f64) -> f64 {
        let t_min = self.to_t(r_min.max(0.0));
        let t_max = self.to_t(r_max.min(self.radius));
        let points = self.quadrature_on(t_min, t_max, |t| self.volume_density(t), false);
        self.sum_composed(values, points, f)
    }

    fn sum_composed(&self, values: &[f64], points: Vec<(f64, f64)>, f: impl Fn(f64) -> f64) -> f64 {
        let area = sphere_area(self.dim.n() - 1);
        let sum: f64 = points
            .into_iter()
            .map(|(t, w)| {
                let row = self.interpolation_row_t(t, Parity::Even);
                let p: f64 = row.iter().zip(values).map(|(a, b)| a * b).sum();
                w * f(p)
            })
            .sum();
        area * sum
    }

    /// Weights of `|S^{2m-1}| ∫₀^{r_max} f(r) r^{2m-1} dr` acting on even nodal values.
    pub fn ball_weights(&self, r_max: f64) -> Vec<f64> {
        let area = sphere_area(self.dim.n() - 1);
        let raw = if r_max >= self.radius {
            self.quad_weights.clone()
        } else {
            self.integration_row(self.to_t(r_max), |t| self.volume_density(t), false)
        };
        raw.into_iter().map(|w| w * area).collect()
    }

    /// Weights of `|S^{2m-1}| ∫₀^{r_max} K(r) f(r) r^{2m-1} dr` for a kernel with at
    /// most a logarithmic singularity at the origin.
    pub fn weighted_ball_weights(&self, r_max: f64, kernel: impl Fn(f64) -> f64) -> Vec<f64> {
        let area = sphere_area(self.dim.n() - 1);
        let t_max = self.to_t(r_max.min(self.radius));
        self.integration_row(
            t_max,
            |t| kernel(map_r(self.map, self.radius, t)) * self.volume_density(t),
            true,
        )
        .into_iter()
        .map(|w| w * area)
        .collect()
    }
}

fn map_r(map: RadialMap, radius: f64, t: f64) -> f64 {
    match map {
        RadialMap::Linear => radius * t,
        RadialMap::Sinh { stretch } => radius * (stretch * t).sinh() / stretch.sinh(),
    }
}

fn map_r_t(map: RadialMap, radius: f64, t: f64) -> f64 {
    match map {
        RadialMap::Linear => radius,
        RadialMap::Sinh { stretch } => radius * stretch * (stretch * t).cosh() / stretch.sinh(),
    }
}

/// Chebyshev differentiation matrix on `cos(jπ/K)`, `j = 0..=K`. Node differences
/// use the sine identity and the diagonal the negative-sum trick, which keeps
/// the roundoff of repeated application near the endpoints small.
fn chebyshev_matrix(k: usize) -> DMatrix<f64> {
    let c = |j: usize| {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == k {
            2.0 * s
        } else {
            s
        }
    };
    let h = std::f64::consts::PI / (2 * k) as f64;
    let mut d = DMatrix::zeros(k + 1, k + 1);
    for i in 0..=k {
        let mut row_sum = 0.0;
        for j in 0..=k {
            if i != j {
                let diff = 2.0 * (((i + j) as f64) * h).sin() * (((j as f64) - (i as f64)) * h).sin();
                let v = c(i) / c(j) / diff;
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Nodal values of a radial quantity on a [`RadialGrid`].
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: DVector<f64>,
    parity: Parity,
}

impl RadialField {
    pub fn new(grid: &Arc<RadialGrid>, values: Vec<f64>, parity: Parity) -> Self {
        assert_eq!(values.len(), grid.node_count(), "value count must match node count");
        Self {
            grid: Arc::clone(grid),
            values: DVector::from_vec(values),
            parity,
        }
    }

    pub fn from_vector(grid: &Arc<RadialGrid>, values: DVector<f64>, parity: Parity) -> Self {
        assert_eq!(values.len(), grid.node_count(), "value count must match node count");
        Self {
            grid: Arc::clone(grid),
            values,
            parity,
        }
    }

    /// Samples an even radial function at the nodes.
    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values, Parity::Even)
    }

    pub fn constant(grid: &Arc<RadialGrid>, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn dim(&self) -> Dimension {
        self.grid.dim
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Barycentric evaluation of the interpolant at `0 ≤ r ≤ R`.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(
            (0.0..=self.grid.radius * (1.0 + 1e-12)).contains(&r),
            "evaluation radius {r} outside [0, R]"
        );
        let row = self.grid.interpolation_row(r.min(self.grid.radius), self.parity);
        row.iter().zip(self.values.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn value_at_origin(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.map(f),
            parity: self.parity,
        }
    }

    fn with(&self, values: DVector<f64>, parity: Parity) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values,
            parity,
        }
    }

    fn require_even(&self, op: &str) {
        assert_eq!(self.parity, Parity::Even, "{op} needs an even radial field");
    }

    /// `f'' + (2m-1)/r f'`.
    pub fn laplacian(&self) -> Self {
        self.laplacian_power(1)
    }

    /// `Δ^k f`, applied one factor at a time.
    pub fn laplacian_power(&self, k: usize) -> Self {
        self.require_even("laplacian");
        let n1 = (self.grid.dim.n() - 1) as f64;
        let mut v = self.values.clone();
        for _ in 0..k {
            let d = self.grid.derivative_of_even(&v);
            let dd = self.grid.radial_derivative(Parity::Odd) * &d;
            v = DVector::from_iterator(
                v.len(),
                dd.iter().zip(d.iter()).zip(&self.grid.nodes).map(|((a, b), r)| a + n1 * b / r),
            );
        }
        self.with(v, Parity::Even)
    }

    /// `(-Δ)^m f`.
    pub fn polyharmonic(&self) -> Self {
        let m = self.grid.dim.m();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = self.laplacian_power(m);
        out.values *= sign;
        out
    }

    /// `∂_r f`; flips the parity.
    pub fn radial_derivative(&self) -> Self {
        let v = match self.parity {
            Parity::Even => self.grid.derivative_of_even(&self.values),
            Parity::Odd => self.grid.radial_derivative(Parity::Odd) * &self.values,
        };
        self.with(v, self.parity.flip())
    }

    /// `Δ^{j/2} f`: `Δ^{j/2} f` for even `j`, the radial component of
    /// `∇Δ^{(j-1)/2} f` for odd `j`.
    pub fn half_power(&self, j: usize) -> Self {
        assert!(j < 2 * self.grid.dim.m(), "half power order must be below 2m");
        let even = self.laplacian_power(j / 2);
        if j % 2 == 0 {
            even
        } else {
            even.radial_derivative()
        }
    }

    /// Multiplication by `r`; flips the parity.
    pub fn times_r(&self) -> Self {
        let vals = self.values.iter().zip(self.grid.nodes()).map(|(v, r)| v * r);
        self.with(DVector::from_iterator(self.values.len(), vals), self.parity.flip())
    }

    /// `x·∇f = r f'(r)` for an even field.
    pub fn radial_dilation(&self) -> Self {
        self.require_even("radial_dilation");
        self.radial_derivative().times_r()
    }

    /// `|S^{2m-1}| ∫₀^{r_max} f(r) r^{2m-1} dr`.
    pub fn ball_integral(&self, r_max: f64) -> f64 {
        self.require_even("ball_integral");
        assert!(r_max > 0.0, "ball radius must be positive");
        let w = self.grid.ball_weights(r_max);
        w.iter().zip(self.values.iter()).map(|(a, b)| a * b).sum()
    }

    /// `|S^{2m-1}| ∫₀^{r_max} F(f(r)) r^{2m-1} dr`, composing after interpolation.
    pub fn composed_ball_integral(&self, r_max: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.require_even("composed_ball_integral");
        assert!(r_max > 0.0, "ball radius must be positive");
        self.grid.composed_ball_integral(self.values.as_slice(), r_max, None, f)
    }

    /// `|S^{2m-1}| ∫_{r_min}^{r_max} F(f(r)) r^{2m-1} dr`.
    pub fn composed_shell_integral(&self, r_min: f64, r_max: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.require_even("composed_shell_integral");
        self.grid.composed_shell_integral(self.values.as_slice(), r_min, r_max, f)
    }

    /// `|S^{2m-1}| r^{2m-1} f(r)`.
    pub fn sphere_integral(&self, r: f64) -> f64 {
        let n = self.grid.dim.n();
        sphere_area(n - 1) * r.powi(n as i32 - 1) * self.eval(r)
    }
}

/// The Laplacian powers `Δ^k u`, `k = 0..m-1`, of one radial function.
///
/// Solutions coming out of the solver carry these levels as independent unknowns,
/// which avoids differentiating `u` itself more than twice. Higher half powers
/// are assembled from the levels with at most two further radial derivatives.
#[derive(Debug, Clone)]
pub struct LaplacianStack {
    levels: Vec<RadialField>,
}

impl LaplacianStack {
    /// Levels `Δ^k u` for `k < m`, in that order.
    pub fn new(levels: Vec<RadialField>) -> Self {
        assert!(!levels.is_empty(), "a stack needs at least the base field");
        let m = levels[0].dim().m();
        assert_eq!(levels.len(), m, "a stack holds exactly m levels");
        assert!(levels.iter().all(|l| l.parity == Parity::Even));
        Self { levels }
    }

    /// Builds the levels by applying the collocation Laplacian to `u`.
    pub fn from_field(u: &RadialField) -> Self {
        let m = u.dim().m();
        Self::new((0..m).map(|k| u.laplacian_power(k)).collect())
    }

    pub fn base(&self) -> &RadialField {
        &self.levels[0]
    }

    /// `Δ^k u` for `k < m`.
    pub fn level(&self, k: usize) -> &RadialField {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[RadialField] {
        &self.levels
    }

    /// `Δ^{j/2} u` for `j < 2m` (radial component for odd `j`).
    pub fn half_power(&self, j: usize) -> RadialField {
        let level = &self.levels[j / 2];
        if j % 2 == 0 {
            level.clone()
        } else {
            level.radial_derivative()
        }
    }

    /// `Δ^{j/2}(x·∇u)` for `j < 2m - 1`, through `Δ^k(x·∇u) = 2kΔ^k u + r∂_rΔ^k u`.
    pub fn half_power_of_dilation(&self, j: usize) -> RadialField {
        let k = j / 2;
        let level = &self.levels[k];
        let d1 = level.radial_derivative();
        let two_k = 2.0 * k as f64;
        if j % 2 == 0 {
            &(two_k * level) + &d1.times_r()
        } else {
            let d2 = d1.radial_derivative();
            &((two_k + 1.0) * &d1) + &d2.times_r()
        }
    }
}

impl Add for &RadialField {
    type Output = RadialField;
    fn add(self, rhs: &RadialField) -> RadialField {
        assert!(Arc::ptr_eq(&self.grid, &rhs.grid) && self.parity == rhs.parity);
        self.with(&self.values + &rhs.values, self.parity)
    }
}

impl Sub for &RadialField {
    type Output = RadialField;
    fn sub(self, rhs: &RadialField) -> RadialField {
        assert!(Arc::ptr_eq(&self.grid, &rhs.grid) && self.parity == rhs.parity);
        self.with(&self.values - &rhs.values, self.parity)
    }
}

impl Mul<&RadialField> for f64 {
    type Output = RadialField;
    fn mul(self, rhs: &RadialField) -> RadialField {
        rhs.with(&rhs.values * self, rhs.parity)
    }
}
