//! Radial solutions of `(-Δ)^m u = λ e^{2mu}` on `B_R` with Dirichlet data, and
//! pseudo-arclength continuation of the solution branch towards blow-up.
//!
//! The unknowns are the levels `v_k = (-Δ)^k u`, `k < m`, coupled through
//! `-Δv_k = v_{k+1}` and `-Δv_{m-1} = λ e^{2m v_0}`. In each block the collocation
//! row at `r = R` is replaced by one boundary condition `∂_r^k u(R) = 0`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constants::{constants_for, sphere_area, Dimension};
use crate::error::{Error, Result};
use crate::radial::{LaplacianStack, Parity, RadialField, RadialGrid, RadialMap};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 25;
const STEP_TOLERANCE: f64 = 1e-9;

/// Ball, order and discretization of one Dirichlet problem.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub dim: Dimension,
    pub radius: f64,
    pub grid: Arc<RadialGrid>,
    neg_lap: DMatrix<f64>,
    abs_lap: DMatrix<f64>,
    bc_rows: Vec<DVector<f64>>,
    center_row: DVector<f64>,
}

impl ProblemSpec {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        let dim = grid.dim();
        let n = grid.node_count();
        let neg_lap = -grid.laplacian();
        let abs_lap = neg_lap.abs();
        let mut bc_rows = Vec::with_capacity(dim.m());
        let mut row = DVector::zeros(n);
        row[n - 1] = 1.0;
        let mut parity = Parity::Even;
        for k in 0..dim.m() {
            if k > 0 {
                row = grid.radial_derivative(parity).tr_mul(&row);
                parity = match parity {
                    Parity::Even => Parity::Odd,
                    Parity::Odd => Parity::Even,
                };
            }
            bc_rows.push(row.clone());
        }
        let center_row = DVector::from_vec(grid.interpolation_row(0.0, Parity::Even));
        Self { dim, radius: grid.radius(), grid, neg_lap, abs_lap, bc_rows, center_row }
    }

    /// Grid clustered at the origin on the length scale `cluster_scale`
    /// (no clustering when `None`).
    pub fn build(
        dim: Dimension,
        node_count: usize,
        radius: f64,
        cluster_scale: Option<f64>,
    ) -> Result<Self> {
        let map = match cluster_scale {
            Some(s) if s > 0.0 => RadialMap::resolving(radius, s),
            Some(s) => return Err(Error::InvalidGrid(format!("cluster scale must be positive, got {s}"))),
            None => RadialMap::Linear,
        };
        Ok(Self::new(RadialGrid::new(dim, node_count, radius, map)?))
    }

    /// Cluster scale for a branch ending at `u(0) = u_max`. The bubble width is
    /// `e^{-u(0)/2}` for `m = 1` and shrinks relative to it as `m` grows.
    pub fn default_cluster_scale(dim: Dimension, radius: f64, u_max: f64) -> f64 {
        radius * (-0.5 * u_max).exp() / dim.m() as f64
    }

    /// `Λ₁/|B_R|`, the eigenvalue scale used to balance the continuation plane.
    pub fn lambda_scale(&self) -> f64 {
        let n = self.dim.n();
        let volume = sphere_area(n - 1) * self.radius.powi(n as i32) / n as f64;
        constants_for(self.dim).lambda1 / volume
    }

    fn nodes(&self) -> usize {
        self.grid.node_count()
    }

    fn size(&self) -> usize {
        self.dim.m() * self.nodes()
    }

    /// Interpolated `u(0)` from nodal values of `u`.
    pub fn center_value(&self, v0: &[f64]) -> f64 {
        self.center_row.iter().zip(v0).map(|(a, b)| a * b).sum()
    }
}

/// Residual of a single field: `(-Δ)^m u - λe^{2mu}` at every node but `R`,
/// and `∂_r^k u(R)` for `k < m`.
#[derive(Debug, Clone)]
pub struct FieldResidual {
    pub interior: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl FieldResidual {
    pub fn max_abs(&self) -> f64 {
        self.interior.iter().chain(&self.boundary).fold(0.0, |a, v| a.max(v.abs()))
    }
}

pub fn residual(u: &RadialField, lambda: f64, spec: &ProblemSpec) -> FieldResidual {
    let two_m = spec.dim.n() as f64;
    let lhs = u.polyharmonic();
    let n = spec.nodes();
    let interior = (0..n - 1)
        .map(|i| lhs.values()[i] - lambda * (two_m * u.values()[i]).exp())
        .collect();
    let boundary = spec.bc_rows.iter().map(|row| row.dot(u.vector())).collect();
    FieldResidual { interior, boundary }
}

/// One converged point `(u, λ)` of the branch.
#[derive(Debug, Clone)]
pub struct SolutionState {
    /// `Δ^k u` for `k < m`.
    pub stack: LaplacianStack,
    pub lambda: f64,
    /// `Σ = λ∫e^{2mu}`.
    pub sigma: f64,
    pub rho: f64,
    pub alpha: f64,
    pub u_max: f64,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl SolutionState {
    pub fn u(&self) -> &RadialField {
        self.stack.base()
    }

    fn from_levels(spec: &ProblemSpec, v: &DVector<f64>, lambda: f64, norm: f64, iterations: usize) -> Self {
        let n = spec.nodes();
        let levels = (0..spec.dim.m())
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let vals = v.rows(k * n, n).map(|x| sign * x);
                RadialField::from_vector(&spec.grid, vals, Parity::Even)
            })
            .collect();
        let stack = LaplacianStack::new(levels);
        let two_m = spec.dim.n() as f64;
        let mass = stack.base().composed_ball_integral(spec.radius, |x| (two_m * x).exp());
        let sigma = lambda * mass;
        let u_max = spec.center_value(stack.base().values());
        Self {
            stack,
            lambda,
            sigma,
            rho: sigma,
            alpha: alpha_for(spec.dim, mass, sigma),
            u_max,
            residual_norm: norm,
            iterations,
        }
    }

    /// Rebuilds a state from stored levels, recomputing the derived quantities.
    pub fn from_stack(spec: &ProblemSpec, stack: LaplacianStack, lambda: f64, residual_norm: f64) -> Self {
        let v = stacked_unknowns(spec, &stack);
        Self::from_levels(spec, &v, lambda, residual_norm, 0)
    }

    fn unknowns(&self, spec: &ProblemSpec) -> DVector<f64> {
        stacked_unknowns(spec, &self.stack)
    }
}

/// `α = (1/2m) log((2m-1)! ∫e^{2mu} / ρ)`.
pub fn alpha_for(dim: Dimension, mass: f64, rho: f64) -> f64 {
    (dim.liouville_factor() * mass / rho).ln() / dim.n() as f64
}

fn stacked_unknowns(spec: &ProblemSpec, stack: &LaplacianStack) -> DVector<f64> {
    let n = spec.nodes();
    let mut v = DVector::zeros(spec.size());
    for (k, level) in stack.levels().iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        v.rows_mut(k * n, n).copy_from(&(level.vector() * sign));
    }
    v
}

/// `û = u - α` with `α` from [`SolutionState`].
pub fn normalize(s: &SolutionState) -> (RadialField, f64) {
    (s.u().map_values(|x| x - s.alpha), s.alpha)
}

/// Linear side condition closing the system in `(v, λ)`:
/// `a·u(0) + b·λ/λ_scale = c`.
#[derive(Debug, Clone, Copy)]
enum Constraint {
    Lambda(f64),
    Center(f64),
    Plane { a: f64, b: f64, c: f64 },
}

struct Evaluation {
    f: DVector<f64>,
    scaled_norm: f64,
}

fn evaluate(spec: &ProblemSpec, v: &DVector<f64>, lambda: f64) -> Evaluation {
    let n = spec.nodes();
    let m = spec.dim.m();
    let two_m = spec.dim.n() as f64;
    let v0 = v.rows(0, n);
    let source: DVector<f64> = v0.map(|x| lambda * (two_m * x).exp());
    let mut f = DVector::zeros(spec.size());
    let mut scaled: f64 = 0.0;
    for k in 0..m {
        let vk = v.rows(k * n, n).into_owned();
        let field = RadialField::from_vector(&spec.grid, vk.clone(), Parity::Even);
        let lap = field.laplacian();
        let abs_vk = vk.abs();
        let scale = &spec.abs_lap * &abs_vk;
        for i in 0..n - 1 {
            let coupling = if k + 1 < m { v[(k + 1) * n + i] } else { source[i] };
            let fi = -lap.values()[i] - coupling;
            f[k * n + i] = fi;
            scaled = scaled.max(fi.abs() / (scale[i] + coupling.abs()).max(1.0));
        }
        let row = &spec.bc_rows[k];
        let fi = row.dot(&v0);
        f[k * n + n - 1] = fi;
        let s: f64 = row.iter().zip(v0.iter()).map(|(a, b)| (a * b).abs()).sum();
        scaled = scaled.max(fi.abs() / s.max(1.0));
    }
    Evaluation { f, scaled_norm: scaled }
}

/// Jacobian in `v` and the `λ` column.
fn jacobian(spec: &ProblemSpec, v: &DVector<f64>, lambda: f64) -> (DMatrix<f64>, DVector<f64>) {
    let n = spec.nodes();
    let m = spec.dim.m();
    let two_m = spec.dim.n() as f64;
    let size = spec.size();
    let mut j = DMatrix::zeros(size, size);
    let mut dl = DVector::zeros(size);
    for k in 0..m {
        let r0 = k * n;
        j.view_mut((r0, r0), (n - 1, n)).copy_from(&spec.neg_lap.rows(0, n - 1));
        if k + 1 < m {
            for i in 0..n - 1 {
                j[(r0 + i, r0 + n + i)] = -1.0;
            }
        } else {
            for i in 0..n - 1 {
                let e = (two_m * v[i]).exp();
                j[(r0 + i, i)] -= two_m * lambda * e;
                dl[r0 + i] = -e;
            }
        }
        for c in 0..n {
            j[(r0 + n - 1, c)] = spec.bc_rows[k][c];
        }
    }
    (j, dl)
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOLERANCE, max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

fn solve_constrained(
    spec: &ProblemSpec,
    mut v: DVector<f64>,
    mut lambda: f64,
    constraint: Constraint,
    opts: NewtonOptions,
) -> Result<SolutionState> {
    let size = spec.size();
    let lambda_scale = spec.lambda_scale();
    if let Constraint::Lambda(l) = constraint {
        lambda = l;
    }
    let mut iterations = 0;
    // Relative size of the last Newton update; the residual test alone is blind to
    // errors hidden under the large row scales of the collocation operator.
    let mut last_step = f64::INFINITY;
    loop {
        let ev = evaluate(spec, &v, lambda);
        let c_val = match constraint {
            Constraint::Lambda(_) => 0.0,
            Constraint::Center(c) => spec.center_value(v.rows(0, spec.nodes()).as_slice()) - c,
            Constraint::Plane { a, b, c } => {
                a * spec.center_value(v.rows(0, spec.nodes()).as_slice()) + b * lambda / lambda_scale - c
            }
        };
        let finite = ev.scaled_norm.is_finite() && lambda.is_finite() && v.iter().all(|x| x.is_finite());
        if finite
            && ev.scaled_norm <= opts.tol
            && last_step <= STEP_TOLERANCE
            && c_val.abs() <= 1e-12 * (1.0 + lambda.abs())
        {
            return Ok(SolutionState::from_levels(spec, &v, lambda, ev.scaled_norm, iterations));
        }
        if !finite || iterations >= opts.max_iterations {
            let mut last: Vec<f64> = v.iter().copied().collect();
            last.push(lambda);
            return Err(Error::NewtonFailure { iterations, residual: ev.scaled_norm, last_iterate: last });
        }
        iterations += 1;
        let (j, dl) = jacobian(spec, &v, lambda);
        let (delta, dlambda) = match constraint {
            Constraint::Lambda(_) => {
                let d = j.lu().solve(&(-&ev.f)).ok_or(Error::Singular("newton jacobian"))?;
                (d, 0.0)
            }
            Constraint::Center(_) | Constraint::Plane { .. } => {
                let (a, b) = match constraint {
                    Constraint::Center(_) => (1.0, 0.0),
                    Constraint::Plane { a, b, .. } => (a, b),
                    Constraint::Lambda(_) => unreachable!(),
                };
                let mut big = DMatrix::zeros(size + 1, size + 1);
                big.view_mut((0, 0), (size, size)).copy_from(&j);
                big.view_mut((0, size), (size, 1)).copy_from(&dl);
                for c in 0..spec.nodes() {
                    big[(size, c)] = a * spec.center_row[c];
                }
                big[(size, size)] = b / lambda_scale;
                let mut rhs = DVector::zeros(size + 1);
                rhs.rows_mut(0, size).copy_from(&(-&ev.f));
                rhs[size] = -c_val;
                let d = big.lu().solve(&rhs).ok_or(Error::Singular("bordered jacobian"))?;
                (d.rows(0, size).into_owned(), d[size])
            }
        };
        let v_scale = 1.0 + v.amax();
        last_step = (delta.amax() / v_scale).max(dlambda.abs() / (1.0 + lambda.abs()));
        v += delta;
        lambda += dlambda;
    }
}

/// Newton's method at fixed `λ` from the guess `u` (levels are rebuilt from `u`).
pub fn newton_solve(guess: &RadialField, lambda: f64, spec: &ProblemSpec, opts: NewtonOptions) -> Result<SolutionState> {
    let stack = LaplacianStack::from_field(guess);
    newton_solve_stack(&stack, lambda, spec, opts)
}

/// Newton's method at fixed `λ` from a full set of levels.
pub fn newton_solve_stack(
    guess: &LaplacianStack,
    lambda: f64,
    spec: &ProblemSpec,
    opts: NewtonOptions,
) -> Result<SolutionState> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("eigenvalue must be non-negative, got {lambda}")));
    }
    solve_constrained(spec, stacked_unknowns(spec, guess), lambda, Constraint::Lambda(lambda), opts)
}

/// Solves with `u(0)` prescribed and `λ` free.
pub fn solve_at_center(
    guess: &SolutionState,
    center: f64,
    spec: &ProblemSpec,
    opts: NewtonOptions,
) -> Result<SolutionState> {
    solve_constrained(spec, guess.unknowns(spec), guess.lambda, Constraint::Center(center), opts)
}

/// Jacobian-vector product and residual of the mixed system, for consistency checks.
pub fn mixed_residual(spec: &ProblemSpec, stack: &LaplacianStack, lambda: f64) -> (Vec<f64>, f64) {
    let ev = evaluate(spec, &stacked_unknowns(spec, stack), lambda);
    (ev.f.iter().copied().collect(), ev.scaled_norm)
}

/// `J·(δv, δλ)` at the given levels.
pub fn mixed_linearization(
    spec: &ProblemSpec,
    stack: &LaplacianStack,
    lambda: f64,
    direction: &LaplacianStack,
    dlambda: f64,
) -> Vec<f64> {
    let (j, dl) = jacobian(spec, &stacked_unknowns(spec, stack), lambda);
    let out = j * stacked_unknowns(spec, direction) + dl * dlambda;
    out.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxUReached,
    StepLimit,
    NewtonFailure,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::MaxUReached => "max_u_reached",
            Termination::StepLimit => "step_limit",
            Termination::NewtonFailure => "newton_failure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "max_u_reached" => Some(Termination::MaxUReached),
            "step_limit" => Some(Termination::StepLimit),
            "newton_failure" => Some(Termination::NewtonFailure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub states: Vec<SolutionState>,
    /// Cumulative distance in the `(u(0), λ/λ_scale)` plane, starting from the
    /// trivial solution.
    pub arclength: Vec<f64>,
    pub termination: Termination,
    pub fold_index: Option<usize>,
}

impl Branch {
    pub fn fold(&self) -> Option<&SolutionState> {
        self.fold_index.map(|i| &self.states[i])
    }

    pub fn last(&self) -> Option<&SolutionState> {
        self.states.last()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationLimits {
    pub max_steps: usize,
    pub min_step: f64,
    pub newton: NewtonOptions,
}

impl Default for ContinuationLimits {
    fn default() -> Self {
        Self { max_steps: 2000, min_step: 1e-8, newton: NewtonOptions::default() }
    }
}

fn plane_point(spec: &ProblemSpec, s: &SolutionState) -> [f64; 2] {
    [s.u_max, s.lambda / spec.lambda_scale()]
}

fn plane_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Pseudo-arclength continuation from `(u ≡ 0, λ = 0)` until `u(0)` reaches
/// `u_max_target`. Arclength steps never exceed `step`.
pub fn trace_branch(spec: &ProblemSpec, u_max_target: f64, step: f64, limits: ContinuationLimits) -> Result<Branch> {
    if !(step > 0.0 && u_max_target > 0.0) {
        return Err(Error::InvalidInput("step and target must be positive".into()));
    }
    let mut ds = step;
    let first = loop {
        let lam = 0.5 * ds * spec.lambda_scale();
        let zero = RadialField::constant(&spec.grid, 0.0);
        match newton_solve(&zero, lam, spec, limits.newton) {
            Ok(s) => break s,
            Err(_) if ds > limits.min_step => ds *= 0.5,
            Err(e) => return Err(e),
        }
    };
    continue_branch(spec, vec![first], None, ds, u_max_target, step, limits)
}

/// Continues a stored branch from its last two states; an empty branch starts
/// from scratch. The step counter restarts, the fold is kept.
pub fn resume_branch(
    spec: &ProblemSpec,
    partial: Branch,
    u_max_target: f64,
    step: f64,
    limits: ContinuationLimits,
) -> Result<Branch> {
    if !(step > 0.0 && u_max_target > 0.0) {
        return Err(Error::InvalidInput("step and target must be positive".into()));
    }
    if partial.states.is_empty() {
        return trace_branch(spec, u_max_target, step, limits);
    }
    if partial.states.iter().any(|s| s.u().grid().node_count() != spec.grid.node_count()) {
        return Err(Error::Inconsistent("stored states do not match the grid".into()));
    }
    continue_branch(spec, partial.states, partial.fold_index, step, u_max_target, step, limits)
}

fn continue_branch(
    spec: &ProblemSpec,
    mut states: Vec<SolutionState>,
    mut fold_index: Option<usize>,
    mut ds: f64,
    u_max_target: f64,
    step: f64,
    limits: ContinuationLimits,
) -> Result<Branch> {
    let opts = limits.newton;
    let lambda_scale = spec.lambda_scale();
    let trivial_p = [0.0, 0.0];
    let (mut prev_v, mut prev_p) = match states.len() {
        1 => (DVector::zeros(spec.size()), trivial_p),
        k => (states[k - 2].unknowns(spec), plane_point(spec, &states[k - 2])),
    };
    let mut steps = 1;
    let termination = loop {
        let cur = states.last().unwrap();
        if cur.u_max >= u_max_target {
            break Termination::MaxUReached;
        }
        if steps >= limits.max_steps {
            break Termination::StepLimit;
        }
        if ds < limits.min_step {
            break Termination::NewtonFailure;
        }
        steps += 1;
        let cur_p = plane_point(spec, cur);
        let cur_v = cur.unknowns(spec);
        let secant = plane_dist(cur_p, prev_p);
        let tau = [(cur_p[0] - prev_p[0]) / secant, (cur_p[1] - prev_p[1]) / secant];
        let pred_p = [cur_p[0] + ds * tau[0], cur_p[1] + ds * tau[1]];
        let pred_v = &cur_v + (&cur_v - &prev_v) * (ds / secant);
        let pred_lambda = pred_p[1] * lambda_scale;

        let reaches_target = pred_p[0] >= u_max_target;
        let attempt = if reaches_target {
            let f = (u_max_target - cur_p[0]) / (pred_p[0] - cur_p[0]);
            let v = &cur_v + (&pred_v - &cur_v) * f;
            let lam = cur.lambda + f * (pred_lambda - cur.lambda);
            solve_constrained(spec, v, lam, Constraint::Center(u_max_target), opts)
        } else {
            let c = tau[0] * pred_p[0] + tau[1] * pred_p[1];
            solve_constrained(spec, pred_v, pred_lambda, Constraint::Plane { a: tau[0], b: tau[1], c }, opts)
        };
        let next = match attempt {
            Ok(s) if s.lambda > 0.0 => s,
            _ => {
                ds *= 0.5;
                continue;
            }
        };
        if next.iterations <= 3 {
            ds = (ds * 1.3).min(step);
        }

        let before_lambda = if states.len() >= 2 { states[states.len() - 2].lambda } else { 0.0 };
        let rising = cur.lambda > before_lambda;
        if fold_index.is_none() && rising && next.lambda < cur.lambda {
            let lo = if states.len() >= 2 { &states[states.len() - 2] } else { cur };
            let fold = locate_fold(spec, lo, &next, opts)?;
            let at = if fold.u_max < cur.u_max { states.len() - 1 } else { states.len() };
            states.insert(at, fold);
            fold_index = Some(at);
        }
        prev_v = cur_v;
        prev_p = cur_p;
        states.push(next);
        if reaches_target {
            break Termination::MaxUReached;
        }
    };

    let mut arclength = Vec::with_capacity(states.len());
    let mut acc = 0.0;
    let mut last = trivial_p;
    for s in &states {
        let p = plane_point(spec, s);
        acc += plane_dist(p, last);
        arclength.push(acc);
        last = p;
    }
    Ok(Branch { states, arclength, termination, fold_index })
}

/// Golden-section maximization of `λ(u(0))` between two bracketing states.
fn locate_fold(spec: &ProblemSpec, lo: &SolutionState, hi: &SolutionState, opts: NewtonOptions) -> Result<SolutionState> {
    let (va, vb) = (lo.unknowns(spec), hi.unknowns(spec));
    let (ca, cb) = (lo.u_max, hi.u_max);
    let guess_at = |c: f64| {
        let f = (c - ca) / (cb - ca);
        (&va + (&vb - &va) * f, lo.lambda + f * (hi.lambda - lo.lambda))
    };
    let solve = |c: f64| {
        let (v, l) = guess_at(c);
        solve_constrained(spec, v, l, Constraint::Center(c), opts)
    };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (ca.min(cb), ca.max(cb));
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut s1 = solve(x1)?;
    let mut s2 = solve(x2)?;
    for _ in 0..80 {
        if b - a <= 1e-9 * (1.0 + a.abs()) {
            break;
        }
        if s1.lambda >= s2.lambda {
            b = x2;
            x2 = x1;
            s2 = s1;
            x1 = b - ratio * (b - a);
            s1 = solve(x1)?;
        } else {
            a = x1;
            x1 = x2;
            s1 = s2;
            x2 = a + ratio * (b - a);
            s2 = solve(x2)?;
        }
    }
    Ok(if s1.lambda >= s2.lambda { s1 } else { s2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(m: usize) -> Dimension {
        Dimension::new(m).unwrap()
    }

    fn exact_u(b: f64, r: f64) -> f64 {
        ((1.0 + b) / (1.0 + b * r * r)).ln()
    }

    #[test]
    fn residual_examples() {
        let spec = ProblemSpec::build(dim(1), 32, 1.0, None).unwrap();
        let u = RadialField::from_fn(&spec.grid, |r| exact_u(1.0, r));
        assert!(residual(&u, 1.0, &spec).max_abs() < 1e-10);
        let zero = RadialField::constant(&spec.grid, 0.0);
        assert_eq!(residual(&zero, 0.0, &spec).max_abs(), 0.0);
        let r = residual(&zero, 1.0, &spec);
        assert!(r.interior.iter().all(|&v| v == -1.0));
        assert!(r.boundary.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lower_branch_solution() {
        let spec = ProblemSpec::build(dim(1), 32, 1.0, None).unwrap();
        let zero = RadialField::constant(&spec.grid, 0.0);
        let s = newton_solve(&zero, 0.5, &spec, NewtonOptions::default()).unwrap();
        // 4b/(1+b)² = 0.5 → b² - 6b + 1 = 0
        let b_minus = 3.0 - 8f64.sqrt();
        assert!((s.u_max - (1.0 + b_minus).ln()).abs() < 1e-10);
        assert_eq!(s.rho, s.sigma);
        assert!(s.residual_norm <= DEFAULT_TOLERANCE);
    }

    #[test]
    fn no_solution_beyond_fold() {
        let spec = ProblemSpec::build(dim(1), 32, 1.0, None).unwrap();
        let zero = RadialField::constant(&spec.grid, 0.0);
        let err = newton_solve(&zero, 1.2, &spec, NewtonOptions::default()).unwrap_err();
        match err {
            Error::NewtonFailure { last_iterate, .. } => assert_eq!(last_iterate.len(), 33),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn exact_guess_converges_immediately() {
        let spec = ProblemSpec::build(dim(1), 32, 1.0, None).unwrap();
        let b: f64 = 2.0;
        let lambda = 4.0 * b / (1.0 + b).powi(2);
        let u = RadialField::from_fn(&spec.grid, |r| exact_u(b, r));
        let s = newton_solve(&u, lambda, &spec, NewtonOptions::default()).unwrap();
        assert!(s.iterations <= 2);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for m in 1..=3 {
            let spec = ProblemSpec::build(dim(m), 16, 1.0, None).unwrap();
            let u = RadialField::from_fn(&spec.grid, |r| 0.3 * (1.0 - r * r).powi(m as i32) + 0.1 * r.powi(4));
            let stack = LaplacianStack::from_field(&u);
            let dir = LaplacianStack::from_field(&RadialField::from_fn(&spec.grid, |r| (2.0 * r).cos()));
            let lambda = 0.7 * spec.lambda_scale() / 10.0;
            let dl = 0.3 * lambda;
            let lin = mixed_linearization(&spec, &stack, lambda, &dir, dl);
            let h = 1e-6;
            let shift = |s: f64| {
                let levels = stack
                    .levels()
                    .iter()
                    .zip(dir.levels())
                    .map(|(a, d)| a + &(s * d))
                    .collect();
                mixed_residual(&spec, &LaplacianStack::new(levels), lambda + s * dl).0
            };
            let (fp, fm) = (shift(h), shift(-h));
            let scale = lin.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let err = fp
                .iter()
                .zip(&fm)
                .zip(&lin)
                .map(|((p, q), l)| ((p - q) / (2.0 * h) - l).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-5 * scale, "m={m}: {err} vs {scale}");
        }
    }

    #[test]
    fn normalization() {
        let spec = ProblemSpec::build(dim(1), 48, 1.0, None).unwrap();
        let b = 2.0;
        let u = RadialField::from_fn(&spec.grid, |r| exact_u(b, r));
        let s = newton_solve(&u, 8.0 / 9.0, &spec, NewtonOptions::default()).unwrap();
        // Σ = 4πb/(1+b)
        assert!((s.sigma - 8.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
        let (u_hat, alpha) = normalize(&s);
        let mass = u_hat.map_values(|x| (2.0 * x).exp()).ball_integral(1.0);
        assert!((mass - s.rho).abs() < 1e-10);
        let hat_spec = ProblemSpec::new(spec.grid.clone());
        assert!(residual(&u_hat, 1.0, &hat_spec).interior.iter().all(|v| v.abs() < 1e-8));
        assert!((alpha - alpha_for(dim(1), mass * (2.0 * alpha).exp(), s.rho)).abs() < 1e-12);
        let c = dim(2).liouville_factor();
        assert_eq!(alpha_for(dim(2), 2.0, c * 2.0), 0.0);
    }

    #[test]
    fn short_branch_follows_exact_family() {
        let spec = ProblemSpec::build(dim(1), 48, 1.0, None).unwrap();
        let branch = trace_branch(&spec, 3.0, 0.25, ContinuationLimits::default()).unwrap();
        assert_eq!(branch.termination, Termination::MaxUReached);
        let fold = branch.fold().expect("fold passed");
        assert!((fold.lambda - 1.0).abs() < 1e-6, "{}", fold.lambda);
        for s in &branch.states {
            let b = s.u_max.exp() - 1.0;
            let exact = 4.0 * b / (1.0 + b).powi(2);
            assert!((s.lambda - exact).abs() < 1e-8 * exact, "{} {}", s.lambda, exact);
        }
        assert!((branch.last().unwrap().u_max - 3.0).abs() < 1e-10);
        assert!(branch.arclength.windows(2).all(|w| w[1] > w[0]));
    }
}
