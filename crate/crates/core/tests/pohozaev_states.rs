use polyharm_core::pohozaev::{dirichlet_boundary_structure, pohozaev_ball, pohozaev_stack};
use polyharm_core::solver::{trace_branch, ContinuationLimits, ProblemSpec};
use polyharm_core::{Dimension, Error, LaplacianStack, RadialField, RadialGrid, RadialMap};

fn dim(m: usize) -> Dimension {
    Dimension::new(m).unwrap()
}

fn terminal(m: usize, nodes: usize, target: f64) -> (ProblemSpec, polyharm_core::solver::SolutionState) {
    let d = dim(m);
    let scale = ProblemSpec::default_cluster_scale(d, 1.0, target);
    let spec = ProblemSpec::build(d, nodes, 1.0, Some(scale)).unwrap();
    let branch = trace_branch(&spec, target, 0.5, ContinuationLimits::default()).unwrap();
    let s = branch.last().unwrap().clone();
    (spec, s)
}

#[test]
fn liouville_profile_satisfies_identity() {
    let grid = RadialGrid::new(dim(1), 64, 2.0, RadialMap::Linear).unwrap();
    let eta = RadialField::from_fn(&grid, |r| (2.0 / (1.0 + r * r)).ln());
    let rep = pohozaev_ball(&eta, 1.0, 2.0).unwrap();
    assert!(rep.valid);
    assert!(rep.residual < 1e-8, "{rep:?}");
    assert!(rep.residual <= 1e3 * rep.equation_residual * rep.interior, "{rep:?}");

    // m = 2 with Δη₀ = -(8 + 4r²)/(1 + r²)² supplied exactly.
    let grid = RadialGrid::new(dim(2), 32, 2.0, RadialMap::Linear).unwrap();
    let stack = LaplacianStack::new(vec![
        RadialField::from_fn(&grid, |r| (2.0 / (1.0 + r * r)).ln()),
        RadialField::from_fn(&grid, |r| -(8.0 + 4.0 * r * r) / (1.0 + r * r).powi(2)),
    ]);
    let rep = pohozaev_stack(&stack, 6.0, 2.0).unwrap();
    assert!(rep.valid);
    assert!(rep.relative_residual < 1e-8, "{rep:?}");
    assert!(rep.residual <= 1e3 * rep.equation_residual * rep.interior, "{rep:?}");
}

#[test]
fn converged_states_satisfy_identity_and_boundary_split() {
    let (_, s1) = terminal(1, 64, 6.0);
    let d1 = dirichlet_boundary_structure(&s1.stack, 0.3).unwrap();
    assert!(d1.f1_integral.abs() < 1e-10 && d1.identity_gap < 1e-10);

    let (_, s2) = terminal(2, 128, 8.0);
    let rep = pohozaev_stack(&s2.stack, s2.lambda, 0.5).unwrap();
    assert!(rep.valid);
    assert!(rep.relative_residual < 1e-5);
    let d2 = dirichlet_boundary_structure(&s2.stack, 0.3).unwrap();
    assert!(d2.f1_integral.abs() < 1e-8 && d2.identity_gap < 1e-8);
}

#[test]
fn violated_slope_condition_is_rejected() {
    let grid = RadialGrid::new(dim(2), 32, 1.0, RadialMap::Linear).unwrap();
    let u = RadialField::from_fn(&grid, |r| 1.0 - r * r);
    let err = dirichlet_boundary_structure(&LaplacianStack::from_field(&u), 0.0).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
}
