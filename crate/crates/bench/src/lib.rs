//! Shared fixtures for the benchmarks.

use polyharm_core::solver::ProblemSpec;
use polyharm_core::Dimension;

/// Problem on the unit ball clustered for a branch ending at `u(0) = target`.
pub fn unit_ball(m: usize, nodes: usize, target: f64) -> ProblemSpec {
    let dim = Dimension::new(m).expect("positive order");
    ProblemSpec::build(dim, nodes, 1.0, Some(ProblemSpec::default_cluster_scale(dim, 1.0, target)))
        .expect("valid grid")
}
