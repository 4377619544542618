use polyharm_core::io::{read_checkpoint, write_checkpoint};
use polyharm_core::solver::{resume_branch, trace_branch, ContinuationLimits, ProblemSpec, Termination};
use polyharm_core::Dimension;

#[test]
fn resumed_branch_reaches_target_on_the_exact_family() {
    let dim = Dimension::new(1).unwrap();
    let spec = ProblemSpec::build(dim, 48, 1.0, Some(ProblemSpec::default_cluster_scale(dim, 1.0, 6.0))).unwrap();
    let limits = ContinuationLimits::default();
    let first = trace_branch(&spec, 2.0, 0.4, limits).unwrap();
    assert_eq!(first.termination, Termination::MaxUReached);

    let mut buf = Vec::new();
    write_checkpoint(&mut buf, &spec, &first).unwrap();
    let cp = read_checkpoint(buf.as_slice()).unwrap();
    let spec2 = cp.spec.clone();
    let resumed = resume_branch(&spec2, cp.into_branch(), 6.0, 0.4, limits).unwrap();

    assert_eq!(resumed.termination, Termination::MaxUReached);
    assert!(resumed.states.len() > first.states.len());
    assert!(first.fold_index.is_some());
    assert_eq!(resumed.fold_index, first.fold_index);
    for s in &resumed.states {
        let b = s.u_max.exp() - 1.0;
        let exact = 4.0 * b / (1.0 + b).powi(2);
        assert!((s.lambda - exact).abs() <= 1e-7 * exact, "{} {}", s.lambda, exact);
    }
    assert!((resumed.last().unwrap().u_max - 6.0).abs() < 1e-10);
    assert!(resumed.arclength.windows(2).all(|w| w[1] > w[0]));
}
