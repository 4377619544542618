//! End-to-end acceptance run: one PASS/FAIL line per criterion with its runtime.
//!
//! The process fails only when a criterion outside `EXPECTED_FAILURES` fails, so
//! the known rate mismatch is reported without masking regressions elsewhere.

use std::time::Instant;

use polyharm_core::analyzer::{analyze_field, analyze_state, AnalyzerConfig, CartesianTable, SampledField};
use polyharm_core::green::{build_green, representation};
use polyharm_core::pohozaev::{
    green_boundary_functionals, lemma_alg_check, log_log_slope, pohozaev_ball, pohozaev_stack,
    regular_part_perturbation,
};
use polyharm_core::solver::{normalize, trace_branch, Branch, ContinuationLimits, ProblemSpec, DEFAULT_TOLERANCE};
use polyharm_core::{constants_for, Bubble, Dimension, Polynomial, RadialField, RadialGrid, RadialMap};

/// The δ-rate of the third functional's regular-part gap is δ², not δ; see the notes.
const EXPECTED_FAILURES: &[usize] = &[8];

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

fn dim(m: usize) -> Dimension {
    Dimension::new(m).unwrap()
}

fn run(id: usize, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// For checks whose expensive part (trace plus analysis) ran beforehand.
fn run_timed(id: usize, name: &'static str, setup: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let mut o = run(id, name, f);
    o.seconds += setup;
    o
}

fn traced(m: usize, nodes: usize, target: f64) -> (ProblemSpec, Branch) {
    let d = dim(m);
    let spec = ProblemSpec::build(d, nodes, 1.0, Some(ProblemSpec::default_cluster_scale(d, 1.0, target))).unwrap();
    let branch = trace_branch(&spec, target, 0.5, ContinuationLimits::default()).unwrap();
    (spec, branch)
}

fn exact_lambda(u0: f64) -> f64 {
    let b = u0.exp_m1();
    4.0 * b / (1.0 + b).powi(2)
}

fn main() {
    let l1 = |m: usize| constants_for(dim(m)).lambda1;
    let u_target_1 = 1e6f64.ln_1p();
    let cfg = AnalyzerConfig::default();
    let mut out = Vec::new();

    out.push(run(1, "exact m=1 branch and fold", || {
        let (_, branch) = traced(1, 96, u_target_1);
        let worst = branch
            .states
            .iter()
            .map(|s| (s.lambda - exact_lambda(s.u_max)).abs() / exact_lambda(s.u_max))
            .fold(0.0, f64::max);
        let fold = branch.fold().map_or(f64::NAN, |s| s.lambda);
        (
            worst < 1e-7 && (fold - 1.0).abs() < 1e-6,
            format!("{} states, max rel λ error {worst:.2e}, fold λ* = {fold:.12}", branch.states.len()),
        )
    }));

    let start = Instant::now();
    let (_, branch1) = traced(1, 96, u_target_1);
    let g1 = build_green(dim(1), 1.0).unwrap();
    let s1 = branch1.last().unwrap().clone();
    let rep1 = analyze_state(&s1, &g1, &cfg).unwrap();
    let pipeline1 = start.elapsed().as_secs_f64();

    out.push(run_timed(2, "quantization m=1", pipeline1, || {
        let analytic = (s1.rho / l1(1) - 1.0).abs();
        (
            rep1.n == 1 && rep1.quantization_residual < 1e-3 && analytic < 1.1e-6 && pipeline1 < 30.0,
            format!(
                "u(0) = {:.6}, ρ/4π - 1 = {:.2e}, N = {}, residual {:.2e} ",
                s1.u_max, s1.rho / l1(1) - 1.0, rep1.n, rep1.quantization_residual
            ),
        )
    }));

    let start = Instant::now();
    let (_, branch2) = traced(2, 128, 12.0);
    let g2 = build_green(dim(2), 1.0).unwrap();
    let s2 = branch2.last().unwrap().clone();
    let rep2 = analyze_state(&s2, &g2, &cfg).unwrap();
    let pipeline2 = start.elapsed().as_secs_f64();

    out.push(run_timed(3, "quantization m=2", pipeline2, || {
        let rel = s2.rho / l1(2) - 1.0;
        (
            s2.u_max >= 12.0 - 1e-9 && rel.abs() < 0.02 && rep2.n == 1 && pipeline2 < 300.0,
            format!("u(0) = {:.6}, ρ/16π² - 1 = {rel:.2e}, N = {}, pipeline {pipeline2:.2}s", s2.u_max, rep2.n),
        )
    }));

    out.push(run(4, "bubble profile", || {
        let d1 = rep1.points[0].profile_dev.unwrap_or(f64::INFINITY);
        let d2 = rep2.points[0].profile_dev.unwrap_or(f64::INFINITY);
        (d1 < 1e-2 && d2 < 2e-2, format!("m=1 {d1:.2e}, m=2 {d2:.2e}"))
    }));

    out.push(run(5, "Green-function limit", || {
        let num1 = rep1.green_limit_dev.unwrap();
        let num2 = rep2.green_limit_dev.unwrap();
        // u_b - 4πG = log((1+b)r²/(1+br²)) on the unit disk
        let b = s1.u_max.exp_m1();
        let closed = (0..=600)
            .map(|i| 0.3 + 0.6 * i as f64 / 600.0)
            .map(|r| ((1.0 + b) * r * r / (1.0 + b * r * r)).ln().abs())
            .fold(0.0, f64::max);
        (
            closed < 5e-3 && num1 < 5e-3 && num2 < 5e-2,
            format!("m=1 closed form {closed:.2e} (numerical {num1:.2e}), m=2 {num2:.2e}"),
        )
    }));

    out.push(run(6, "per-bubble mass", || {
        let r1 = rep1.points[0].local_mass / l1(1) - 1.0;
        let r2 = rep2.points[0].local_mass / l1(2) - 1.0;
        (r1.abs() < 0.02 && r2.abs() < 0.02, format!("m=1 {r1:+.2e}, m=2 {r2:+.2e} relative to Λ₁"))
    }));

    out.push(run(7, "Pohozaev identity", || {
        let mut worst_exact: f64 = 0.0;
        for b in [0.1, 1.0, 10.0] {
            let grid = RadialGrid::new(dim(1), 64, 1.0, RadialMap::resolving(1.0, 1.0 / (1.0f64 + b).sqrt())).unwrap();
            let u = RadialField::from_fn(&grid, |r| ((1.0 + b) / (1.0 + b * r * r)).ln());
            for delta in [0.5, 1.0] {
                let rep = pohozaev_ball(&u, 4.0 * b / (1.0 + b).powi(2), delta).unwrap();
                worst_exact = worst_exact.max(if rep.valid { rep.residual } else { f64::INFINITY });
            }
        }
        let grid = RadialGrid::new(dim(1), 64, 2.0, RadialMap::Linear).unwrap();
        let eta = RadialField::from_fn(&grid, |r| (2.0 / (1.0 + r * r)).ln());
        let mut worst_eta: f64 = 0.0;
        for delta in [1.0, 2.0] {
            let rep = pohozaev_ball(&eta, 1.0, delta).unwrap();
            worst_eta = worst_eta.max(if rep.valid { rep.residual } else { f64::INFINITY });
        }
        let mut worst_m2: f64 = 0.0;
        for s in &branch2.states {
            let rep = pohozaev_stack(&s.stack, s.lambda, 0.5).unwrap();
            worst_m2 = worst_m2.max(if rep.valid { rep.relative_residual } else { f64::INFINITY });
        }
        (
            worst_exact < 1e-9 && worst_eta < 1e-9 && worst_m2 < 1e-5,
            format!(
                "exact family {worst_exact:.2e}, η₀ {worst_eta:.2e}, m=2 states (relative, {} states) {worst_m2:.2e}",
                branch2.states.len()
            ),
        )
    }));

    out.push(run(8, "Green boundary functionals", || {
        let mut sum_err: f64 = 0.0;
        let mut spread: f64 = 0.0;
        let mut higher: f64 = 0.0;
        for m in 1..=3 {
            let sums: Vec<f64> = [0.1, 0.3, 0.5]
                .iter()
                .map(|&d| {
                    let f = green_boundary_functionals(dim(m), d).unwrap();
                    higher = higher.max(f.higher_terms_max());
                    f.sum()
                })
                .collect();
            for s in &sums {
                sum_err = sum_err.max((s - 1.0 / l1(m)).abs());
                spread = spread.max((s - sums[0]).abs());
            }
        }
        let deltas = [0.4, 0.2, 0.1];
        let gaps: Vec<_> = deltas.iter().map(|&d| regular_part_perturbation(&g2, d).unwrap()).collect();
        let ii = log_log_slope(&deltas, &gaps.iter().map(|g| g.ii_gap).collect::<Vec<_>>());
        let iii = log_log_slope(&deltas, &gaps.iter().map(|g| g.iii_gap).collect::<Vec<_>>());
        let m1_zero = regular_part_perturbation(&g1, 0.3).map(|g| g.ii_gap == 0.0 && g.iii_gap == 0.0).unwrap();
        let ok = sum_err < 1e-10
            && spread < 1e-10
            && higher < 1e-10
            && m1_zero
            && (ii - 2.0).abs() <= 0.3 * 2.0
            && (iii - 1.0).abs() <= 0.3;
        (
            ok,
            format!(
                "|II+III-1/Λ₁| {sum_err:.1e}, δ-spread {spread:.1e}, III^(j≥1) {higher:.1e}, slopes II {ii:.3} (want 2), III {iii:.3} (want 1)"
            ),
        )
    }));

    out.push(run(9, "pointwise divergence identity", || {
        let samples = |n: usize| -> Vec<Vec<f64>> {
            (0..12)
                .map(|k| (0..n).map(|i| ((k * 7 + i * 3) % 11) as f64 / 5.0 - 1.0).collect())
                .collect()
        };
        let u1 = Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 3.0)]);
        let e1 = lemma_alg_check(&u1, &[0.0, 0.0], &samples(2));
        let u2 = Polynomial::radial_power(4, 2).add(&Polynomial::from_terms(4, [(vec![3, 1, 0, 2], 0.7)]));
        let e2 = lemma_alg_check(&u2, &[1.0, 0.0, 0.0, 0.0], &samples(4));
        (e1 < 1e-6 && e2 < 1e-6, format!("m=1 {e1:.2e}, m=2 {e2:.2e}"))
    }));

    out.push(run(10, "two-bubble extraction", || {
        let (mu1, mu2, h) = (0.01, 0.015, 0.001);
        let (p, q) = ([-0.8, 0.0], [0.8, 0.0]);
        let b1 = Bubble::new(1.0 / mu1, p.to_vec());
        let b2 = Bubble::new(1.0 / mu2, q.to_vec());
        let table = CartesianTable::from_fn(h, [-1.2, -0.6], [1.2, 0.6], |x| {
            let (e1, e2) = (2.0 * b1.profile(b1.distance(&x)), 2.0 * b2.profile(b2.distance(&x)));
            // ½ log(e^{e1} + e^{e2}) without overflow
            0.5 * (e1.max(e2) + (-(e1 - e2).abs()).exp().ln_1p())
        });
        let field = SampledField::cartesian2d(dim(1), table).unwrap();
        let rep = analyze_field(&field, 2.0 * l1(1), 0.6, &cfg).unwrap();
        let off = |a: &[f64], b: &[f64; 2]| (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
        let located = rep.n == 2 && off(&rep.points[0].location, &p) <= h && off(&rep.points[1].location, &q) <= h;
        let mass = rep.total_mass / (2.0 * l1(1)) - 1.0;
        (
            located && mass.abs() < 0.05,
            format!("N = {}, total mass relative error {mass:+.2e}", rep.n),
        )
    }));

    out.push(run(11, "representation formula", || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (branch, g) in [(&branch1, &g1), (&branch2, &g2)] {
            for s in &branch.states {
                let (u_hat, alpha) = normalize(s);
                let value = representation(&u_hat, alpha, g).unwrap();
                worst = worst.max((value - u_hat.value_at_origin()).abs());
                count += 1;
            }
        }
        (worst < 10.0 * DEFAULT_TOLERANCE, format!("{count} states, max |error| {worst:.2e}"))
    }));

    let mut unexpected = 0;
    for o in &out {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        let note = if !o.passed && EXPECTED_FAILURES.contains(&o.id) { " [known]" } else { "" };
        if !o.passed && !EXPECTED_FAILURES.contains(&o.id) {
            unexpected += 1;
        }
        println!("{tag} {:>2} {:<30} {:>7.2}s  {}{note}", o.id, o.name, o.seconds, o.detail);
    }
    let passed = out.iter().filter(|o| o.passed).count();
    println!("{passed}/{} criteria pass", out.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
