use std::io::Write;

use polyharm_core::constants::constants_for;
use polyharm_core::green::{build_green, FundamentalSolution, LogPowerSeries};
use polyharm_core::pohozaev::{
    green_boundary_functionals, lemma_alg_check, log_log_slope, pohozaev_ball, pohozaev_stack,
    regular_part_perturbation, series_boundary_functionals, BoundaryFunctionals, PerturbationGaps,
};
use polyharm_core::{Dimension, LaplacianStack, Polynomial, RadialField, RadialGrid, RadialMap};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{create, CliError, RunConfig};

pub const VERIFY_FILE: &str = "verify.csv";

/// Deliberate corruption of one input, to confirm the corresponding check can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Scales the fundamental solution by 1 + 1e-3.
    Functionals,
    /// Adds `1e-2·r` to the Green function.
    Perturbation,
    /// Scales the nonlinearity coefficient by 1 + 1e-6.
    Pohozaev,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn below(check: String, value: f64, tolerance: f64) -> Self {
        Self { check, value, tolerance, passed: value.is_finite() && value.abs() <= tolerance }
    }
}

fn dim(m: usize) -> Dimension {
    Dimension::new(m).expect("validated order")
}

fn functionals(m: usize, delta: f64, fault: Option<Fault>) -> Result<BoundaryFunctionals, CliError> {
    if fault == Some(Fault::Functionals) {
        let g = FundamentalSolution::new(dim(m)).series();
        let bent = LogPowerSeries::new(dim(m).n(), g.log_coeff() * (1.0 + 1e-3), []);
        return Ok(series_boundary_functionals(dim(m), &bent, delta));
    }
    green_boundary_functionals(dim(m), delta).map_err(|e| CliError::Science(e.to_string()))
}

fn perturbation(cfg: &RunConfig, delta: f64, fault: Option<Fault>) -> Result<PerturbationGaps, CliError> {
    let d = cfg.dim();
    let g = build_green(d, cfg.radius).map_err(|e| CliError::Science(e.to_string()))?;
    if fault != Some(Fault::Perturbation) {
        return regular_part_perturbation(&g, delta).map_err(|e| CliError::Science(e.to_string()));
    }
    let mut powers: Vec<(i32, f64)> = g.regular_coeffs.iter().enumerate().map(|(j, &c)| (2 * j as i32, c)).collect();
    powers.push((1, 1e-2));
    let bent = LogPowerSeries::new(d.n(), 1.0 / constants_for(d).gamma, powers);
    let full = series_boundary_functionals(d, &bent, delta);
    let bare = series_boundary_functionals(d, &FundamentalSolution::new(d).series(), delta);
    Ok(PerturbationGaps {
        delta,
        ii_gap: full.ii - bare.ii,
        iii_gap: full.iii - bare.iii,
        iii_term_gaps: full.iii_terms.iter().zip(&bare.iii_terms).map(|(a, b)| a - b).collect(),
    })
}

/// Test polynomial and reference point for the divergence identity in `ℝ^{2m}`.
fn alg_fixture(m: usize, rng: &mut ChaCha8Rng) -> (Polynomial, Vec<f64>) {
    let n = 2 * m;
    match m {
        1 => (Polynomial::from_terms(2, [(vec![2, 0], 1.0), (vec![0, 2], 3.0)]), vec![0.0, 0.0]),
        2 => (Polynomial::radial_power(4, 2), vec![1.0, 0.0, 0.0, 0.0]),
        _ => {
            // |x|^{2m} plus a mixed monomial of degree 2m + 2
            let mut e = vec![0; n];
            e[0] = 2;
            e[1] = 3;
            e[2] = (2 * m as u32 + 2) - 5;
            let u = Polynomial::radial_power(n, m as u32).add(&Polynomial::from_terms(n, [(e, 0.5)]));
            let y = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
            (u, y)
        }
    }
}

pub fn checks(cfg: &RunConfig, fault: Option<Fault>) -> Result<Vec<Check>, CliError> {
    let v = &cfg.verify;
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    for &m in &v.orders {
        let inverse = 1.0 / constants_for(dim(m)).lambda1;
        let mut sums = Vec::new();
        for &delta in &v.deltas {
            let f = functionals(m, delta, fault)?;
            out.push(Check::below(format!("functionals_sum[m={m},delta={delta}]"), f.sum() - inverse, v.functional_tolerance));
            out.push(Check::below(format!("functionals_higher[m={m},delta={delta}]"), f.higher_terms_max(), v.functional_tolerance));
            sums.push(f.sum());
        }
        let spread = sums.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - sums.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if sums.len() > 1 {
            out.push(Check::below(format!("functionals_delta_independence[m={m}]"), spread, v.functional_tolerance));
        }
    }

    let gaps = v
        .perturbation_deltas
        .iter()
        .map(|&d| perturbation(cfg, d, fault))
        .collect::<Result<Vec<_>, _>>()?;
    if cfg.m == 1 {
        let worst = gaps.iter().map(|g| g.ii_gap.abs().max(g.iii_gap.abs())).fold(0.0, f64::max);
        out.push(Check::below("perturbation_vanishes[m=1]".into(), worst, v.functional_tolerance));
    } else if gaps.len() >= 2 {
        let ds = &v.perturbation_deltas;
        let ii = log_log_slope(ds, &gaps.iter().map(|g| g.ii_gap).collect::<Vec<_>>());
        let iii = log_log_slope(ds, &gaps.iter().map(|g| g.iii_gap).collect::<Vec<_>>());
        let m = cfg.m as f64;
        out.push(Check::below(format!("perturbation_ii_rate[m={}]", cfg.m), (ii - m) / m, v.slope_tolerance));
        out.push(Check::below(format!("perturbation_iii_rate[m={}]", cfg.m), iii - 1.0, v.slope_tolerance));
    }

    for &m in &v.orders {
        let (u, y) = alg_fixture(m, &mut rng);
        let samples: Vec<Vec<f64>> =
            (0..v.alg_samples).map(|_| (0..2 * m).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
        out.push(Check::below(format!("lemma_alg[m={m}]"), lemma_alg_check(&u, &y, &samples), v.alg_tolerance));
    }

    let q_scale = if fault == Some(Fault::Pohozaev) { 1.0 + 1e-6 } else { 1.0 };
    let science = |e: polyharm_core::Error| CliError::Science(e.to_string());
    // u = log(2/(1+r²)) on the unit disk, Q = λ = 1
    let grid = RadialGrid::new(dim(1), 48, 1.0, RadialMap::Linear).map_err(science)?;
    let exact = RadialField::from_fn(&grid, |r| (2.0 / (1.0 + r * r)).ln());
    let rep = pohozaev_ball(&exact, q_scale, 1.0).map_err(science)?;
    out.push(pohozaev_check("pohozaev_exact_family[m=1]", rep.residual, rep.valid, v.pohozaev_tolerance));
    let grid = RadialGrid::new(dim(1), 64, 2.0, RadialMap::Linear).map_err(science)?;
    let eta = RadialField::from_fn(&grid, |r| (2.0 / (1.0 + r * r)).ln());
    let rep = pohozaev_ball(&eta, q_scale, 2.0).map_err(science)?;
    out.push(pohozaev_check("pohozaev_liouville[m=1]", rep.residual, rep.valid, v.pohozaev_tolerance));
    let grid = RadialGrid::new(dim(2), 32, 2.0, RadialMap::Linear).map_err(science)?;
    let stack = LaplacianStack::new(vec![
        RadialField::from_fn(&grid, |r| (2.0 / (1.0 + r * r)).ln()),
        RadialField::from_fn(&grid, |r| -(8.0 + 4.0 * r * r) / (1.0 + r * r).powi(2)),
    ]);
    let rep = pohozaev_stack(&stack, 6.0 * q_scale, 2.0).map_err(science)?;
    out.push(pohozaev_check("pohozaev_liouville_relative[m=2]", rep.relative_residual, rep.valid, v.pohozaev_tolerance));
    Ok(out)
}

fn pohozaev_check(name: &str, value: f64, valid: bool, tolerance: f64) -> Check {
    let mut c = Check::below(name.into(), value, tolerance);
    c.passed &= valid;
    c
}

/// Runs every check, writes the report and prints one line per check.
pub fn run(cfg: &RunConfig, fault: Option<Fault>) -> Result<Vec<Check>, CliError> {
    let checks = checks(cfg, fault)?;
    let mut csv = csv::Writer::from_writer(create(&cfg.output_dir, VERIFY_FILE)?);
    for c in &checks {
        csv.serialize(c)?;
    }
    csv.flush()?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        writeln!(lock, "{tag} {} value={:.3e} tolerance={:.1e}", c.check, c.value, c.tolerance)?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.check.as_str()).collect();
    if failed.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Science(format!("failing checks: {}", failed.join(", "))))
    }
}
