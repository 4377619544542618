use std::path::{Path, PathBuf};

use polyharm_core::analyzer::AnalyzerConfig;
use polyharm_core::solver::{ContinuationLimits, NewtonOptions, ProblemSpec};
use polyharm_core::Dimension;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m: usize,
    pub nodes: usize,
    #[serde(default = "one")]
    pub radius: f64,
    /// Width resolved by the grid at the origin; derived from the target when absent.
    #[serde(default)]
    pub cluster_scale: Option<f64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub continuation: ContinuationConfig,
    #[serde(default)]
    pub analyzer: AnalyzerConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContinuationConfig {
    pub u_max_target: f64,
    pub step: f64,
    pub max_steps: usize,
    pub min_step: f64,
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        let limits = ContinuationLimits::default();
        Self {
            u_max_target: 8.0,
            step: 0.5,
            max_steps: limits.max_steps,
            min_step: limits.min_step,
            newton_tolerance: limits.newton.tol,
            newton_max_iterations: limits.newton.max_iterations,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Orders swept by the Green-function functional checks.
    pub orders: Vec<usize>,
    pub deltas: Vec<f64>,
    /// Sphere radii for the regular-part decay fits.
    pub perturbation_deltas: Vec<f64>,
    pub functional_tolerance: f64,
    pub alg_tolerance: f64,
    pub alg_samples: usize,
    pub pohozaev_tolerance: f64,
    /// Allowed relative deviation of a fitted decay slope.
    pub slope_tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            orders: vec![1, 2, 3],
            deltas: vec![0.1, 0.3, 0.5],
            perturbation_deltas: vec![0.4, 0.2, 0.1],
            functional_tolerance: 1e-10,
            alg_tolerance: 1e-6,
            alg_samples: 16,
            pohozaev_tolerance: 1e-9,
            slope_tolerance: 0.3,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_output() -> PathBuf {
    PathBuf::from("polyharm-out")
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.m < 1 {
            return Err(CliError::Config("m must be at least 1".into()));
        }
        if self.nodes < 8 {
            return Err(CliError::Config(format!("nodes must be at least 8, got {}", self.nodes)));
        }
        positive("radius", self.radius)?;
        if let Some(s) = self.cluster_scale {
            positive("cluster_scale", s)?;
        }
        let c = &self.continuation;
        positive("continuation.u_max_target", c.u_max_target)?;
        positive("continuation.step", c.step)?;
        positive("continuation.min_step", c.min_step)?;
        positive("continuation.newton_tolerance", c.newton_tolerance)?;
        if c.max_steps == 0 || c.newton_max_iterations == 0 {
            return Err(CliError::Config("step and iteration limits must be positive".into()));
        }
        let a = &self.analyzer;
        if let Some(t) = a.threshold_c {
            positive("analyzer.threshold_c", t)?;
        }
        positive("analyzer.r_cmp", a.r_cmp)?;
        positive("analyzer.collar_width_fraction", a.collar_width_fraction)?;
        if !(a.r_loc >= 1.0) {
            return Err(CliError::Config(format!("analyzer.r_loc must be at least 1, got {}", a.r_loc)));
        }
        let [r1, r2] = a.annulus;
        if !(0.0 < r1 && r1 < r2 && r2 <= self.radius) {
            return Err(CliError::Config(format!("analyzer.annulus [{r1}, {r2}] must lie inside the ball")));
        }
        let v = &self.verify;
        if v.orders.iter().any(|&m| m == 0) {
            return Err(CliError::Config("verify.orders must be at least 1".into()));
        }
        for &d in v.deltas.iter().chain(&v.perturbation_deltas) {
            positive("verify delta", d)?;
        }
        if v.perturbation_deltas.iter().any(|&d| d >= self.radius) {
            return Err(CliError::Config("verify.perturbation_deltas must lie below the radius".into()));
        }
        for (name, t) in [
            ("verify.functional_tolerance", v.functional_tolerance),
            ("verify.alg_tolerance", v.alg_tolerance),
            ("verify.pohozaev_tolerance", v.pohozaev_tolerance),
            ("verify.slope_tolerance", v.slope_tolerance),
        ] {
            positive(name, t)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> Dimension {
        Dimension::new(self.m).expect("validated")
    }

    pub fn problem(&self) -> Result<ProblemSpec, CliError> {
        let scale = self.cluster_scale.unwrap_or_else(|| {
            ProblemSpec::default_cluster_scale(self.dim(), self.radius, self.continuation.u_max_target)
        });
        ProblemSpec::build(self.dim(), self.nodes, self.radius, Some(scale)).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn limits(&self) -> ContinuationLimits {
        let c = &self.continuation;
        ContinuationLimits {
            max_steps: c.max_steps,
            min_step: c.min_step,
            newton: NewtonOptions { tol: c.newton_tolerance, max_iterations: c.newton_max_iterations },
        }
    }
}
