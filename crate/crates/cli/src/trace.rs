use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use polyharm_core::io::{read_checkpoint, write_checkpoint, CheckpointHeader};
use polyharm_core::solver::{resume_branch, trace_branch, Branch, Termination};
use serde::Serialize;

use crate::{create, CliError, RunConfig};

pub const BRANCH_FILE: &str = "branch.ckpt";
pub const DIAGRAM_FILE: &str = "bifurcation.csv";

#[derive(Debug, Serialize)]
struct DiagramRow {
    lambda: f64,
    rho: f64,
    sigma: f64,
    u_max: f64,
    residual: f64,
}

/// Traces (or resumes) the branch and writes the checkpoint and the diagram CSV.
/// Outputs are written even when the target is not reached; that is then
/// reported as a failed check.
pub fn run(cfg: &RunConfig, resume: Option<&Path>) -> Result<Branch, CliError> {
    let spec = cfg.problem()?;
    let c = &cfg.continuation;
    let branch = match resume {
        None => trace_branch(&spec, c.u_max_target, c.step, cfg.limits()),
        Some(path) => {
            let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let cp = read_checkpoint(BufReader::new(f)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if cp.header != CheckpointHeader::of(&spec) {
                return Err(CliError::Config(format!(
                    "checkpoint grid {:?} does not match the configuration",
                    cp.header
                )));
            }
            resume_branch(&spec, cp.into_branch(), c.u_max_target, c.step, cfg.limits())
        }
    }
    .map_err(|e| CliError::Science(format!("continuation failed: {e}")))?;

    let mut out = create(&cfg.output_dir, BRANCH_FILE)?;
    write_checkpoint(&mut out, &spec, &branch).map_err(|e| CliError::Io(e.to_string()))?;
    out.flush()?;

    let mut csv = csv::Writer::from_writer(create(&cfg.output_dir, DIAGRAM_FILE)?);
    for s in &branch.states {
        csv.serialize(DiagramRow {
            lambda: s.lambda,
            rho: s.rho,
            sigma: s.sigma,
            u_max: s.u_max,
            residual: s.residual_norm,
        })?;
    }
    csv.flush()?;

    if branch.termination != Termination::MaxUReached {
        let last = branch.last().map_or(f64::NAN, |s| s.u_max);
        return Err(CliError::Science(format!(
            "continuation stopped ({}) at u(0) = {last:.6} after {} states",
            branch.termination.as_str(),
            branch.states.len()
        )));
    }
    Ok(branch)
}
