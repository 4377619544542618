//! Line-oriented branch checkpoints.
//!
//! ```text
//! # polyharm branch checkpoint
//! format_version 1
//! m 2
//! nodes 128
//! radius 1.0000000000000000e0
//! stretch 4.6051701859880918e0
//! columns arclength lambda sigma rho alpha u_max residual_norm iterations fold levels
//! state 2.5e-1 ... 0 0 <m·nodes values, level 0 first>
//! end max_u_reached
//! ```
//!
//! Reals carry 17 significant digits, so a round trip is exact. A file without
//! the `end` line is a partial branch that can be resumed.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::constants::Dimension;
use crate::error::{Error, Result};
use crate::radial::{LaplacianStack, Parity, RadialField, RadialGrid, RadialMap};
use crate::solver::{Branch, ProblemSpec, SolutionState, Termination};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "# polyharm branch checkpoint";
const COLUMNS: &str = "arclength lambda sigma rho alpha u_max residual_norm iterations fold levels";

/// Grid parameters stored in the header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub m: usize,
    pub nodes: usize,
    pub radius: f64,
    pub stretch: f64,
}

impl CheckpointHeader {
    pub fn of(spec: &ProblemSpec) -> Self {
        Self {
            m: spec.dim.m(),
            nodes: spec.grid.node_count(),
            radius: spec.radius,
            stretch: spec.grid.map().stretch(),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let dim = Dimension::new(self.m)?;
        let grid = RadialGrid::new(dim, self.nodes, self.radius, RadialMap::from_stretch(self.stretch))?;
        Ok(ProblemSpec::new(grid))
    }
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub spec: ProblemSpec,
    pub states: Vec<SolutionState>,
    pub arclength: Vec<f64>,
    pub fold_index: Option<usize>,
    /// `None` when the trailer is missing.
    pub termination: Option<Termination>,
}

impl Checkpoint {
    pub fn is_complete(&self) -> bool {
        self.termination.is_some()
    }

    /// The stored branch; a partial file is reported as stopped by the step limit.
    pub fn into_branch(self) -> Branch {
        Branch {
            states: self.states,
            arclength: self.arclength,
            termination: self.termination.unwrap_or(Termination::StepLimit),
            fold_index: self.fold_index,
        }
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_header(out: &mut impl Write, header: &CheckpointHeader) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "format_version {FORMAT_VERSION}")?;
    writeln!(out, "m {}", header.m)?;
    writeln!(out, "nodes {}", header.nodes)?;
    writeln!(out, "radius {}", real(header.radius))?;
    writeln!(out, "stretch {}", real(header.stretch))?;
    writeln!(out, "columns {COLUMNS}")?;
    Ok(())
}

pub fn write_state(out: &mut impl Write, s: &SolutionState, arclength: f64, is_fold: bool) -> Result<()> {
    let mut line = String::from("state");
    for x in [arclength, s.lambda, s.sigma, s.rho, s.alpha, s.u_max, s.residual_norm] {
        write!(line, " {}", real(x)).unwrap();
    }
    write!(line, " {} {}", s.iterations, u8::from(is_fold)).unwrap();
    for level in s.stack.levels() {
        for &v in level.values() {
            write!(line, " {}", real(v)).unwrap();
        }
    }
    writeln!(out, "{line}")?;
    Ok(())
}

pub fn write_trailer(out: &mut impl Write, termination: Termination) -> Result<()> {
    writeln!(out, "end {}", termination.as_str())?;
    Ok(())
}

pub fn write_checkpoint(out: &mut impl Write, spec: &ProblemSpec, branch: &Branch) -> Result<()> {
    write_header(out, &CheckpointHeader::of(spec))?;
    for (i, (s, &a)) in branch.states.iter().zip(&branch.arclength).enumerate() {
        write_state(out, s, a, branch.fold_index == Some(i))?;
    }
    write_trailer(out, branch.termination)?;
    out.flush()?;
    Ok(())
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Checkpoint { line, msg: msg.into() }
}

fn header_value<'a>(line_no: usize, line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| bad(line_no, format!("missing `{key}` header line")))?;
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok(v.trim()),
        _ => Err(bad(line_no, format!("expected `{key} <value>`, found `{line}`"))),
    }
}

fn parse<T: std::str::FromStr>(line_no: usize, what: &str, s: &str) -> Result<T> {
    s.parse().map_err(|_| bad(line_no, format!("cannot parse {what} from `{s}`")))
}

pub fn read_checkpoint(input: impl BufRead) -> Result<Checkpoint> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(String::as_str);
    match it.next() {
        Some(MAGIC) => {}
        Some(other) => return Err(bad(1, format!("not a branch checkpoint: `{other}`"))),
        None => return Err(bad(1, "empty file")),
    }
    let version: u32 = parse(2, "format version", header_value(2, it.next(), "format_version")?)?;
    if version != FORMAT_VERSION {
        return Err(bad(2, format!("unsupported format version {version}")));
    }
    let header = CheckpointHeader {
        m: parse(3, "m", header_value(3, it.next(), "m")?)?,
        nodes: parse(4, "nodes", header_value(4, it.next(), "nodes")?)?,
        radius: parse(5, "radius", header_value(5, it.next(), "radius")?)?,
        stretch: parse(6, "stretch", header_value(6, it.next(), "stretch")?)?,
    };
    if header_value(7, it.next(), "columns")? != COLUMNS {
        return Err(bad(7, "unexpected column layout"));
    }
    let spec = header.problem().map_err(|e| bad(3, format!("invalid grid header: {e}")))?;
    let (m, n) = (header.m, header.nodes);

    let mut states = Vec::new();
    let mut arclength = Vec::new();
    let mut fold_index = None;
    let mut termination = None;
    for (offset, line) in it.enumerate() {
        let line_no = offset + 8;
        if termination.is_some() {
            if line.trim().is_empty() {
                continue;
            }
            return Err(bad(line_no, "content after the end line"));
        }
        let mut fields = line.split_ascii_whitespace();
        match fields.next() {
            Some("end") => {
                let word = fields.next().unwrap_or("");
                termination = Some(
                    Termination::parse(word).ok_or_else(|| bad(line_no, format!("unknown termination `{word}`")))?,
                );
            }
            Some("state") => {
                let fields: Vec<&str> = fields.collect();
                let expected = 9 + m * n;
                if fields.len() != expected {
                    return Err(bad(line_no, format!("expected {expected} fields, found {}", fields.len())));
                }
                let reals = fields[..7]
                    .iter()
                    .map(|f| parse::<f64>(line_no, "real", f))
                    .collect::<Result<Vec<_>>>()?;
                let iterations: usize = parse(line_no, "iteration count", fields[7])?;
                match fields[8] {
                    "0" => {}
                    "1" => fold_index = Some(states.len()),
                    f => return Err(bad(line_no, format!("fold flag must be 0 or 1, got `{f}`"))),
                }
                let values = fields[9..]
                    .iter()
                    .map(|f| parse::<f64>(line_no, "node value", f))
                    .collect::<Result<Vec<_>>>()?;
                let levels = values
                    .chunks(n)
                    .map(|c| RadialField::new(&spec.grid, c.to_vec(), Parity::Even))
                    .collect();
                arclength.push(reals[0]);
                states.push(SolutionState {
                    stack: LaplacianStack::new(levels),
                    lambda: reals[1],
                    sigma: reals[2],
                    rho: reals[3],
                    alpha: reals[4],
                    u_max: reals[5],
                    residual_norm: reals[6],
                    iterations,
                });
            }
            None => continue,
            Some(other) => return Err(bad(line_no, format!("unknown record `{other}`"))),
        }
    }
    Ok(Checkpoint { header, spec, states, arclength, fold_index, termination })
}
