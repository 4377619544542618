use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polyharm_cli::verify::Fault;
use polyharm_cli::{analyze, trace, verify, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "polyharm", version, about = "Branch tracing and blow-up diagnostics for the polyharmonic mean-field equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the solution branch and write the checkpoint and bifurcation CSV.
    Trace {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a stored (possibly partial) checkpoint.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run the concentration analysis on every state of a checkpoint.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        branch: PathBuf,
    },
    /// Check the boundary identities and Green-function functionals.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        fault_inject: Option<Fault>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Trace { config, resume } => {
            let cfg = RunConfig::load(&config)?;
            let branch = trace::run(&cfg, resume.as_deref())?;
            let last = branch.last().expect("a traced branch has states");
            println!(
                "traced {} states; final u(0) = {:.6}, lambda = {:.12e}, rho = {:.12e}",
                branch.states.len(),
                last.u_max,
                last.lambda,
                last.rho
            );
            if let Some(f) = branch.fold() {
                println!("fold at u(0) = {:.9}, lambda = {:.12e}", f.u_max, f.lambda);
            }
        }
        Command::Analyze { config, branch } => {
            let cfg = RunConfig::load(&config)?;
            let summary = analyze::run(&cfg, &branch)?;
            println!("{}", summary.line());
        }
        Command::Verify { config, fault_inject } => {
            let cfg = RunConfig::load(&config)?;
            let checks = verify::run(&cfg, fault_inject)?;
            println!("all {} checks passed", checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
