use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fibred_flower::cli::{error_line, run_path, Command, RunFlags, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "fibred-flower", version, about = "Fibred flowers of parabolic invariant curves")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the reduction and print the verdict.
    Classify(Flags),
    /// Petal geometry, invariant region and boundary polylines.
    Petals(Flags),
    /// Orbit sampling and petal verification.
    Simulate(Flags),
    /// Cylindrical cascade `Z + a_2(theta)` and its integrability diagnostics.
    Cascade(Flags),
    /// Siegel schedule, majorant sequences and the `||h_k|| <= gamma_k` certificate.
    Siegel(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long)]
    mean_tol: Option<f64>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Accept rational rotation numbers.
    #[arg(long)]
    diagnostic: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, f) = match cli.command {
        Cmd::Classify(f) => (Command::Classify, f),
        Cmd::Petals(f) => (Command::Petals, f),
        Cmd::Simulate(f) => (Command::Simulate, f),
        Cmd::Cascade(f) => (Command::Cascade, f),
        Cmd::Siegel(f) => (Command::Siegel, f),
    };
    let flags = RunFlags {
        max_order: f.max_order,
        mean_tol: f.mean_tol,
        seeds: f.seeds,
        budget: f.budget,
        seed: f.seed,
        diagnostic: f.diagnostic,
        out: f.out,
    };
    match run_path(command, &f.spec, &flags) {
        Ok(o) => {
            print!("{}", o.report.to_json());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
