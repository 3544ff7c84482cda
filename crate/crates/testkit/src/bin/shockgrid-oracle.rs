use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use shockgrid_testkit::fixture::{write_inputs, write_oracle_outputs};
use shockgrid_testkit::{generate, oracle_shocks, Dims};

/// Generates a synthetic economy, writes it as pipeline inputs, and writes
/// the reference results beside them for diffing against `shockgrid run`.
#[derive(Parser)]
#[command(name = "shockgrid-oracle", version)]
struct Cli {
    #[arg(long)]
    seed: u64,
    /// Industries, occupations, activities, fine codes.
    #[arg(long, value_name = "N,J,I,K")]
    dims: Dims,
    /// Inject empty rows and columns, all-essential flags and
    /// single-activity occupations.
    #[arg(long)]
    degenerate: bool,
    /// Directory for inputs; reference results go to its `oracle/`.
    #[arg(long, default_value = "synthetic")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let econ = generate(cli.seed, cli.dims, cli.degenerate);
    let config = match write_inputs(&econ, &cli.out) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: writing inputs: {e}");
            return ExitCode::from(3);
        }
    };
    println!("inputs: {}", config.display());
    match oracle_shocks(&econ) {
        Ok(out) => {
            let dir = cli.out.join("oracle");
            if let Err(e) = write_oracle_outputs(&out, econ.health_growth, &dir) {
                eprintln!("error: writing results: {e}");
                return ExitCode::from(3);
            }
            println!("reference results: {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("oracle: {e}");
            ExitCode::from(2)
        }
    }
}
