use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shockgrid::pipeline::{self, report, sweep::run_sweep, PipelineError, RunConfig};
use shockgrid::scenario::BUNDLED;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

/// First-order supply and demand shocks from industry, occupation and
/// activity data.
#[derive(Parser)]
#[command(name = "shockgrid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check inputs and print diagnostics as JSON.
    Validate(Overrides),
    /// Compute shocks and write reports to the output directory.
    Run(Overrides),
    /// Run the configured sweep grid and write sweep.csv.
    Sweep(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Bundled scenario name or path to a scenario CSV.
    #[arg(long)]
    scenario: Option<String>,
    /// Let positive demand shocks raise output.
    #[arg(long)]
    health_growth: bool,
    #[arg(long)]
    consensus_threshold: Option<usize>,
    #[arg(long)]
    min_activities: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Fill missing median wages with the mean of the others in plot data.
    #[arg(long)]
    impute_missing_wages: bool,
}

/// Flag paths are relative to the working directory, config paths to the
/// config file.
fn absolute(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir()
            .map(|d| d.join(path))
            .unwrap_or_else(|_| path.to_path_buf())
    }
}

impl Overrides {
    fn load(&self) -> Result<RunConfig, PipelineError> {
        let mut config = RunConfig::from_file(&self.config)?;
        if let Some(s) = &self.scenario {
            config.scenario = if BUNDLED.contains(&s.as_str()) {
                s.clone()
            } else {
                absolute(Path::new(s)).to_string_lossy().into_owned()
            };
        }
        if self.health_growth {
            config.health_growth = true;
        }
        if let Some(t) = self.consensus_threshold {
            config.consensus_threshold = t;
        }
        if let Some(m) = self.min_activities {
            config.min_activities = m;
        }
        if let Some(dir) = &self.output_dir {
            config.output_dir = absolute(dir);
        }
        if self.impute_missing_wages {
            config.impute_missing_wages = true;
        }
        config.check_ranges()?;
        Ok(config)
    }
}

fn execute(command: &Command) -> Result<ExitCode, PipelineError> {
    match command {
        Command::Validate(o) => {
            let diagnostics = pipeline::validate(&o.load()?)?;
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(&report::json_bytes(&diagnostics));
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(o) => {
            let config = o.load()?;
            let out = pipeline::run(&config)?;
            let row = *out.aggregates().row(out.headline);
            println!(
                "{} ({}): employment {:.6}, wages {:.6}, value added {:.6}",
                config.scenario,
                out.headline.as_str(),
                row.employment,
                row.wages,
                row.value_added
            );
            println!("wrote {}", config.output_path().display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(o) => {
            let config = o.load()?;
            let table = run_sweep(&config)?;
            let failed = table.rows.iter().filter(|r| r.result.is_err()).count();
            println!(
                "{} rows, {} failed; wrote {}",
                table.rows.len(),
                failed,
                config.output_path().join("sweep.csv").display()
            );
            for r in table
                .rows
                .iter()
                .filter_map(|r| r.result.as_ref().err().map(|e| (r, e)))
            {
                eprintln!(
                    "row {} / health_growth={} / threshold={}: {}",
                    r.0.scenario, r.0.health_growth, r.0.consensus_threshold, r.1
                );
            }
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_RUNTIME)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            })
        }
    }
}
