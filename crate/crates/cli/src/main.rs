use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fermigate_cli::commands::{self, Overrides};
use fermigate_cli::config::parse_grids_flag;
use fermigate_cli::{CliError, EXIT_CONFIG};
use fermigate_core::verify::ReportFormat;

#[derive(Debug, Parser)]
#[command(name = "fermigate", version, about = "Spectra and ground-state checks for 1D fermions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (directory for `report`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Scenario to run; repeatable. Runs the default manifest when absent.
    #[arg(long, global = true)]
    scenario: Vec<String>,
    /// Grid pair "n,2n" for two-grid checks.
    #[arg(long, global = true)]
    grids: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest single-particle eigenvalues and gap verdicts.
    SolveSingle,
    /// Lowest many-body eigenvalues, ground density and simplex sample.
    SolveMany,
    /// Run verification scenarios.
    Verify,
    /// Tabulate a report or solve output; writes plot CSVs with --out DIR.
    Report { input: PathBuf },
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FERMIGATE_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("FERMIGATE_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    threads()?;
    let overrides = Overrides {
        out: cli.out.clone(),
        format: cli.format.map(|f| match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }),
        seed: cli.seed,
        scenarios: cli.scenario.clone(),
        grids: cli.grids.as_deref().map(parse_grids_flag).transpose()?,
    };
    match &cli.command {
        Command::Report { input } => {
            print!("{}", commands::report(input, cli.out.as_deref())?);
            Ok(())
        }
        command => {
            let cfg = commands::load_config(cli.config.as_deref(), &overrides)?;
            match command {
                Command::SolveSingle => commands::solve_single(&cfg),
                Command::SolveMany => commands::solve_many(&cfg),
                Command::Verify => {
                    let bundle = commands::verify(&cfg)?;
                    let failed = bundle.reports.iter().filter(|r| !r.passed()).count();
                    eprintln!("{} scenarios, {} failed", bundle.reports.len(), failed);
                    if failed == 0 {
                        Ok(())
                    } else {
                        Err(CliError::ChecksFailed(failed))
                    }
                }
                Command::Report { .. } => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fermigate: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
