use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spectral_lift_cli::output::{diff, read_baseline, spectra_from_rows, write_diff};
use spectral_lift_cli::{artifact_paths, render, run, CliError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "spectral-lift", version, about = "Build truncated spectral triples and verify their identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Tolerance for pass/fail checks (overrides the config).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Window sizes, comma separated (overrides the config).
    #[arg(long, global = true, value_delimiter = ',')]
    window: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Seed for the randomized checks (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write the spectrum CSV and report JSON.
    Run { config: PathBuf },
    /// Run an experiment and diff its spectrum against a baseline CSV.
    Compare { config: PathBuf, baseline: PathBuf },
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    Overrides {
        tolerance: cli.tolerance,
        windows: cli.window.clone(),
        seed: cli.seed,
    }
    .apply(&mut cfg)?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(cli, config)?;
            let out = run(&cfg)?;
            let (csv, json) = render(&out)?;
            std::fs::create_dir_all(&cli.out)?;
            let (csv_path, json_path) = artifact_paths(&cfg, config, &cli.out);
            std::fs::write(&csv_path, csv)?;
            std::fs::write(&json_path, json)?;
            let checks: usize = out.reports.iter().map(|r| r.report.entries.len()).sum();
            println!(
                "wrote {} and {} ({} spectrum rows, {checks} checks)",
                csv_path.display(),
                json_path.display(),
                out.rows.len()
            );
            match out.first_failure() {
                Some(err) => Err(err),
                None => Ok(()),
            }
        }
        Command::Compare { config, baseline } => {
            let cfg = load(cli, config)?;
            let file = std::fs::File::open(baseline).map_err(|e| CliError::Baseline(format!("cannot open {}: {e}", baseline.display())))?;
            let base = read_baseline(file)?;
            let out = run(&cfg)?;
            let entries = diff(&base, &spectra_from_rows(&out.rows), cfg.tolerance);
            write_diff(&entries, std::io::stdout().lock())?;
            if entries.is_empty() {
                Ok(())
            } else {
                Err(CliError::BaselineMismatch(entries.len()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
