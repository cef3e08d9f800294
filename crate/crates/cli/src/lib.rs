//! Batch driver: experiment configs in, spectra and verification reports out.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::CliError;
pub use run::{run, RunOutput, SpectrumRow, WindowReport};

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tolerance: Option<f64>,
    pub windows: Option<Vec<usize>>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(t) = self.tolerance {
            cfg.tolerance = t;
        }
        if let Some(w) = &self.windows {
            cfg.windows = w.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()
    }
}

/// Where the artifacts of a run go: explicit paths from the config, else
/// `<out>/<config stem>.csv|.json`.
pub fn artifact_paths(cfg: &ExperimentConfig, config_path: &Path, out_dir: &Path) -> (PathBuf, PathBuf) {
    let stem = config_path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment");
    let pick = |explicit: Option<&String>, ext: &str| explicit.map(|p| out_dir.join(p)).unwrap_or_else(|| out_dir.join(format!("{stem}.{ext}")));
    let paths = cfg.output.as_ref();
    (
        pick(paths.and_then(|p| p.csv.as_ref()), "csv"),
        pick(paths.and_then(|p| p.json.as_ref()), "json"),
    )
}

/// CSV and JSON bytes of one run.
pub fn render(output: &RunOutput) -> Result<(Vec<u8>, Vec<u8>), CliError> {
    Ok((output::csv_bytes(&output.rows)?, output::json_bytes(&output.reports)?))
}

/// Parse, run and render a config given as JSON text.
pub fn run_json(text: &str, overrides: &Overrides) -> Result<(RunOutput, Vec<u8>, Vec<u8>), CliError> {
    let mut cfg = ExperimentConfig::from_json(text)?;
    overrides.apply(&mut cfg)?;
    let out = run(&cfg)?;
    let (csv, json) = render(&out)?;
    Ok((out, csv, json))
}
