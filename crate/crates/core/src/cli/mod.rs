//! The `degsde` command line: `sample` writes path CSVs and a manifest,
//! `check` runs one named diagnostic and prints a JSON report.
//!
//! Settings resolve in order: built-in defaults (or the check's preset), then
//! `--config FILE` (flat `key = value` text or a `manifest.json`), then flags.
//! Exit codes: `0` pass, `1` check failure, `2` usage or I/O error.

mod check;
mod config;
mod output;
mod sample;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use check::{coupled_em_d_curve, run_check, CheckName, CheckReport, Verdict};
pub use config::{ConfigPatch, ExperimentConfig, Layout, SchemeChoice};
pub use output::FileRecord;
pub use sample::{cmd_sample, simulate, Manifest, PathRecord, PathStatus};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] crate::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "degsde", version, about = "Sample and check dX = Y dt, dY = |X|^alpha dB")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate paths and write `t,x,y` CSVs plus manifest.json.
    Sample {
        #[command(flatten)]
        opts: CommonArgs,
    },
    /// Run one diagnostic and print its JSON report.
    Check {
        #[arg(value_enum)]
        name: CheckName,
        #[command(flatten)]
        opts: CommonArgs,
        /// Exit 0 when the verdict is inconclusive.
        #[arg(long)]
        allow_inconclusive: bool,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeChoice>,
    #[arg(long)]
    trunc_n: Option<u32>,
    /// Time-change sampler: `s` steps per output step.
    #[arg(long)]
    oversample: Option<usize>,
    /// Time-change sampler: cap on `s` steps when extending the clock.
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, value_enum)]
    layout: Option<Layout>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` file or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Accept the start (0, 0) for exploratory Euler-Maruyama runs.
    #[arg(long)]
    allow_origin: bool,
    /// Debug: replace the driver by B = 0.
    #[arg(long)]
    zero_noise: bool,
}

impl CommonArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            alpha: self.alpha,
            x0: self.x0,
            y0: self.y0,
            horizon: self.horizon,
            n_steps: self.steps,
            n_paths: self.paths,
            seed: self.seed,
            scheme: self.scheme,
            trunc_n: self.trunc_n.map(Some),
            oversample: self.oversample,
            max_steps: self.max_steps,
            layout: self.layout,
            allow_origin: self.allow_origin.then_some(true),
            zero_noise: self.zero_noise.then_some(true),
            output_dir: self.out.clone(),
        }
    }

    fn resolve(&self, preset: ConfigPatch) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigPatch::from_file(p)?,
            None => ConfigPatch::default(),
        };
        let cfg = preset.merge(file).merge(self.patch()).apply(ExperimentConfig::default());
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Sample { opts } => {
            let cfg = opts.resolve(ConfigPatch::default())?;
            let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("degsde-out"));
            let m = cmd_sample(&cfg, &dir)?;
            println!(
                "wrote {} files and manifest.json to {} ({} horizon cap hits)",
                m.files.len(),
                dir.display(),
                m.horizon_cap_hits
            );
            Ok(EXIT_PASS)
        }
        Command::Check {
            name,
            opts,
            allow_inconclusive,
        } => {
            let cfg = opts.resolve(name.preset())?;
            let report = run_check(name, &cfg)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            if let Some(dir) = &cfg.output_dir {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join(format!("check_{}.json", name.as_str()));
                std::fs::write(&path, &text).map_err(|e| CliError::io(&path, e))?;
            }
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            Ok(match report.verdict {
                Verdict::Pass => EXIT_PASS,
                Verdict::Inconclusive if allow_inconclusive => EXIT_PASS,
                _ => EXIT_FAIL,
            })
        }
    }
}

/// Parse `args` (program name first) and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
