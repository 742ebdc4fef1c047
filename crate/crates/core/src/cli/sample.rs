use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Layout};
use super::output::{self, CsvFile, FileRecord};
use super::CliError;
use crate::driver::{sample_driver, DriverPath, TimeGrid};
use crate::error::Error;
use crate::path::{Scheme, SolutionPath};
use crate::schemes::{euler_maruyama, TruncationSpec};
use crate::timechange::{Noise, TimeChangeSampler};

/// Paths generated per parallel batch before they are written out.
const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Ok,
    /// The clock did not reach the horizon within `max_steps`.
    HorizonCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathRecord {
    pub path_id: usize,
    pub scheme: &'static str,
    pub seed: u64,
    pub stream_id: u64,
    pub status: PathStatus,
    pub driver_steps: usize,
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub horizon_cap_hits: usize,
    pub paths: Vec<PathRecord>,
    pub files: Vec<FileRecord>,
}

pub fn grid(cfg: &ExperimentConfig) -> Result<TimeGrid<f64>, CliError> {
    Ok(TimeGrid::uniform(cfg.horizon, cfg.n_steps)?)
}

pub fn trunc(cfg: &ExperimentConfig) -> Result<Option<TruncationSpec<f64>>, CliError> {
    Ok(cfg.trunc_n.map(TruncationSpec::new).transpose()?)
}

/// Path `path_id` of the campaign under `scheme`, or `None` if the
/// time-change clock hit its step cap.
///
/// Path `i` always reads driver stream `i`, so the two schemes of a `both`
/// campaign are paired by id.
pub fn simulate(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    grid: &TimeGrid<f64>,
    path_id: usize,
) -> Result<Option<SolutionPath<f64>>, CliError> {
    let stream_id = path_id as u64;
    match scheme {
        Scheme::TimeChange => {
            let sampler = TimeChangeSampler {
                oversample: cfg.oversample,
                max_steps: cfg.max_steps,
            };
            let noise = if cfg.zero_noise {
                Noise::Zero
            } else {
                Noise::Seeded {
                    seed: cfg.seed,
                    stream_id,
                }
            };
            match sampler.sample(cfg.start(), cfg.alpha(), grid, noise) {
                Ok(p) => Ok(Some(p)),
                Err(Error::HorizonCap { .. }) => Ok(None),
                Err(e) => Err(e.into()),
            }
        }
        Scheme::EulerMaruyama => {
            let driver = if cfg.zero_noise {
                DriverPath::zero(grid.clone())
            } else {
                sample_driver(grid, cfg.seed, stream_id)
            };
            Ok(Some(euler_maruyama(cfg.start(), cfg.alpha(), &driver, trunc(cfg)?)?))
        }
    }
}

pub fn schemes(cfg: &ExperimentConfig) -> Vec<Scheme> {
    let mut out = Vec::new();
    if cfg.scheme.uses_timechange() {
        out.push(Scheme::TimeChange);
    }
    if cfg.scheme.uses_em() {
        out.push(Scheme::EulerMaruyama);
    }
    out
}

fn per_path_name(scheme: Scheme, id: usize) -> String {
    format!("{}_{id:05}.csv", scheme.tag())
}

fn long_name(scheme: Scheme) -> String {
    format!("{}_paths.csv", scheme.tag())
}

/// Generate every path of the campaign and write CSVs plus `manifest.json`
/// into `dir`.
///
/// Generation runs in parallel batches; writing happens in path order, so the
/// bytes on disk do not depend on the thread count.
pub fn cmd_sample(cfg: &ExperimentConfig, dir: &Path) -> Result<Manifest, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let grid = grid(cfg)?;
    let schemes = schemes(cfg);
    let long = cfg.layout == Layout::Long;
    let io = |name: &str, e| CliError::io(&dir.join(name), e);

    let mut long_files: Vec<(String, CsvFile)> = Vec::new();
    if long {
        for &s in &schemes {
            let name = long_name(s);
            let mut w = output::create(dir, &name)?;
            output::write_header(&mut w, true).map_err(|e| io(&name, e))?;
            long_files.push((name, w));
        }
    }

    let mut paths = Vec::with_capacity(cfg.n_paths * schemes.len());
    let mut files = Vec::new();
    let mut cap_hits = 0;
    for start in (0..cfg.n_paths).step_by(BATCH) {
        let ids: Vec<usize> = (start..(start + BATCH).min(cfg.n_paths)).collect();
        let batch: Vec<Vec<Option<SolutionPath<f64>>>> = ids
            .par_iter()
            .map(|&id| schemes.iter().map(|&s| simulate(cfg, s, &grid, id)).collect())
            .collect::<Result<_, _>>()?;
        for (&id, generated) in ids.iter().zip(batch) {
            for (j, (scheme, path)) in schemes.iter().zip(generated).enumerate() {
                let mut record = PathRecord {
                    path_id: id,
                    scheme: scheme.tag(),
                    seed: cfg.seed,
                    stream_id: id as u64,
                    status: PathStatus::HorizonCap,
                    driver_steps: 0,
                    file: None,
                };
                if let Some(p) = path {
                    record.status = PathStatus::Ok;
                    record.driver_steps = p.driver_steps;
                    if long {
                        let (name, w) = &mut long_files[j];
                        output::write_rows(w, &p, Some(id)).map_err(|e| io(name, e))?;
                        record.file = Some(name.clone());
                    } else {
                        let name = per_path_name(*scheme, id);
                        let mut w = output::create(dir, &name)?;
                        output::write_header(&mut w, false)
                            .and_then(|_| output::write_rows(&mut w, &p, None))
                            .map_err(|e| io(&name, e))?;
                        files.push(output::close(w, dir, &name)?);
                        record.file = Some(name);
                    }
                } else {
                    cap_hits += 1;
                }
                paths.push(record);
            }
        }
    }
    for (name, w) in long_files {
        files.push(output::close(w, dir, &name)?);
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "sample",
        config: cfg.clone(),
        horizon_cap_hits: cap_hits,
        paths,
        files,
    };
    output::write_json(dir, "manifest.json", &manifest)?;
    Ok(manifest)
}
