use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::transform::{Alpha, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    Timechange,
    Em,
    Both,
}

impl SchemeChoice {
    pub fn uses_timechange(self) -> bool {
        matches!(self, SchemeChoice::Timechange | SchemeChoice::Both)
    }

    pub fn uses_em(self) -> bool {
        matches!(self, SchemeChoice::Em | SchemeChoice::Both)
    }
}

/// CSV layout of `sample` output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// One `t,x,y` file per path and scheme.
    #[value(name = "per_path")]
    PerPath,
    /// One `path_id,t,x,y` file per scheme.
    Long,
}

/// Fully resolved settings of one campaign.
///
/// The output directory is kept out of the serialized form so manifests stay
/// free of machine-specific paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub alpha: f64,
    pub x0: f64,
    pub y0: f64,
    pub horizon: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub scheme: SchemeChoice,
    pub trunc_n: Option<u32>,
    pub oversample: usize,
    pub max_steps: usize,
    pub layout: Layout,
    pub allow_origin: bool,
    pub zero_noise: bool,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha: -0.25,
            x0: 1.0,
            y0: 0.0,
            horizon: 1.0,
            n_steps: 1024,
            n_paths: 10,
            seed: 0,
            scheme: SchemeChoice::Timechange,
            trunc_n: None,
            oversample: 16,
            max_steps: 1 << 20,
            layout: Layout::PerPath,
            allow_origin: false,
            zero_noise: false,
            output_dir: None,
        }
    }
}

/// Partial settings from a preset, a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigPatch {
    pub alpha: Option<f64>,
    pub x0: Option<f64>,
    pub y0: Option<f64>,
    pub horizon: Option<f64>,
    pub n_steps: Option<usize>,
    pub n_paths: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<SchemeChoice>,
    pub trunc_n: Option<Option<u32>>,
    pub oversample: Option<usize>,
    pub max_steps: Option<usize>,
    pub layout: Option<Layout>,
    pub allow_origin: Option<bool>,
    pub zero_noise: Option<bool>,
    pub output_dir: Option<PathBuf>,
}

fn parse<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("invalid value {value:?} for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Usage(format!("invalid boolean {value:?} for `{key}`"))),
    }
}

fn parse_enum<V: ValueEnum>(key: &str, value: &str) -> Result<V, CliError> {
    V::from_str(value, true).map_err(|_| CliError::Usage(format!("invalid value {value:?} for `{key}`")))
}

impl ConfigPatch {
    /// Set one field from its textual form. Keys accept both the flag spelling
    /// (`steps`, `trunc-n`) and the field name (`n_steps`, `trunc_n`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "alpha" => self.alpha = Some(parse(key, value)?),
            "x0" => self.x0 = Some(parse(key, value)?),
            "y0" => self.y0 = Some(parse(key, value)?),
            "horizon" => self.horizon = Some(parse(key, value)?),
            "steps" | "n_steps" => self.n_steps = Some(parse(key, value)?),
            "paths" | "n_paths" => self.n_paths = Some(parse(key, value)?),
            "seed" => self.seed = Some(parse(key, value)?),
            "scheme" => self.scheme = Some(parse_enum(key, value)?),
            "trunc_n" => {
                self.trunc_n = Some(match value {
                    "" | "none" | "null" => None,
                    v => Some(parse(key, v)?),
                })
            }
            "oversample" => self.oversample = Some(parse(key, value)?),
            "max_steps" => self.max_steps = Some(parse(key, value)?),
            "layout" => self.layout = Some(parse_enum(key, value)?),
            "allow_origin" => self.allow_origin = Some(parse_bool(key, value)?),
            "zero_noise" => self.zero_noise = Some(parse_bool(key, value)?),
            "out" | "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Flat `key = value` text; `#` starts a comment.
    pub fn from_key_values(text: &str) -> Result<Self, CliError> {
        let mut patch = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("line {}: expected `key = value`", lineno + 1)))?;
            patch.set(k, v)?;
        }
        Ok(patch)
    }

    /// The `config` object of a manifest written by `sample`.
    pub fn from_manifest(text: &str) -> Result<Self, CliError> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("manifest is not valid JSON: {e}")))?;
        let cfg = doc
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| CliError::Usage("manifest has no `config` object".into()))?;
        let mut patch = Self::default();
        for (k, v) in cfg {
            let text = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => "none".into(),
                other => other.to_string(),
            };
            patch.set(k, &text)?;
        }
        Ok(patch)
    }

    /// Reads either format; JSON is recognised by a leading `{`.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if text.trim_start().starts_with('{') {
            Self::from_manifest(&text)
        } else {
            Self::from_key_values(&text)
        }
    }

    /// Fields set in `other` win.
    pub fn merge(mut self, other: ConfigPatch) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            alpha, x0, y0, horizon, n_steps, n_paths, seed, scheme, trunc_n, oversample, max_steps, layout,
            allow_origin, zero_noise, output_dir
        );
        self
    }

    pub fn apply(self, mut cfg: ExperimentConfig) -> ExperimentConfig {
        macro_rules! put {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        put!(
            alpha, x0, y0, horizon, n_steps, n_paths, seed, scheme, trunc_n, oversample, max_steps, layout,
            allow_origin, zero_noise
        );
        if let Some(dir) = self.output_dir {
            cfg.output_dir = Some(dir);
        }
        cfg
    }
}

impl ExperimentConfig {
    pub fn alpha(&self) -> Alpha<f64> {
        Alpha::new(self.alpha).expect("validated")
    }

    pub fn start(&self) -> Phase<f64> {
        Phase::new(self.x0, self.y0)
    }

    /// Enforces the invariants every command relies on.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.alpha > -0.5) || !self.alpha.is_finite() {
            return bad(format!("alpha must be finite and > -1/2, got {}", self.alpha));
        }
        if !self.x0.is_finite() || !self.y0.is_finite() {
            return bad("x0 and y0 must be finite".into());
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.n_steps < 2 {
            return bad(format!("steps must be at least 2, got {}", self.n_steps));
        }
        if self.n_paths < 1 {
            return bad("paths must be at least 1".into());
        }
        if self.oversample < 1 {
            return bad("oversample must be at least 1".into());
        }
        if self.start().is_origin() && !(self.scheme == SchemeChoice::Em && self.allow_origin) {
            return bad("start (0, 0) is only accepted with --scheme em --allow-origin".into());
        }
        if self.scheme.uses_timechange() && self.alpha > 0.0 {
            return bad(format!("the time-change sampler needs alpha <= 0, got {}", self.alpha));
        }
        if self.scheme.uses_em() && self.alpha < 0.0 && self.trunc_n.is_none() {
            return bad("Euler-Maruyama with alpha < 0 needs --trunc-n to bound the coefficient".into());
        }
        if self.trunc_n == Some(0) {
            return bad("trunc-n must be at least 1".into());
        }
        Ok(())
    }
}
