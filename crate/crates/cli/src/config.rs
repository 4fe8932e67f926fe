//! Flat `key = value` run configuration.

use std::path::PathBuf;

use grainsense::domain::ContainerSpec;
use grainsense::granusim::NoiseModel;
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error, PartialEq)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub container: ContainerSpec,
    pub noise: NoiseModel,
    /// Root for outputs whose path is not set explicitly.
    pub out_dir: PathBuf,
    pub dataset_path: Option<PathBuf>,
    pub model_dir: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
    pub oracle_features: bool,
    pub ablation_rates: Vec<f64>,
    pub humidity_trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            container: ContainerSpec::default(),
            noise: NoiseModel::default(),
            out_dir: PathBuf::from("out"),
            dataset_path: None,
            model_dir: None,
            report_dir: None,
            oracle_features: false,
            ablation_rates: vec![800.0, 30.0],
            humidity_trials: 10,
        }
    }
}

impl RunConfig {
    pub fn dataset_path(&self) -> PathBuf {
        self.dataset_path
            .clone()
            .unwrap_or_else(|| self.out_dir.join("dataset.csv"))
    }

    pub fn model_dir(&self) -> PathBuf {
        self.model_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("models"))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.report_dir
            .clone()
            .unwrap_or_else(|| self.out_dir.join("reports"))
    }
}

fn positive(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| err(line, format!("`{key}` expects a number, got `{value}`")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(err(
            line,
            format!("`{key}` must be positive and finite, got {v}"),
        ));
    }
    Ok(v)
}

fn non_negative(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| err(line, format!("`{key}` expects a number, got `{value}`")))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(err(
            line,
            format!("`{key}` must be non-negative and finite, got {v}"),
        ));
    }
    Ok(v)
}

/// Parses a configuration. Blank lines and `#` comments are ignored; unset
/// keys keep their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut container_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let c = &mut cfg.container;
        match key {
            "seed" => {
                cfg.seed = value.parse().map_err(|_| {
                    err(
                        line,
                        format!("`seed` expects an unsigned integer, got `{value}`"),
                    )
                })?
            }
            "out_dir" => cfg.out_dir = PathBuf::from(value),
            "dataset_path" => cfg.dataset_path = Some(PathBuf::from(value)),
            "model_dir" => cfg.model_dir = Some(PathBuf::from(value)),
            "report_dir" => cfg.report_dir = Some(PathBuf::from(value)),
            "inner_width" => c.inner_width = positive(line, key, value)?,
            "inner_depth" => c.inner_depth = positive(line, key, value)?,
            "inner_height" => c.inner_height = positive(line, key, value)?,
            "container_mass_mc" => c.container_mass_mc = positive(line, key, value)?,
            "grasp_height" => c.grasp_height = positive(line, key, value)?,
            "gravity_g" => c.gravity_g = positive(line, key, value)?,
            "force_noise" => cfg.noise.force_sigma = non_negative(line, key, value)?,
            "torque_noise" => cfg.noise.torque_sigma = non_negative(line, key, value)?,
            "marker_noise" => cfg.noise.marker_sigma = non_negative(line, key, value)?,
            "oracle_features" => {
                cfg.oracle_features = value.parse().map_err(|_| {
                    err(
                        line,
                        format!("`oracle_features` expects true or false, got `{value}`"),
                    )
                })?
            }
            "ablation_rates" => {
                cfg.ablation_rates = value
                    .split(',')
                    .map(|v| positive(line, key, v.trim()))
                    .collect::<Result<_, _>>()?
            }
            "humidity_trials" => {
                let n: usize = value.parse().map_err(|_| {
                    err(
                        line,
                        format!("`humidity_trials` expects a count, got `{value}`"),
                    )
                })?;
                if n < 2 {
                    return Err(err(line, "`humidity_trials` must be at least 2"));
                }
                cfg.humidity_trials = n;
            }
            _ => return Err(err(line, format!("unknown key `{key}`"))),
        }
        if key.starts_with("inner_")
            || matches!(key, "container_mass_mc" | "grasp_height" | "gravity_g")
        {
            container_line = line;
        }
    }
    cfg.container
        .validate()
        .map_err(|e| err(container_line, e.to_string()))?;
    Ok(cfg)
}
