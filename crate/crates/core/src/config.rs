//! Run configuration: a flat TOML document overlaid by command-line flags.
//!
//! Precedence, highest first: flags, config file, `ANNEAL_NOISE_SEED` (seed
//! only), built-in defaults. Every rejected value is reported with its key.

use std::path::{Path, PathBuf};

use crate::annealing::AnnealingSchedule;
use crate::error::{Error, Result};
use crate::experiments::{TableConfig, TargetFunction, DEFAULT_GRID_SIZE, DEFAULT_NOISE_LEVELS};
use crate::network::WeightBounds;

pub const SEED_ENV_VAR: &str = "ANNEAL_NOISE_SEED";
pub const DEFAULT_SEED: u32 = 1;

/// Keys accepted in a config file.
pub const KNOWN_KEYS: [&str; 14] = [
    "function",
    "noise_percent",
    "seed",
    "seeds",
    "noise_levels",
    "grid_size",
    "t_initial",
    "cooling_factor",
    "steps_per_temperature",
    "t_final",
    "move_step",
    "bounds_min",
    "bounds_max",
    "output_dir",
];

/// Partially specified settings, from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub function: Option<String>,
    pub noise_percent: Option<f64>,
    pub seed: Option<u64>,
    pub seeds: Option<Vec<u64>>,
    pub noise_levels: Option<Vec<f64>>,
    pub grid_size: Option<i64>,
    pub t_initial: Option<f64>,
    pub cooling_factor: Option<f64>,
    pub steps_per_temperature: Option<i64>,
    pub t_final: Option<f64>,
    pub move_step: Option<f64>,
    pub bounds_min: Option<f64>,
    pub bounds_max: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

fn as_float(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(Error::config(
            key,
            format!("expected a number, got {}", other.type_str()),
        )),
    }
}

fn as_int(key: &str, v: &toml::Value) -> Result<i64> {
    match v {
        toml::Value::Integer(i) => Ok(*i),
        other => Err(Error::config(
            key,
            format!("expected an integer, got {}", other.type_str()),
        )),
    }
}

fn as_seed(key: &str, v: &toml::Value) -> Result<u64> {
    let i = as_int(key, v)?;
    u64::try_from(i).map_err(|_| Error::config(key, format!("seed must be non-negative, got {i}")))
}

fn as_str<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(key, format!("expected a string, got {}", v.type_str())))
}

fn as_array<'a>(key: &str, v: &'a toml::Value) -> Result<&'a [toml::Value]> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| Error::config(key, format!("expected an array, got {}", v.type_str())))
}

impl ConfigLayer {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        let mut layer = ConfigLayer::default();
        for (key, v) in &table {
            let k = key.as_str();
            match k {
                "function" => layer.function = Some(as_str(k, v)?.to_string()),
                "noise_percent" => layer.noise_percent = Some(as_float(k, v)?),
                "seed" => layer.seed = Some(as_seed(k, v)?),
                "seeds" => {
                    layer.seeds = Some(
                        as_array(k, v)?
                            .iter()
                            .map(|s| as_seed(k, s))
                            .collect::<Result<_>>()?,
                    )
                }
                "noise_levels" => {
                    layer.noise_levels = Some(
                        as_array(k, v)?
                            .iter()
                            .map(|s| as_float(k, s))
                            .collect::<Result<_>>()?,
                    )
                }
                "grid_size" => layer.grid_size = Some(as_int(k, v)?),
                "t_initial" => layer.t_initial = Some(as_float(k, v)?),
                "cooling_factor" => layer.cooling_factor = Some(as_float(k, v)?),
                "steps_per_temperature" => layer.steps_per_temperature = Some(as_int(k, v)?),
                "t_final" => layer.t_final = Some(as_float(k, v)?),
                "move_step" => layer.move_step = Some(as_float(k, v)?),
                "bounds_min" => layer.bounds_min = Some(as_float(k, v)?),
                "bounds_max" => layer.bounds_max = Some(as_float(k, v)?),
                "output_dir" => layer.output_dir = Some(PathBuf::from(as_str(k, v)?)),
                _ => return Err(Error::config(k, "unknown key")),
            }
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Fields set in `self` win over `base`.
    pub fn over(self, base: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            function: self.function.or(base.function),
            noise_percent: self.noise_percent.or(base.noise_percent),
            seed: self.seed.or(base.seed),
            seeds: self.seeds.or(base.seeds),
            noise_levels: self.noise_levels.or(base.noise_levels),
            grid_size: self.grid_size.or(base.grid_size),
            t_initial: self.t_initial.or(base.t_initial),
            cooling_factor: self.cooling_factor.or(base.cooling_factor),
            steps_per_temperature: self.steps_per_temperature.or(base.steps_per_temperature),
            t_final: self.t_final.or(base.t_final),
            move_step: self.move_step.or(base.move_step),
            bounds_min: self.bounds_min.or(base.bounds_min),
            bounds_max: self.bounds_max.or(base.bounds_max),
            output_dir: self.output_dir.or(base.output_dir),
        }
    }
}

/// Fully resolved and validated settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub function: TargetFunction,
    pub noise_percent: f64,
    pub seed: u32,
    /// Seeds for the table command; defaults to `[seed]`.
    pub seeds: Vec<u32>,
    /// Noise levels for the table command.
    pub noise_levels: Vec<f64>,
    pub grid_size: usize,
    pub schedule: AnnealingSchedule,
    pub bounds: WeightBounds,
    /// True when `bounds_min` or `bounds_max` was given explicitly.
    pub bounds_overridden: bool,
    pub output_dir: PathBuf,
}

fn to_seed(key: &str, s: u64) -> Result<u32> {
    u32::try_from(s).map_err(|_| Error::config(key, format!("seed {s} does not fit in 32 bits")))
}

fn check_noise(key: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(
            key,
            format!("noise must be finite and >= 0, got {v}"),
        ))
    }
}

impl RunConfig {
    /// Resolves `flags` over `file`, with `env_seed` as the seed fallback.
    pub fn resolve(flags: ConfigLayer, file: ConfigLayer, env_seed: Option<&str>) -> Result<Self> {
        let c = flags.over(file);

        let function = match &c.function {
            Some(name) => name
                .parse::<TargetFunction>()
                .map_err(|e| Error::config("function", e.to_string()))?,
            None => TargetFunction::Square,
        };

        let noise_percent = check_noise("noise_percent", c.noise_percent.unwrap_or(0.0))?;

        let seed = match (c.seed, env_seed) {
            (Some(s), _) => to_seed("seed", s)?,
            (None, Some(raw)) => {
                let parsed = raw
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| Error::config(SEED_ENV_VAR, format!("bad seed {raw:?}: {e}")))?;
                to_seed(SEED_ENV_VAR, parsed)?
            }
            (None, None) => DEFAULT_SEED,
        };

        let schedule = resolve_schedule(&c)?;

        let seeds = match c.seeds {
            Some(list) if list.is_empty() => {
                return Err(Error::config("seeds", "at least one seed is required"))
            }
            Some(list) => list
                .into_iter()
                .map(|s| to_seed("seeds", s))
                .collect::<Result<_>>()?,
            None => vec![seed],
        };

        let noise_levels = match c.noise_levels {
            Some(list) if list.is_empty() => {
                return Err(Error::config(
                    "noise_levels",
                    "at least one noise level is required",
                ))
            }
            Some(list) => list
                .into_iter()
                .map(|v| check_noise("noise_levels", v))
                .collect::<Result<_>>()?,
            None => DEFAULT_NOISE_LEVELS.to_vec(),
        };

        let grid_size = match c.grid_size {
            None => DEFAULT_GRID_SIZE,
            Some(n) if n >= 1 => n as usize,
            Some(n) => return Err(Error::config("grid_size", format!("must be >= 1, got {n}"))),
        };

        let defaults = function.default_bounds();
        let bounds_overridden = c.bounds_min.is_some() || c.bounds_max.is_some();
        let (min, max) = (
            c.bounds_min.unwrap_or(defaults.min()),
            c.bounds_max.unwrap_or(defaults.max()),
        );
        let bounds = WeightBounds::new(min, max).map_err(|e| {
            let key = if c.bounds_min.is_some() {
                "bounds_min"
            } else {
                "bounds_max"
            };
            Error::config(key, e.to_string())
        })?;

        Ok(RunConfig {
            function,
            noise_percent,
            seed,
            seeds,
            noise_levels,
            grid_size,
            schedule,
            bounds,
            bounds_overridden,
            output_dir: c.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    /// Table settings: both functions, each with its own default bounds
    /// unless bounds were overridden.
    pub fn table_config(&self) -> TableConfig {
        TableConfig {
            functions: TargetFunction::ALL.to_vec(),
            noise_levels: self.noise_levels.clone(),
            schedule: self.schedule,
            bounds_override: self.bounds_overridden.then_some(self.bounds),
            grid_size: self.grid_size,
        }
    }
}

fn resolve_schedule(c: &ConfigLayer) -> Result<AnnealingSchedule> {
    let d = AnnealingSchedule::default();
    let t_initial = c.t_initial.unwrap_or(d.t_initial);
    if !(t_initial.is_finite() && t_initial > 0.0) {
        return Err(Error::config(
            "t_initial",
            format!("must be positive, got {t_initial}"),
        ));
    }
    let cooling_factor = c.cooling_factor.unwrap_or(d.cooling_factor);
    if !(cooling_factor > 0.0 && cooling_factor < 1.0) {
        return Err(Error::config(
            "cooling_factor",
            format!("must lie in (0, 1), got {cooling_factor}"),
        ));
    }
    let steps = c
        .steps_per_temperature
        .map_or(Ok(d.steps_per_temperature), |s| {
            usize::try_from(s).ok().filter(|&s| s >= 1).ok_or_else(|| {
                Error::config("steps_per_temperature", format!("must be >= 1, got {s}"))
            })
        })?;
    let t_final = c.t_final.unwrap_or(d.t_final);
    if !(t_final > 0.0 && t_final < t_initial) {
        return Err(Error::config(
            "t_final",
            format!("must satisfy 0 < t_final < t_initial ({t_initial}), got {t_final}"),
        ));
    }
    let move_step = c.move_step.unwrap_or(d.move_step);
    if !(move_step > 0.0 && move_step <= 1.0) {
        return Err(Error::config(
            "move_step",
            format!("must lie in (0, 1], got {move_step}"),
        ));
    }
    Ok(AnnealingSchedule {
        t_initial,
        cooling_factor,
        steps_per_temperature: steps,
        t_final,
        move_step,
    })
}
