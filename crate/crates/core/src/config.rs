//! `key = value` run configuration files.
//!
//! One setting per line; blank lines and `#` comments are ignored. Every
//! key is optional so that command-line flags can fill in or override it.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::Method;
use crate::sweep::{Spacing, SweepVariable};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub g: Option<f64>,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub u: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub n_trajectories: Option<usize>,
    pub max_time: Option<f64>,
    pub zero_tol: Option<f64>,
    pub variable: Option<SweepVariable>,
    pub grid_start: Option<f64>,
    pub grid_stop: Option<f64>,
    pub grid_count: Option<usize>,
    pub grid_spacing: Option<Spacing>,
    pub methods: Option<Vec<Method>>,
}

pub const KEYS: [&str; 16] = [
    "G",
    "Delta",
    "eta",
    "U",
    "N",
    "seed",
    "dt",
    "n_trajectories",
    "max_time",
    "zero_tol",
    "variable",
    "grid.start",
    "grid.stop",
    "grid.count",
    "grid.spacing",
    "methods",
];

fn number<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("cannot parse `{value}` for {key}"),
    })
}

pub fn parse_methods(value: &str) -> std::result::Result<Vec<Method>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Method::parse(s).ok_or_else(|| format!("unknown method `{s}`")))
        .collect()
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected key = value, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(Error::Config {
                    line,
                    message: format!("{key} already set on line {prev}"),
                });
            }
            match key {
                "G" => cfg.g = Some(number(line, key, value)?),
                "Delta" => cfg.delta = Some(number(line, key, value)?),
                "eta" => cfg.eta = Some(number(line, key, value)?),
                "U" => cfg.u = Some(number(line, key, value)?),
                "N" => cfg.n = Some(number(line, key, value)?),
                "seed" => cfg.seed = Some(number(line, key, value)?),
                "dt" => cfg.dt = Some(number(line, key, value)?),
                "n_trajectories" => cfg.n_trajectories = Some(number(line, key, value)?),
                "max_time" => cfg.max_time = Some(number(line, key, value)?),
                "zero_tol" => cfg.zero_tol = Some(number(line, key, value)?),
                "grid.start" => cfg.grid_start = Some(number(line, key, value)?),
                "grid.stop" => cfg.grid_stop = Some(number(line, key, value)?),
                "grid.count" => cfg.grid_count = Some(number(line, key, value)?),
                "variable" => {
                    cfg.variable = Some(SweepVariable::parse(value).ok_or_else(|| Error::Config {
                        line,
                        message: format!("unknown sweep variable `{value}`"),
                    })?)
                }
                "grid.spacing" => {
                    cfg.grid_spacing = Some(Spacing::parse(value).ok_or_else(|| Error::Config {
                        line,
                        message: format!("spacing must be linear or log, got `{value}`"),
                    })?)
                }
                "methods" => {
                    cfg.methods = Some(parse_methods(value).map_err(|message| Error::Config { line, message })?)
                }
                _ => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
