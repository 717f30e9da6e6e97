//! Merges command-line flags, an optional config file and built-in defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;

use catflip_core::config::{parse_methods, ConfigFile};
use catflip_core::emit::format_float;
use catflip_core::{
    EvalOptions, Error, Method, ModelParams, Result, Spacing, SweepGrid, SweepVariable,
};
use clap::Args;

pub const DEFAULT_G: f64 = 6.0;
pub const DEFAULT_DELTA: f64 = 3.0;
pub const DEFAULT_ETA: f64 = 1.0;
pub const DEFAULT_U: f64 = 0.0;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key=value config file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Two-photon pump rate G.
    #[arg(long = "G", global = true, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Detuning Delta.
    #[arg(long = "Delta", global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Two-photon loss rate eta.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// Kerr nonlinearity U.
    #[arg(long = "U", global = true, allow_hyphen_values = true)]
    pub u: Option<f64>,
    /// Set eta = k cos(theta), U = k sin(theta), with k from --kappa2 or |eta + iU|.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Modulus |kappa2| used together with --theta.
    #[arg(long, global = true)]
    pub kappa2: Option<f64>,
    /// Fock truncation (adaptive when absent).
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Random seed for the Langevin simulation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Langevin time step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Relative threshold below which an eigenvalue counts as zero.
    #[arg(long, global = true)]
    pub zero_tol: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(short, long, global = true)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp out of the output metadata.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

/// Effective settings and the record of where they came from.
#[derive(Debug, Clone)]
pub struct Settings {
    pub file: ConfigFile,
    pub params: ModelParams,
    pub options: EvalOptions,
    pub echo: BTreeMap<String, String>,
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

impl Settings {
    pub fn resolve(common: &Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let g = pick(common.g, file.g, DEFAULT_G);
        let delta = pick(common.delta, file.delta, DEFAULT_DELTA);
        let mut eta = pick(common.eta, file.eta, DEFAULT_ETA);
        let mut u = pick(common.u, file.u, DEFAULT_U);
        if let Some(theta) = common.theta {
            let k = common.kappa2.unwrap_or_else(|| eta.hypot(u));
            let p = ModelParams::from_polar(g, delta, k, theta)?;
            eta = p.eta;
            u = p.u;
        } else if common.kappa2.is_some() {
            return Err(Error::InvalidArgument("--kappa2 needs --theta".into()));
        }
        let params = ModelParams::new(g, delta, eta, u)?;
        let defaults = EvalOptions::default();
        let options = EvalOptions {
            truncation: common.n.or(file.n),
            zero_tol: pick(common.zero_tol, file.zero_tol, defaults.zero_tol),
            seed: pick(common.seed, file.seed, defaults.seed),
            dt: pick(common.dt, file.dt, defaults.dt),
            n_trajectories: file.n_trajectories.unwrap_or(defaults.n_trajectories),
            max_time: file.max_time.unwrap_or(defaults.max_time),
        };
        let mut echo = BTreeMap::new();
        for (k, v) in [
            ("G", params.g),
            ("Delta", params.delta),
            ("eta", params.eta),
            ("U", params.u),
            ("dt", options.dt),
            ("zero_tol", options.zero_tol),
            ("max_time", options.max_time),
        ] {
            echo.insert(k.to_string(), format_float(v));
        }
        echo.insert("seed".into(), options.seed.to_string());
        echo.insert("n_trajectories".into(), options.n_trajectories.to_string());
        echo.insert(
            "N".into(),
            options.truncation.map_or("auto".into(), |n| n.to_string()),
        );
        Ok(Settings {
            file,
            params,
            options,
            echo,
        })
    }

    pub fn set_trajectories(&mut self, n: Option<usize>) {
        if let Some(n) = n {
            self.options.n_trajectories = n;
            self.echo.insert("n_trajectories".into(), n.to_string());
        }
    }

    pub fn set_max_time(&mut self, t: Option<f64>) {
        if let Some(t) = t {
            self.options.max_time = t;
            self.echo.insert("max_time".into(), format_float(t));
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.echo.insert(key.to_string(), value.to_string());
    }

    /// Methods from the flag, else the config file, else `default`.
    pub fn methods(&mut self, flag: Option<&str>, default: &[Method]) -> Result<Vec<Method>> {
        let methods = match flag {
            Some(s) => parse_methods(s).map_err(Error::InvalidArgument)?,
            None => self.file.methods.clone().unwrap_or_else(|| default.to_vec()),
        };
        let names: Vec<&str> = methods.iter().map(|m| m.as_str()).collect();
        self.note("methods", names.join(","));
        Ok(methods)
    }
}

/// Sweep-specific flags.
#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Swept variable: Delta, theta, G or U_over_eta.
    #[arg(long)]
    pub variable: Option<String>,
    /// First grid value.
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    /// Last grid value.
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub count: Option<usize>,
    /// linear or log.
    #[arg(long)]
    pub spacing: Option<String>,
}

impl GridArgs {
    pub fn resolve(&self, settings: &mut Settings) -> Result<(SweepVariable, SweepGrid)> {
        let variable = match &self.variable {
            Some(s) => SweepVariable::parse(s)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown sweep variable `{s}`")))?,
            None => settings.file.variable.unwrap_or(SweepVariable::Delta),
        };
        let spacing = match &self.spacing {
            Some(s) => Spacing::parse(s)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown spacing `{s}`")))?,
            None => settings.file.grid_spacing.unwrap_or(Spacing::Linear),
        };
        let grid = SweepGrid {
            start: pick(self.start, settings.file.grid_start, 0.0),
            stop: pick(self.stop, settings.file.grid_stop, 0.98 * settings.params.g),
            count: pick(self.count, settings.file.grid_count, 50),
            spacing,
        };
        settings.note("variable", variable.name());
        settings.note("grid.start", format_float(grid.start));
        settings.note("grid.stop", format_float(grid.stop));
        settings.note("grid.count", grid.count);
        settings.note(
            "grid.spacing",
            match spacing {
                Spacing::Linear => "linear",
                Spacing::Log => "log",
            },
        );
        Ok((variable, grid))
    }
}
