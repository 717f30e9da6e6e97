//! `catflip`: switching rates of a two-photon driven Kerr resonator.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a sweep finished with failed
//! cells (output still written), 4 I/O failure.

mod settings;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use catflip_core::emit::{self, Document, Metadata};
use catflip_core::kramers::{self, EffectivePotential};
use catflip_core::liouvillian;
use catflip_core::semiclassical::{self, QuadratureState};
use catflip_core::sweep::{self, default_detuning_range, DEFAULT_SCAN_POINTS};
use catflip_core::wigner;
use catflip_core::{
    classify_regime, langevin, Error, GridSpec, GridValues, Method, ModelParams, PhaseSpaceGrid,
    Result, SweepSpec,
};
use clap::{Parser, Subcommand};
use serde::Serialize;

use settings::{Common, GridArgs, Settings};

#[derive(Debug, Parser)]
#[command(name = "catflip", version, about = "Bit-flip rates of a two-photon driven Kerr resonator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Semiclassical fixed points, their stability and the regime.
    FixedPoints,
    /// Mean-field vector field on a grid, optionally with a trajectory.
    PhasePortrait {
        /// Grid half width in quadrature units.
        #[arg(long, default_value_t = 6.0)]
        half_width: f64,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 41)]
        nodes: usize,
        /// Start a trajectory at x,p.
        #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
        from: Option<Vec<f64>>,
        /// Integration step of the trajectory.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Number of trajectory steps.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Exact steady-state Wigner function on a grid.
    Wigner {
        /// Grid half width (defaults to the cat size plus five vacuum widths).
        #[arg(long)]
        half_width: Option<f64>,
        /// Grid nodes per axis.
        #[arg(long, default_value_t = 121)]
        nodes: usize,
        /// csv, json or raster.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Dissipative gap of the Lindbladian.
    Gap {
        /// Also diagonalize every parity sector and report the spectrum summary.
        #[arg(long)]
        spectrum: bool,
    },
    /// Switching rate by one or more methods.
    Rate {
        /// Comma list; defaults to every closed form plus the numeric gap.
        #[arg(long)]
        methods: Option<String>,
        /// Langevin trajectories (default 2000).
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Rates over a one-dimensional parameter grid.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma list; defaults to numeric-gap,kramers-barrier.
        #[arg(long)]
        methods: Option<String>,
        /// Langevin trajectories (default 2000).
        #[arg(long)]
        trajectories: Option<usize>,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Detuning that minimizes the switching rate.
    OptimalDetuning {
        /// numeric-gap or kramers-barrier.
        #[arg(long, default_value = "numeric-gap")]
        method: String,
        /// Lower end of the detuning scan (default 0.2|kappa2|).
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        /// Upper end of the detuning scan (default 0.98 G).
        #[arg(long)]
        to: Option<f64>,
        /// Coarse scan points before refinement.
        #[arg(long, default_value_t = DEFAULT_SCAN_POINTS)]
        points: usize,
    },
    /// Kerr-to-loss ratio where the optimal detuning leaves zero.
    CriticalRatio {
        /// numeric-gap or kramers-barrier.
        #[arg(long, default_value = "kramers-barrier")]
        method: String,
    },
    /// Complex-P potential landscape and the Kramers rate ingredients.
    Barrier,
    /// Monte-Carlo escape over the near-critical effective barrier.
    Langevin {
        /// Langevin trajectories (default 2000).
        #[arg(long)]
        trajectories: Option<usize>,
        /// Censoring time per trajectory (default 200).
        #[arg(long)]
        max_time: Option<f64>,
    },
}

fn parse_format(s: &str, allowed: &[&str]) -> Result<String> {
    let s = s.trim().to_ascii_lowercase();
    if allowed.contains(&s.as_str()) {
        Ok(s)
    } else {
        Err(Error::InvalidArgument(format!(
            "format must be one of {}, got `{s}`",
            allowed.join(", ")
        )))
    }
}

fn single_method(s: &str) -> Result<Method> {
    Method::parse(s).ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
}

/// Destination for a command's main output.
struct Sink {
    path: Option<PathBuf>,
}

impl Sink {
    fn write(&self, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        match &self.path {
            Some(p) => {
                let mut w = emit::create(p)?;
                f(&mut w)?;
                w.flush().map_err(|e| Error::Io(format!("{}: {e}", p.display())))
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock)?;
                lock.flush().map_err(Error::from)
            }
        }
    }

    /// Metadata of a CSV or raster file goes next to it.
    fn write_sidecar(&self, meta: &Metadata) -> Result<()> {
        if let Some(p) = &self.path {
            let mut name = p.as_os_str().to_owned();
            name.push(".meta.json");
            let side = PathBuf::from(name);
            let mut w = emit::create(&side)?;
            serde_json::to_writer_pretty(&mut w, meta)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }
}

struct Context {
    settings: Settings,
    sink: Sink,
    timestamp: bool,
    command: &'static str,
}

impl Context {
    fn metadata(&self, seed: Option<u64>) -> Metadata {
        Metadata::new(self.command, self.settings.echo.clone(), seed, self.timestamp)
    }

    fn json<T: Serialize>(&self, data: T, seed: Option<u64>) -> Result<()> {
        let doc = Document {
            metadata: self.metadata(seed),
            data,
        };
        self.sink.write(|w| emit::write_json(w, &doc))
    }

    fn csv(&self, header: Vec<String>, rows: Vec<Vec<String>>, seed: Option<u64>) -> Result<()> {
        self.sink.write(|w| emit::write_csv(w, &header, &rows))?;
        self.sink.write_sidecar(&self.metadata(seed))
    }

    fn params(&self) -> ModelParams {
        self.settings.params
    }
}

#[derive(Serialize)]
struct FixedPointsReport {
    params: ModelParams,
    regime: catflip_core::Regime,
    fixed_points: Option<catflip_core::FixedPointSet>,
    quadratures: Option<QuadratureState>,
}

fn fixed_points(ctx: &Context) -> Result<usize> {
    let p = ctx.params();
    let fp = semiclassical::fixed_points(&p).ok();
    ctx.json(
        FixedPointsReport {
            params: p,
            regime: classify_regime(&p, catflip_core::model::DEFAULT_NEAR_CRITICAL_FRACTION)?,
            quadratures: fp.as_ref().map(|f| f.quadratures()),
            fixed_points: fp,
        },
        None,
    )?;
    Ok(0)
}

fn grid_rows(grid: &PhaseSpaceGrid) -> (Vec<String>, Vec<Vec<String>>) {
    let f = emit::format_float;
    let mut rows = Vec::new();
    for (ix, &x) in grid.x_axis.iter().enumerate() {
        for (ip, &p) in grid.p_axis.iter().enumerate() {
            let i = grid.index(ix, ip);
            rows.push(match &grid.values {
                GridValues::Scalar(v) => vec![f(x), f(p), f(v[i])],
                GridValues::Vector(v) => vec![f(x), f(p), f(v[i][0]), f(v[i][1])],
            });
        }
    }
    let header = match grid.values {
        GridValues::Scalar(_) => vec!["x", "p", "W"],
        GridValues::Vector(_) => vec!["x", "p", "dx", "dp"],
    };
    (header.into_iter().map(String::from).collect(), rows)
}

#[derive(Serialize)]
struct Portrait {
    field: PhaseSpaceGrid,
    trajectory: Option<Vec<QuadratureState>>,
}

fn phase_portrait(
    ctx: &mut Context,
    half_width: f64,
    nodes: usize,
    from: Option<Vec<f64>>,
    step: f64,
    steps: usize,
    format: &str,
) -> Result<usize> {
    let format = parse_format(format, &["csv", "json"])?;
    let p = ctx.params();
    let field = semiclassical::vector_field_grid(&p, &GridSpec::symmetric(half_width, nodes))?;
    let trajectory = match from {
        Some(v) => Some(semiclassical::integrate_trajectory(
            &p,
            QuadratureState::new(v[0], v[1]),
            step,
            steps,
        )?),
        None => None,
    };
    ctx.settings.note("half_width", emit::format_float(half_width));
    ctx.settings.note("nodes", nodes);
    if format == "json" {
        return ctx.json(Portrait { field, trajectory }, None).map(|_| 0);
    }
    let (header, rows) = grid_rows(&field);
    ctx.csv(header, rows, None)?;
    if let (Some(t), Some(path)) = (trajectory, ctx.sink.path.as_ref()) {
        let mut name = path.as_os_str().to_owned();
        name.push(".trajectory.csv");
        let f = emit::format_float;
        let rows: Vec<Vec<String>> = t.iter().map(|s| vec![f(s.x), f(s.p)]).collect();
        let w = emit::create(Path::new(&name))?;
        emit::write_csv(w, &["x".into(), "p".into()], &rows)?;
    }
    Ok(0)
}

fn wigner_cmd(ctx: &mut Context, half_width: Option<f64>, nodes: usize, format: &str) -> Result<usize> {
    let format = parse_format(format, &["csv", "json", "raster"])?;
    let p = ctx.params();
    let spec = match half_width {
        Some(h) => GridSpec::symmetric(h, nodes),
        None => wigner::default_grid(&p, nodes),
    };
    let grid = wigner::wigner_grid(&p, &spec)?;
    ctx.settings.note("half_width", emit::format_float(spec.x_max));
    ctx.settings.note("nodes", nodes);
    match format.as_str() {
        "json" => ctx.json(&grid, None)?,
        "raster" => {
            ctx.sink.write(|w| grid.write_raster(w))?;
            ctx.sink.write_sidecar(&ctx.metadata(None))?;
        }
        _ => {
            let (header, rows) = grid_rows(&grid);
            ctx.csv(header, rows, None)?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct GapReport {
    params: ModelParams,
    gap: catflip_core::RateEstimate,
    spectrum: Option<SpectrumSummary>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    steady_count: usize,
    zero_threshold: f64,
    switching_eigenvalue: catflip_core::Complex64,
    truncation_diag: Option<f64>,
    /// Slowest eigenvalues, sorted by decreasing real part.
    leading: Vec<catflip_core::Complex64>,
}

fn gap(ctx: &Context, with_spectrum: bool) -> Result<usize> {
    let p = ctx.params();
    let est = sweep::numeric_gap_with_retry(&p, &ctx.settings.options)?;
    let spectrum = if with_spectrum {
        let n = est.meta.truncation.unwrap_or_else(|| liouvillian::default_truncation(&p));
        let l = liouvillian::build_liouvillian(&p, n)?;
        let s = liouvillian::spectrum(&l, ctx.settings.options.zero_tol)?;
        Some(SpectrumSummary {
            steady_count: s.steady_count,
            zero_threshold: s.zero_threshold,
            switching_eigenvalue: s.switching_eigenvalue,
            truncation_diag: s.truncation_diag,
            leading: s.eigenvalues.iter().take(8).copied().collect(),
        })
    } else {
        None
    };
    ctx.json(
        GapReport {
            params: p,
            gap: est,
            spectrum,
        },
        None,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct RateRow {
    method: Method,
    estimate: Option<catflip_core::RateEstimate>,
    status: String,
}

fn rate(ctx: &mut Context, methods: Option<&str>, trajectories: Option<usize>) -> Result<usize> {
    ctx.settings.set_trajectories(trajectories);
    let methods = ctx.settings.methods(
        methods,
        &[
            Method::NumericGap,
            Method::KramersFull,
            Method::KramersBarrier,
            Method::SmallDetuning,
            Method::NearCritical,
        ],
    )?;
    let p = ctx.params();
    let rows: Vec<RateRow> = methods
        .iter()
        .map(|&m| match sweep::evaluate(m, &p, &ctx.settings.options) {
            Ok(e) => RateRow {
                method: m,
                estimate: Some(e),
                status: "ok".into(),
            },
            Err(e) => RateRow {
                method: m,
                estimate: None,
                status: e.code().into(),
            },
        })
        .collect();
    let failures = rows.iter().filter(|r| r.estimate.is_none()).count();
    let seed = methods
        .contains(&Method::LangevinMc)
        .then_some(ctx.settings.options.seed);
    ctx.json(rows, seed)?;
    Ok(failures)
}

fn sweep_cmd(
    ctx: &mut Context,
    grid: &GridArgs,
    methods: Option<&str>,
    trajectories: Option<usize>,
    format: &str,
) -> Result<usize> {
    let format = parse_format(format, &["csv", "json"])?;
    ctx.settings.set_trajectories(trajectories);
    let (variable, grid) = grid.resolve(&mut ctx.settings)?;
    let methods = ctx
        .settings
        .methods(methods, &[Method::NumericGap, Method::KramersBarrier])?;
    let spec = SweepSpec {
        variable,
        grid,
        fixed: ctx.params(),
        methods,
        options: ctx.settings.options,
    };
    let table = sweep::run_sweep(&spec)?;
    let seed = Some(spec.options.seed);
    if format == "json" {
        ctx.json(&table, seed)?;
    } else {
        ctx.csv(table.header(), emit::sweep_rows(&table), seed)?;
    }
    Ok(table.failures())
}

fn optimal_detuning(
    ctx: &mut Context,
    method: &str,
    from: Option<f64>,
    to: Option<f64>,
    points: usize,
) -> Result<usize> {
    let method = single_method(method)?;
    let p = ctx.params();
    let (lo, hi) = default_detuning_range(&p);
    let range = (from.unwrap_or(lo), to.unwrap_or(hi));
    ctx.settings.note("method", method);
    ctx.settings.note("range", format!("{},{}", range.0, range.1));
    let r = sweep::find_optimal_detuning(&p, method, range, points, &ctx.settings.options)?;
    ctx.json(r, None)?;
    Ok(0)
}

fn critical_ratio(ctx: &mut Context, method: &str) -> Result<usize> {
    let method = single_method(method)?;
    let p = ctx.params();
    ctx.settings.note("method", method);
    let r = sweep::find_critical_ratio(p.g, p.kappa2_modulus(), method, &ctx.settings.options)?;
    ctx.json(r, None)?;
    Ok(0)
}

#[derive(Serialize)]
struct BarrierReport {
    params: ModelParams,
    extrema: catflip_core::PotentialExtrema,
    breakdown: Option<catflip_core::KramersBreakdown>,
    breakdown_status: String,
    rate_barrier: catflip_core::RateEstimate,
    effective_potential: EffectivePotential,
    barrier_over_temperature: f64,
}

fn barrier(ctx: &Context) -> Result<usize> {
    let p = ctx.params();
    let extrema = kramers::extrema(&p)?;
    let rate_barrier = kramers::rate_barrier(&p)?;
    let (breakdown, breakdown_status) = match kramers::rate_full(&p) {
        Ok((_, b)) => (Some(b), "ok".to_string()),
        Err(e) => (None, e.code().to_string()),
    };
    ctx.json(
        BarrierReport {
            params: p,
            extrema,
            breakdown,
            breakdown_status,
            rate_barrier,
            effective_potential: kramers::wigner_effective_potential(&p, 0.0),
            barrier_over_temperature: EffectivePotential::barrier_over_temperature(&p),
        },
        None,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct LangevinReport {
    params: ModelParams,
    dt: f64,
    n: usize,
    seed: u64,
    mean_fpt: f64,
    stderr: f64,
    implied_rate: f64,
    rate_stderr: f64,
    censored: usize,
    lower_bound: bool,
    analytic_rate: f64,
    warnings: Vec<String>,
}

fn langevin_cmd(ctx: &mut Context, trajectories: Option<usize>, max_time: Option<f64>) -> Result<usize> {
    ctx.settings.set_trajectories(trajectories);
    ctx.settings.set_max_time(max_time);
    let cfg = ctx.settings.options.langevin_config(&ctx.params());
    let stats = langevin::simulate_escape(&cfg)?;
    ctx.json(
        LangevinReport {
            params: cfg.params,
            dt: cfg.dt,
            n: cfg.n_trajectories,
            seed: cfg.seed,
            mean_fpt: stats.mean_fpt,
            stderr: stats.stderr,
            implied_rate: stats.implied_rate,
            rate_stderr: stats.rate_stderr,
            censored: stats.n_censored,
            lower_bound: stats.lower_bound,
            analytic_rate: kramers::rate_near_critical(&cfg.params).value,
            warnings: cfg.warnings(),
        },
        Some(cfg.seed),
    )?;
    Ok(0)
}

fn run(cli: Cli) -> Result<usize> {
    if let Some(t) = cli.common.threads {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let settings = Settings::resolve(&cli.common)?;
    let command = match &cli.command {
        Command::FixedPoints => "fixed-points",
        Command::PhasePortrait { .. } => "phase-portrait",
        Command::Wigner { .. } => "wigner",
        Command::Gap { .. } => "gap",
        Command::Rate { .. } => "rate",
        Command::Sweep { .. } => "sweep",
        Command::OptimalDetuning { .. } => "optimal-detuning",
        Command::CriticalRatio { .. } => "critical-ratio",
        Command::Barrier => "barrier",
        Command::Langevin { .. } => "langevin",
    };
    let mut ctx = Context {
        settings,
        sink: Sink {
            path: cli.common.out.clone(),
        },
        timestamp: !cli.common.no_timestamp,
        command,
    };
    match cli.command {
        Command::FixedPoints => fixed_points(&ctx),
        Command::PhasePortrait {
            half_width,
            nodes,
            from,
            step,
            steps,
            format,
        } => phase_portrait(&mut ctx, half_width, nodes, from, step, steps, &format),
        Command::Wigner {
            half_width,
            nodes,
            format,
        } => wigner_cmd(&mut ctx, half_width, nodes, &format),
        Command::Gap { spectrum } => gap(&ctx, spectrum),
        Command::Rate {
            methods,
            trajectories,
        } => rate(&mut ctx, methods.as_deref(), trajectories),
        Command::Sweep {
            grid,
            methods,
            trajectories,
            format,
        } => sweep_cmd(&mut ctx, &grid, methods.as_deref(), trajectories, &format),
        Command::OptimalDetuning {
            method,
            from,
            to,
            points,
        } => optimal_detuning(&mut ctx, &method, from, to, points),
        Command::CriticalRatio { method } => critical_ratio(&mut ctx, &method),
        Command::Barrier => barrier(&ctx),
        Command::Langevin {
            trajectories,
            max_time,
        } => langevin_cmd(&mut ctx, trajectories, max_time),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("catflip: {failures} evaluation(s) failed; see the status columns");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("catflip: {e}");
            match e {
                Error::Io(_) => ExitCode::from(4),
                _ => ExitCode::from(2),
            }
        }
    }
}
