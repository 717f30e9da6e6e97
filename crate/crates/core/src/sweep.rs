//! Parameter sweeps over every rate method, the optimal-detuning search and
//! the critical Kerr-to-loss ratio.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::linspace;
use crate::kramers;
use crate::langevin::{self, LangevinConfig};
use crate::liouvillian::{self, DEFAULT_ZERO_TOL};
use crate::model::ModelParams;
use crate::rate::{Method, RateEstimate, RateMeta};

/// Extra Fock levels added when a numeric point leaks out of the basis.
pub const LEAK_RETRY_STEP: usize = 10;
pub const DEFAULT_SCAN_POINTS: usize = 120;
pub const CRITICAL_RATIO_BRACKET: (f64, f64) = (0.1, 20.0);
pub const CRITICAL_RATIO_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "Delta")]
    Delta,
    #[serde(rename = "theta")]
    Theta,
    #[serde(rename = "G")]
    G,
    #[serde(rename = "U_over_eta")]
    UOverEta,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Delta => "Delta",
            SweepVariable::Theta => "theta",
            SweepVariable::G => "G",
            SweepVariable::UOverEta => "U_over_eta",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SweepVariable::Delta,
            SweepVariable::Theta,
            SweepVariable::G,
            SweepVariable::UOverEta,
        ]
        .into_iter()
        .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
    }

    /// `fixed` with the swept coordinate set to `value`; θ and U/η keep `|κ₂|`.
    pub fn apply(&self, fixed: &ModelParams, value: f64) -> Result<ModelParams> {
        let k = fixed.kappa2_modulus();
        match self {
            SweepVariable::Delta => ModelParams::new(fixed.g, value, fixed.eta, fixed.u),
            SweepVariable::G => ModelParams::new(value, fixed.delta, fixed.eta, fixed.u),
            SweepVariable::Theta => ModelParams::from_polar(fixed.g, fixed.delta, k, value),
            SweepVariable::UOverEta => {
                ModelParams::from_polar(fixed.g, fixed.delta, k, value.atan())
            }
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Some(Spacing::Linear),
            "log" => Some(Spacing::Log),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidSpec(format!("grid.count must be at least 2, got {}", self.count)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::InvalidSpec(format!(
                "grid needs finite start < stop, got {}..{}",
                self.start, self.stop
            )));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::InvalidSpec("log spacing needs positive endpoints".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linspace(self.start, self.stop, self.count),
            Spacing::Log => {
                let mut v: Vec<f64> = linspace(self.start.ln(), self.stop.ln(), self.count)
                    .into_iter()
                    .map(f64::exp)
                    .collect();
                v[0] = self.start;
                v[self.count - 1] = self.stop;
                v
            }
        }
    }
}

/// Numerical settings shared by every method evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Fixed Fock truncation; adaptive when `None`.
    pub truncation: Option<usize>,
    pub zero_tol: f64,
    pub seed: u64,
    pub dt: f64,
    pub n_trajectories: usize,
    pub max_time: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            truncation: None,
            zero_tol: DEFAULT_ZERO_TOL,
            seed: 1,
            dt: 1e-3,
            n_trajectories: 2000,
            max_time: 200.0,
        }
    }
}

impl EvalOptions {
    pub fn langevin_config(&self, params: &ModelParams) -> LangevinConfig {
        LangevinConfig {
            max_time: self.max_time,
            ..LangevinConfig::new(*params, self.dt, self.n_trajectories, self.seed)
        }
    }
}

/// Numeric gap, retried once with a larger basis on a truncation leak.
pub fn numeric_gap_with_retry(params: &ModelParams, opts: &EvalOptions) -> Result<RateEstimate> {
    let n = opts
        .truncation
        .unwrap_or_else(|| liouvillian::default_truncation(params));
    match liouvillian::liouvillian_gap(params, Some(n), opts.zero_tol) {
        Err(Error::TruncationLeak { .. }) => {
            liouvillian::liouvillian_gap(params, Some(n + LEAK_RETRY_STEP), opts.zero_tol)
        }
        other => other,
    }
}

/// One rate estimate by `method`.
pub fn evaluate(method: Method, params: &ModelParams, opts: &EvalOptions) -> Result<RateEstimate> {
    match method {
        Method::NumericGap => numeric_gap_with_retry(params, opts),
        Method::KramersFull => kramers::rate_full(params).map(|r| r.0),
        Method::KramersBarrier => kramers::rate_barrier(params),
        Method::SmallDetuning => Ok(kramers::rate_small_detuning(params)),
        Method::NearCritical => Ok(kramers::rate_near_critical(params)),
        Method::LangevinMc => {
            let cfg = opts.langevin_config(params);
            let stats = langevin::simulate_escape(&cfg)?;
            let near = kramers::rate_near_critical(params).in_domain;
            let mut est = RateEstimate::from_value(stats.implied_rate, Method::LangevinMc, near);
            est.meta = RateMeta {
                seed: Some(stats.seed),
                stderr: Some(stats.rate_stderr),
                ..RateMeta::default()
            };
            Ok(est)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: SweepGrid,
    pub fixed: ModelParams,
    pub methods: Vec<Method>,
    pub options: EvalOptions,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::InvalidSpec("no methods requested".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::InvalidSpec(format!("method {m} listed twice")));
            }
        }
        self.grid.validate()?;
        if let Some(n) = self.options.truncation {
            if n < 4 {
                return Err(Error::TruncationTooSmall { got: n, min: 4 });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub value: Option<f64>,
    pub log_value: Option<f64>,
    pub in_domain: bool,
    /// `ok` or the error code of the failed evaluation.
    pub status: String,
    pub meta: RateMeta,
}

impl Cell {
    fn from_result(r: Result<RateEstimate>) -> Self {
        match r {
            Ok(est) => Cell {
                value: Some(est.value),
                log_value: Some(est.log_value),
                in_domain: est.in_domain,
                status: "ok".into(),
                meta: est.meta,
            },
            Err(e) => Cell {
                value: None,
                log_value: None,
                in_domain: false,
                status: e.code().into(),
                meta: RateMeta::default(),
            },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub params: Option<ModelParams>,
    /// One cell per method, in the order of [`SweepTable::methods`].
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub methods: Vec<Method>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| &r.cells)
            .filter(|c| !c.is_ok())
            .count()
    }

    /// Values of one method column, `None` where the cell failed.
    pub fn column(&self, method: Method) -> Option<Vec<Option<f64>>> {
        let i = self.methods.iter().position(|&m| m == method)?;
        Some(self.rows.iter().map(|r| r.cells[i].value).collect())
    }

    /// `x, gamma_<m>..., status_<m>...`.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec![self.variable.name().to_string()];
        h.extend(self.methods.iter().map(|m| format!("gamma_{}", m.column())));
        h.extend(self.methods.iter().map(|m| format!("status_{}", m.column())));
        h
    }
}

/// Evaluates every method at every grid point. Per-point errors land in the
/// status columns; only an invalid spec aborts.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let points = spec.grid.points();
    let rows = points
        .par_iter()
        .map(|&x| match spec.variable.apply(&spec.fixed, x) {
            Ok(params) => SweepRow {
                x,
                params: Some(params),
                cells: spec
                    .methods
                    .iter()
                    .map(|&m| Cell::from_result(evaluate(m, &params, &spec.options)))
                    .collect(),
            },
            Err(e) => SweepRow {
                x,
                params: None,
                cells: spec.methods.iter().map(|_| Cell::from_result(Err(e.clone()))).collect(),
            },
        })
        .collect();
    Ok(SweepTable {
        variable: spec.variable,
        methods: spec.methods.clone(),
        rows,
    })
}

/// Minimizes `f` on `[a, b]` by golden-section search.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalDetuning {
    /// 0 when no interior minimum exists.
    pub delta_opt: f64,
    pub gamma_min: f64,
    pub boundary: bool,
    pub method: Method,
    /// Coarse scan `(Δ, ln Γ)` that located the bracket.
    pub scan: Vec<(f64, f64)>,
}

/// Default detuning window `(0.2|κ₂|, 0.98G)`.
pub fn default_detuning_range(params: &ModelParams) -> (f64, f64) {
    (0.2 * params.kappa2_modulus(), 0.98 * params.g)
}

fn log_rate(method: Method, params: &ModelParams, opts: &EvalOptions) -> Result<f64> {
    Ok(evaluate(method, params, opts)?.log_value)
}

/// Location of the lowest interior local minimum of `Γ(Δ)`.
///
/// `Γ` vanishes at `Δ = 0` for every method, so the global minimum over a
/// range starting near zero always sits on the left edge. The optimum of
/// interest is instead a dip that develops at finite detuning; when the scan
/// shows none, the result is `Δ_opt = 0` with the boundary flag set.
pub fn find_optimal_detuning(
    fixed: &ModelParams,
    method: Method,
    range: (f64, f64),
    scan_points: usize,
    opts: &EvalOptions,
) -> Result<OptimalDetuning> {
    if !matches!(method, Method::NumericGap | Method::KramersBarrier) {
        return Err(Error::InvalidArgument(format!(
            "optimal detuning supports numeric-gap and kramers-barrier, not {method}"
        )));
    }
    let (lo, hi) = range;
    if !(lo > 0.0 && hi < fixed.g && lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "detuning range must lie inside (0, G), got ({lo}, {hi})"
        )));
    }
    if scan_points < 3 {
        return Err(Error::InvalidArgument("scan needs at least 3 points".into()));
    }
    let deltas = linspace(lo, hi, scan_points);
    let logs = deltas
        .par_iter()
        .map(|&d| log_rate(method, &fixed.with_delta(d), opts))
        .collect::<Result<Vec<f64>>>()?;
    let scan: Vec<(f64, f64)> = deltas.iter().copied().zip(logs.iter().copied()).collect();

    let best = (1..scan_points - 1)
        .filter(|&i| logs[i] < logs[i - 1] && logs[i] < logs[i + 1])
        .min_by(|&a, &b| logs[a].total_cmp(&logs[b]));
    let Some(i) = best else {
        let gamma_min = logs.iter().copied().fold(f64::INFINITY, f64::min).exp();
        return Ok(OptimalDetuning {
            delta_opt: 0.0,
            gamma_min,
            boundary: true,
            method,
            scan,
        });
    };
    let step = deltas[1] - deltas[0];
    let mut failed = None;
    let (d_opt, log_min) = golden_section(
        |d| match log_rate(method, &fixed.with_delta(d), opts) {
            Ok(v) => v,
            Err(e) => {
                failed = Some(e);
                f64::INFINITY
            }
        },
        deltas[i - 1],
        deltas[i + 1],
        1e-3 * step,
    );
    if let Some(e) = failed {
        return Err(e);
    }
    // Refinement never does worse than the scan node it started from.
    let (delta_opt, log_min) = if log_min <= logs[i] {
        (d_opt, log_min)
    } else {
        (deltas[i], logs[i])
    };
    Ok(OptimalDetuning {
        delta_opt,
        gamma_min: log_min.exp(),
        boundary: false,
        method,
        scan,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRatio {
    /// Bisection estimate of `(U/η)_c`.
    pub value: f64,
    pub closed_form: f64,
    pub bracket: (f64, f64),
    /// Optimal detuning just above the transition.
    pub delta_opt_above: f64,
    pub method: Method,
}

/// Smallest `U/η` at which the optimal detuning leaves the boundary, by
/// bisection on the interior-minimum predicate at fixed `|κ₂|`.
pub fn find_critical_ratio(
    g: f64,
    kappa2_modulus: f64,
    method: Method,
    opts: &EvalOptions,
) -> Result<CriticalRatio> {
    let closed_form = kramers::critical_ratio(g, kappa2_modulus)?;
    let params_at = |ratio: f64| ModelParams::from_polar(g, 0.0, kappa2_modulus, ratio.atan());
    let probe = |ratio: f64| -> Result<OptimalDetuning> {
        let p = params_at(ratio)?;
        find_optimal_detuning(&p, method, default_detuning_range(&p), DEFAULT_SCAN_POINTS, opts)
    };
    let (mut lo, mut hi) = CRITICAL_RATIO_BRACKET;
    let low = probe(lo)?;
    let mut high = probe(hi)?;
    if low.boundary == high.boundary {
        return Err(Error::PredicateNotBracketed);
    }
    // Orient so that `lo` is the boundary side.
    let interior_at_low = !low.boundary;
    while hi - lo > CRITICAL_RATIO_TOL {
        let mid = 0.5 * (lo + hi);
        let r = probe(mid)?;
        if r.boundary != interior_at_low {
            lo = mid;
        } else {
            hi = mid;
            high = r;
        }
    }
    Ok(CriticalRatio {
        value: 0.5 * (lo + hi),
        closed_form,
        bracket: (lo, hi),
        delta_opt_above: high.delta_opt,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(methods: Vec<Method>) -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::Delta,
            grid: SweepGrid {
                start: 1.0,
                stop: 5.0,
                count: 5,
                spacing: Spacing::Linear,
            },
            fixed: ModelParams::new(6.0, 0.0, 1.0, 0.0).unwrap(),
            methods,
            options: EvalOptions::default(),
        }
    }

    #[test]
    fn empty_methods_rejected() {
        assert!(matches!(run_sweep(&spec(vec![])), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn grid_validation() {
        let mut s = spec(vec![Method::KramersBarrier]);
        s.grid.count = 1;
        assert!(run_sweep(&s).is_err());
        s.grid.count = 3;
        s.grid.start = 6.0;
        assert!(run_sweep(&s).is_err());
        s.grid = SweepGrid {
            start: 0.0,
            stop: 1.0,
            count: 3,
            spacing: Spacing::Log,
        };
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = SweepGrid {
            start: 0.01,
            stop: 10.0,
            count: 4,
            spacing: Spacing::Log,
        };
        let p = g.points();
        assert_eq!(p[0], 0.01);
        assert_eq!(p[3], 10.0);
        assert!((p[1] - 0.1).abs() < 1e-14 && (p[2] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn per_point_failures_are_recorded() {
        let mut s = spec(vec![Method::KramersBarrier, Method::SmallDetuning]);
        s.grid.stop = 7.0;
        s.grid.count = 7;
        let t = run_sweep(&s).unwrap();
        assert_eq!(t.rows.len(), 7);
        assert_eq!(t.rows[6].cells[0].status, "no_bistability");
        assert!(t.rows[6].cells[1].is_ok());
        assert_eq!(t.failures(), 2);
        assert_eq!(
            t.header(),
            vec!["Delta", "gamma_barrier", "gamma_small", "status_barrier", "status_small"]
        );
    }

    #[test]
    fn barrier_sweep_is_monotone_without_kerr() {
        let mut s = spec(vec![Method::KramersBarrier]);
        s.grid = SweepGrid {
            start: 0.1,
            stop: 5.4,
            count: 54,
            spacing: Spacing::Linear,
        };
        let t = run_sweep(&s).unwrap();
        let v: Vec<f64> = t.column(Method::KramersBarrier).unwrap().into_iter().map(Option::unwrap).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn theta_and_ratio_keep_modulus() {
        let fixed = ModelParams::new(6.0, 2.0, 0.6, 0.8).unwrap();
        let p = SweepVariable::Theta.apply(&fixed, 0.3).unwrap();
        assert!((p.kappa2_modulus() - 1.0).abs() < 1e-15);
        let q = SweepVariable::UOverEta.apply(&fixed, 2.0).unwrap();
        assert!((q.u / q.eta - 2.0).abs() < 1e-12);
        assert!((q.kappa2_modulus() - 1.0).abs() < 1e-15);
        assert_eq!(SweepVariable::parse("u_over_eta"), Some(SweepVariable::UOverEta));
    }

    #[test]
    fn golden_section_finds_vertex() {
        let (x, fx) = golden_section(|x| 3.0 * (x - 1.234567).powi(2) + 2.0, -4.0, 5.0, 1e-8);
        assert!((x - 1.234567).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dissipative_limit_has_boundary_optimum() {
        let p = ModelParams::new(6.0, 0.0, 1.0, 0.0).unwrap();
        let r = find_optimal_detuning(
            &p,
            Method::KramersBarrier,
            default_detuning_range(&p),
            DEFAULT_SCAN_POINTS,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(r.boundary);
        assert_eq!(r.delta_opt, 0.0);
    }

    #[test]
    fn strong_kerr_has_interior_optimum() {
        let p = ModelParams::from_polar(6.0, 0.0, 1.0, 6.3f64.atan()).unwrap();
        let r = find_optimal_detuning(
            &p,
            Method::KramersBarrier,
            default_detuning_range(&p),
            DEFAULT_SCAN_POINTS,
            &EvalOptions::default(),
        )
        .unwrap();
        assert!(!r.boundary);
        assert!(r.delta_opt > 1.0, "{}", r.delta_opt);
        // Brute-force oracle on a dense grid: the refined optimum lies within one coarse cell.
        let (lo, hi) = default_detuning_range(&p);
        let cell = (hi - lo) / (DEFAULT_SCAN_POINTS - 1) as f64;
        let dense = linspace(lo, hi, 10_000);
        let vals: Vec<f64> = dense
            .iter()
            .map(|&d| kramers::rate_barrier(&p.with_delta(d)).unwrap().log_value)
            .collect();
        let local: Vec<usize> = (1..dense.len() - 1)
            .filter(|&i| vals[i] < vals[i - 1] && vals[i] <= vals[i + 1])
            .collect();
        let j = *local.iter().min_by(|&&a, &&b| vals[a].total_cmp(&vals[b])).unwrap();
        assert!((dense[j] - r.delta_opt).abs() <= cell);
    }

    #[test]
    fn optimizer_rejects_other_methods() {
        let p = ModelParams::new(6.0, 0.0, 1.0, 0.0).unwrap();
        assert!(find_optimal_detuning(&p, Method::SmallDetuning, (0.2, 5.0), 10, &EvalOptions::default()).is_err());
        assert!(find_optimal_detuning(&p, Method::KramersBarrier, (0.0, 5.0), 10, &EvalOptions::default()).is_err());
    }

    #[test]
    fn analytic_critical_ratio() {
        let r = find_critical_ratio(6.0, 1.0, Method::KramersBarrier, &EvalOptions::default()).unwrap();
        assert_eq!(r.closed_form, kramers::critical_ratio(6.0, 1.0).unwrap());
        assert!(r.bracket.1 - r.bracket.0 <= CRITICAL_RATIO_TOL);
        assert!(r.value > 0.5 && r.value < 3.0, "{}", r.value);
    }
}
