//! Monte-Carlo escape over the near-critical effective barrier.
//!
//! The particle obeys `ẋ = w`, `ẇ = -2ηx²w - V'(x)/m + x √(4ηT/m) ξ(t)`,
//! integrated with an Euler-Maruyama step. Since the multiplicative noise
//! only drives `w` and depends only on `x`, the Itô and Stratonovich
//! readings of the equation coincide.
//!
//! Each trajectory draws from its own ChaCha stream `(seed, index)`, so the
//! statistics do not depend on how trajectories are scheduled.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kramers::{effective_force, wigner_effective_potential};
use crate::model::ModelParams;

/// `dt` times the stiffest rate above which the step is flagged.
pub const STIFFNESS_WARNING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinConfig {
    /// `U` is ignored: the effective equation is derived at `U = 0`.
    pub params: ModelParams,
    pub dt: f64,
    pub n_trajectories: usize,
    pub max_time: f64,
    pub seed: u64,
    /// Multiplies the noise amplitude; 1 reproduces the physical model.
    pub noise_scale: f64,
}

impl LangevinConfig {
    pub fn new(params: ModelParams, dt: f64, n_trajectories: usize, seed: u64) -> Self {
        LangevinConfig {
            params: ModelParams { u: 0.0, ..params },
            dt,
            n_trajectories,
            max_time: 200.0,
            seed,
            noise_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.n_trajectories == 0 {
            return Err(Error::InvalidArgument("need at least one trajectory".into()));
        }
        if !(self.max_time > 0.0) {
            return Err(Error::InvalidArgument("max_time must be positive".into()));
        }
        if !(self.params.eta > 0.0) {
            return Err(Error::EtaZero);
        }
        Ok(())
    }

    /// `dt · max(2ηx₀², ω₀)`.
    pub fn stiffness(&self) -> f64 {
        let w = wigner_effective_potential(&self.params, 0.0);
        let x0 = if w.x0.is_finite() { w.x0 } else { 0.0 };
        self.dt * (2.0 * self.params.eta * x0 * x0).max(w.omega0)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let s = self.stiffness();
        if s >= STIFFNESS_WARNING {
            out.push(format!("dt is coarse: dt times the stiffest rate is {s:.3}"));
        }
        if self.params.g - self.params.delta.abs() <= 0.0 {
            out.push("no barrier: detuning is past the critical point".into());
        }
        out
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    fn noise_amplitude(&self) -> f64 {
        let w = wigner_effective_potential(&self.params, 0.0);
        self.noise_scale * (4.0 * self.params.eta * w.t_eff / w.mass).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeStatistics {
    pub mean_fpt: f64,
    /// Standard error of `mean_fpt`.
    pub stderr: f64,
    pub n_escaped: usize,
    pub n_censored: usize,
    /// `1 / mean_fpt`.
    pub implied_rate: f64,
    /// Standard error of `implied_rate` by the delta method.
    pub rate_stderr: f64,
    pub seed: u64,
    /// Set when censored trajectories make `mean_fpt` a lower bound.
    pub lower_bound: bool,
}

struct Walker {
    x: f64,
    w: f64,
}

impl Walker {
    fn step(&mut self, params: &ModelParams, inv_mass: f64, amp: f64, dt: f64, sqrt_dt: f64, xi: f64) {
        let x = self.x;
        let w = self.w;
        let accel = -2.0 * params.eta * x * x * w - effective_force(params, x) * inv_mass;
        self.x = x + w * dt;
        self.w = w + accel * dt + x * amp * sqrt_dt * xi;
    }
}

/// First time `x` reaches 0 starting from `(x₀, 0)`, or `None` if censored.
fn first_passage(config: &LangevinConfig, index: u64, x0: f64) -> Option<f64> {
    let mut rng = config.rng(index);
    let w = wigner_effective_potential(&config.params, 0.0);
    let inv_mass = 1.0 / w.mass;
    let amp = config.noise_amplitude();
    let sqrt_dt = config.dt.sqrt();
    let max_steps = (config.max_time / config.dt).ceil() as u64;
    let mut walker = Walker { x: x0, w: 0.0 };
    for step in 1..=max_steps {
        let xi: f64 = rng.sample(StandardNormal);
        walker.step(&config.params, inv_mass, amp, config.dt, sqrt_dt, xi);
        if walker.x <= 0.0 {
            return Some(step as f64 * config.dt);
        }
    }
    None
}

pub fn simulate_escape(config: &LangevinConfig) -> Result<EscapeStatistics> {
    config.validate()?;
    let x0 = wigner_effective_potential(&config.params, 0.0).x0;
    if !(x0 > 0.0 && x0.is_finite()) {
        return Err(Error::NoBistability);
    }
    let times: Vec<Option<f64>> = (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| first_passage(config, i, x0))
        .collect();
    let escaped: Vec<f64> = times.iter().flatten().copied().collect();
    if escaped.is_empty() {
        return Err(Error::AllCensored);
    }
    let n_censored = times.len() - escaped.len();
    // Censored runs enter at the cutoff, so the mean is then a lower bound.
    let samples: Vec<f64> = times.iter().map(|t| t.unwrap_or(config.max_time)).collect();
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let stderr = (var / n).sqrt();
    Ok(EscapeStatistics {
        mean_fpt: mean,
        stderr,
        n_escaped: escaped.len(),
        n_censored,
        implied_rate: 1.0 / mean,
        rate_stderr: stderr / (mean * mean),
        seed: config.seed,
        lower_bound: n_censored > 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges of the `x` histogram.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples outside the edges.
    pub outside: u64,
    pub v_mean: f64,
    pub v_variance: f64,
    pub n_samples: usize,
}

impl Histogram {
    pub fn density(&self) -> Vec<f64> {
        let width = self.edges[1] - self.edges[0];
        self.counts
            .iter()
            .map(|&c| c as f64 / (self.n_samples as f64 * width))
            .collect()
    }
}

/// Long-run histogram of `x` plus moments of the velocity.
///
/// Every trajectory runs for `burn_in` time units, then is sampled every
/// `sample_interval` until `n_samples` samples are collected in total.
pub fn sample_stationary_histogram(
    config: &LangevinConfig,
    burn_in: f64,
    sample_interval: f64,
    n_samples: usize,
    x_range: (f64, f64),
    bins: usize,
) -> Result<Histogram> {
    config.validate()?;
    if bins == 0 || !(x_range.1 > x_range.0) || n_samples == 0 || !(sample_interval > 0.0) {
        return Err(Error::InvalidArgument("invalid histogram layout".into()));
    }
    let x0 = wigner_effective_potential(&config.params, 0.0).x0;
    // x = 0 is an absorbing point of the noise, so never start there.
    let start = if x0.is_finite() && x0 > 0.0 { x0 } else { 1.0 };
    let walkers = config.n_trajectories;
    let per_walker = n_samples.div_ceil(walkers);
    let burn_steps = (burn_in / config.dt).round() as usize;
    let stride = ((sample_interval / config.dt).round() as usize).max(1);
    let w = wigner_effective_potential(&config.params, 0.0);
    let inv_mass = 1.0 / w.mass;
    let amp = config.noise_amplitude();
    let sqrt_dt = config.dt.sqrt();

    let runs: Vec<Vec<(f64, f64)>> = (0..walkers as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = config.rng(i);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let mut walker = Walker { x: sign * start, w: 0.0 };
            let mut out = Vec::with_capacity(per_walker);
            for step in 1..=burn_steps + per_walker * stride {
                let xi: f64 = rng.sample(StandardNormal);
                walker.step(&config.params, inv_mass, amp, config.dt, sqrt_dt, xi);
                if step > burn_steps && (step - burn_steps) % stride == 0 {
                    out.push((walker.x, walker.w));
                }
            }
            out
        })
        .collect();

    let samples: Vec<(f64, f64)> = runs.into_iter().flatten().take(n_samples).collect();
    if samples.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let edges = crate::grid::linspace(x_range.0, x_range.1, bins + 1);
    let width = (x_range.1 - x_range.0) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut outside = 0;
    for &(x, _) in &samples {
        let b = ((x - x_range.0) / width).floor();
        if b >= 0.0 && (b as usize) < bins {
            counts[b as usize] += 1;
        } else {
            outside += 1;
        }
    }
    let n = samples.len() as f64;
    let v_mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let v_variance = samples.iter().map(|s| (s.1 - v_mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(Histogram {
        edges,
        counts,
        outside,
        v_mean,
        v_variance,
        n_samples: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(delta: f64, n: usize, seed: u64) -> LangevinConfig {
        LangevinConfig::new(ModelParams::new(6.0, delta, 1.0, 0.0).unwrap(), 1e-3, n, seed)
    }

    #[test]
    fn kerr_is_dropped() {
        let c = LangevinConfig::new(ModelParams::new(6.0, 5.8, 1.0, 0.4).unwrap(), 1e-3, 1, 0);
        assert_eq!(c.params.u, 0.0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = simulate_escape(&config(5.8, 64, 9)).unwrap();
        let b = simulate_escape(&config(5.8, 64, 9)).unwrap();
        assert_eq!(a, b);
        let c = simulate_escape(&config(5.8, 64, 10)).unwrap();
        assert_ne!(a.mean_fpt, c.mean_fpt);
    }

    #[test]
    fn no_noise_never_escapes() {
        let mut c = config(5.8, 8, 1);
        c.noise_scale = 0.0;
        c.max_time = 5.0;
        assert_eq!(simulate_escape(&c), Err(Error::AllCensored));
    }

    #[test]
    fn invalid_configs() {
        let mut c = config(5.8, 8, 1);
        c.dt = 0.0;
        assert!(simulate_escape(&c).is_err());
        let c = config(5.8, 0, 1);
        assert!(simulate_escape(&c).is_err());
        assert_eq!(simulate_escape(&config(6.5, 8, 1)), Err(Error::NoBistability));
    }

    #[test]
    fn stiffness_flag() {
        assert!(config(5.8, 1, 0).warnings().is_empty());
        let mut c = config(5.8, 1, 0);
        c.dt = 0.2;
        assert_eq!(c.warnings().len(), 1);
    }

    #[test]
    fn censoring_marks_lower_bound() {
        let mut c = config(5.8, 32, 3);
        c.max_time = 1.0;
        let s = simulate_escape(&c).unwrap();
        assert!(s.n_censored > 0 && s.lower_bound);
        assert_eq!(s.n_escaped + s.n_censored, 32);
    }

    #[test]
    fn rate_falls_as_barrier_grows() {
        let rates: Vec<f64> = [5.9, 5.6, 5.2]
            .iter()
            .map(|&d| simulate_escape(&config(d, 400, 5)).unwrap().implied_rate)
            .collect();
        assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
    }

    #[test]
    fn stderr_scales_with_sample_size() {
        let a = simulate_escape(&config(5.8, 400, 11)).unwrap();
        let b = simulate_escape(&config(5.8, 800, 11)).unwrap();
        let ratio = a.stderr / b.stderr;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn stationary_marginals() {
        let c = config(5.8, 40, 21);
        let h = sample_stationary_histogram(&c, 5.0, 0.05, 20_000, (-4.0, 4.0), 16).unwrap();
        assert_eq!(h.n_samples, 20_000);
        // T/m = G²
        assert!((h.v_variance / 36.0 - 1.0).abs() < 0.05, "{}", h.v_variance);
        let d = h.density();
        let (left, right): (f64, f64) = (d[..8].iter().sum(), d[8..].iter().sum());
        assert!((left / right - 1.0).abs() < 0.15);
        // Peaks off the origin: the central bins sit below the flanks.
        let peak = d.iter().cloned().fold(0.0, f64::max);
        assert!(d[7] < peak && d[8] < peak);
    }

    #[test]
    fn single_peak_past_critical_point() {
        let c = config(7.0, 40, 4);
        let h = sample_stationary_histogram(&c, 5.0, 0.05, 10_000, (-3.0, 3.0), 12).unwrap();
        let d = h.density();
        let best = (0..12).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert!(best == 5 || best == 6, "{d:?}");
    }
}
