//! Closed-form escape rates from the stationary complex-P potential.
//!
//! The potential is
//! `Φ(α, β) = -2αβ + (1 + iΔ/κ₂) Log(α² - G/κ₂) + (1 - iΔ/κ₂*) Log(β² - G/κ₂*)`.
//! Its saddle sits at the origin and the classical minima at `±α_cl`.
//! Every rate is assembled in log space so barrier heights of several
//! hundred do not underflow before the caller asks for the value.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, DEFAULT_NEAR_CRITICAL_FRACTION};
use crate::rate::{Method, RateEstimate};
use crate::semiclassical;

/// Relative distance of `α² - G/κ₂` from zero treated as the log singularity.
const SINGULAR_EPS: f64 = 1e-14;

fn log_arg(params: &ModelParams, z: Complex64, conj: bool) -> Result<Complex64> {
    let k = if conj {
        params.kappa2().conj()
    } else {
        params.kappa2()
    };
    if k.norm() == 0.0 {
        return Err(Error::PotentialSingularity);
    }
    let w = z * z - params.g / k;
    if w.norm() <= SINGULAR_EPS * (params.g / k.norm()) {
        return Err(Error::PotentialSingularity);
    }
    Ok(w)
}

fn weights(params: &ModelParams) -> (Complex64, Complex64) {
    let k = params.kappa2();
    let i = Complex64::i();
    (
        1.0 + i * params.delta / k,
        1.0 - i * params.delta / k.conj(),
    )
}

/// `Φ(α, β)` with the principal complex logarithm.
pub fn potential(params: &ModelParams, alpha: Complex64, beta: Complex64) -> Result<Complex64> {
    let wa = log_arg(params, alpha, false)?;
    let wb = log_arg(params, beta, true)?;
    let (ca, cb) = weights(params);
    Ok(-2.0 * alpha * beta + ca * wa.ln() + cb * wb.ln())
}

/// `Φ(to) - Φ(from)` with each logarithm taken of the ratio of its arguments.
///
/// Differences of principal logs jump by `2πi` whenever one endpoint lies
/// across the cut; the ratio form stays on the branch continuously connected
/// to `from` as long as the segment does not wind around the singularity.
pub fn potential_difference(
    params: &ModelParams,
    from: (Complex64, Complex64),
    to: (Complex64, Complex64),
) -> Result<Complex64> {
    let (a0, b0) = from;
    let (a1, b1) = to;
    let ra = log_arg(params, a1, false)? / log_arg(params, a0, false)?;
    let rb = log_arg(params, b1, true)? / log_arg(params, b0, true)?;
    let (ca, cb) = weights(params);
    Ok(-2.0 * (a1 * b1 - a0 * b0) + ca * ra.ln() + cb * rb.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialExtrema {
    pub alpha_cl: Complex64,
    /// `None` when `|α_q|²` would be negative.
    pub alpha_q: Option<Complex64>,
    pub theta_cl: f64,
    pub theta_q: f64,
    pub quantum_pair_exists: bool,
}

fn radicand_root(params: &ModelParams) -> Result<f64> {
    let rad = semiclassical::radicand(params);
    if !(rad > 0.0) || params.kappa2_sq() == 0.0 {
        return Err(Error::NoBistability);
    }
    Ok(rad.sqrt())
}

pub fn extrema(params: &ModelParams) -> Result<PotentialExtrema> {
    let r = radicand_root(params)?;
    let k2 = params.kappa2_sq();
    let k = params.kappa2();
    let n_cl = (r + params.u * params.delta) / k2 + 1.0;
    if n_cl <= 1.0 {
        return Err(Error::NoBistability);
    }
    let theta_cl = 0.5 * (Complex64::new(r, params.eta * params.delta) / (params.g * k)).arg();
    let theta_q = 0.5 * (Complex64::new(r, -params.eta * params.delta) / (params.g * k)).arg();
    let n_q = (r - params.u * params.delta) / k2 - 1.0;
    let quantum_pair_exists = n_q > 0.0;
    Ok(PotentialExtrema {
        alpha_cl: Complex64::from_polar(n_cl.sqrt(), theta_cl),
        alpha_q: quantum_pair_exists.then(|| Complex64::from_polar(n_q.sqrt(), theta_q)),
        theta_cl,
        theta_q,
        quantum_pair_exists,
    })
}

/// `∇²Φ` with respect to `(α, β)`.
pub fn hessian(params: &ModelParams, alpha: Complex64, beta: Complex64) -> Result<[[Complex64; 2]; 2]> {
    log_arg(params, alpha, false)?;
    log_arg(params, beta, true)?;
    let k = params.kappa2();
    let kc = k.conj();
    let i = Complex64::i();
    let g = params.g;
    let d = params.delta;
    let a2 = alpha * alpha;
    let b2 = beta * beta;
    let h11 = -2.0 * i * (d - i * k) * (g + k * a2) / ((g - k * a2) * (g - k * a2));
    let h22 = 2.0 * i * (d + i * kc) * (g + kc * b2) / ((g - kc * b2) * (g - kc * b2));
    let off = Complex64::new(-2.0, 0.0);
    Ok([[h11, off], [off, h22]])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KramersBreakdown {
    /// `Φ(0, 0)`.
    pub phi_saddle: f64,
    /// `(Φ₁, Φ₂, Φ₃)`, summing to `Φ(α_cl, α_cl*)`.
    pub phi_cl_parts: (f64, f64, f64),
    pub delta_phi: f64,
    pub prefactor_b: f64,
    pub lambda1_saddle: f64,
    pub det_saddle: f64,
    pub det_cl: f64,
    pub log_rate_full: f64,
    pub log_rate_barrier: f64,
    pub rate_full: f64,
    pub rate_barrier: f64,
}

impl KramersBreakdown {
    /// `Φ(α_cl, α_cl*) - Φ(0, 0)` from the closed forms.
    pub fn exponent(&self) -> f64 {
        let (p1, p2, p3) = self.phi_cl_parts;
        p1 + p2 + p3 - self.phi_saddle
    }
}

fn require_bistable(params: &ModelParams) -> Result<f64> {
    if params.delta.abs() >= params.g {
        return Err(Error::NoBistability);
    }
    // Also rejects r + ΔU <= 0, where the classical pair is gone.
    semiclassical::photon_number(params)?;
    radicand_root(params)
}

/// `Φ(0, 0)`.
pub fn phi_saddle(params: &ModelParams) -> f64 {
    let ModelParams { g, delta, eta, u } = *params;
    let k2 = params.kappa2_sq();
    (1.0 + delta * u / k2) * (g * g / k2).ln() + 2.0 * delta * eta / k2 * u.atan2(eta)
}

/// `(Φ₁, Φ₂, Φ₃)` at the classical minimum.
pub fn phi_classical_parts(params: &ModelParams) -> Result<(f64, f64, f64)> {
    let r = radicand_root(params)?;
    let ModelParams { delta, eta, u, .. } = *params;
    let k2 = params.kappa2_sq();
    let de = delta * eta;
    let p1 = -2.0 * (r + delta * u) / k2 - 2.0;
    let p2 = (2.0 * de * r.atan2(de) + 4.0 * de * u.atan2(eta) + 2.0 * de * eta.atan2(delta + u)) / k2;
    let p3 = (1.0 + delta * u / k2) * ((eta * eta + (delta + u) * (delta + u)) / k2).ln();
    Ok((p1, p2, p3))
}

/// Barrier height `δΦ`.
pub fn delta_phi(params: &ModelParams) -> Result<f64> {
    let r = radicand_root(params)?;
    let ModelParams { g, delta, eta, u } = *params;
    let k2 = params.kappa2_sq();
    let de = delta * eta;
    let log_term = if delta == 0.0 {
        0.0
    } else {
        2.0 * delta * u / k2 * (delta.abs() / g).ln()
    };
    Ok(2.0 * (r + delta * u) / k2 - 2.0 * de * (r.atan2(de) + u.atan2(eta)) / k2 - log_term)
}

/// `ln B`; `-∞` at `Δ = 0`.
fn log_prefactor_b(params: &ModelParams, r: f64) -> f64 {
    let ModelParams { g, delta, u, .. } = *params;
    let k2 = params.kappa2_sq();
    (2.0 / PI).ln() + delta.abs().ln() - g.ln() + 0.5 * r.ln() + 0.5 * ((r + delta * u) / k2).ln()
}

fn barrier_domain(params: &ModelParams) -> bool {
    let d = params.delta.abs();
    d > params.kappa2_modulus() && d < params.g
}

/// `Γ = B e^{-δΦ}`.
pub fn rate_barrier(params: &ModelParams) -> Result<RateEstimate> {
    let r = require_bistable(params)?;
    let log = log_prefactor_b(params, r) - delta_phi(params)?;
    Ok(RateEstimate::from_log(log, Method::KramersBarrier, barrier_domain(params)))
}

/// The barrier rate written out for `U = 0`:
/// `(2/π)(|Δ|/G)√(G²-Δ²) exp[-2√(G²-Δ²)/η + (2Δ/η) arctan(√(G²-Δ²)/Δ)]`.
pub fn rate_barrier_dissipative(g: f64, delta: f64, eta: f64) -> f64 {
    let s = (g * g - delta * delta).sqrt();
    2.0 / PI * (delta.abs() / g) * s * (-2.0 * s / eta + 2.0 * delta / eta * s.atan2(delta)).exp()
}

/// Full Eyring-Kramers rate from the closed-form pieces, with its ingredients.
pub fn rate_full(params: &ModelParams) -> Result<(RateEstimate, KramersBreakdown)> {
    let r = require_bistable(params)?;
    let ModelParams { g, delta, eta, u } = *params;
    let k2 = params.kappa2_sq();
    let detuned = delta + u;
    let s2 = g * g - detuned * detuned;
    let det_saddle = -4.0 * (s2 - eta * eta) / (g * g);
    let det_cl = 16.0 * r / k2 * ((r + delta * u + k2) / (eta * eta + detuned * detuned));
    // A real negative Λ₁ and a (+,-) saddle are needed for the formula to apply.
    if s2 <= 0.0 || det_saddle >= 0.0 || !(det_cl > 0.0) {
        return Err(Error::NegativeDeterminantRatio);
    }
    let lambda1 = -2.0 * (s2.sqrt() + eta) / g;
    let phi0 = phi_saddle(params);
    let parts = phi_classical_parts(params)?;
    let dphi = delta_phi(params)?;
    let exponent = parts.0 + parts.1 + parts.2 - phi0;
    let log_full = (g * lambda1.abs() / (2.0 * PI)).ln() + 0.5 * (det_cl / det_saddle.abs()).ln() + exponent;
    let log_b = log_prefactor_b(params, r);
    let log_barrier = log_b - dphi;
    let breakdown = KramersBreakdown {
        phi_saddle: phi0,
        phi_cl_parts: parts,
        delta_phi: dphi,
        prefactor_b: log_b.exp(),
        lambda1_saddle: lambda1,
        det_saddle,
        det_cl,
        log_rate_full: log_full,
        log_rate_barrier: log_barrier,
        rate_full: log_full.exp(),
        rate_barrier: log_barrier.exp(),
    };
    Ok((
        RateEstimate::from_log(log_full, Method::KramersFull, barrier_domain(params)),
        breakdown,
    ))
}

/// `Γ = (4Δ²/|κ₂|) e^{-2G/|κ₂|}`.
pub fn rate_small_detuning(params: &ModelParams) -> RateEstimate {
    let k = params.kappa2_modulus();
    let log = (4.0 * params.delta * params.delta / k).ln() - 2.0 * params.g / k;
    RateEstimate::from_log(log, Method::SmallDetuning, params.delta.abs() < k)
}

/// `Γ = (2/π)√(2G(G-Δ)) exp[-4√2 (G-Δ)^{3/2} / (3η√G)]`, zero past the critical point.
pub fn rate_near_critical(params: &ModelParams) -> RateEstimate {
    let g = params.g;
    let gap = g - params.delta.abs();
    let in_domain = params.u == 0.0 && gap > 0.0 && gap / g < DEFAULT_NEAR_CRITICAL_FRACTION;
    if gap <= 0.0 {
        return RateEstimate::from_log(f64::NEG_INFINITY, Method::NearCritical, in_domain);
    }
    let log = (2.0 / PI).ln() + 0.5 * (2.0 * g * gap).ln()
        - 4.0 * 2f64.sqrt() * gap.powf(1.5) / (3.0 * params.eta * g.sqrt());
    RateEstimate::from_log(log, Method::NearCritical, in_domain)
}

/// Landau-like effective potential of the near-critical Wigner distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectivePotential {
    pub v: f64,
    pub mass: f64,
    pub t_eff: f64,
    /// Position of the right minimum.
    pub x0: f64,
    /// Curvature frequency at the barrier top.
    pub omega0: f64,
}

impl EffectivePotential {
    /// `|V(x₀)| / T_eff`.
    pub fn barrier_over_temperature(params: &ModelParams) -> f64 {
        let x0 = minimum_position(params);
        effective_potential_value(params, x0).abs() / (0.5 * params.g)
    }

    /// Arrhenius estimate `(ω₀/2π) e^{-|V(x₀)|/T_eff}`.
    pub fn arrhenius_rate(params: &ModelParams) -> f64 {
        let w = wigner_effective_potential(params, 0.0);
        w.omega0 / (2.0 * PI) * (-Self::barrier_over_temperature(params)).exp()
    }
}

fn effective_potential_value(params: &ModelParams, x: f64) -> f64 {
    let x2 = x * x;
    0.5 * (params.delta - params.g) * x2 + params.eta * params.eta * x2 * x2 * x2 / (48.0 * params.g)
}

/// `V'(x)`.
pub fn effective_force(params: &ModelParams, x: f64) -> f64 {
    (params.delta - params.g) * x + params.eta * params.eta * x.powi(5) / (8.0 * params.g)
}

/// `x₀ = (8G(G-Δ)/η²)^{1/4}`, the nonzero root of `V'`.
fn minimum_position(params: &ModelParams) -> f64 {
    (8.0 * params.g * (params.g - params.delta) / (params.eta * params.eta)).powf(0.25)
}

pub fn wigner_effective_potential(params: &ModelParams, x: f64) -> EffectivePotential {
    let mass = 1.0 / (2.0 * params.g);
    EffectivePotential {
        v: effective_potential_value(params, x),
        mass,
        t_eff: 0.5 * params.g,
        x0: minimum_position(params),
        omega0: ((params.delta - params.g).abs() / mass).sqrt(),
    }
}

/// Closed-form critical Kerr-to-loss ratio
/// `tan[(2/π)(√(L² + π²/2) - L)]` with `L = ln(G/(e|κ₂|))`.
pub fn critical_ratio(g: f64, kappa2_modulus: f64) -> Result<f64> {
    if !(g > kappa2_modulus && kappa2_modulus > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "critical ratio needs G > |kappa2| > 0, got G={g}, |kappa2|={kappa2_modulus}"
        )));
    }
    let l = (g / (E * kappa2_modulus)).ln();
    Ok((2.0 / PI * ((l * l + PI * PI / 2.0).sqrt() - l)).tan())
}

/// Large-`G` asymptote `π / ln(G²/(e²|κ₂|²))`.
pub fn critical_ratio_asymptote(g: f64, kappa2_modulus: f64) -> f64 {
    PI / (g * g / (E * E * kappa2_modulus * kappa2_modulus)).ln()
}

fn barrier_slope(g: f64, kmod: f64, theta: f64) -> Result<f64> {
    let h = 1e-5 * kmod;
    let at = |d: f64| -> Result<f64> {
        delta_phi(&ModelParams::from_polar(g, d, kmod, theta)?)
    };
    Ok((at(kmod + h)? - at(kmod - h)?) / (2.0 * h))
}

/// Ratio `U/η` at which `∂δΦ/∂Δ` changes sign at `Δ = |κ₂|`, by bisection in θ.
pub fn critical_ratio_barrier_root(g: f64, kappa2_modulus: f64) -> Result<f64> {
    critical_ratio(g, kappa2_modulus)?;
    let (mut lo, mut hi) = (1e-6, 0.5 * PI - 1e-6);
    let s_lo = barrier_slope(g, kappa2_modulus, lo)?;
    let s_hi = barrier_slope(g, kappa2_modulus, hi)?;
    if s_lo.signum() == s_hi.signum() {
        return Err(Error::PredicateNotBracketed);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if barrier_slope(g, kappa2_modulus, mid)?.signum() == s_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).tan())
}

/// Minimal rate `(2G/π) e^{-4G/U}` of a strongly Kerr-dominated resonator,
/// with the detuning `Δ_opt ≈ G + |κ₂|` where it is reached.
pub fn rate_min_large_kerr(params: &ModelParams) -> (RateEstimate, f64) {
    let ModelParams { g, eta, u, .. } = *params;
    let kmod = params.kappa2_modulus();
    let in_domain = eta < u && u / eta <= 8.0 * PI / 3.0 * (g / kmod);
    let log = (2.0 * g / PI).ln() - 4.0 * g / u;
    (
        RateEstimate::from_log(log, Method::KramersBarrier, in_domain),
        g + kmod,
    )
}
