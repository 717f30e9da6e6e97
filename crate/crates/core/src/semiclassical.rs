//! Mean-field amplitude equation, its fixed points and their stability.
//!
//! In terms of the quadratures `α = (x + ip)/√2` the mean-field flow is
//!
//! ```text
//! ẋ = G x - Δ p - ½ (x² + p²)(η x - U p)
//! ṗ = Δ x - G p - ½ (x² + p²)(η p + U x)
//! ```
//!
//! and the nontrivial fixed points are `±α₀ = ±√n₀ e^{iθ₀}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, GridValues, PhaseSpaceGrid};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadratureState {
    pub x: f64,
    pub p: f64,
}

impl QuadratureState {
    pub fn new(x: f64, p: f64) -> Self {
        QuadratureState { x, p }
    }

    pub fn from_amplitude(alpha: Complex64) -> Self {
        let s = std::f64::consts::SQRT_2;
        QuadratureState {
            x: s * alpha.re,
            p: s * alpha.im,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite()
    }

    fn axpy(self, a: f64, other: Self) -> Self {
        QuadratureState {
            x: self.x + a * other.x,
            p: self.p + a * other.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    Saddle,
    Center,
    StableFocus,
    StableNode,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPoint {
    Origin,
    Nontrivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub n0: f64,
    pub theta0: f64,
    pub alpha0: Complex64,
    pub saddle: Stability,
    pub nontrivial: Stability,
}

impl FixedPointSet {
    /// Quadratures `(x₀, p₀)` of `+α₀`.
    pub fn quadratures(&self) -> QuadratureState {
        QuadratureState::from_amplitude(self.alpha0)
    }
}

/// `G²(η² + U²) - Δ²η²`, the radicand shared by most closed forms.
pub fn radicand(params: &ModelParams) -> f64 {
    params.g * params.g * params.kappa2_sq() - params.delta * params.delta * params.eta * params.eta
}

/// Mean photon number `n₀` of the nontrivial fixed points, if they exist.
pub fn photon_number(params: &ModelParams) -> Result<f64> {
    let rad = radicand(params);
    let k2 = params.kappa2_sq();
    if rad < 0.0 || k2 == 0.0 {
        return Err(Error::NoBistability);
    }
    let n0 = (rad.sqrt() + params.delta * params.u) / k2;
    if n0 <= 0.0 {
        return Err(Error::NoBistability);
    }
    Ok(n0)
}

pub fn fixed_points(params: &ModelParams) -> Result<FixedPointSet> {
    let n0 = photon_number(params)?;
    let rhs = Complex64::new(radicand(params).sqrt(), params.delta * params.eta)
        / (params.g * params.kappa2());
    let theta0 = 0.5 * rhs.arg();
    let alpha0 = Complex64::from_polar(n0.sqrt(), theta0);
    Ok(FixedPointSet {
        n0,
        theta0,
        alpha0,
        saddle: origin_stability(params),
        nontrivial: nontrivial_stability(params, n0, alpha0),
    })
}

/// Time derivative `(ẋ, ṗ)` of the mean-field flow.
pub fn drift(params: &ModelParams, s: QuadratureState) -> QuadratureState {
    let ModelParams { g, delta, eta, u } = *params;
    let r2 = 0.5 * (s.x * s.x + s.p * s.p);
    QuadratureState {
        x: g * s.x - delta * s.p - r2 * (eta * s.x - u * s.p),
        p: delta * s.x - g * s.p - r2 * (eta * s.p + u * s.x),
    }
}

/// Jacobian of `(A_α, A_β)` with respect to `(α, β)` at `β = α*`.
pub fn jacobian(params: &ModelParams, alpha: Complex64) -> [[Complex64; 2]; 2] {
    let i = Complex64::i();
    let k = params.kappa2();
    let beta = alpha.conj();
    let ab = alpha * beta;
    [
        [i * params.delta - 2.0 * ab * k, params.g - alpha * alpha * k],
        [params.g - beta * beta * k.conj(), -i * params.delta - 2.0 * ab * k.conj()],
    ]
}

pub(crate) fn eig2(m: [[Complex64; 2]; 2]) -> [Complex64; 2] {
    let half_tr = 0.5 * (m[0][0] + m[1][1]);
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (half_tr * half_tr - det).sqrt();
    [half_tr + disc, half_tr - disc]
}

fn classify(eigs: [Complex64; 2], scale: f64) -> StabilityClass {
    let tol = 1e-12 * scale.max(1.0);
    let real = eigs.iter().all(|e| e.im.abs() <= tol);
    let imag = eigs.iter().all(|e| e.re.abs() <= tol);
    if imag && !real {
        StabilityClass::Center
    } else if real && eigs[0].re * eigs[1].re < 0.0 {
        StabilityClass::Saddle
    } else if eigs.iter().all(|e| e.re < 0.0) {
        if real {
            StabilityClass::StableNode
        } else {
            StabilityClass::StableFocus
        }
    } else {
        StabilityClass::Unstable
    }
}

fn origin_stability(params: &ModelParams) -> Stability {
    let root = Complex64::new(params.g * params.g - params.delta * params.delta, 0.0).sqrt();
    let eigenvalues = [root, -root];
    let class = if params.delta.abs() < params.g {
        StabilityClass::Saddle
    } else {
        StabilityClass::Center
    };
    Stability { eigenvalues, class }
}

fn nontrivial_stability(params: &ModelParams, n0: f64, alpha0: Complex64) -> Stability {
    if params.u == 0.0 {
        // Closed form degenerates to 0·∞; the Jacobian eigensolve is exact.
        let eigenvalues = eig2(jacobian(params, alpha0));
        let class = classify(eigenvalues, params.rate_scale() * n0);
        return Stability { eigenvalues, class };
    }
    let arg = 1.0 - params.delta / (params.u * n0);
    let root = Complex64::new(arg, 0.0).sqrt();
    let i = Complex64::i();
    let eigenvalues = [
        -2.0 * n0 * (params.eta + i * params.u * root),
        -2.0 * n0 * (params.eta - i * params.u * root),
    ];
    let class = if arg > 0.0 {
        StabilityClass::StableFocus
    } else {
        StabilityClass::StableNode
    };
    Stability { eigenvalues, class }
}

pub fn stability_at(params: &ModelParams, point: FixedPoint) -> Result<Stability> {
    match point {
        FixedPoint::Origin => Ok(origin_stability(params)),
        FixedPoint::Nontrivial => fixed_points(params).map(|f| f.nontrivial),
    }
}

fn rk4_step(params: &ModelParams, s: QuadratureState, dt: f64) -> QuadratureState {
    let k1 = drift(params, s);
    let k2 = drift(params, s.axpy(0.5 * dt, k1));
    let k3 = drift(params, s.axpy(0.5 * dt, k2));
    let k4 = drift(params, s.axpy(dt, k3));
    QuadratureState {
        x: s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        p: s.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
    }
}

/// Fixed-step classical Runge-Kutta integration; the result includes `s0`.
pub fn integrate_trajectory(
    params: &ModelParams,
    s0: QuadratureState,
    dt: f64,
    n_steps: usize,
) -> Result<Vec<QuadratureState>> {
    if !(dt > 0.0) || n_steps == 0 {
        return Err(Error::InvalidArgument(
            "trajectory needs dt > 0 and at least one step".into(),
        ));
    }
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(s0);
    let mut s = s0;
    for _ in 0..n_steps {
        s = rk4_step(params, s, dt);
        if !s.is_finite() {
            return Err(Error::NonFinite);
        }
        out.push(s);
    }
    Ok(out)
}

pub fn vector_field_grid(params: &ModelParams, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    let x_axis = spec.x_axis();
    let p_axis = spec.p_axis();
    let values = x_axis
        .iter()
        .flat_map(|&x| p_axis.iter().map(move |&p| (x, p)))
        .map(|(x, p)| {
            let d = drift(params, QuadratureState::new(x, p));
            [d.x, d.p]
        })
        .collect();
    Ok(PhaseSpaceGrid {
        x_axis,
        p_axis,
        values: GridValues::Vector(values),
        params: *params,
    })
}
