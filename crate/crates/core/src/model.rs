//! Physical parameters of the driven Kerr resonator and regime classification.
//!
//! All rates are dimensionless multiples of a common reference rate; nothing
//! in the crate converts units. The complex nonlinear coupling is
//! `κ₂ = η + iU = |κ₂| e^{iθ}` and is always derived from `eta` and `u`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semiclassical::{self, FixedPoint, StabilityClass};

/// Default relative distance `(G - |Δ|)/G` below which a point counts as near-critical.
pub const DEFAULT_NEAR_CRITICAL_FRACTION: f64 = 0.05;

/// Pump rate `G`, detuning `Δ = ω_p - ω_c`, two-photon loss `η` and Kerr `U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub eta: f64,
    #[serde(rename = "U")]
    pub u: f64,
}

impl ModelParams {
    /// Builds and validates a parameter set.
    pub fn new(g: f64, delta: f64, eta: f64, u: f64) -> Result<Self> {
        validate(ModelParams { g, delta, eta, u })
    }

    /// Parameterization used throughout the figures: `η = |κ₂| cos θ`, `U = |κ₂| sin θ`.
    pub fn from_polar(g: f64, delta: f64, kappa2_modulus: f64, theta: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        // cos(π/2) is 6e-17, not zero; keep the exact dissipationless limit.
        let eta = if (theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15 {
            0.0
        } else {
            kappa2_modulus * c
        };
        Self::new(g, delta, eta, kappa2_modulus * s)
    }

    pub fn kappa2(&self) -> Complex64 {
        Complex64::new(self.eta, self.u)
    }

    /// `|κ₂| = sqrt(η² + U²)`.
    pub fn kappa2_modulus(&self) -> f64 {
        self.eta.hypot(self.u)
    }

    /// `θ = arctan(U/η)`, equal to π/2 when `η = 0`.
    pub fn kappa2_phase(&self) -> f64 {
        self.u.atan2(self.eta)
    }

    /// `η² + U²`.
    pub fn kappa2_sq(&self) -> f64 {
        self.eta * self.eta + self.u * self.u
    }

    /// Largest rate in the problem; used as the scale for "numerically zero".
    pub fn rate_scale(&self) -> f64 {
        self.g.max(self.delta.abs()).max(self.eta).max(self.u)
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        ModelParams { delta, ..*self }
    }
}

/// Checks the field constraints and returns the parameters unchanged.
pub fn validate(params: ModelParams) -> Result<ModelParams> {
    for (name, v) in [
        ("G", params.g),
        ("Delta", params.delta),
        ("eta", params.eta),
        ("U", params.u),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFiniteParameter(name));
        }
    }
    if params.g <= 0.0 {
        return Err(Error::NonPositivePump(params.g));
    }
    if params.eta < 0.0 {
        return Err(Error::NegativeRate {
            name: "eta",
            value: params.eta,
        });
    }
    if params.u < 0.0 {
        return Err(Error::NegativeRate {
            name: "U",
            value: params.u,
        });
    }
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningClass {
    /// `|Δ| < |κ₂|`
    Small,
    /// `|κ₂| <= |Δ| < G`, away from the critical point
    Barrier,
    /// `(G - |Δ|)/G` below the configured fraction
    NearCritical,
    /// `|Δ| >= G`: no bistability
    BeyondCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaddleClass {
    Saddle,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub bistable: bool,
    pub detuning_class: DetuningClass,
    pub saddle_class: SaddleClass,
    /// Stability of `±α₀`; `None` when the nontrivial pair does not exist.
    pub nontrivial_class: Option<StabilityClass>,
}

pub fn classify_regime(params: &ModelParams, near_critical_fraction: f64) -> Result<Regime> {
    if !(near_critical_fraction > 0.0 && near_critical_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "near_critical_fraction must lie in (0, 1), got {near_critical_fraction}"
        )));
    }
    let abs_delta = params.delta.abs();
    let bistable = abs_delta < params.g;
    let saddle_class = if bistable {
        SaddleClass::Saddle
    } else {
        SaddleClass::Center
    };
    let detuning_class = if !bistable {
        DetuningClass::BeyondCritical
    } else if (params.g - abs_delta) / params.g < near_critical_fraction {
        DetuningClass::NearCritical
    } else if abs_delta < params.kappa2_modulus() {
        DetuningClass::Small
    } else {
        DetuningClass::Barrier
    };
    let nontrivial_class = semiclassical::stability_at(params, FixedPoint::Nontrivial)
        .ok()
        .map(|s| s.class);
    Ok(Regime {
        bistable,
        detuning_class,
        saddle_class,
        nontrivial_class,
    })
}
