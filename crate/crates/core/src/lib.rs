//! Bit-flip rates of a two-photon driven Kerr resonator with two-photon loss.
//!
//! Three independent routes to the switching rate live side by side:
//! the dissipative gap of the Lindbladian ([`liouvillian`]), closed-form
//! Kramers theory in the complex-P representation ([`kramers`]) and
//! Langevin first-passage Monte Carlo ([`langevin`]). [`sweep`] runs them
//! across parameter grids.

pub mod config;
pub mod emit;
pub mod error;
pub mod grid;
pub mod kramers;
pub mod langevin;
pub mod liouvillian;
pub mod model;
pub mod rate;
pub mod semiclassical;
pub mod sweep;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::{GridSpec, GridValues, PhaseSpaceGrid};
pub use kramers::{EffectivePotential, KramersBreakdown, PotentialExtrema};
pub use langevin::{EscapeStatistics, LangevinConfig};
pub use liouvillian::{Sector, SpectrumResult, Superoperator};
pub use model::{classify_regime, DetuningClass, ModelParams, Regime, SaddleClass};
pub use num_complex::Complex64;
pub use rate::{Method, RateEstimate, RateMeta};
pub use semiclassical::{FixedPoint, FixedPointSet, QuadratureState, Stability, StabilityClass};
pub use sweep::{
    CriticalRatio, EvalOptions, OptimalDetuning, Spacing, SweepGrid, SweepSpec, SweepTable,
    SweepVariable,
};
