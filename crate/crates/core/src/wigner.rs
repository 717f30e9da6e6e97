//! Exact steady-state Wigner function at `U = 0` from hypergeometric series.
//!
//! `W(x, p) = (2/π) |₀F₁(1/2 - iΔ/η; (G/2η)(x - ip)²)|² e^{-(x² + p²)} / ₁F₂(1/2; 1/2 - iΔ/η, 1/2 + iΔ/η; G²/η²)`.
//!
//! With this quadrature convention the density is normalized against
//! `d²α = dx dp / 2`, so `∫∫ W dx dp = 2`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, GridValues, PhaseSpaceGrid};
use crate::model::ModelParams;
use crate::semiclassical;

/// Relative size below which a series term counts as negligible.
pub const SERIES_EPS: f64 = 1e-14;
/// Hard cap on the number of series terms.
pub const MAX_SERIES_TERMS: usize = 100_000;
const SMALL_TERMS_TO_STOP: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypergeometricSpec {
    pub upper: Vec<Complex64>,
    pub lower: Vec<Complex64>,
    pub argument: Complex64,
}

impl HypergeometricSpec {
    /// `₀F₁(; b; z)`.
    pub fn f01(b: Complex64, z: Complex64) -> Self {
        HypergeometricSpec {
            upper: Vec::new(),
            lower: vec![b],
            argument: z,
        }
    }

    /// `₁F₂(a; b₁, b₂; z)`.
    pub fn f12(a: Complex64, b1: Complex64, b2: Complex64, z: Complex64) -> Self {
        HypergeometricSpec {
            upper: vec![a],
            lower: vec![b1, b2],
            argument: z,
        }
    }

    /// Term budget: grows like `10√|z|`, since terms peak near `k ≈ √|z|`.
    pub fn term_budget(&self) -> usize {
        let scaled = 10.0 * self.argument.norm().sqrt() + 100.0;
        (scaled.min(MAX_SERIES_TERMS as f64) as usize).max(1)
    }
}

fn is_pole(b: Complex64) -> bool {
    b.im == 0.0 && b.re <= 0.0 && b.re.fract() == 0.0
}

/// Power-series value of `pFq(upper; lower; z)`.
pub fn hypergeometric(spec: &HypergeometricSpec) -> Result<Complex64> {
    if spec.lower.iter().copied().any(is_pole) {
        return Err(Error::LowerParameterPole);
    }
    let z = spec.argument;
    let budget = spec.term_budget();
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut small_run = 0;
    for k in 0..budget {
        let kf = k as f64;
        let num: Complex64 = spec.upper.iter().map(|&a| a + kf).product();
        let den: Complex64 = spec.lower.iter().map(|&b| b + kf).product();
        term = term * num / den * z / (kf + 1.0);
        sum += term;
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if term.norm() < SERIES_EPS * sum.norm() {
            small_run += 1;
            if small_run == SMALL_TERMS_TO_STOP {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
        if term == Complex64::new(0.0, 0.0) {
            // Terminating series (an upper parameter hit a non-positive integer).
            return Ok(sum);
        }
    }
    Err(Error::MaxTermsExceeded(budget))
}

/// Parameters shared by every grid point.
#[derive(Debug, Clone, Copy)]
struct WignerKernel {
    b: Complex64,
    scale: f64,
    log_norm: f64,
}

impl WignerKernel {
    fn new(params: &ModelParams) -> Result<Self> {
        if !(params.eta > 0.0) {
            return Err(Error::EtaZero);
        }
        let b = Complex64::new(0.5, -params.delta / params.eta);
        let ratio = params.g / params.eta;
        let norm = hypergeometric(&HypergeometricSpec::f12(
            Complex64::new(0.5, 0.0),
            b,
            b.conj(),
            Complex64::new(ratio * ratio, 0.0),
        ))?;
        Ok(WignerKernel {
            b,
            scale: 0.5 * ratio,
            log_norm: norm.re.ln(),
        })
    }

    fn eval(&self, x: f64, p: f64) -> Result<f64> {
        let q = Complex64::new(x, -p);
        let f = hypergeometric(&HypergeometricSpec::f01(self.b, self.scale * q * q))?;
        let log_w = (2.0 / std::f64::consts::PI).ln() + f.norm_sqr().ln() - self.log_norm - (x * x + p * p);
        Ok(log_w.exp())
    }
}

pub fn wigner(params: &ModelParams, x: f64, p: f64) -> Result<f64> {
    WignerKernel::new(params)?.eval(x, p)
}

/// Square grid of radius `√(2(n₀+1)) + 5` around the origin.
pub fn default_grid(params: &ModelParams, nodes_per_axis: usize) -> GridSpec {
    let n0 = semiclassical::photon_number(params).unwrap_or(0.0);
    GridSpec::symmetric((2.0 * (n0 + 1.0)).sqrt() + 5.0, nodes_per_axis)
}

pub fn wigner_grid(params: &ModelParams, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    let kernel = WignerKernel::new(params)?;
    let x_axis = spec.x_axis();
    let p_axis = spec.p_axis();
    let values = x_axis
        .par_iter()
        .flat_map_iter(|&x| p_axis.iter().map(move |&p| kernel.eval(x, p)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PhaseSpaceGrid {
        x_axis,
        p_axis,
        values: GridValues::Scalar(values),
        params: *params,
    })
}

/// Trapezoidal `∫∫ f dx dp` of a scalar grid.
pub fn integrate(grid: &PhaseSpaceGrid) -> Result<f64> {
    let v = grid
        .scalar()
        .ok_or_else(|| Error::InvalidGrid("integration needs a scalar field".into()))?;
    let (nx, np) = (grid.x_axis.len(), grid.p_axis.len());
    if nx < 2 || np < 2 {
        return Err(Error::InvalidGrid("integration needs at least 2x2 nodes".into()));
    }
    let hx = (grid.x_axis[nx - 1] - grid.x_axis[0]) / (nx - 1) as f64;
    let hp = (grid.p_axis[np - 1] - grid.p_axis[0]) / (np - 1) as f64;
    let w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mut total = 0.0;
    for ix in 0..nx {
        for ip in 0..np {
            total += w(ix, nx) * w(ip, np) * v[grid.index(ix, ip)];
        }
    }
    Ok(total * hx * hp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_argument() {
        for b in [c(0.5, 0.0), c(0.5, -3.0), c(2.3, 1.0)] {
            assert_eq!(hypergeometric(&HypergeometricSpec::f01(b, c(0.0, 0.0))).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn cosh_identity() {
        let v = hypergeometric(&HypergeometricSpec::f01(c(0.5, 0.0), c(1.0, 0.0))).unwrap();
        assert!((v.re - 2f64.cosh()).abs() < 1e-14 * v.re);
        assert!((v.re - 3.7622).abs() < 1e-4);
        let y = 40.0f64;
        let v = hypergeometric(&HypergeometricSpec::f01(c(0.5, 0.0), c(y, 0.0))).unwrap();
        assert!((v.re / (2.0 * y.sqrt()).cosh() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn lower_pole_rejected() {
        let s = HypergeometricSpec::f12(c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(hypergeometric(&s), Err(Error::LowerParameterPole));
        let s = HypergeometricSpec::f01(c(-3.0, 0.0), c(1.0, 0.0));
        assert_eq!(hypergeometric(&s), Err(Error::LowerParameterPole));
    }

    #[test]
    fn budget_grows_with_argument() {
        let small = HypergeometricSpec::f01(c(0.5, 0.0), c(1.0, 0.0)).term_budget();
        let big = HypergeometricSpec::f01(c(0.5, 0.0), c(1e6, 0.0)).term_budget();
        assert_eq!(small, 110);
        assert_eq!(big, 10_100);
    }

    #[test]
    fn vacuum_limit() {
        let q = ModelParams::new(1e-12, 0.0, 1.0, 0.0).unwrap();
        for (x, p) in [(0.0, 0.0), (0.7, -0.3), (1.5, 1.0)] {
            let w = wigner(&q, x, p).unwrap();
            assert!((w - 2.0 / PI * (-(x * x + p * p) as f64).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn needs_dissipation() {
        let q = ModelParams::new(6.0, 3.0, 0.0, 1.0).unwrap();
        assert_eq!(wigner(&q, 0.0, 0.0), Err(Error::EtaZero));
    }

    #[test]
    fn single_node_grid_at_origin() {
        let q = ModelParams::new(6.0, 3.0, 1.0, 0.0).unwrap();
        let g = wigner_grid(&q, &GridSpec::symmetric(0.0, 1)).unwrap();
        let norm = hypergeometric(&HypergeometricSpec::f12(c(0.5, 0.0), c(0.5, -3.0), c(0.5, 3.0), c(36.0, 0.0)))
            .unwrap();
        let v = g.scalar().unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - 2.0 / PI / norm.re).abs() < 1e-14);
    }

    #[test]
    fn grid_parity_and_peaks() {
        let q = ModelParams::new(6.0, 3.0, 1.0, 0.0).unwrap();
        let g = wigner_grid(&q, &GridSpec::symmetric(5.0, 21)).unwrap();
        let v = g.scalar().unwrap();
        for ix in 0..21 {
            for ip in 0..21 {
                let a = v[g.index(ix, ip)];
                let b = v[g.index(20 - ix, 20 - ip)];
                assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
                assert!(a > 0.0);
            }
        }
        assert_eq!(g.local_maxima().len(), 2);
    }

    #[test]
    fn normalization() {
        let q = ModelParams::new(6.0, 3.0, 1.0, 0.0).unwrap();
        let g = wigner_grid(&q, &default_grid(&q, 121)).unwrap();
        let total = integrate(&g).unwrap();
        assert!((total / 2.0 - 1.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn reproducible() {
        let q = ModelParams::new(6.0, 1.5, 0.7, 0.0).unwrap();
        assert_eq!(
            wigner(&q, 1.234, -0.5).unwrap().to_bits(),
            wigner(&q, 1.234, -0.5).unwrap().to_bits()
        );
    }
}
