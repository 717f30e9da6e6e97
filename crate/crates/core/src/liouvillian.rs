//! Lindbladian superoperator on a truncated Fock basis and its spectrum.
//!
//! Density matrices are vectorized by column stacking: element `ρ[n, m]`
//! sits at index `n + N·m`, so `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
//!
//! Both the Hamiltonian and the jump operator `a²` change the photon number
//! by 0 or ±2, so the superoperator never mixes the four parity sectors of
//! `(n mod 2, m mod 2)`. The even/odd diagonal sectors each conserve their
//! own trace; the off-diagonal (`n + m` odd) sectors hold the coherences
//! between the two cat lobes and carry the switching eigenvalue.

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rate::{Method, RateEstimate, RateMeta};
use crate::semiclassical;

/// Default relative zero threshold, in units of [`ModelParams::rate_scale`].
pub const DEFAULT_ZERO_TOL: f64 = 1e-11;
/// Largest steady-state occupation of the top Fock level that is accepted.
pub const MAX_TRUNCATION_LEAK: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct FockOperator {
    entries: Mat<Complex64>,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.entries
    }

    /// `a` with `a[n-1, n] = √n`.
    pub fn annihilation(dim: usize) -> Self {
        let entries = Mat::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                Complex64::new((j as f64).sqrt(), 0.0)
            } else {
                ZERO
            }
        });
        FockOperator { entries }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim();
        FockOperator {
            entries: Mat::from_fn(n, n, |i, j| self.entries[(j, i)].conj()),
        }
    }

    /// Largest entry-wise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// `H = -Δ a†a + (U/2) a†a†aa + (iG/2)(a†² - a²)` on `|0⟩ … |N-1⟩`.
pub fn build_hamiltonian(params: &ModelParams, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::TruncationTooSmall { got: dim, min: 2 });
    }
    let half_g = 0.5 * params.g;
    let entries = Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            let k = i as f64;
            Complex64::new(-params.delta * k + 0.5 * params.u * k * (k - 1.0), 0.0)
        } else if i == j + 2 {
            // a†²|j⟩ = √((j+1)(j+2)) |j+2⟩
            Complex64::new(0.0, half_g * (((j + 1) * (j + 2)) as f64).sqrt())
        } else if j == i + 2 {
            Complex64::new(0.0, -half_g * (((i + 1) * (i + 2)) as f64).sqrt())
        } else {
            ZERO
        }
    });
    Ok(FockOperator { entries })
}

/// Parity sector `(n mod 2, m mod 2)` of a density-matrix element `ρ[n, m]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    EvenEven,
    OddOdd,
    EvenOdd,
    OddEven,
}

impl Sector {
    pub const ALL: [Sector; 4] = [
        Sector::EvenEven,
        Sector::OddOdd,
        Sector::EvenOdd,
        Sector::OddEven,
    ];

    pub fn of(n: usize, m: usize) -> Sector {
        match (n % 2, m % 2) {
            (0, 0) => Sector::EvenEven,
            (1, 1) => Sector::OddOdd,
            (0, _) => Sector::EvenOdd,
            _ => Sector::OddEven,
        }
    }

    /// Sectors whose elements have odd `n + m`.
    pub fn is_coherence(&self) -> bool {
        matches!(self, Sector::EvenOdd | Sector::OddEven)
    }
}

/// A (block of the) Lindbladian acting on vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    fock_dim: usize,
    /// `(n, m)` labels of the basis elements, in column-stacking order.
    basis: Vec<(usize, usize)>,
    matrix: Mat<Complex64>,
    rate_scale: f64,
}

impl Superoperator {
    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(usize, usize)] {
        &self.basis
    }

    pub fn matrix(&self) -> &Mat<Complex64> {
        &self.matrix
    }

    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.matrix[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Applies the superoperator to `vec(ρ)` given in this block's basis order.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Restricts to the basis elements selected by `keep`.
    pub fn restrict(&self, keep: impl Fn(usize, usize) -> bool) -> Superoperator {
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&i| keep(self.basis[i].0, self.basis[i].1))
            .collect();
        Superoperator {
            fock_dim: self.fock_dim,
            basis: idx.iter().map(|&i| self.basis[i]).collect(),
            matrix: Mat::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])]),
            rate_scale: self.rate_scale,
        }
    }

    /// Largest coupling between elements of different parity sectors.
    pub fn cross_sector_coupling(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, &(n, m)) in self.basis.iter().enumerate() {
            for (j, &(n2, m2)) in self.basis.iter().enumerate() {
                if Sector::of(n, m) != Sector::of(n2, m2) {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }
}

fn assemble(
    params: &ModelParams,
    dim: usize,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<Superoperator> {
    if dim < 4 {
        return Err(Error::TruncationTooSmall { got: dim, min: 4 });
    }
    let h = build_hamiltonian(params, dim)?;
    let basis: Vec<(usize, usize)> = (0..dim)
        .flat_map(|m| (0..dim).map(move |n| (n, m)))
        .filter(|&(n, m)| keep(n, m))
        .collect();
    let mut position = vec![usize::MAX; dim * dim];
    for (i, &(n, m)) in basis.iter().enumerate() {
        position[n + dim * m] = i;
    }
    let d = basis.len();
    let mut matrix = Mat::<Complex64>::zeros(d, d);
    let i_unit = Complex64::i();
    let eta = params.eta;
    let pair = |k: usize| ((k * k.saturating_sub(1)) as f64).sqrt();
    let number_pair = |k: usize| (k * k.saturating_sub(1)) as f64;

    for (col, &(n0, m0)) in basis.iter().enumerate() {
        let mut add = |n: usize, m: usize, v: Complex64| {
            let row = position[n + dim * m];
            // Couplings out of the block vanish for every sector-closed block.
            if row != usize::MAX {
                matrix[(row, col)] += v;
            }
        };
        // -i H |n0⟩⟨m0|
        for n in 0..dim {
            let hn = h.get(n, n0);
            if hn != ZERO {
                add(n, m0, -i_unit * hn);
            }
        }
        // +i |n0⟩⟨m0| H
        for m in 0..dim {
            let hm = h.get(m0, m);
            if hm != ZERO {
                add(n0, m, i_unit * hm);
            }
        }
        if eta != 0.0 {
            // (η/2)·2 a²|n0⟩⟨m0|a†²
            if n0 >= 2 && m0 >= 2 {
                add(n0 - 2, m0 - 2, Complex64::new(eta * pair(n0) * pair(m0), 0.0));
            }
            // -(η/2)(a†²a² ρ + ρ a†²a²)
            add(
                n0,
                m0,
                Complex64::new(-0.5 * eta * (number_pair(n0) + number_pair(m0)), 0.0),
            );
        }
    }
    Ok(Superoperator {
        fock_dim: dim,
        basis,
        matrix,
        rate_scale: params.rate_scale(),
    })
}

/// Full `N² × N²` Lindbladian.
pub fn build_liouvillian(params: &ModelParams, dim: usize) -> Result<Superoperator> {
    assemble(params, dim, |_, _| true)
}

/// One parity sector of the Lindbladian, built directly.
pub fn build_sector(params: &ModelParams, dim: usize, sector: Sector) -> Result<Superoperator> {
    assemble(params, dim, |n, m| Sector::of(n, m) == sector)
}

/// Splits a superoperator into its `n + m` even and odd blocks.
pub fn parity_blocks(superop: &Superoperator) -> (Superoperator, Superoperator) {
    (
        superop.restrict(|n, m| (n + m) % 2 == 0),
        superop.restrict(|n, m| (n + m) % 2 == 1),
    )
}

/// `ceil(n0 + 8√n0 + 10)` with `n0` the semiclassical photon number (0 if absent).
pub fn default_truncation(params: &ModelParams) -> usize {
    let n0 = semiclassical::photon_number(params).unwrap_or(0.0);
    ((n0 + 8.0 * n0.sqrt() + 10.0).ceil() as usize).max(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// All eigenvalues, sorted by descending real part.
    pub eigenvalues: Vec<Complex64>,
    pub steady_count: usize,
    /// `-Re λ₁` of the switching eigenvalue, or 0 when it is numerically zero.
    pub gap: f64,
    pub switching_eigenvalue: Complex64,
    /// Top-level occupation of the parity steady states, when those sectors are present.
    pub truncation_diag: Option<f64>,
    pub zero_threshold: f64,
    pub fock_dim: usize,
}

fn eigenvalues(m: &Mat<Complex64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.eigenvalues().map_err(|_| Error::EigensolveFailed)
}

fn sort_descending(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
}

/// Trace-normalized steady state of a diagonal parity sector.
///
/// Returns `(n, ρ[n, n])` for the highest Fock level in the sector.
fn sector_steady_top(block: &Superoperator) -> Result<f64> {
    let d = block.dim();
    let mut a = block.matrix.clone();
    // Replace the first equation by the trace constraint.
    for j in 0..d {
        let (n, m) = block.basis[j];
        a[(0, j)] = if n == m { Complex64::new(1.0, 0.0) } else { ZERO };
    }
    let mut rhs = Mat::<Complex64>::zeros(d, 1);
    rhs[(0, 0)] = Complex64::new(1.0, 0.0);
    let x = a.partial_piv_lu().solve(&rhs);
    if (0..d).any(|i| !x[(i, 0)].re.is_finite() || !x[(i, 0)].im.is_finite()) {
        return Err(Error::SingularSteadyState);
    }
    let top = block
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &(n, m))| n == m)
        .max_by_key(|(_, &(n, _))| n)
        .map(|(i, _)| i)
        .ok_or(Error::SingularSteadyState)?;
    Ok(x[(top, 0)].norm())
}

/// Full dense eigensolve of `superop`, sector by sector.
pub fn spectrum(superop: &Superoperator, zero_tol: f64) -> Result<SpectrumResult> {
    let threshold = zero_tol * superop.rate_scale;
    let mut all = Vec::with_capacity(superop.dim());
    let mut coherence = Vec::new();
    let mut truncation_diag: Option<f64> = None;

    let split = superop.cross_sector_coupling() == 0.0;
    if split {
        for sector in Sector::ALL {
            let block = superop.restrict(|n, m| Sector::of(n, m) == sector);
            if block.dim() == 0 {
                continue;
            }
            let ev = eigenvalues(&block.matrix)?;
            if sector.is_coherence() {
                coherence.extend_from_slice(&ev);
            } else if superop.rate_scale > 0.0 {
                if let Ok(top) = sector_steady_top(&block) {
                    truncation_diag = Some(truncation_diag.map_or(top, |t: f64| t.max(top)));
                }
            }
            all.extend(ev);
        }
    } else {
        all = eigenvalues(&superop.matrix)?;
    }
    sort_descending(&mut all);
    sort_descending(&mut coherence);

    let steady_count = all.iter().filter(|e| e.re.abs() < threshold).count();
    let switching_eigenvalue = if let Some(&first) = coherence.first() {
        first
    } else {
        all.iter()
            .copied()
            .find(|e| e.re.abs() >= threshold)
            .unwrap_or(ZERO)
    };
    let gap = if switching_eigenvalue.re.abs() < threshold {
        0.0
    } else {
        (-switching_eigenvalue.re).max(0.0)
    };
    Ok(SpectrumResult {
        eigenvalues: all,
        steady_count,
        gap,
        switching_eigenvalue,
        truncation_diag,
        zero_threshold: threshold,
        fock_dim: superop.fock_dim,
    })
}

/// Numeric switching rate `Γ = -Re λ₁` from the coherence sector.
///
/// Only three `N²/4` blocks are built: the two diagonal sectors for the
/// truncation check and one coherence sector (the other is its mirror image
/// with conjugated spectrum).
pub fn liouvillian_gap(
    params: &ModelParams,
    truncation: Option<usize>,
    zero_tol: f64,
) -> Result<RateEstimate> {
    if params.eta <= 0.0 {
        return Err(Error::EtaZero);
    }
    let dim = truncation.unwrap_or_else(|| default_truncation(params));
    let mut leak = 0.0f64;
    for sector in [Sector::EvenEven, Sector::OddOdd] {
        let block = build_sector(params, dim, sector)?;
        leak = leak.max(sector_steady_top(&block)?);
    }
    if leak > MAX_TRUNCATION_LEAK {
        return Err(Error::TruncationLeak {
            truncation: dim,
            occupation: leak,
        });
    }
    let block = build_sector(params, dim, Sector::EvenOdd)?;
    let mut ev = eigenvalues(&block.matrix)?;
    sort_descending(&mut ev);
    let lambda = ev.first().copied().ok_or(Error::EigensolveFailed)?;
    let threshold = zero_tol * params.rate_scale();
    let gap = if lambda.re.abs() < threshold {
        0.0
    } else {
        (-lambda.re).max(0.0)
    };
    let mut est = RateEstimate::from_value(gap, Method::NumericGap, true);
    est.meta = RateMeta {
        truncation: Some(dim),
        truncation_diag: Some(leak),
        ..RateMeta::default()
    };
    Ok(est)
}
