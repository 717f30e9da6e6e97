//! The vectorized Lindbladian checked against a direct evaluation of the
//! master equation with dense operator products.

use catflip_core::liouvillian::{
    build_liouvillian, default_truncation, liouvillian_gap, parity_blocks, spectrum,
    DEFAULT_ZERO_TOL,
};
use catflip_core::{Complex64, ModelParams};
use proptest::prelude::*;

type Dense = Vec<Vec<Complex64>>;

fn zeros(n: usize) -> Dense {
    vec![vec![Complex64::new(0.0, 0.0); n]; n]
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    let mut d = zeros(n);
    for i in 0..n {
        for j in 0..n {
            d[i][j] = a[j][i].conj();
        }
    }
    d
}

/// `a` built from scratch, independent of the crate's operator code.
fn lowering(n: usize) -> Dense {
    let mut a = zeros(n);
    for k in 1..n {
        a[k - 1][k] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    a
}

fn hamiltonian(p: &ModelParams, n: usize) -> Dense {
    let a = lowering(n);
    let ad = dagger(&a);
    let num = matmul(&ad, &a);
    let a2 = matmul(&a, &a);
    let ad2 = matmul(&ad, &ad);
    let kerr = matmul(&ad2, &a2);
    let i = Complex64::i();
    let mut h = zeros(n);
    for r in 0..n {
        for c in 0..n {
            h[r][c] = -p.delta * num[r][c] + 0.5 * p.u * kerr[r][c] + 0.5 * i * p.g * (ad2[r][c] - a2[r][c]);
        }
    }
    h
}

fn master_rhs(p: &ModelParams, rho: &Dense) -> Dense {
    let n = rho.len();
    let h = hamiltonian(p, n);
    let a = lowering(n);
    let a2 = matmul(&a, &a);
    let a2d = dagger(&a2);
    let nn = matmul(&a2d, &a2);
    let hr = matmul(&h, rho);
    let rh = matmul(rho, &h);
    let jump = matmul(&matmul(&a2, rho), &a2d);
    let left = matmul(&nn, rho);
    let right = matmul(rho, &nn);
    let i = Complex64::i();
    let mut out = zeros(n);
    for r in 0..n {
        for c in 0..n {
            out[r][c] = -i * (hr[r][c] - rh[r][c])
                + 0.5 * p.eta * (2.0 * jump[r][c] - left[r][c] - right[r][c]);
        }
    }
    out
}

fn vectorize(rho: &Dense) -> Vec<Complex64> {
    let n = rho.len();
    let mut v = Vec::with_capacity(n * n);
    for m in 0..n {
        for row in rho.iter() {
            v.push(row[m]);
        }
    }
    v
}

fn unvectorize(v: &[Complex64], n: usize) -> Dense {
    let mut rho = zeros(n);
    for m in 0..n {
        for k in 0..n {
            rho[k][m] = v[k + n * m];
        }
    }
    rho
}

fn params() -> impl Strategy<Value = ModelParams> {
    (0.5f64..8.0, -4.0f64..4.0, 0.0f64..2.0, 0.0f64..2.0)
        .prop_map(|(g, d, eta, u)| ModelParams::new(g, d, eta, u).unwrap())
}

fn density(n: usize) -> impl Strategy<Value = Dense> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let mut r = zeros(n);
        for i in 0..n {
            for j in 0..n {
                let (re, im) = v[i * n + j];
                r[i][j] = Complex64::new(re, im);
            }
        }
        r
    })
}

fn hermitian(rho: &Dense) -> Dense {
    let d = dagger(rho);
    let n = rho.len();
    let mut h = zeros(n);
    for i in 0..n {
        for j in 0..n {
            h[i][j] = 0.5 * (rho[i][j] + d[i][j]);
        }
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn superoperator_matches_master_equation(p in params(), rho in density(7)) {
        let l = build_liouvillian(&p, 7).unwrap();
        let got = unvectorize(&l.apply(&vectorize(&rho)), 7);
        let want = master_rhs(&p, &rho);
        let scale = l.norm_inf();
        for i in 0..7 {
            for j in 0..7 {
                prop_assert!((got[i][j] - want[i][j]).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn trace_and_hermiticity_are_preserved(p in params(), rho in density(8)) {
        let rho = hermitian(&rho);
        let l = build_liouvillian(&p, 8).unwrap();
        let out = unvectorize(&l.apply(&vectorize(&rho)), 8);
        let scale = l.norm_inf();
        let trace: Complex64 = (0..8).map(|k| out[k][k]).sum();
        prop_assert!(trace.norm() <= 1e-10 * scale);
        for i in 0..8 {
            for j in 0..8 {
                prop_assert!((out[i][j] - out[j][i].conj()).norm() <= 1e-10 * scale);
            }
        }
    }
}

#[test]
fn two_photon_state_decays_at_eta() {
    // L|2><2| has diagonal element -(eta/2)(2 + 2) = -2 eta.
    let p = ModelParams::new(1e-300, 0.0, 1.0, 0.0).unwrap();
    let l = build_liouvillian(&p, 5).unwrap();
    let idx = 2 + 5 * 2;
    assert_eq!(l.matrix()[(idx, idx)], Complex64::new(-2.0, 0.0));
    assert!((l.matrix()[(0, idx)] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
}

fn eigenvalues_dense(m: &faer::Mat<Complex64>) -> Vec<Complex64> {
    m.eigenvalues().unwrap()
}

#[test]
fn parity_blocks_reproduce_the_full_spectrum() {
    let p = ModelParams::new(3.0, 1.3, 0.7, 0.4).unwrap();
    let l = build_liouvillian(&p, 8).unwrap();
    let full = eigenvalues_dense(l.matrix());
    let (even, odd) = parity_blocks(&l);
    let mut blocks = eigenvalues_dense(even.matrix());
    blocks.extend(eigenvalues_dense(odd.matrix()));
    let sectors = spectrum(&l, DEFAULT_ZERO_TOL).unwrap().eigenvalues;
    assert_eq!(full.len(), 64);
    assert_eq!(blocks.len(), 64);
    assert_eq!(sectors.len(), 64);
    let scale = l.norm_inf();
    for other in [&blocks, &sectors] {
        let mut used = vec![false; 64];
        for z in &full {
            let (j, d) = other
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, w)| (j, (w - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[j] = true;
            assert!(d <= 1e-8 * scale, "{z} unmatched ({d})");
        }
    }
}

#[test]
fn steady_states_follow_parity() {
    let detuned = ModelParams::new(6.0, 3.0, 1.0, 0.5).unwrap();
    let l = build_liouvillian(&detuned, default_truncation(&detuned)).unwrap();
    let s = spectrum(&l, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(s.steady_count, 2);
    assert!(s.gap > 0.0);
    assert!(s.truncation_diag.unwrap() < 1e-8);

    let resonant = ModelParams::new(6.0, 0.0, 1.0, 0.5).unwrap();
    let l = build_liouvillian(&resonant, default_truncation(&resonant)).unwrap();
    let s = spectrum(&l, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(s.steady_count, 4);
    assert_eq!(s.gap, 0.0);
}

#[test]
fn gap_agrees_with_full_spectrum() {
    let p = ModelParams::new(4.0, 1.5, 1.0, 0.3).unwrap();
    let n = default_truncation(&p);
    let fast = liouvillian_gap(&p, Some(n), DEFAULT_ZERO_TOL).unwrap();
    let full = spectrum(&build_liouvillian(&p, n).unwrap(), DEFAULT_ZERO_TOL).unwrap();
    assert!((fast.value / full.gap - 1.0).abs() < 1e-9);
    assert_eq!(fast.meta.truncation, Some(n));
}

#[test]
fn gap_converges_in_truncation() {
    for p in [
        ModelParams::new(6.0, 3.0, 1.0, 0.0).unwrap(),
        ModelParams::from_polar(6.0, 2.0, 1.0, std::f64::consts::FRAC_PI_4).unwrap(),
    ] {
        let n = default_truncation(&p);
        let a = liouvillian_gap(&p, Some(n), DEFAULT_ZERO_TOL).unwrap().value;
        let b = liouvillian_gap(&p, Some(n + 10), DEFAULT_ZERO_TOL).unwrap().value;
        assert!((a / b - 1.0).abs() < 0.01, "{a} vs {b}");
    }
}

#[test]
fn gap_is_even_in_detuning_without_kerr() {
    let a = liouvillian_gap(&ModelParams::new(5.0, 2.0, 1.0, 0.0).unwrap(), None, DEFAULT_ZERO_TOL).unwrap();
    let b = liouvillian_gap(&ModelParams::new(5.0, -2.0, 1.0, 0.0).unwrap(), None, DEFAULT_ZERO_TOL).unwrap();
    assert!((a.value / b.value - 1.0).abs() < 1e-8);
}

#[test]
fn gap_is_reproducible() {
    let p = ModelParams::new(6.0, 2.5, 0.8, 0.3).unwrap();
    let a = liouvillian_gap(&p, None, DEFAULT_ZERO_TOL).unwrap();
    let b = liouvillian_gap(&p, None, DEFAULT_ZERO_TOL).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn gap_at_moderate_detuning() {
    // Switching rate at G=6, Delta=3, eta=1 sits close to the barrier estimate 2.7e-2.
    let p = ModelParams::new(6.0, 3.0, 1.0, 0.0).unwrap();
    let g = liouvillian_gap(&p, None, DEFAULT_ZERO_TOL).unwrap();
    assert!((g.value - 0.029).abs() < 0.002, "{}", g.value);
}
