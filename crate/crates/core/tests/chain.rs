//! Iterated mapping against recurrence coefficients computed independently
//! with the Stieltjes procedure on a fine discretisation of the measure
//! `J dω / 2π`.

use std::f64::consts::PI;

use fermionic_rc::parallel::Execution;
use fermionic_rc::spectral::{chebyshev_grid, iterate_chain, MappingOptions, SpectralDensity};
use proptest::prelude::*;

/// `(b_k, a_k)` of the monic recurrence `p_{k+1} = (x - a_k) p_k - b_k p_{k-1}`,
/// with `b_0` the total mass.
fn stieltjes(j: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, levels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / n as f64;
    let x: Vec<f64> = (0..n).map(|i| a + (i as f64 + 0.5) * h).collect();
    let m: Vec<f64> = x.iter().map(|&x| j(x) * h / (2.0 * PI)).collect();
    let mut prev = vec![0.0; n];
    let mut cur = vec![1.0; n];
    let mut prev_norm = 1.0;
    let mut out = Vec::new();
    for k in 0..levels {
        let norm: f64 = (0..n).map(|i| m[i] * cur[i] * cur[i]).sum();
        let ak = (0..n).map(|i| m[i] * x[i] * cur[i] * cur[i]).sum::<f64>() / norm;
        let bk = if k == 0 { norm } else { norm / prev_norm };
        out.push((bk, ak));
        let next: Vec<f64> = (0..n).map(|i| (x[i] - ak) * cur[i] - bk * prev[i]).collect();
        let next = if k == 0 {
            (0..n).map(|i| (x[i] - ak) * cur[i]).collect()
        } else {
            next
        };
        prev = std::mem::replace(&mut cur, next);
        prev_norm = norm;
    }
    out
}

#[test]
fn flat_band_follows_legendre_recurrence() {
    let h = 0.7;
    let chain = iterate_chain(&SpectralDensity::flat(h, -1.0, 1.0), 12, &MappingOptions::default()).unwrap();
    assert!((chain[0].coupling.powi(2) - h / PI).abs() < 1e-14);
    for (k, level) in chain.iter().enumerate().skip(1) {
        let k = k as f64;
        let expect = k / (4.0 * k * k - 1.0).sqrt();
        assert!(
            (level.coupling - expect).abs() < 1e-5,
            "level {k}: {} vs {expect}",
            level.coupling
        );
        assert!(level.energy.abs() < 1e-10);
    }
}

#[test]
fn skewed_density_matches_stieltjes() {
    let j = |w: f64| (1.0 + 0.5 * w) * (1.0 - 0.3 * w * w);
    let grid = chebyshev_grid(-1.0, 1.0, 2049);
    let values = grid.iter().map(|&w| j(w)).collect();
    let sd = SpectralDensity::tabulated(grid, values).unwrap();
    let chain = iterate_chain(&sd, 6, &MappingOptions::default()).unwrap();
    let oracle = stieltjes(j, -1.0, 1.0, 400_000, 6);
    for (k, (level, (bk, ak))) in chain.iter().zip(&oracle).enumerate() {
        let lam = bk.sqrt();
        assert!(
            ((level.coupling - lam) / lam).abs() < 1e-4,
            "level {k}: λ {} vs {lam}",
            level.coupling
        );
        assert!((level.energy - ak).abs() < 1e-4, "level {k}: E {} vs {ak}", level.energy);
    }
}

#[test]
fn sequential_and_parallel_chains_are_identical() {
    let sd = SpectralDensity::flat(1.0, -1.0, 1.0);
    let seq = MappingOptions {
        execution: Execution::Sequential,
        ..Default::default()
    };
    let par = MappingOptions {
        execution: Execution::Workers(3),
        ..Default::default()
    };
    assert_eq!(iterate_chain(&sd, 4, &seq).unwrap(), iterate_chain(&sd, 4, &par).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn first_level_matches_moments(c0 in 0.2f64..2.0, c1 in -0.15f64..0.15, lo in -3.0f64..-0.5, width in 0.5f64..4.0) {
        let hi = lo + width;
        let j = move |w: f64| c0 * (1.0 + c1 * (w - lo));
        let grid = chebyshev_grid(lo, hi, 257);
        let sd = SpectralDensity::tabulated(grid.clone(), grid.iter().map(|&w| j(w)).collect()).unwrap();
        let level = &iterate_chain(&sd, 1, &MappingOptions::default()).unwrap()[0];
        // Linear J: moments in closed form.
        let m0 = c0 * (width + 0.5 * c1 * width * width);
        let m1 = c0 * ((hi * hi - lo * lo) / 2.0 + c1 * ((hi - lo).powi(3) / 3.0 + lo * (hi - lo).powi(2) / 2.0));
        prop_assert!((level.coupling.powi(2) - m0 / (2.0 * PI)).abs() < 1e-12 * m0);
        prop_assert!((level.energy - m1 / m0).abs() < 1e-12 * (1.0 + (m1 / m0).abs()));
        prop_assert!(level.residual.eval(0.5 * (lo + hi)) > 0.0);
    }
}
