use std::f64::consts::PI;

use proptest::prelude::*;
use sqg_core::estimates::*;
use sqg_core::{build_bank, BumpProfile, DyadicBank, Exponent, Grid2};

fn bank(n: usize, l: f64) -> DyadicBank {
    build_bank(&Grid2::new(n, l).unwrap(), BumpProfile::default()).unwrap()
}

/// Test-side oracle for `Σ_{n≤N} 2^{rn} n^{-4}`, summed from the top down.
fn oracle_sum(rate: f64, n_terms: usize) -> f64 {
    let mut acc = 0.0;
    for n in (1..=n_terms).rev() {
        let nf = n as f64;
        acc += (rate * nf * std::f64::consts::LN_2).exp() / (nf * nf * nf * nf);
    }
    acc
}

#[test]
fn pairing_tracks_the_divergent_series() {
    let (f, g) = build_counterexample_pair(-0.5, 12, Construction::Pairing, CounterexampleMode::Quadrature).unwrap();
    let values = pairing_series(&f, &g, PairingKind::Single).unwrap();
    let c = values[0] / oracle_sum(1.0, 1);
    for (i, v) in values.iter().enumerate() {
        let expect = c * oracle_sum(1.0, i + 1);
        assert!((v / expect - 1.0).abs() < 1e-4, "N = {}: {v} vs {expect}", i + 1);
    }
    assert!(values.windows(2).all(|w| w[1] > w[0]));
    // The successive ratio creeps toward 2 only slowly.
    let r = values[11] / values[10];
    assert!(r > 1.0 && r < 1.2);
}

#[test]
fn symmetrized_pairing_cancels() {
    let (f, g) = build_counterexample_pair(-0.5, 12, Construction::Pairing, CounterexampleMode::Quadrature).unwrap();
    let single = pairing_series(&f, &g, PairingKind::Single).unwrap();
    let sym = pairing_series(&f, &g, PairingKind::Symmetrized).unwrap();
    for (a, b) in single.iter().zip(&sym) {
        assert!(b.abs() < 1e-12 * a);
    }
}

#[test]
fn grid_route_agrees_with_quadrature() {
    let grid = Grid2::new(1024, 160.0 * PI).unwrap();
    let (fq, gq) = build_counterexample_pair(-0.5, 2, Construction::Pairing, CounterexampleMode::Quadrature).unwrap();
    let (fg, gg) = build_counterexample_pair(-0.5, 2, Construction::Pairing, CounterexampleMode::Grid(grid)).unwrap();
    let q = pairing_quadrature(&fq, &gq, PairingKind::Single).unwrap();
    let l = pairing_grid(&fg, &gg, PairingKind::Single).unwrap();
    assert!((l / q - 1.0).abs() < 0.01, "grid {l} vs quadrature {q}");
}

#[test]
fn product_lower_bound_diverges_or_converges_with_s() {
    for n in [5, 10, 20] {
        let v = product_norm_lower_bound(-0.75, n).unwrap();
        assert!((v.lower_bound / oracle_sum(0.5, n) - 1.0).abs() < 1e-13);
        assert!(v.quadrature > 0.0);
    }
    let ratios: Vec<f64> = (20..=200).step_by(20).map(|n| oracle_sum(0.5, n) / oracle_sum(0.5, n - 1)).collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]));
    assert!((ratios.last().unwrap() / 2f64.sqrt() - 1.0).abs() < 0.05);
    let v = product_norm_lower_bound(-0.5, 50).unwrap();
    assert!((v.lower_bound / (PI.powi(4) / 90.0) - 1.0).abs() < 0.01);
}

#[test]
fn quadrature_refuses_oversized_sums() {
    let r = build_counterexample_pair(-0.5, 5000, Construction::Pairing, CounterexampleMode::Quadrature);
    assert!(r.is_err());
}

#[test]
fn bernstein_ratios_are_uniform_across_resolutions() {
    let mut per_level = Vec::new();
    for n in [128, 256] {
        let b = bank(n, PI / 2.0);
        let levels: Vec<usize> = (2..=b.j_max().min(7)).collect();
        let src = RandomSource::full_band(&b, 3, 1);
        let r = verify_bernstein(&b, Exponent::Finite(4.0), &levels, &src, 8).unwrap();
        per_level.extend(r.per_level_sup("gradient"));
        let two = verify_bernstein(&b, Exponent::Finite(2.0), &levels, &src, 8).unwrap();
        assert!(two.sup_of("gradient") <= 4.0 / 3.0 + 1e-9);
    }
    assert!(level_spread(&per_level, 2..=7) < 3.0);
}

#[test]
fn paraproduct_and_bilinear_constants_stay_bounded() {
    let b = bank(128, 2.0 * PI);
    let src = RandomSource::product_band(&b, 21, 2);
    let para = verify_paraproduct(&b, ParaproductParams::default(), &src, 6).unwrap();
    let bil = verify_bilinear(&b, BilinearParams::default(), &src, 6).unwrap();
    let prod = verify_product(&b, ProductParams::default(), &src, 6).unwrap();
    for r in [&para, &bil, &prod] {
        assert!(!r.records.is_empty(), "{}", r.lemma_id);
        let c = r.sup_constant();
        assert!(c.is_finite() && c > 0.0 && c < 1e3, "{}: {c}", r.lemma_id);
    }
}

#[test]
fn reports_reproduce_for_a_seed() {
    let b = bank(64, 2.0 * PI);
    let src = RandomSource::full_band(&b, 99, 1);
    let a = verify_bernstein(&b, Exponent::Infinite, &[1, 2, 3], &src, 4).unwrap();
    let c = verify_bernstein(&b, Exponent::Infinite, &[1, 2, 3], &src, 4).unwrap();
    assert_eq!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ratios_are_finite_and_non_negative(seed in 0u64..10_000, p in 1.0f64..6.0) {
        let b = bank(64, 2.0 * PI);
        let src = RandomSource::full_band(&b, seed, 1);
        let r = verify_bernstein(&b, Exponent::Finite(p), &[1, 2, 3], &src, 3).unwrap();
        prop_assert!(r.ratios().iter().all(|x| x.is_finite() && *x >= 0.0));
        let src2 = RandomSource::product_band(&b, seed, 2);
        let m = verify_commutators(&b, CommutatorParams::default(), &src2, 2).unwrap();
        prop_assert!(m.ratios().iter().all(|x| x.is_finite() && *x >= 0.0));
    }

    #[test]
    fn partial_sums_are_monotone(rate in -1.0f64..1.0, n in 1usize..60) {
        prop_assert!(partial_sum(rate, n + 1) >= partial_sum(rate, n));
        prop_assert!((partial_sum(rate, n) / oracle_sum(rate, n) - 1.0).abs() < 1e-13);
    }
}
