use std::f64::consts::PI;

use proptest::prelude::*;
use sqg_core::mild::{march, SolveParams};
use sqg_core::random::{random_field, rng_for_trial, RandomFieldSpec};
use sqg_core::uniqueness::*;
use sqg_core::{build_bank, BesovIndex, BumpProfile, DyadicBank, Exponent, Grid2, SpectralField};

fn setup(n: usize) -> (Grid2, DyadicBank) {
    let g = Grid2::new(n, 2.0 * PI).unwrap();
    let b = build_bank(&g, BumpProfile::default()).unwrap();
    (g, b)
}

fn data(g: &Grid2, seed: u64, l2: f64) -> SpectralField {
    let spec = RandomFieldSpec::band(1.0, 4.0).with_l2_norm(l2);
    random_field(g, &spec, &mut rng_for_trial(seed, 0)).unwrap()
}

#[test]
fn dt_refinement_converges_at_second_order() {
    let (g, bank) = setup(64);
    let th = data(&g, 1, 0.5);
    let params = SolveParams::new(1.5, 64, 2.0 * PI, 0.2, 0.02);
    let norm = TheoremNorm::for_alpha(1.5).unwrap();
    let (order, e) = temporal_order(&th, &params, &bank, &norm).unwrap();
    assert!((order - 2.0).abs() < 0.3, "order {order}, errors {e:?}");
}

#[test]
fn small_perturbations_stay_small() {
    let (g, bank) = setup(64);
    let th = data(&g, 2, 0.5);
    let params = SolveParams::new(2.0, 64, 2.0 * PI, 0.1, 0.01);
    let norm = TheoremNorm::for_alpha(2.0).unwrap();
    let mode = TwinMode::Perturbed {
        delta: 1e-6,
        direction: data(&g, 3, 1.0),
    };
    let e = twin_run(&th, &params, &mode, &bank, &norm).unwrap();
    let amp = e.amplification.unwrap();
    assert!(amp > 0.0 && amp <= 10.0, "amplification {amp}");
    assert!(e.w_norms.iter().all(|w| *w <= 10.0 * 1e-6));
}

#[test]
fn picard_depth_twins_agree_closely() {
    let (g, bank) = setup(32);
    let th = data(&g, 4, 0.2);
    let params = SolveParams::new(2.0, 32, 2.0 * PI, 0.05, 0.005);
    let norm = TheoremNorm::for_alpha(2.0).unwrap();
    let e = twin_run(&th, &params.with_depth(6), &TwinMode::Depth { depth: 8 }, &bank, &norm).unwrap();
    assert_eq!(e.w_norms[0], 0.0);
    assert!(e.final_norm() < 1e-8 * norm.of_field(&th, &bank).unwrap());
}

#[test]
fn nonlinear_part_shrinks_with_the_horizon() {
    let (g, bank) = setup(64);
    let th = data(&g, 5, 0.5);
    let params = SolveParams::new(1.5, 64, 2.0 * PI, 0.08, 0.00125);
    let sol = march(&th, &params).unwrap();
    let idx = BesovIndex::new(-0.5, Exponent::Infinite, Exponent::Finite(1.0)).unwrap();
    let curve = nonlinear_smallness(&sol, &bank, idx).unwrap();
    assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1));
    let ratio = curve.last().unwrap().1 / curve[0].1;
    assert!(ratio < 0.1, "last/first = {ratio}");
}

#[test]
fn harmonic_tail_decays_and_unit_tail_does_not() {
    let (_, bank) = setup(512);
    let p = Exponent::Finite(4.0);
    let ladder = [1e-1, 1e-2, 1e-3];
    let th = block_law_field(&bank, 0.25, p, BlockLaw::Harmonic).unwrap();
    let r = continuity_criterion_test(&th, &bank, 0.25, p, 2.0, &ladder, 0.5).unwrap();
    assert!(r.curve.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(r.tail.windows(2).all(|w| w[1].1 <= w[0].1));
    let unit = block_law_field(&bank, 0.25, p, BlockLaw::Unit).unwrap();
    let u = continuity_criterion_test(&unit, &bank, 0.25, p, 2.0, &ladder, 0.5).unwrap();
    assert!(!u.decays);
    assert!(u.curve.iter().all(|(_, d)| *d >= 0.5 * u.curve[0].1));
}

#[test]
fn zero_data_has_zero_nonlinear_part() {
    let (g, bank) = setup(32);
    let params = SolveParams::new(1.0, 32, 2.0 * PI, 0.1, 0.01);
    let sol = march(&SpectralField::zeros(&g), &params).unwrap();
    let idx = BesovIndex::new(-0.25, Exponent::Infinite, Exponent::Infinite).unwrap();
    assert!(nonlinear_smallness(&sol, &bank, idx).unwrap().iter().all(|(_, v)| *v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn end_point_exponents_are_ordered(alpha in 1.5001f64..1.9999) {
        let (p, q) = end_point_exponent(alpha).unwrap();
        prop_assert!(1.0 < q && q <= p / 2.0 && p.is_finite());
        let (l, r) = exponent_identity(alpha).unwrap();
        prop_assert!((l - r).abs() < 1e-12);
    }

    #[test]
    fn norms_exist_for_every_alpha(alpha in 0.01f64..=2.0) {
        let n = TheoremNorm::for_alpha(alpha).unwrap();
        prop_assert_eq!(n.riesz_low, alpha <= 1.5);
        prop_assert!(n.index.s < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn contraction_ignores_labels(seed in 0u64..1000, alpha in prop::sample::select(vec![1.0, 1.5, 1.75, 2.0])) {
        let (g, bank) = setup(32);
        let th = data(&g, seed, 0.3);
        let other = th.add(&data(&g, seed + 1, 0.01)).unwrap();
        let params = SolveParams::new(alpha, 32, 2.0 * PI, 0.08, 0.01);
        let a = march(&th, &params).unwrap().series;
        let b = march(&other, &params).unwrap().series;
        let norm = TheoremNorm::for_alpha(alpha).unwrap();
        let x = contraction_factor(&a, &b, &params, &bank, &norm).unwrap();
        let y = contraction_factor(&b, &a, &params, &bank, &norm).unwrap();
        prop_assert_eq!(x.factor, y.factor);
        prop_assert!(x.factor > 0.0 && x.factor < 1.0);
    }

    #[test]
    fn twins_start_from_identical_states(seed in 0u64..1000, refinement in 1usize..4) {
        let (g, bank) = setup(32);
        let th = data(&g, seed, 0.3);
        let params = SolveParams::new(2.0, 32, 2.0 * PI, 0.06, 0.01);
        let norm = TheoremNorm::for_alpha(2.0).unwrap();
        let e = twin_run(&th, &params, &TwinMode::Refined { refinement }, &bank, &norm).unwrap();
        prop_assert_eq!(e.w_norms[0], 0.0);
        prop_assert!(e.w_series.fields()[0].coefficients().iter().all(|c| c.norm() == 0.0));
    }
}
