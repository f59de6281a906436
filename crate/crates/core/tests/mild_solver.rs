use std::f64::consts::PI;

use proptest::prelude::*;
use sqg_core::mild::{linear_series, march, picard_solve, solution_map, SolveParams};
use sqg_core::random::{random_field, rng_for_trial, RandomFieldSpec};
use sqg_core::{Grid2, SpectralField, SqgError};

fn data(g: &Grid2, seed: u64, l2: f64) -> SpectralField {
    let spec = RandomFieldSpec::band(1.0, 8.0).with_slope(1.0).with_l2_norm(l2);
    random_field(g, &spec, &mut rng_for_trial(seed, 0)).unwrap()
}

#[test]
fn march_is_a_fixed_point_of_the_solution_map() {
    let g = Grid2::new(64, 2.0 * PI).unwrap();
    let th = data(&g, 1, 0.5);
    let params = SolveParams::new(1.5, 64, 2.0 * PI, 0.1, 0.0025);
    let sol = march(&th, &params).unwrap();
    let mapped = solution_map(&th, &sol.series, &params).unwrap();
    let gap = sol
        .series
        .fields()
        .iter()
        .zip(mapped.fields())
        .map(|(a, b)| a.relative_distance(b))
        .fold(0.0, f64::max);
    assert!(gap < 1e-4, "fixed-point gap {gap}");
}

#[test]
fn picard_and_march_agree() {
    let g = Grid2::new(32, 2.0 * PI).unwrap();
    let th = data(&g, 2, 0.3);
    let params = SolveParams::new(2.0, 32, 2.0 * PI, 0.05, 0.0025);
    let a = march(&th, &params).unwrap();
    let b = picard_solve(&th, &params.with_depth(8)).unwrap();
    assert!(a.series.last().relative_distance(b.series.last()) < 1e-5);
    assert!(b.picard_distances.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn linear_runs_follow_the_semigroup() {
    let g = Grid2::new(32, 2.0 * PI).unwrap();
    let th = data(&g, 3, 1.0);
    let params = SolveParams::new(1.0, 32, 2.0 * PI, 0.2, 0.01).linear();
    let sol = march(&th, &params).unwrap();
    let exact = linear_series(&th, &params).unwrap();
    for (a, b) in sol.series.fields().iter().zip(exact.fields()) {
        assert!(a.relative_distance(b) < 1e-13);
    }
}

#[test]
fn large_data_is_reported_as_blow_up() {
    let g = Grid2::new(32, 2.0 * PI).unwrap();
    let th = data(&g, 4, 1e13);
    let params = SolveParams::new(2.0, 32, 2.0 * PI, 0.02, 0.01);
    assert!(matches!(march(&th, &params), Err(SqgError::BlowUp { .. })));
}

#[test]
fn zero_data_stays_zero() {
    let g = Grid2::new(32, 2.0 * PI).unwrap();
    let params = SolveParams::new(0.5, 32, 2.0 * PI, 0.1, 0.01);
    let sol = march(&SpectralField::zeros(&g), &params).unwrap();
    assert!(sol.diagnostics.iter().all(|d| d.l2 == 0.0 && d.linf == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lp_norms_never_grow(seed in 0u64..1000, alpha in prop::sample::select(vec![0.5, 1.0, 1.5, 2.0])) {
        let g = Grid2::new(64, 2.0 * PI).unwrap();
        let th = data(&g, seed, 0.3);
        let params = SolveParams::new(alpha, 64, 2.0 * PI, 0.1, 0.005);
        let sol = march(&th, &params).unwrap();
        for w in sol.diagnostics.windows(2) {
            prop_assert!(w[1].l2 <= w[0].l2 * (1.0 + 1e-6));
            prop_assert!(w[1].l4 <= w[0].l4 * (1.0 + 1e-6));
            prop_assert!(w[1].linf <= w[0].linf * (1.0 + 1e-6));
            prop_assert!(w[1].mean.abs() <= 1e-12);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in 0u64..1000) {
        let g = Grid2::new(32, 2.0 * PI).unwrap();
        let th = data(&g, seed, 0.5);
        let params = SolveParams::new(1.0, 32, 2.0 * PI, 0.05, 0.01);
        let a = march(&th, &params).unwrap();
        let b = march(&th, &params).unwrap();
        prop_assert_eq!(a.series.last().coefficients(), b.series.last().coefficients());
    }
}
