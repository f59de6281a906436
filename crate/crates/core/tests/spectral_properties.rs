use std::f64::consts::PI;

use proptest::prelude::*;
use sqg_core::random::{random_field, rng_for_trial, RandomFieldSpec};
use sqg_core::spectral::{dealias, fractional_laplacian, lp_norm, riesz_perp_velocity, semigroup_apply};
use sqg_core::{besov_norm, build_bank, BesovIndex, BumpProfile, Exponent, Grid2, Level, SpectralField};

fn field(n: usize, seed: u64, k_max: f64) -> SpectralField {
    let g = Grid2::new(n, 2.0 * PI).unwrap();
    let spec = RandomFieldSpec::band(0.0, k_max).with_slope(0.5).with_l2_norm(1.0);
    random_field(&g, &spec, &mut rng_for_trial(seed, 0)).unwrap()
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        (1.0f64..8.0).prop_map(Exponent::Finite),
        Just(Exponent::Infinite),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn semigroup_composes(seed in 0u64..1000, alpha in 0.2f64..2.0, s in 0.0f64..0.05, t in 0.0f64..0.05) {
        let f = field(32, seed, 10.0);
        let two = semigroup_apply(&semigroup_apply(&f, alpha, s).unwrap(), alpha, t).unwrap();
        let one = semigroup_apply(&f, alpha, s + t).unwrap();
        prop_assert!(two.relative_distance(&one) < 1e-12);
    }

    #[test]
    fn semigroup_contracts_every_lp(seed in 0u64..1000, alpha in 0.2f64..2.0, t in 0.0f64..0.2, p in exponent()) {
        let f = field(32, seed, 10.0);
        let e = semigroup_apply(&f, alpha, t).unwrap();
        prop_assert!(e.l2_norm() <= f.l2_norm() * (1.0 + 1e-14));
        if p == Exponent::Finite(2.0) || p == Exponent::Infinite {
            prop_assert!(lp_norm(&e, p).unwrap() <= lp_norm(&f, p).unwrap() * (1.0 + 1e-9));
        }
    }

    #[test]
    fn laplacian_powers_add(seed in 0u64..1000, a in 0.1f64..1.0, b in 0.1f64..1.0) {
        let f = field(32, seed, 10.0);
        let ab = fractional_laplacian(&fractional_laplacian(&f, a).unwrap(), b).unwrap();
        let direct = fractional_laplacian(&f, a + b).unwrap();
        prop_assert!(ab.relative_distance(&direct) < 1e-12);
    }

    #[test]
    fn riesz_velocity_is_divergence_free_and_isometric(seed in 0u64..1000) {
        let f = field(32, seed, 12.0);
        let [u1, u2] = riesz_perp_velocity(&f);
        let div = sqg_core::spectral::divergence(&[u1.clone(), u2.clone()]).unwrap();
        prop_assert!(div.coefficient_norm() < 1e-12);
        let energy = (u1.l2_norm().powi(2) + u2.l2_norm().powi(2)).sqrt();
        prop_assert!((energy - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
    }

    #[test]
    fn dealias_is_idempotent(seed in 0u64..1000) {
        let g = Grid2::new(32, 2.0 * PI).unwrap();
        let samples: Vec<f64> = (0..g.len()).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 1000.0).collect();
        let f = SpectralField::from_physical(&g, &samples).unwrap();
        let once = dealias(&f);
        let twice = dealias(&once);
        prop_assert_eq!(once.coefficients(), twice.coefficients());
        prop_assert!(once.hermitian_defect() < 1e-15);
    }

    #[test]
    fn blocks_reassemble_the_field(seed in 0u64..1000) {
        let g = Grid2::new(64, 2.0 * PI).unwrap();
        let bank = build_bank(&g, BumpProfile::default()).unwrap();
        let f = field(64, seed, bank.partition_radius());
        let mut sum = SpectralField::zeros(f.grid());
        for level in bank.levels() {
            sum = sum.add(&bank.block(&f, level).unwrap()).unwrap();
        }
        prop_assert!(sum.relative_distance(&f) < 1e-14);
    }

    #[test]
    fn distant_blocks_are_orthogonal(seed in 0u64..1000, j in 1usize..4, gap in 2usize..4) {
        let f = field(64, seed, 20.0);
        let bank = build_bank(f.grid(), BumpProfile::default()).unwrap();
        let k = j + gap;
        prop_assume!(k <= bank.j_max());
        let fj = bank.block(&f, Level::J(j)).unwrap();
        prop_assert_eq!(bank.block(&fj, Level::J(k)).unwrap().coefficient_norm(), 0.0);
    }

    #[test]
    fn besov_norm_is_a_norm(seed in 0u64..1000, s in -1.0f64..1.0, p in exponent(), q in exponent(), c in -3.0f64..3.0) {
        let f = field(64, seed, 20.0);
        let h = field(64, seed + 1, 20.0);
        let bank = build_bank(f.grid(), BumpProfile::default()).unwrap();
        let idx = BesovIndex::new(s, p, q).unwrap();
        let nf = besov_norm(&f, &bank, idx).unwrap();
        let nh = besov_norm(&h, &bank, idx).unwrap();
        let scaled = besov_norm(&f.scale(c), &bank, idx).unwrap();
        prop_assert!((scaled - c.abs() * nf).abs() <= 1e-12 * nf.max(1e-300));
        let sum = besov_norm(&f.add(&h).unwrap(), &bank, idx).unwrap();
        prop_assert!(sum <= (nf + nh) * (1.0 + 1e-12));
    }

    #[test]
    fn split_recombines(seed in 0u64..1000, j in 0usize..4) {
        let f = field(64, seed, 20.0);
        let bank = build_bank(f.grid(), BumpProfile::default()).unwrap();
        let lo = bank.s_partial(&f, j).unwrap();
        let hi = bank.tilde_s(&f, j).unwrap();
        prop_assert!(lo.add(&hi).unwrap().relative_distance(&f) < 1e-15);
    }
}
