//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use sqg_core::estimates::{
    build_counterexample_pair, critical_packets, duhamel_ladder, duhamel_norm_index, level_spread, pairing_series,
    partial_sum, product_norm_lower_bound, verify_bernstein, verify_duhamel_bound, Construction, CounterexampleMode,
    PairingKind, RandomSource,
};
use sqg_core::mild::{divergence_form_check, march, SolveParams};
use sqg_core::random::{random_field, rng_for_trial, RandomFieldSpec};
use sqg_core::spectral::{fractional_laplacian, riesz_perp_velocity, semigroup_apply};
use sqg_core::uniqueness::{
    block_law_field, continuity_criterion_test, contraction_curve, temporal_order, twin_run, BlockLaw, TheoremNorm,
    TwinMode,
};
use sqg_core::{build_bank, BumpProfile, DyadicBank, Exponent, Grid2, Level, SpectralField};

struct Outcome {
    id: usize,
    name: &'static str,
    checks: Vec<(String, bool)>,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok) && self.elapsed <= self.budget
    }

    fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "{status} {} {} ({:.2}s, budget {}s)",
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        );
        for (detail, ok) in &self.checks {
            s.push_str(&format!("\n    [{}] {detail}", if *ok { "ok" } else { "x" }));
        }
        s
    }
}

fn run(id: usize, name: &'static str, budget_s: u64, body: impl FnOnce() -> Vec<(String, bool)>) -> Outcome {
    let start = Instant::now();
    let checks = body();
    Outcome {
        id,
        name,
        checks,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_s),
    }
}

fn bank(n: usize, l: f64) -> DyadicBank {
    build_bank(&Grid2::new(n, l).unwrap(), BumpProfile::default()).unwrap()
}

fn small_data(g: &Grid2, seed: u64, lo: f64, hi: f64, l2: f64) -> SpectralField {
    let spec = RandomFieldSpec::band(lo, hi).with_l2_norm(l2);
    random_field(g, &spec, &mut rng_for_trial(seed, 0)).unwrap()
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.relative_distance(b)
}

fn spectral_exactness() -> Vec<(String, bool)> {
    let g = Grid2::new(256, 2.0 * PI).unwrap();
    let (m1, m2, phase) = (3i64, -5i64, 0.4);
    let k = ((m1 * m1 + m2 * m2) as f64).sqrt();
    let theta = SpectralField::from_fn(&g, |x, y| (m1 as f64 * x + m2 as f64 * y + phase).cos());
    let mut worst_lap = 0.0f64;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let got = fractional_laplacian(&theta, alpha).unwrap();
        worst_lap = worst_lap.max(rel(&got, &theta.scale(k.powf(alpha))));
    }
    let [u1, u2] = riesz_perp_velocity(&theta);
    let sine = SpectralField::from_fn(&g, |x, y| (m1 as f64 * x + m2 as f64 * y + phase).sin());
    let riesz = rel(&u1, &sine.scale(m2 as f64 / k)).max(rel(&u2, &sine.scale(-m1 as f64 / k)));
    let mut worst_semi = 0.0f64;
    let mut worst_comp = 0.0f64;
    let f = small_data(&g, 1, 1.0, 60.0, 1.0);
    for alpha in [0.5, 1.0, 2.0] {
        let t = 0.01;
        let got = semigroup_apply(&theta, alpha, t).unwrap();
        worst_semi = worst_semi.max(rel(&got, &theta.scale((-t * k.powf(alpha)).exp())));
        let ab = semigroup_apply(&semigroup_apply(&f, alpha, 0.003).unwrap(), alpha, 0.007).unwrap();
        worst_comp = worst_comp.max(rel(&ab, &semigroup_apply(&f, alpha, 0.01).unwrap()));
    }
    vec![
        (format!("fractional Laplacian rel err {worst_lap:.2e} <= 1e-12"), worst_lap <= 1e-12),
        (format!("Riesz velocity rel err {riesz:.2e} <= 1e-12"), riesz <= 1e-12),
        (format!("semigroup rel err {worst_semi:.2e} <= 1e-12"), worst_semi <= 1e-12),
        (format!("semigroup composition rel err {worst_comp:.2e} <= 1e-12"), worst_comp <= 1e-12),
    ]
}

fn partition_of_unity() -> Vec<(String, bool)> {
    let b = bank(256, 2.0 * PI);
    let g = b.grid().clone();
    let mut sum = b.dense_symbol(Level::Psi).unwrap();
    for j in 1..=b.j_max() {
        for (s, w) in sum.iter_mut().zip(b.dense_symbol(Level::J(j)).unwrap()) {
            *s += w;
        }
    }
    let residual = sum
        .iter()
        .enumerate()
        .filter(|(i, _)| g.kmag(*i) <= b.partition_radius())
        .map(|(_, s)| (s - 1.0).abs())
        .fold(0.0, f64::max);
    let f = small_data(&g, 2, 0.0, b.partition_radius(), 1.0);
    let norm = f.coefficient_norm();
    let mut leak = 0.0f64;
    for j in 1..=b.j_max() {
        let fj = b.block(&f, Level::J(j)).unwrap();
        for k in 1..=b.j_max() {
            if j.abs_diff(k) >= 2 {
                leak = leak.max(b.block(&fj, Level::J(k)).unwrap().coefficient_norm() / norm);
            }
        }
    }
    vec![
        (format!("partition residual {residual:.2e} <= 1e-12"), residual <= 1e-12),
        (format!("almost-orthogonality leak {leak:.2e} <= 1e-12"), leak <= 1e-12),
    ]
}

fn bernstein_suite() -> Vec<(String, bool)> {
    let trials = 16;
    let mut checks = Vec::new();
    let mut sups: Vec<(usize, f64)> = Vec::new();
    let mut per_p: Vec<(Exponent, Vec<(usize, f64)>)> = Vec::new();
    for n in [128, 256] {
        let b = bank(n, PI / 2.0);
        let levels: Vec<usize> = (2..=b.j_max().min(7)).collect();
        let src = RandomSource::full_band(&b, 7 + n as u64, 1);
        let r = verify_bernstein(&b, Exponent::Finite(2.0), &levels, &src, trials).unwrap();
        sups.push((n, r.sup_of("gradient")));
        for p in [Exponent::Finite(4.0), Exponent::Infinite] {
            let r = verify_bernstein(&b, p, &levels, &src, trials).unwrap();
            let entry = match per_p.iter_mut().find(|(q, _)| *q == p) {
                Some(e) => e,
                None => {
                    per_p.push((p, Vec::new()));
                    per_p.last_mut().unwrap()
                }
            };
            entry.1.extend(r.per_level_sup("gradient"));
        }
    }
    for (n, sup) in sups {
        checks.push((format!("n={n} p=2 gradient sup {sup:.6} <= 4/3+1e-9"), sup <= 4.0 / 3.0 + 1e-9));
    }
    for (p, levels) in per_p {
        let spread = level_spread(&levels, 2..=7);
        checks.push((format!("p={p} per-level sup spread over j in [2,7], n in {{128,256}}: {spread:.3} < 3"), spread < 3.0));
    }
    checks
}

fn divergence_form() -> Vec<(String, bool)> {
    let b = bank(128, 2.0 * PI);
    let g = b.grid().clone();
    let spec = RandomFieldSpec::band(0.5, b.partition_radius()).with_slope(0.5);
    let mut worst = 0.0f64;
    for pair in 0..100u64 {
        let f = random_field(&g, &spec, &mut rng_for_trial(40, 2 * pair)).unwrap();
        let h = random_field(&g, &spec, &mut rng_for_trial(40, 2 * pair + 1)).unwrap();
        let k = 1 + (pair as usize % b.j_max());
        let l = if k < b.j_max() && pair % 2 == 1 { k + 1 } else { k };
        worst = worst.max(divergence_form_check(&f, &h, &b, k, l).unwrap());
    }
    vec![(format!("worst relative discrepancy over 100 pairs {worst:.2e} <= 1e-10"), worst <= 1e-10)]
}

fn counterexamples() -> Vec<(String, bool)> {
    let mut checks = Vec::new();
    let (f, h) = build_counterexample_pair(-0.5, 12, Construction::Pairing, CounterexampleMode::Quadrature).unwrap();
    let single = pairing_series(&f, &h, PairingKind::Single).unwrap();
    let sym = pairing_series(&f, &h, PairingKind::Symmetrized).unwrap();
    let growing = single[1..].windows(2).all(|w| w[1] > w[0]);
    checks.push(("pairing grows over N=2..12".to_string(), growing));
    let scales: Vec<f64> = (2..=12).map(|n| single[n - 1] / partial_sum(1.0, n)).collect();
    let drift = scales.iter().map(|c| (c / scales[0] - 1.0).abs()).fold(0.0, f64::max);
    checks.push((
        format!("pairing / sum 2^n n^-4 constant to {drift:.2e} (<= 1e-4)"),
        drift <= 1e-4,
    ));
    let ratio = single[11] / single[10];
    checks.push((
        format!("successive ratio at N=12 is {ratio:.4}, needs 2 within 5%"),
        (ratio - 2.0).abs() <= 0.1,
    ));
    let s4 = sym[3];
    let dev = sym[3..].iter().map(|v| (v - s4).abs()).fold(0.0, f64::max);
    let allowance = s4.abs().max(1e-12 * single[3].abs());
    checks.push((
        format!("symmetrized pairing |S_N - S_4| <= {allowance:.2e} through N=12 (max {dev:.2e})"),
        dev <= allowance,
    ));
    let consts: Vec<f64> = [5usize, 10, 20]
        .iter()
        .map(|&n| {
            let v = product_norm_lower_bound(-0.75, n).unwrap();
            v.quadrature / v.lower_bound
        })
        .collect();
    let a3_drift = consts.iter().map(|c| (c / consts[0] - 1.0).abs()).fold(0.0, f64::max);
    checks.push((
        format!("product quadrature tracks lower bound to {a3_drift:.2e} (<= 1e-4)"),
        a3_drift <= 1e-4,
    ));
    let n_big = 100;
    let r = partial_sum(0.5, n_big) / partial_sum(0.5, n_big - 1);
    let target = 2f64.sqrt();
    checks.push((
        format!("s=-0.75 partial-sum ratio at N={n_big}: {r:.4} vs 2^0.5 within 5%"),
        (r / target - 1.0).abs() <= 0.05,
    ));
    let r20 = partial_sum(0.5, 20) / partial_sum(0.5, 19);
    checks.push((
        format!("s=-0.75 partial sums diverge (S_20 = {:.3}, ratio {r20:.4} > 1)", partial_sum(0.5, 20)),
        r20 > 1.0,
    ));
    let limit = PI.powi(4) / 90.0;
    let s50 = product_norm_lower_bound(-0.5, 50).unwrap().lower_bound;
    checks.push((
        format!("s=-0.5 partial sum at N=50 {s50:.6} within 1% of pi^4/90 = {limit:.6}"),
        (s50 / limit - 1.0).abs() <= 0.01,
    ));
    checks
}

fn maximum_principle() -> Vec<(String, bool)> {
    let g = Grid2::new(128, 2.0 * PI).unwrap();
    let theta0 = small_data(&g, 60, 1.0, 8.0, 0.5);
    let mut checks = Vec::new();
    for alpha in [1.0, 1.5, 2.0] {
        let params = SolveParams::new(alpha, 128, 2.0 * PI, 0.5, 0.005);
        let sol = march(&theta0, &params).unwrap();
        let mut worst = f64::NEG_INFINITY;
        for w in sol.diagnostics.windows(2) {
            for (a, b) in [(w[0].l2, w[1].l2), (w[0].l4, w[1].l4), (w[0].linf, w[1].linf)] {
                worst = worst.max((b - a) / a);
            }
        }
        let mean = sol.diagnostics.iter().map(|d| d.mean.abs()).fold(0.0, f64::max);
        checks.push((
            format!("alpha={alpha}: largest relative L^p increase per step {worst:.2e} <= 1e-6"),
            worst <= 1e-6,
        ));
        checks.push((format!("alpha={alpha}: |mean| {mean:.2e} <= 1e-12"), mean <= 1e-12));
    }
    checks
}

fn linear_continuity() -> Vec<(String, bool)> {
    let b = bank(1024, 2.0 * PI);
    let p = Exponent::Finite(2.0);
    let s = 0.5;
    let ladder = [1e-1, 1e-2, 1e-3, 1e-4];
    let vanishing = block_law_field(&b, s, p, BlockLaw::InverseSquare).unwrap();
    let r = continuity_criterion_test(&vanishing, &b, s, p, 2.0, &ladder, 0.1).unwrap();
    let factor = r.decay_factor();
    let unit = block_law_field(&b, s, p, BlockLaw::Unit).unwrap();
    let u = continuity_criterion_test(&unit, &b, s, p, 2.0, &ladder, 0.1).unwrap();
    let first = u.curve[0].1;
    let floor = u.curve.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    vec![
        (format!("vanishing tail: d(1e-1)/d(1e-4) = {factor:.3} >= 10"), factor >= 10.0),
        (
            format!("unit tail: min d(t) = {floor:.4} >= 0.5 * d(1e-1) = {:.4}", 0.5 * first),
            floor >= 0.5 * first,
        ),
    ]
}

fn contraction() -> Vec<(String, bool)> {
    let n = 64;
    let l = 2.0 * PI;
    let b = bank(n, l);
    let g = b.grid().clone();
    let theta0 = small_data(&g, 11, 1.0, 2.0, 0.5);
    let eta = small_data(&g, 12, 1.0, 2.0, 1.0);
    let horizons = [0.4, 0.2, 0.1, 0.05];
    let mut checks = Vec::new();
    for alpha in [2.0, 1.75, 1.0] {
        let norm = TheoremNorm::for_alpha(alpha).unwrap();
        let params = SolveParams::new(alpha, n, l, 0.4, 0.025);
        let curve = contraction_curve(&theta0, &eta, 1e-3, &params, &horizons, 16, &b, &norm).unwrap();
        let f: Vec<f64> = curve.iter().map(|(_, c)| c.factor).collect();
        let shown: Vec<String> = f.iter().map(|v| format!("{v:.3e}")).collect();
        let decreasing = f.windows(2).all(|w| w[1] < w[0]);
        let last = *f.last().unwrap();
        checks.push((
            format!("alpha={alpha} [{norm}]: factors [{}] strictly decreasing, last < 1", shown.join(", ")),
            decreasing && last < 1.0,
        ));
        let short = params.with_horizon(0.2).with_dt(0.0125);
        let (order, _) = temporal_order(&theta0, &short, &b, &norm).unwrap();
        checks.push((format!("alpha={alpha}: temporal order {order:.3} in 2 +- 0.3"), (order - 2.0).abs() <= 0.3));
        let twin = twin_run(&theta0, &short, &TwinMode::Identical, &b, &norm).unwrap();
        checks.push((format!("alpha={alpha}: identical twins bit-for-bit"), twin.is_identical()));
    }
    checks
}

fn duhamel_scaling() -> Vec<(String, bool)> {
    let b = bank(256, PI);
    let mut checks = Vec::new();
    for alpha in [2.0, 1.5] {
        let (p, idx) = duhamel_norm_index(alpha).unwrap();
        let theta0 = critical_packets(&b, idx.s, p, idx.q, 0.3).unwrap();
        let ladder = duhamel_ladder(&b, alpha);
        let report = verify_duhamel_bound(alpha, &theta0, &b, &ladder).unwrap();
        let slope = report.summary_value("slope").unwrap_or(f64::NAN);
        let target = report.summary_value("exponent").unwrap();
        checks.push((
            format!("alpha={alpha}: slope {slope:.3} vs {target:.3} within 0.2"),
            (slope - target).abs() <= 0.2,
        ));
    }
    checks
}

#[test]
fn acceptance() {
    let outcomes = vec![
        run(1, "spectral exactness", 1, spectral_exactness),
        run(2, "partition of unity", 5, partition_of_unity),
        run(3, "bernstein suite", 30, bernstein_suite),
        run(4, "divergence-form identity", 60, divergence_form),
        run(5, "counterexample dichotomy", 60, counterexamples),
        run(6, "maximum principle", 120, maximum_principle),
        run(7, "linear continuity criterion", 60, linear_continuity),
        run(8, "contraction and uniqueness", 300, contraction),
        run(9, "duhamel scaling", 120, duhamel_scaling),
    ];
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
