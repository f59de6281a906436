//! One function per subcommand. Each returns its tables and summary; the
//! caller writes them out.

use sqg_core::estimates::*;
use sqg_core::mild::{divergence_form_check, SolveParams};
use sqg_core::random::{random_field, rng_for_trial, RandomFieldSpec};
use sqg_core::uniqueness::{
    block_law_field, contraction_curve, continuity_criterion_test, solve as run_solver, temporal_order, twin_run,
    BlockLaw, Regime, TheoremNorm, TwinMode, UniquenessExperiment,
};
use sqg_core::{build_bank, BumpProfile, DyadicBank, Exponent, Grid2, SpectralField};

use crate::config::{CounterexampleKind, Init, RunConfig, Task};
use crate::error::{CliError, CliResult};
use crate::report::{num, Summary, Table};

/// Ratios above this are reported as unbounded.
pub const BOUNDED_RATIO: f64 = 1e3;

pub struct Output {
    pub tables: Vec<Table>,
    pub summary: Summary,
}

pub fn run(cfg: &RunConfig) -> CliResult<Output> {
    match &cfg.task {
        Task::Solve => solve(cfg),
        Task::VerifyLemma(id) => verify_lemma(cfg, id),
        Task::Counterexample(kind) => counterexample(cfg, *kind),
        Task::Uniqueness(regime) => uniqueness(cfg, *regime),
        Task::Continuity => continuity(cfg),
    }
}

fn bank_for(cfg: &RunConfig) -> CliResult<DyadicBank> {
    let grid = Grid2::new(cfg.n, cfg.box_length)?;
    Ok(build_bank(&grid, BumpProfile::default())?)
}

fn header(cfg: &RunConfig) -> Summary {
    let mut s = Summary::new(&format!("sqg {}", cfg.task.name()));
    if let Some(seed) = cfg.seed {
        s.kv("seed", seed);
    }
    s
}

fn banded(grid: &Grid2, seed: u64, stream: u64, lo: f64, hi: f64, l2: f64) -> CliResult<SpectralField> {
    let spec = RandomFieldSpec::band(lo, hi).with_slope(1.0).with_l2_norm(l2);
    Ok(random_field(grid, &spec, &mut rng_for_trial(seed, stream))?)
}

fn solve(cfg: &RunConfig) -> CliResult<Output> {
    let grid = Grid2::new(cfg.n, cfg.box_length)?;
    let amplitude = cfg.amplitude.unwrap_or(0.5);
    let theta0 = match cfg.init {
        Init::Zero => SpectralField::zeros(&grid),
        Init::Random => banded(&grid, cfg.seed(), 0, 1.0, 8.0, amplitude)?,
        Init::Cosine => {
            let mode = SpectralField::cosine_mode(&grid, 1, 1, 1.0, 0.0);
            let l2 = mode.l2_norm();
            mode.scale(amplitude / l2)
        }
    };
    let params = SolveParams::new(cfg.alpha, cfg.n, cfg.box_length, cfg.horizon, cfg.dt).with_depth(cfg.depth);
    params.validate(&grid)?;
    let sol = run_solver(&theta0, &params)?;

    let mut table = Table::new(
        "solve.csv",
        "dissipative SQG trajectory: mean and Lebesgue norms per step",
        &["step [1]", "time [t]", "mean [theta]", "l2 [theta]", "l4 [theta]", "linf [theta]"],
    );
    for (i, d) in sol.diagnostics.iter().enumerate() {
        table.push(vec![i.to_string(), num(d.time), num(d.mean), num(d.l2), num(d.l4), num(d.linf)]);
    }
    let mut summary = header(cfg);
    summary.kv("alpha", cfg.alpha);
    summary.kv("n", cfg.n);
    summary.kv("box", num(cfg.box_length));
    summary.kv("T", cfg.horizon);
    summary.kv("dt", cfg.dt);
    summary.kv("depth", cfg.depth);
    summary.kv("steps", params.steps());
    let first = &sol.diagnostics[0];
    let last = sol.diagnostics.last().unwrap_or(first);
    summary.kv("l2 initial", num(first.l2));
    summary.kv("l2 final", num(last.l2));
    summary.kv("linf final", num(last.linf));
    let grows = sol.diagnostics.windows(2).any(|w| {
        w[1].l2 > w[0].l2 * (1.0 + 1e-6) || w[1].l4 > w[0].l4 * (1.0 + 1e-6) || w[1].linf > w[0].linf * (1.0 + 1e-6)
    });
    summary.check("L2, L4 and Linf norms never increase", !grows);
    Ok(Output {
        tables: vec![table],
        summary,
    })
}

fn lemma_table(report: &EstimateReport) -> Table {
    let mut t = Table::new(
        &format!("lemma_{}.csv", report.lemma_id),
        &format!("{} estimate: measured lhs/rhs ratios", report.lemma_id),
        &["trial [1]", "j [level]", "quantity", "lhs [norm]", "rhs [norm]", "ratio [1]"],
    );
    for r in &report.records {
        t.push(vec![
            r.trial.to_string(),
            r.level.map(|j| j.to_string()).unwrap_or_default(),
            r.quantity.clone(),
            num(r.lhs),
            num(r.rhs),
            num(r.ratio),
        ]);
    }
    t
}

fn verify_lemma(cfg: &RunConfig, id: &str) -> CliResult<Output> {
    let bank = bank_for(cfg)?;
    let seed = cfg.seed();
    let trials = cfg.trials;
    let levels: Vec<usize> = (1..=bank.j_max()).collect();
    let single = RandomSource::full_band(&bank, seed, 1);
    let pair = RandomSource::product_band(&bank, seed, 2);
    let p_or = |d: f64| cfg.p.unwrap_or(Exponent::Finite(d));
    let mut summary = header(cfg);
    let report = match id {
        "bernstein" => verify_bernstein(&bank, p_or(2.0), &levels, &single, trials)?,
        "semigroup" => {
            let t = cfg.horizon;
            let times = [0.0, t / 8.0, t / 4.0, t / 2.0, t];
            verify_semigroup_decay(&bank, cfg.alpha, p_or(2.0), &levels, &times, &single, trials)?
        }
        "embedding" => {
            let q = cfg.q.unwrap_or(Exponent::Finite(2.0));
            verify_embedding(&bank, cfg.s.unwrap_or(-0.5), p_or(2.0), Exponent::Infinite, q, Exponent::Infinite, &single, trials)?
        }
        "multiplier" => verify_multiplier_bound(&bank, cfg.s.unwrap_or(0.5), cfg.q.unwrap_or(Exponent::Infinite), &single, trials)?,
        "paraproduct" => {
            let mut pp = ParaproductParams::default();
            pp.s = cfg.s.unwrap_or(pp.s);
            pp.eps = cfg.eps.unwrap_or(pp.eps);
            pp.p = cfg.p.unwrap_or(pp.p);
            if let Some(q) = cfg.q {
                pp.q = q;
                pp.q2 = q;
            }
            verify_paraproduct(&bank, pp, &pair, trials)?
        }
        "bilinear" | "bilinear-endpoint" => {
            let mut bp = if id == "bilinear" { BilinearParams::default() } else { BilinearParams::endpoint() };
            if let Some(s) = cfg.s {
                if id == "bilinear" {
                    bp.s = s;
                } else {
                    bp.s_prime = s;
                }
            }
            if let Some(p) = cfg.p {
                bp.p = p;
                bp.p1 = double(p);
                bp.p2 = double(p);
            }
            if let Some(q) = cfg.q {
                bp.q = q;
                if id == "bilinear" {
                    bp.q1 = double(q);
                    bp.q2 = double(q);
                }
            }
            if id == "bilinear" {
                verify_bilinear(&bank, bp, &pair, trials)?
            } else {
                verify_bilinear_endpoint(&bank, bp, &pair, trials)?
            }
        }
        "product" => {
            let mut pp = ProductParams::default();
            pp.s = cfg.s.unwrap_or(pp.s);
            pp.eps = cfg.eps.unwrap_or(pp.eps);
            pp.p = cfg.p.unwrap_or(pp.p);
            if let Some(q) = cfg.q {
                pp.q = q;
                pp.q2 = q;
            }
            verify_product(&bank, pp, &pair, trials)?
        }
        "commutator" => {
            let mut cp = CommutatorParams::default();
            cp.s = cfg.s.unwrap_or(cp.s);
            cp.eps = cfg.eps.unwrap_or(cp.eps);
            cp.p = cfg.p.unwrap_or(cp.p);
            if let Some(q) = cfg.q {
                cp.q = q;
                cp.q2 = q;
            }
            verify_commutators(&bank, cp, &pair, trials)?
        }
        "duhamel" => {
            let (p, idx) = duhamel_norm_index(cfg.alpha)?;
            let theta0 = critical_packets(&bank, idx.s, p, idx.q, cfg.amplitude.unwrap_or(0.3))?;
            let ladder = duhamel_ladder(&bank, cfg.alpha);
            verify_duhamel_bound(cfg.alpha, &theta0, &bank, &ladder)?
        }
        "divergence-form" => divergence_form(&bank, seed, trials)?,
        other => return Err(CliError::param(format!("unknown lemma id `{other}`"))),
    };

    for (k, v) in &report.params {
        summary.kv(k, v);
    }
    summary.kv("trials", report.trials);
    summary.kv("records", report.records.len());
    summary.kv("skipped", report.skipped);
    for q in report.quantities() {
        summary.kv(&format!("sup ratio {q}"), num(report.sup_of(&q)));
    }
    for (k, v) in &report.summary {
        summary.kv(k, num(*v));
    }
    let finite = report.records.iter().all(|r| r.ratio.is_finite());
    summary.check("ratios recorded", !report.records.is_empty());
    summary.check("every ratio finite", finite);
    summary.check(
        &format!("sup ratio {} below {BOUNDED_RATIO:e}", num(report.sup_constant())),
        report.sup_constant() < BOUNDED_RATIO,
    );
    match id {
        "bernstein" if p_or(2.0) == Exponent::Finite(2.0) => {
            summary.check("L2 gradient ratio <= 4/3", report.sup_of("gradient") <= 4.0 / 3.0 + 1e-9);
        }
        "semigroup" if p_or(2.0) == Exponent::Finite(2.0) => {
            summary.check("L2 decay ratio <= 1", report.sup_of("decay") <= 1.0 + 1e-9);
        }
        "duhamel" => {
            let slope = report.summary_value("slope").unwrap_or(f64::NAN);
            let target = report.summary_value("exponent").unwrap_or(f64::NAN);
            summary.check(&format!("log-log slope within 0.2 of {}", num(target)), (slope - target).abs() <= 0.2);
        }
        "divergence-form" => {
            summary.check("relative discrepancy <= 1e-10", report.sup_of("relative_discrepancy") <= 1e-10);
        }
        _ => {}
    }
    Ok(Output {
        tables: vec![lemma_table(&report)],
        summary,
    })
}

fn double(e: Exponent) -> Exponent {
    match e {
        Exponent::Finite(p) => Exponent::Finite(2.0 * p),
        Exponent::Infinite => Exponent::Infinite,
    }
}

fn divergence_form(bank: &DyadicBank, seed: u64, trials: usize) -> CliResult<EstimateReport> {
    let grid = bank.grid();
    let spec = RandomFieldSpec::band(0.5, bank.partition_radius()).with_slope(0.5);
    let mut report = EstimateReport::new("divergence-form", seed, trials)
        .param("n", grid.n())
        .param("box", grid.box_length());
    for t in 0..trials {
        let f = random_field(grid, &spec, &mut rng_for_trial(seed, 2 * t as u64))?;
        let g = random_field(grid, &spec, &mut rng_for_trial(seed, 2 * t as u64 + 1))?;
        let k = 1 + t % bank.j_max();
        let l = if k < bank.j_max() && t % 2 == 1 { k + 1 } else { k };
        let d = divergence_form_check(&f, &g, bank, k, l)?;
        report.push(t, Some(k), "relative_discrepancy", d, 1.0);
    }
    Ok(report)
}

fn counterexample(cfg: &RunConfig, kind: CounterexampleKind) -> CliResult<Output> {
    let s = cfg.s.unwrap_or(-0.5);
    let mut summary = header(cfg);
    summary.kv("s", s);
    let table = match kind {
        CounterexampleKind::Pairing => {
            let n_terms = cfg.terms.unwrap_or(12);
            summary.kv("N", n_terms);
            let (f, g) = build_counterexample_pair(s, n_terms, Construction::Pairing, CounterexampleMode::Quadrature)?;
            let single = pairing_series(&f, &g, PairingKind::Single)?;
            let sym = pairing_series(&f, &g, PairingKind::Symmetrized)?;
            let mut t = Table::new(
                "counterexample_a1.csv",
                "bump pairing of the single product against its symmetrized form",
                &["N [terms]", "pairing [1]", "symmetrized [1]", "partial_sum [1]", "ratio [1]", "successive_ratio [1]"],
            );
            for n in 1..=n_terms {
                let lower = partial_sum(-2.0 * s, n);
                let succ = if n > 1 { single[n - 1] / single[n - 2] } else { f64::NAN };
                t.push(vec![
                    n.to_string(),
                    num(single[n - 1]),
                    num(sym[n - 1]),
                    num(lower),
                    num(single[n - 1] / lower),
                    if n > 1 { num(succ) } else { String::new() },
                ]);
            }
            let last = single[n_terms - 1];
            summary.kv("pairing at N", num(last));
            summary.kv("symmetrized at N", num(sym[n_terms - 1]));
            if n_terms > 1 {
                summary.kv("successive ratio at N", num(last / single[n_terms - 2]));
                summary.kv("limiting successive ratio", num(2f64.powf(-2.0 * s)));
            }
            summary.check("pairing increases with N", single.windows(2).all(|w| w[1] >= w[0]));
            let sym_max = sym.iter().map(|v| v.abs()).fold(0.0, f64::max);
            summary.check("symmetrized pairing stays bounded", sym_max <= 1e-9 * last.abs().max(1.0));
            t
        }
        CounterexampleKind::Product => {
            let n_terms = cfg.terms.unwrap_or(20);
            summary.kv("N", n_terms);
            let rate = -2.0 * s - 1.0;
            let v = product_norm_lower_bound(s, n_terms)?;
            let mut t = Table::new(
                "counterexample_a3.csv",
                "low-frequency norm of the product: lower-bound series and quadrature",
                &["N [terms]", "lower_bound [1]", "successive_ratio [1]"],
            );
            for n in 1..=n_terms {
                let lb = partial_sum(rate, n);
                let succ = if n > 1 { num(lb / partial_sum(rate, n - 1)) } else { String::new() };
                t.push(vec![n.to_string(), num(lb), succ]);
            }
            summary.kv("lower bound at N", num(v.lower_bound));
            summary.kv("quadrature at N", num(v.quadrature));
            summary.kv("quadrature / lower bound", num(v.quadrature / v.lower_bound));
            summary.kv("limiting successive ratio", num(2f64.powf(rate)));
            summary.check("quadrature positive and finite", v.quadrature > 0.0 && v.quadrature.is_finite());
            t
        }
    };
    Ok(Output {
        tables: vec![table],
        summary,
    })
}

fn uniqueness(cfg: &RunConfig, regime: Regime) -> CliResult<Output> {
    let bank = bank_for(cfg)?;
    let grid = bank.grid().clone();
    let norm = match (regime, cfg.s) {
        (Regime::Alpha1 | Regime::Super, Some(s)) => TheoremNorm::negative_regularity(s)?,
        _ => TheoremNorm::for_alpha(cfg.alpha)?,
    };
    let params = SolveParams::new(cfg.alpha, cfg.n, cfg.box_length, cfg.horizon, cfg.dt).with_depth(cfg.depth);
    params.validate(&grid)?;
    let seed = cfg.seed();
    let theta0 = banded(&grid, seed, 0, 1.0, 2.0, cfg.amplitude.unwrap_or(0.5))?;
    let eta = banded(&grid, seed, 1, 1.0, 2.0, 1.0)?;
    let steps = params.steps();
    let horizons: Vec<f64> = (0..4).map(|k| cfg.horizon / 2f64.powi(k)).collect();
    let curve = contraction_curve(&theta0, &eta, 1e-3, &params, &horizons, steps, &bank, &norm)?;

    let mut contraction = Table::new(
        "uniqueness_contraction.csv",
        &format!("contraction of the solution map in {norm}"),
        &["T [t]", "factor [1]", "numerator [norm]", "denominator [norm]"],
    );
    for (t, c) in &curve {
        contraction.push(vec![num(*t), num(c.factor), num(c.numerator), num(c.denominator)]);
    }

    let short = params.with_horizon(cfg.horizon / 2.0).with_dt(cfg.dt / 2.0);
    let (order, errors) = temporal_order(&theta0, &short, &bank, &norm)?;
    let identical = twin_run(&theta0, &short, &TwinMode::Identical, &bank, &norm)?;
    let delta = cfg.eps.unwrap_or(1e-6);
    let perturbed = twin_run(&theta0, &params, &TwinMode::Perturbed { delta, direction: eta }, &bank, &norm)?;

    let mut twins = Table::new(
        "uniqueness_twin.csv",
        &format!("difference of twin runs measured in {norm}"),
        &["mode", "time [t]", "w_norm [norm]"],
    );
    let mut add = |mode: &str, e: &UniquenessExperiment| {
        for (t, w) in e.w_series.times().iter().zip(&e.w_norms) {
            twins.push(vec![mode.to_string(), num(*t), num(*w)]);
        }
    };
    add("identical", &identical);
    add("perturbed", &perturbed);

    let mut summary = header(cfg);
    summary.kv("regime", regime);
    summary.kv("alpha", cfg.alpha);
    summary.kv("norm", norm);
    summary.kv("n", cfg.n);
    summary.kv("T", cfg.horizon);
    summary.kv("dt", cfg.dt);
    summary.kv("depth", cfg.depth);
    let factors: Vec<f64> = curve.iter().map(|(_, c)| c.factor).collect();
    for (t, f) in horizons.iter().zip(&factors) {
        summary.kv(&format!("factor T={t}"), num(*f));
    }
    summary.kv("temporal order", num(order));
    summary.kv("refinement errors", format!("{} {}", num(errors[0]), num(errors[1])));
    let amp = perturbed.amplification.unwrap_or(f64::NAN);
    summary.kv("delta", delta);
    summary.kv("amplification", num(amp));
    summary.check(
        "contraction factor decreases with T and ends below 1",
        factors.windows(2).all(|w| w[1] < w[0]) && factors.last().is_some_and(|f| *f < 1.0),
    );
    summary.check("temporal order within 0.3 of 2", (order - 2.0).abs() <= 0.3);
    summary.check("identical twins agree bit for bit", identical.is_identical());
    summary.check("perturbation amplification finite and <= 10", amp.is_finite() && amp <= 10.0);
    Ok(Output {
        tables: vec![contraction, twins],
        summary,
    })
}

fn continuity(cfg: &RunConfig) -> CliResult<Output> {
    let bank = bank_for(cfg)?;
    let s = cfg.s.unwrap_or(0.5);
    let p = cfg.p.unwrap_or(Exponent::Finite(2.0));
    let ladder = [1e-1, 1e-2, 1e-3, 1e-4];
    let mid = (bank.j_max() / 2).max(1);
    let laws = [
        ("unit", BlockLaw::Unit),
        ("harmonic", BlockLaw::Harmonic),
        ("inverse_square", BlockLaw::InverseSquare),
        ("single", BlockLaw::Single(mid)),
    ];
    let mut curve = Table::new(
        "continuity.csv",
        &format!("linear continuity at t=0 in B^{s}_{{{p},inf}}"),
        &["law", "t [t]", "distance [norm]"],
    );
    let mut tail = Table::new(
        "continuity_tail.csv",
        "sup over j >= J of weighted block norms of the data",
        &["law", "J [level]", "tail [norm]"],
    );
    let mut summary = header(cfg);
    summary.kv("alpha", cfg.alpha);
    summary.kv("n", cfg.n);
    summary.kv("s", s);
    summary.kv("p", p);
    let mut results = Vec::new();
    for (name, law) in laws {
        let theta0 = block_law_field(&bank, s, p, law)?;
        let r = continuity_criterion_test(&theta0, &bank, s, p, cfg.alpha, &ladder, 0.1)?;
        for (t, d) in &r.curve {
            curve.push(vec![name.to_string(), num(*t), num(*d)]);
        }
        for (j, v) in &r.tail {
            tail.push(vec![name.to_string(), j.to_string(), num(*v)]);
        }
        summary.kv(&format!("{name} decay factor"), num(r.decay_factor()));
        results.push((name, r));
    }
    let get = |n: &str| results.iter().find(|(m, _)| *m == n).map(|(_, r)| r).unwrap();
    let inv = get("inverse_square");
    summary.check("inverse-square tail: distance drops by 10 over the ladder", inv.decay_factor() >= 10.0);
    let unit = get("unit");
    let floor = unit.curve.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    summary.check("unit tail: distance stays above half its initial value", floor >= 0.5 * unit.curve[0].1);
    Ok(Output {
        tables: vec![curve, tail],
        summary,
    })
}
