//! Empirical verification of inequalities and the divergent-product
//! counterexamples.
//!
//! An inequality `LHS ≤ C·RHS` with an unspecified constant is tested by
//! recording `LHS/RHS` over many trials and checking that the ratios stay
//! bounded and roughly uniform across dyadic levels and grid resolutions.

pub mod counterexample;
pub mod lemmas;

use rayon::prelude::*;

use crate::error::Result;
use crate::littlewood_paley::{DyadicBank, Level};
use crate::random::{random_field, rng_for_trial, RandomFieldSpec};
use crate::spectral::{dealias, lp_norm, Exponent, SpectralField};

pub use counterexample::{
    build_counterexample_pair, pairing_grid, pairing_quadrature, pairing_series, partial_sum, product_norm_lower_bound,
    BumpLayout, BumpPair, Construction, CounterexampleMode, PairingKind, ProductNormValue,
};
pub use lemmas::*;

/// One measured ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRecord {
    pub trial: usize,
    /// Dyadic level the ratio refers to, if any.
    pub level: Option<usize>,
    /// Which of the verified quantities this is (e.g. `gradient`).
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Ratios collected by one verifier.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub lemma_id: String,
    pub seed: u64,
    pub trials: usize,
    /// Trials or levels dropped because the right-hand side was degenerate.
    pub skipped: usize,
    pub records: Vec<RatioRecord>,
    /// Parameter names and values.
    pub params: Vec<(String, String)>,
    /// Derived scalars such as fitted exponents.
    pub summary: Vec<(String, f64)>,
}

impl EstimateReport {
    pub fn new(lemma_id: &str, seed: u64, trials: usize) -> Self {
        EstimateReport {
            lemma_id: lemma_id.to_string(),
            seed,
            trials,
            skipped: 0,
            records: Vec::new(),
            params: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn param(mut self, name: &str, value: impl ToString) -> Self {
        self.params.push((name.to_string(), value.to_string()));
        self
    }

    /// Adds a record; degenerate or non-finite ratios are counted as skipped.
    pub fn push(&mut self, trial: usize, level: Option<usize>, quantity: &str, lhs: f64, rhs: f64) {
        let ratio = if rhs > 0.0 { lhs / rhs } else { f64::NAN };
        if rhs <= 1e-300 || !ratio.is_finite() || ratio < 0.0 {
            if lhs == 0.0 && rhs > 0.0 {
                // exact zero is a valid measurement
            } else {
                self.skipped += 1;
                return;
            }
        }
        self.records.push(RatioRecord {
            trial,
            level,
            quantity: quantity.to_string(),
            lhs,
            rhs,
            ratio,
        });
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.ratio).collect()
    }

    /// Largest ratio over all records.
    pub fn sup_constant(&self) -> f64 {
        self.records.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }

    /// Largest ratio among records of one quantity.
    pub fn sup_of(&self, quantity: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.quantity == quantity)
            .map(|r| r.ratio)
            .fold(0.0, f64::max)
    }

    /// `(j, sup ratio)` over records of `quantity` carrying a level, sorted by `j`.
    pub fn per_level_sup(&self, quantity: &str) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for r in self.records.iter().filter(|r| r.quantity == quantity) {
            let Some(j) = r.level else { continue };
            match out.iter_mut().find(|(l, _)| *l == j) {
                Some(entry) => entry.1 = entry.1.max(r.ratio),
                None => out.push((j, r.ratio)),
            }
        }
        out.sort_by_key(|(j, _)| *j);
        out
    }

    pub fn quantities(&self) -> Vec<String> {
        let mut q: Vec<String> = Vec::new();
        for r in &self.records {
            if !q.contains(&r.quantity) {
                q.push(r.quantity.clone());
            }
        }
        q
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn absorb(&mut self, other: Vec<(usize, Option<usize>, String, f64, f64)>) {
        for (t, l, q, lhs, rhs) in other {
            self.push(t, l, &q, lhs, rhs);
        }
    }
}

/// `max/min` over the positive finite entries; 1 when fewer than two exist.
pub fn spread(values: &[f64]) -> f64 {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite() && *x > 0.0).collect();
    if v.len() < 2 {
        return 1.0;
    }
    let max = v.iter().copied().fold(f64::MIN, f64::max);
    let min = v.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

/// Spread of the per-level sups restricted to `levels`.
pub fn level_spread(per_level: &[(usize, f64)], levels: std::ops::RangeInclusive<usize>) -> f64 {
    let v: Vec<f64> = per_level
        .iter()
        .filter(|(j, _)| levels.contains(j))
        .map(|(_, r)| *r)
        .collect();
    spread(&v)
}

/// Produces the input fields of one trial.
pub trait TrialSource: Sync {
    fn fields(&self, trial: usize) -> Result<Vec<SpectralField>>;

    /// Seed recorded in reports; deterministic sources return 0.
    fn seed(&self) -> u64 {
        0
    }
}

impl<F> TrialSource for F
where
    F: Fn(usize) -> Result<Vec<SpectralField>> + Sync,
{
    fn fields(&self, trial: usize) -> Result<Vec<SpectralField>> {
        self(trial)
    }
}

/// Seeded random fields, `count` per trial, each on its own stream.
#[derive(Debug, Clone)]
pub struct RandomSource {
    pub grid: crate::Grid2,
    pub spec: RandomFieldSpec,
    pub seed: u64,
    pub count: usize,
}

impl RandomSource {
    /// Fields band-limited to the bank's exact partition region.
    pub fn full_band(bank: &DyadicBank, seed: u64, count: usize) -> Self {
        RandomSource {
            grid: bank.grid().clone(),
            spec: RandomFieldSpec::band(0.0, bank.partition_radius())
                .with_slope(1.0)
                .with_jitter(0.5),
            seed,
            count,
        }
    }

    /// Fields band-limited to half the partition radius, so that products
    /// of two of them are fully resolved by the bank.
    pub fn product_band(bank: &DyadicBank, seed: u64, count: usize) -> Self {
        let mut s = RandomSource::full_band(bank, seed, count);
        s.spec.k_max = 0.5 * bank.partition_radius();
        s
    }
}

impl TrialSource for RandomSource {
    fn fields(&self, trial: usize) -> Result<Vec<SpectralField>> {
        (0..self.count)
            .map(|c| {
                let mut rng = rng_for_trial(self.seed, (trial * self.count + c) as u64);
                random_field(&self.grid, &self.spec, &mut rng)
            })
            .collect()
    }

    fn seed(&self) -> u64 {
        self.seed
    }
}

pub(crate) type Rows = Vec<(usize, Option<usize>, String, f64, f64)>;

/// Runs `body` on every trial (in parallel) and collects rows in trial order.
pub(crate) fn run_trials<S, F>(report: &mut EstimateReport, source: &S, trials: usize, body: F) -> Result<()>
where
    S: TrialSource + ?Sized,
    F: Fn(usize, &[SpectralField]) -> Result<Rows> + Sync,
{
    let rows: Vec<Rows> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let data = source.fields(t)?;
            body(t, &data)
        })
        .collect::<Result<Vec<_>>>()?;
    for r in rows {
        report.absorb(r);
    }
    Ok(())
}

/// A field whose dyadic blocks are concentrated wave packets centred at the
/// origin with `‖φ_j*θ‖_{L^p} ∝ 2^{-s j}`, scaled so that its
/// `B^s_{p,q}` norm equals `amplitude`.
pub fn critical_packets(bank: &DyadicBank, s: f64, p: Exponent, q: Exponent, amplitude: f64) -> Result<SpectralField> {
    let grid = bank.grid();
    let mut delta = SpectralField::zeros(grid);
    for c in delta.coefficients_mut() {
        *c = rustfft::num_complex::Complex64::new(1.0, 0.0);
    }
    let delta = dealias(&delta);
    let mut theta = SpectralField::zeros(grid);
    for j in 1..=bank.j_max() {
        let packet = bank.block(&delta, Level::J(j))?;
        let norm = lp_norm(&packet, p)?;
        if norm > 0.0 {
            theta = theta.add(&packet.scale(2f64.powf(-s * j as f64) / norm))?;
        }
    }
    let idx = crate::BesovIndex::new(s, p, q)?;
    let norm = crate::besov_norm(&theta, bank, idx)?;
    Ok(theta.scale(amplitude / norm))
}
