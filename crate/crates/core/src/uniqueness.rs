//! Uniqueness experiments: contraction of the Duhamel difference map in the
//! norms used for each dissipation regime, twin runs, and the linear
//! continuity criterion.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Result, SqgError};
use crate::littlewood_paley::{besov_norm, time_norm, BesovIndex, DyadicBank, Level, TimeSeriesField};
use crate::mild::{duhamel_integral, linear_series, march, picard_solve, MildSolution, SolveParams};
use crate::spectral::{lp_norm, lp_norm_magnitude, riesz_perp_velocity, semigroup_apply, Exponent, SpectralField};

/// End-point integrability `p = 4/(2α−3)` and data index `q = p/(p−2)`.
pub fn end_point_exponent(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.5 && alpha <= 2.0) {
        return param(format!("end-point exponents need α ∈ (3/2, 2], got {alpha}"));
    }
    let p = 4.0 / (2.0 * alpha - 3.0);
    Ok((p, p / (p - 2.0)))
}

/// Both sides of `−2α/p + 2/p + 1 = −1/2 + (p−2)α/p`.
pub fn exponent_identity(alpha: f64) -> Result<(f64, f64)> {
    let (p, _) = end_point_exponent(alpha)?;
    let lhs = -2.0 * alpha / p + 2.0 / p + 1.0;
    let rhs = -0.5 + (p - 2.0) * alpha / p;
    Ok((lhs, rhs))
}

/// Dissipation regime, each with its own uniqueness norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `3/2 < α ≤ 2`.
    Endpoint,
    /// `α = 1`.
    Alpha1,
    /// `1 < α ≤ 3/2`.
    Mid,
    /// `0 < α < 1`.
    Super,
}

impl Regime {
    pub fn of(alpha: f64) -> Result<Self> {
        match alpha {
            a if a > 1.5 && a <= 2.0 => Ok(Regime::Endpoint),
            a if a > 1.0 && a <= 1.5 => Ok(Regime::Mid),
            a if a == 1.0 => Ok(Regime::Alpha1),
            a if a > 0.0 && a < 1.0 => Ok(Regime::Super),
            a => param(format!("α must lie in (0, 2], got {a}")),
        }
    }

    /// Representative dissipation exponent.
    pub fn default_alpha(self) -> f64 {
        match self {
            Regime::Endpoint => 2.0,
            Regime::Alpha1 => 1.0,
            Regime::Mid => 1.5,
            Regime::Super => 0.5,
        }
    }

    pub fn contains(self, alpha: f64) -> bool {
        Regime::of(alpha).map(|r| r == self).unwrap_or(false)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Endpoint => "endpoint",
            Regime::Alpha1 => "alpha1",
            Regime::Mid => "mid",
            Regime::Super => "super",
        };
        f.write_str(s)
    }
}

impl FromStr for Regime {
    type Err = SqgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoint" => Ok(Regime::Endpoint),
            "alpha1" => Ok(Regime::Alpha1),
            "mid" => Ok(Regime::Mid),
            "super" => Ok(Regime::Super),
            other => param(format!("unknown regime `{other}` (expected endpoint, alpha1, mid or super)")),
        }
    }
}

/// Regularity used at `α = 1`; any value in `(0, 1)` is admissible.
pub const ALPHA1_REGULARITY: f64 = 0.25;

/// Auxiliary time index at `α = 1`, inside `(1, 1/s)`.
pub const ALPHA1_AUX_INDEX: f64 = 2.0;

/// Space-time norm `‖w‖_{L^r(0,T;B^s_{p,q})}`, optionally plus
/// `sup_t ‖∇⊥Λ^{-1}(ψ*w)‖_{L^∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremNorm {
    pub index: BesovIndex,
    pub time: Exponent,
    pub riesz_low: bool,
}

impl TheoremNorm {
    /// The norm in which differences are contracted at dissipation `α`.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        let inf = Exponent::Infinite;
        let norm = match Regime::of(alpha)? {
            Regime::Endpoint => {
                let (p, _) = end_point_exponent(alpha)?;
                TheoremNorm {
                    index: BesovIndex::new(-0.5, Exponent::finite(p)?, Exponent::finite(p / 2.0)?)?,
                    time: Exponent::finite(p / 2.0)?,
                    riesz_low: false,
                }
            }
            Regime::Mid => TheoremNorm {
                index: BesovIndex::new(1.0 - alpha, inf, inf)?,
                time: inf,
                riesz_low: true,
            },
            Regime::Alpha1 => TheoremNorm::negative_regularity(ALPHA1_REGULARITY)?,
            Regime::Super => TheoremNorm::negative_regularity(0.5 * (1.0 - alpha))?,
        };
        Ok(norm)
    }

    /// `L^∞(0,T;B^{-s}_{∞,∞})` plus the low-frequency Riesz term.
    pub fn negative_regularity(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return param(format!("regularity s must lie in (0, 1), got {s}"));
        }
        Ok(TheoremNorm {
            index: BesovIndex::new(-s, Exponent::Infinite, Exponent::Infinite)?,
            time: Exponent::Infinite,
            riesz_low: true,
        })
    }

    /// `‖∇⊥Λ^{-1}(ψ*f)‖_{L^∞}`.
    pub fn riesz_low(f: &SpectralField, bank: &DyadicBank) -> Result<f64> {
        let low = bank.block(f, Level::Psi)?;
        lp_norm_magnitude(&riesz_perp_velocity(&low), Exponent::Infinite)
    }

    /// Besov part and Riesz part at one instant.
    pub fn instant(&self, f: &SpectralField, bank: &DyadicBank) -> Result<(f64, f64)> {
        let b = besov_norm(f, bank, self.index)?;
        let r = if self.riesz_low { TheoremNorm::riesz_low(f, bank)? } else { 0.0 };
        Ok((b, r))
    }

    /// Norm of a whole series.
    pub fn measure(&self, series: &TimeSeriesField, bank: &DyadicBank) -> Result<f64> {
        let parts = series
            .fields()
            .iter()
            .map(|f| self.instant(f, bank))
            .collect::<Result<Vec<_>>>()?;
        let besov: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let riesz = parts.iter().map(|p| p.1).fold(0.0, f64::max);
        Ok(time_norm(series.times(), &besov, self.time) + riesz)
    }

    /// Norm of a single field (both parts, no time integration).
    pub fn of_field(&self, f: &SpectralField, bank: &DyadicBank) -> Result<f64> {
        let (b, r) = self.instant(f, bank)?;
        Ok(b + r)
    }
}

impl fmt::Display for TheoremNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "L^{}(0,T;B^{}_{{{},{}}})",
            self.time, self.index.s, self.index.p, self.index.q
        )?;
        if self.riesz_low {
            write!(f, " + L^inf(0,T;L^inf) of R_perp(psi*w)")?;
        }
        Ok(())
    }
}

/// Outcome of a contraction measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionFactor {
    pub factor: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// Set when the inputs coincide and the factor is 0 by convention.
    pub degenerate: bool,
}

/// `‖Φ(θ1)−Φ(θ2)‖_X / ‖θ1−θ2‖_X` with `Φ(θ) = e^{-tΛ^α}θ0 + D[θ]`.
///
/// The linear parts cancel exactly, so only the Duhamel terms are formed.
pub fn contraction_factor(
    theta1: &TimeSeriesField,
    theta2: &TimeSeriesField,
    params: &SolveParams,
    bank: &DyadicBank,
    norm: &TheoremNorm,
) -> Result<ContractionFactor> {
    let diff = theta1.difference(theta2)?;
    let denominator = norm.measure(&diff, bank)?;
    if denominator == 0.0 {
        return Ok(ContractionFactor {
            factor: 0.0,
            numerator: 0.0,
            denominator,
            degenerate: true,
        });
    }
    let d1 = duhamel_integral(theta1, params)?;
    let d2 = duhamel_integral(theta2, params)?;
    let numerator = norm.measure(&d1.difference(&d2)?, bank)?;
    Ok(ContractionFactor {
        factor: numerator / denominator,
        numerator,
        denominator,
        degenerate: false,
    })
}

/// Contraction factors around the solution from `θ0` for each horizon, with
/// the second argument `θ + ε·η` held fixed in time. The step count per
/// horizon is `steps`.
pub fn contraction_curve(
    theta0: &SpectralField,
    eta: &SpectralField,
    epsilon: f64,
    params: &SolveParams,
    horizons: &[f64],
    steps: usize,
    bank: &DyadicBank,
    norm: &TheoremNorm,
) -> Result<Vec<(f64, ContractionFactor)>> {
    horizons
        .iter()
        .map(|&t| {
            let p = params.with_horizon(t).with_dt(t / steps as f64);
            let base = march(theta0, &p)?.series;
            let shifted = base
                .fields()
                .iter()
                .map(|f| {
                    let mut g = f.clone();
                    g.add_assign_scaled(eta, epsilon)?;
                    Ok(g)
                })
                .collect::<Result<Vec<_>>>()?;
            let other = TimeSeriesField::new(base.times().to_vec(), shifted)?;
            Ok((t, contraction_factor(&base, &other, &p, bank, norm)?))
        })
        .collect()
}

/// How the second run of a twin experiment differs from the first.
#[derive(Debug, Clone)]
pub enum TwinMode {
    /// Same configuration twice.
    Identical,
    /// Second run uses `dt / refinement`.
    Refined { refinement: usize },
    /// Second run uses a different Picard depth.
    Depth { depth: usize },
    /// Second run starts from `θ0 + δ·η/‖η‖_X`.
    Perturbed { delta: f64, direction: SpectralField },
}

/// Two runs and their difference `w = θ^{(1)} − θ^{(2)}` at common instants.
#[derive(Debug, Clone)]
pub struct UniquenessExperiment {
    pub params: SolveParams,
    pub norm: TheoremNorm,
    pub runs: [MildSolution; 2],
    pub w_series: TimeSeriesField,
    /// `‖w(t)‖` (Besov part plus Riesz part) at each common instant.
    pub w_norms: Vec<f64>,
    /// `‖w‖_X` over the whole interval.
    pub w_total: f64,
    /// `‖w(T)‖/δ` in perturbed mode.
    pub amplification: Option<f64>,
}

impl UniquenessExperiment {
    pub fn final_norm(&self) -> f64 {
        self.w_norms.last().copied().unwrap_or(0.0)
    }

    pub fn is_identical(&self) -> bool {
        self.w_series
            .fields()
            .iter()
            .all(|f| f.coefficients().iter().all(|c| c.re == 0.0 && c.im == 0.0))
    }
}

/// March when `picard_depth == 1`, Picard iteration otherwise.
pub fn solve(theta0: &SpectralField, params: &SolveParams) -> Result<MildSolution> {
    if params.picard_depth > 1 {
        picard_solve(theta0, params)
    } else {
        march(theta0, params)
    }
}

/// Keeps every `stride`-th instant of `series`, relabelled with the
/// matching instants of `reference`.
fn subsample(series: &TimeSeriesField, stride: usize, reference: &TimeSeriesField) -> Result<TimeSeriesField> {
    let fields: Vec<SpectralField> = series.fields().iter().step_by(stride).cloned().collect();
    let times = series.times().iter().step_by(stride);
    let horizon = reference.times().last().copied().unwrap_or(0.0);
    let aligned = fields.len() == reference.len()
        && times
            .zip(reference.times())
            .all(|(a, b)| (a - b).abs() <= 1e-12 * horizon.max(1.0));
    if !aligned {
        return param("twin runs are sampled at incompatible instants");
    }
    TimeSeriesField::new(reference.times().to_vec(), fields)
}

/// Runs both configurations of a twin experiment.
pub fn twin_run(
    theta0: &SpectralField,
    params: &SolveParams,
    mode: &TwinMode,
    bank: &DyadicBank,
    norm: &TheoremNorm,
) -> Result<UniquenessExperiment> {
    let (second_params, second_data, delta) = match mode {
        TwinMode::Identical => (*params, theta0.clone(), None),
        TwinMode::Refined { refinement } => {
            if *refinement == 0 {
                return param("refinement must be positive");
            }
            (params.with_dt(params.dt / *refinement as f64), theta0.clone(), None)
        }
        TwinMode::Depth { depth } => (params.with_depth(*depth), theta0.clone(), None),
        TwinMode::Perturbed { delta, direction } => {
            let size = norm.of_field(direction, bank)?;
            if size == 0.0 || !(*delta > 0.0) {
                return param("perturbation needs a non-zero direction and δ > 0");
            }
            let mut data = theta0.clone();
            data.add_assign_scaled(direction, delta / size)?;
            (*params, data, Some(*delta))
        }
    };
    let (first, second) = rayon::join(|| solve(theta0, params), || solve(&second_data, &second_params));
    let (first, second) = (first?, second?);
    let stride = match mode {
        TwinMode::Refined { refinement } => *refinement,
        _ => 1,
    };
    let aligned = subsample(&second.series, stride, &first.series)?;
    let w_series = first.series.difference(&aligned)?;
    let w_norms = w_series
        .fields()
        .iter()
        .map(|f| norm.of_field(f, bank))
        .collect::<Result<Vec<_>>>()?;
    let w_total = norm.measure(&w_series, bank)?;
    let amplification = delta.map(|d| w_norms.last().copied().unwrap_or(0.0) / d);
    Ok(UniquenessExperiment {
        params: *params,
        norm: *norm,
        runs: [first, second],
        w_series,
        w_norms,
        w_total,
        amplification,
    })
}

/// Observed temporal order from runs at `dt`, `dt/2`, `dt/4`, measured by
/// the final-time norm of successive differences.
pub fn temporal_order(
    theta0: &SpectralField,
    params: &SolveParams,
    bank: &DyadicBank,
    norm: &TheoremNorm,
) -> Result<(f64, [f64; 2])> {
    let coarse = twin_run(theta0, params, &TwinMode::Refined { refinement: 2 }, bank, norm)?;
    let fine = twin_run(
        theta0,
        &params.with_dt(params.dt / 2.0),
        &TwinMode::Refined { refinement: 2 },
        bank,
        norm,
    )?;
    let e = [coarse.final_norm(), fine.final_norm()];
    Ok(((e[0] / e[1]).log2(), e))
}

/// Per-block amplitude law `2^{sj}‖φ_j*θ0‖_{L^p} = w_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockLaw {
    /// `w_j = 1`.
    Unit,
    /// `w_j = 1/j`.
    Harmonic,
    /// `w_j = j^{-2}`.
    InverseSquare,
    /// Only block `j` is present, with `w_j = 1`.
    Single(usize),
}

impl BlockLaw {
    pub fn weight(self, j: usize) -> f64 {
        match self {
            BlockLaw::Unit => 1.0,
            BlockLaw::Harmonic => 1.0 / j as f64,
            BlockLaw::InverseSquare => 1.0 / (j * j) as f64,
            BlockLaw::Single(k) => {
                if j == k {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Lattice mode of smallest modulus on which `φ_j ≡ 1`.
fn plateau_mode(bank: &DyadicBank, j: usize) -> Option<(i64, i64)> {
    let grid = bank.grid();
    (0..grid.len())
        .filter(|&idx| grid.is_retained(idx) && !grid.is_nyquist(idx))
        .filter(|&idx| {
            let k = grid.kmag(idx);
            k > 0.0 && bank.phi_hat(j, k) == 1.0
        })
        .min_by(|&a, &b| grid.kmag(a).total_cmp(&grid.kmag(b)))
        .map(|idx| grid.mode(idx))
}

/// `θ0 = Σ_j 2^{-sj}w_j·c_j` where `c_j` is a cosine mode on the plateau of
/// `φ_j`, normalized in `L^p`. Levels without a plateau mode are skipped.
pub fn block_law_field(bank: &DyadicBank, s: f64, p: Exponent, law: BlockLaw) -> Result<SpectralField> {
    let grid = bank.grid();
    let mut theta = SpectralField::zeros(grid);
    for j in 1..=bank.j_max() {
        let w = law.weight(j);
        if w == 0.0 {
            continue;
        }
        let Some((m1, m2)) = plateau_mode(bank, j) else { continue };
        let mode = SpectralField::cosine_mode(grid, m1, m2, 1.0, 0.0);
        let norm = lp_norm(&mode, p)?;
        theta.add_assign_scaled(&mode, 2f64.powf(-s * j as f64) * w / norm)?;
    }
    Ok(theta)
}

/// Linear continuity at `t = 0` in `B^s_{p,∞}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityResult {
    /// `(t, ‖e^{-tΛ^α}θ0 − θ0‖_{B^s_{p,∞}})` on the ladder.
    pub curve: Vec<(f64, f64)>,
    /// `(J, sup_{j≥J} 2^{sj}‖φ_j*θ0‖_{L^p})`.
    pub tail: Vec<(usize, f64)>,
    /// `d(t_last) ≤ tolerance·d(t_first)`.
    pub decays: bool,
}

impl ContinuityResult {
    /// `d(t_first)/d(t_last)`.
    pub fn decay_factor(&self) -> f64 {
        match (self.curve.first(), self.curve.last()) {
            (Some(a), Some(b)) if b.1 > 0.0 => a.1 / b.1,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }
}

/// Evaluates the linear continuity distance on `ladder`.
pub fn continuity_criterion_test(
    theta0: &SpectralField,
    bank: &DyadicBank,
    s: f64,
    p: Exponent,
    alpha: f64,
    ladder: &[f64],
    tolerance: f64,
) -> Result<ContinuityResult> {
    let idx = BesovIndex::new(s, p, Exponent::Infinite)?;
    let curve = ladder
        .iter()
        .map(|&t| {
            let moved = semigroup_apply(theta0, alpha, t)?;
            Ok((t, besov_norm(&moved.sub(theta0)?, bank, idx)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let blocks = bank.block_norms(theta0, p)?;
    let weighted: Vec<f64> = blocks
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &v)| 2f64.powf(s * j as f64) * v)
        .collect();
    let tail = (1..=weighted.len())
        .map(|big_j| (big_j, weighted[big_j - 1..].iter().copied().fold(0.0, f64::max)))
        .collect();
    let decays = match (curve.first(), curve.last()) {
        (Some(a), Some(b)) => b.1 <= tolerance * a.1,
        _ => false,
    };
    Ok(ContinuityResult { curve, tail, decays })
}

/// `(T', sup_{t ≤ T'} ‖θ(t) − e^{-tΛ^α}θ0‖_B)` for `T' = T, T/2, T/4, ...`
/// while at least two steps remain.
pub fn nonlinear_smallness(solution: &MildSolution, bank: &DyadicBank, idx: BesovIndex) -> Result<Vec<(f64, f64)>> {
    let series = &solution.series;
    let theta0 = &series.fields()[0];
    let lin = linear_series(theta0, &solution.params)?;
    let dist = series
        .fields()
        .iter()
        .zip(lin.fields())
        .map(|(a, b)| besov_norm(&a.sub(b)?, bank, idx))
        .collect::<Result<Vec<_>>>()?;
    let times = series.times();
    let mut out = Vec::new();
    let mut horizon = solution.params.horizon;
    loop {
        let keep = times.iter().take_while(|&&t| t <= horizon * (1.0 + 1e-12)).count();
        if keep < 3 {
            break;
        }
        out.push((horizon, dist[..keep].iter().copied().fold(0.0, f64::max)));
        horizon *= 0.5;
    }
    Ok(out)
}
