//! Verifiers for the individual inequalities.

use rayon::prelude::*;

use super::{run_trials, EstimateReport, Rows, TrialSource};
use crate::error::{param, Result, SqgError};
use crate::littlewood_paley::{besov_norm, besov_norm_components, BesovIndex, DyadicBank, Level, TimeSeriesField};
use crate::mild::{duhamel_of, march, SolveParams, STIFFNESS_CAP};
use crate::spectral::{
    dealias_in_place, dot_product, gradient, inverse_lambda, lp_norm, lp_norm_magnitude, riesz_perp_velocity,
    scale_vector, semigroup_apply, Exponent, SpectralField, SymbolOp,
};

const DEGENERATE_ENERGY: f64 = 1e-14;

fn row(t: usize, level: Option<usize>, quantity: &str, lhs: f64, rhs: f64) -> (usize, Option<usize>, String, f64, f64) {
    (t, level, quantity.to_string(), lhs, rhs)
}

/// A row that the report counts as skipped.
fn skipped(t: usize, level: Option<usize>) -> (usize, Option<usize>, String, f64, f64) {
    row(t, level, "degenerate", 0.0, 0.0)
}

fn check_levels(bank: &DyadicBank, levels: &[usize]) -> Result<()> {
    if levels.is_empty() {
        return param("no levels requested");
    }
    for &j in levels {
        if j == 0 || j > bank.j_max() {
            return Err(SqgError::LevelOutOfRange {
                level: j,
                j_max: bank.j_max(),
            });
        }
    }
    Ok(())
}

fn fields<'a>(data: &'a [SpectralField], count: usize) -> Result<&'a [SpectralField]> {
    if data.len() < count {
        return param(format!("trial source produced {} fields, need {count}", data.len()));
    }
    Ok(&data[..count])
}

fn check_holder(p: Exponent, p1: Exponent, p2: Exponent, what: &str) -> Result<()> {
    if (p.reciprocal() - p1.reciprocal() - p2.reciprocal()).abs() > 1e-12 {
        return param(format!("{what}: 1/{p} must equal 1/{p1} + 1/{p2}"));
    }
    Ok(())
}

fn levels_text(levels: &[usize]) -> String {
    levels.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(" ")
}

fn is_zero(f: &SpectralField) -> bool {
    f.coefficients().iter().all(|c| c.re == 0.0 && c.im == 0.0)
}

/// Physical-space accumulation of real products, transformed once.
struct ProductAccumulator {
    grid: crate::Grid2,
    sum: Vec<f64>,
}

impl ProductAccumulator {
    fn new(grid: &crate::Grid2) -> Self {
        ProductAccumulator {
            grid: grid.clone(),
            sum: vec![0.0; grid.len()],
        }
    }

    /// Adds `Σ_c a_c·b_c`.
    fn add_dot(&mut self, a: &[SpectralField], b: &[SpectralField]) {
        for (x, y) in a.iter().zip(b) {
            if is_zero(x) || is_zero(y) {
                continue;
            }
            let (px, py) = SpectralField::to_physical_pair(x, y);
            for ((s, u), v) in self.sum.iter_mut().zip(&px).zip(&py) {
                *s += u * v;
            }
        }
    }

    fn finish(self) -> Result<SpectralField> {
        let mut out = SpectralField::from_physical(&self.grid, &self.sum)?;
        dealias_in_place(&mut out);
        Ok(out)
    }
}

/// Bernstein inequalities `‖∇f_j‖_p ≲ 2^j‖f_j‖_p` and `‖Λ^{-1}f_j‖_p ≲ 2^{-j}‖f_j‖_p`,
/// recorded as quantities `gradient` and `inverse`.
pub fn verify_bernstein<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    p: Exponent,
    levels: &[usize],
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    check_levels(bank, levels)?;
    let mut report = EstimateReport::new("bernstein", source.seed(), trials)
        .param("p", p)
        .param("levels", levels_text(levels))
        .param("n", bank.grid().n());
    run_trials(&mut report, source, trials, |t, data| {
        let f = &fields(data, 1)?[0];
        let mut rows = Vec::new();
        for &j in levels {
            let fj = bank.block(f, Level::J(j))?;
            if fj.coefficient_norm().powi(2) < DEGENERATE_ENERGY {
                rows.push(skipped(t, Some(j)));
                continue;
            }
            let norm = lp_norm(&fj, p)?;
            let scale = 2f64.powi(j as i32);
            let grad = lp_norm_magnitude(&gradient(&fj), p)?;
            let inv = lp_norm(&inverse_lambda(&fj), p)?;
            rows.push(row(t, Some(j), "gradient", grad, scale * norm));
            rows.push(row(t, Some(j), "inverse", scale * inv, norm));
        }
        Ok(rows)
    })?;
    Ok(report)
}

/// Rate constant of the sharp `L²` decay bound `e^{-(3/8·2^j)^α t}`.
pub fn semigroup_rate(alpha: f64) -> f64 {
    (3.0f64 / 8.0).powf(alpha)
}

/// Heat-type decay of dyadic blocks. Each record compares
/// `‖e^{-tΛ^α}f_j‖_p` against `e^{-c t 2^{αj}}‖f_j‖_p` with
/// `c = (3/8)^α`; the summary holds the fitted rate `c_fit_j<j>` per level
/// from a regression of `ln(ratio)` on `t·2^{αj}`.
#[allow(clippy::too_many_arguments)]
pub fn verify_semigroup_decay<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    alpha: f64,
    p: Exponent,
    levels: &[usize],
    times: &[f64],
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    check_levels(bank, levels)?;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.is_empty() {
        return param("decay times must be finite and non-negative");
    }
    let c0 = semigroup_rate(alpha);
    let mut report = EstimateReport::new("semigroup", source.seed(), trials)
        .param("alpha", alpha)
        .param("p", p)
        .param("levels", levels_text(levels))
        .param("n", bank.grid().n());
    type Out = (Rows, Vec<(usize, f64, f64)>);
    let per_trial: Vec<Out> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Out> {
            let data = source.fields(t)?;
            let f = &fields(&data, 1)?[0];
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for &j in levels {
                let fj = bank.block(f, Level::J(j))?;
                if fj.coefficient_norm().powi(2) < DEGENERATE_ENERGY {
                    rows.push(skipped(t, Some(j)));
                    continue;
                }
                let norm = lp_norm(&fj, p)?;
                for &time in times {
                    let tau = time * 2f64.powf(alpha * j as f64);
                    let bound = (-c0 * tau).exp();
                    if bound < 1e-250 {
                        rows.push(skipped(t, Some(j)));
                        continue;
                    }
                    let decayed = lp_norm(&semigroup_apply(&fj, alpha, time)?, p)?;
                    rows.push(row(t, Some(j), "decay", decayed, bound * norm));
                    let r = decayed / norm;
                    if tau > 0.0 && r > 1e-12 {
                        points.push((j, tau, r.ln()));
                    }
                }
            }
            Ok((rows, points))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut points = Vec::new();
    for (rows, pts) in per_trial {
        for (t, l, q, lhs, rhs) in rows {
            report.push(t, l, &q, lhs, rhs);
        }
        points.extend(pts);
    }
    let mut fits = Vec::new();
    for &j in levels {
        let xy: Vec<(f64, f64)> = points.iter().filter(|p| p.0 == j).map(|p| (p.1, p.2)).collect();
        if let Some(slope) = regression_slope(&xy) {
            fits.push(-slope);
            report.summary.push((format!("c_fit_j{j}"), -slope));
        }
    }
    report.summary.push(("c_reference".into(), c0));
    report.summary.push(("c_fit_spread".into(), super::spread(&fits)));
    Ok(report)
}

/// Least-squares slope of `y` on `x`; `None` with fewer than two distinct `x`.
pub fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Embedding `B^s_{p1,q1} ⊂ B^{s-2(1/p1-1/p2)}_{p2,q2}` for `p1 ≤ p2`, `q1 ≤ q2`.
#[allow(clippy::too_many_arguments)]
pub fn verify_embedding<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    s: f64,
    p1: Exponent,
    p2: Exponent,
    q1: Exponent,
    q2: Exponent,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    if p1.reciprocal() < p2.reciprocal() || q1.reciprocal() < q2.reciprocal() {
        return param("embedding needs p1 ≤ p2 and q1 ≤ q2");
    }
    let target_s = s - 2.0 * (p1.reciprocal() - p2.reciprocal());
    let lhs_idx = BesovIndex::new(target_s, p2, q2)?;
    let rhs_idx = BesovIndex::new(s, p1, q1)?;
    let mut report = EstimateReport::new("embedding", source.seed(), trials)
        .param("s", s)
        .param("p1", p1)
        .param("p2", p2)
        .param("q1", q1)
        .param("q2", q2);
    run_trials(&mut report, source, trials, |t, data| {
        let f = &fields(data, 1)?[0];
        let small = bank.block_norms(f, p2)?;
        let large = bank.block_norms(f, p1)?;
        let mut rows = vec![row(t, None, "norm", lhs_idx.combine(&small), rhs_idx.combine(&large))];
        for j in 1..=bank.j_max() {
            rows.push(row(
                t,
                Some(j),
                "block",
                2f64.powf(target_s * j as f64) * small[j],
                2f64.powf(s * j as f64) * large[j],
            ));
        }
        Ok(rows)
    })?;
    Ok(report)
}

/// Components `∂_a(∇⊥Λ^{-1}f)_b` of the tensor `∇∇⊥Λ^{-1}f`.
pub fn multiplier_tensor(f: &SpectralField) -> Vec<SpectralField> {
    let mut out = Vec::with_capacity(4);
    for b in 0..2 {
        let r = SymbolOp::RieszPerp { axis: b }.apply(f);
        for a in 0..2 {
            out.push(SymbolOp::Gradient { axis: a }.apply(&r));
        }
    }
    out
}

/// `‖∇∇⊥Λ^{-1}f‖_{B^{s-1}_{∞,q}} ≲ ‖f‖_{B^s_{∞,q}}`, with per-level block ratios.
pub fn verify_multiplier_bound<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    s: f64,
    q: Exponent,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let lhs_idx = BesovIndex::new(s - 1.0, Exponent::Infinite, q)?;
    let rhs_idx = BesovIndex::new(s, Exponent::Infinite, q)?;
    let mut report = EstimateReport::new("multiplier", source.seed(), trials)
        .param("s", s)
        .param("q", q)
        .param("n", bank.grid().n());
    run_trials(&mut report, source, trials, |t, data| {
        let f = &fields(data, 1)?[0];
        let tensor = bank.block_norms_components(&multiplier_tensor(f), Exponent::Infinite)?;
        let plain = bank.block_norms(f, Exponent::Infinite)?;
        let mut rows = vec![row(t, None, "norm", lhs_idx.combine(&tensor), rhs_idx.combine(&plain))];
        for j in 1..=bank.j_max() {
            if plain[j] > 0.0 {
                rows.push(row(
                    t,
                    Some(j),
                    "block",
                    2f64.powf((s - 1.0) * j as f64) * tensor[j],
                    2f64.powf(s * j as f64) * plain[j],
                ));
            }
        }
        Ok(rows)
    })?;
    Ok(report)
}

/// Indices of the paraproduct inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParaproductParams {
    pub s: f64,
    pub eps: f64,
    pub p: Exponent,
    pub q: Exponent,
    pub q1: Exponent,
    pub q2: Exponent,
}

impl Default for ParaproductParams {
    fn default() -> Self {
        ParaproductParams {
            s: -0.5,
            eps: 0.25,
            p: Exponent::Finite(4.0),
            q: Exponent::Finite(2.0),
            q1: Exponent::Infinite,
            q2: Exponent::Finite(2.0),
        }
    }
}

/// Low-high paraproduct `Σ_{l≥2} (S_{l-2}f)(φ_l*g)`.
pub fn paraproduct_low_high(f: &SpectralField, g: &SpectralField, bank: &DyadicBank) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let mut acc = ProductAccumulator::new(f.grid());
    for l in 2..=bank.j_max() {
        let low = bank.s_partial(f, l - 2)?;
        let high = bank.block(g, Level::J(l))?;
        acc.add_dot(&[low], &[high]);
    }
    acc.finish()
}

/// `‖T_f g‖_{B^{s-ε}_{p,q}} ≲ ‖f‖_{B^{-ε}_{∞,q1}}‖g‖_{B^s_{p,q2}}`.
pub fn verify_paraproduct<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    params: ParaproductParams,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let ParaproductParams { s, eps, p, q, q1, q2 } = params;
    if !(eps > 0.0) {
        return param("ε must be positive");
    }
    check_holder(q, q1, q2, "paraproduct")?;
    let lhs_idx = BesovIndex::new(s - eps, p, q)?;
    let f_idx = BesovIndex::new(-eps, Exponent::Infinite, q1)?;
    let g_idx = BesovIndex::new(s, p, q2)?;
    let mut report = EstimateReport::new("paraproduct", source.seed(), trials)
        .param("s", s)
        .param("eps", eps)
        .param("p", p)
        .param("q", q)
        .param("q1", q1)
        .param("q2", q2)
        .param("n", bank.grid().n());
    run_trials(&mut report, source, trials, |t, data| {
        let [f, g] = fields(data, 2)? else { unreachable!() };
        let pp = paraproduct_low_high(f, g, bank)?;
        let rhs = besov_norm(f, bank, f_idx)? * besov_norm(g, bank, g_idx)?;
        let blocks = bank.block_norms(&pp, p)?;
        let mut rows = vec![row(t, None, "norm", lhs_idx.combine(&blocks), rhs)];
        for j in 1..=bank.j_max() {
            rows.push(row(t, Some(j), "block", 2f64.powf((s - eps) * j as f64) * blocks[j], rhs));
        }
        Ok(rows)
    })?;
    Ok(report)
}

/// Indices of the bilinear estimate for the symmetrized nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearParams {
    pub s: f64,
    pub s_prime: f64,
    pub p: Exponent,
    pub p1: Exponent,
    pub p2: Exponent,
    pub q: Exponent,
    pub q1: Exponent,
    pub q2: Exponent,
}

impl Default for BilinearParams {
    fn default() -> Self {
        BilinearParams {
            s: -0.5,
            s_prime: -0.5,
            p: Exponent::Finite(4.0),
            p1: Exponent::Finite(8.0),
            p2: Exponent::Finite(8.0),
            q: Exponent::Finite(2.0),
            q1: Exponent::Finite(4.0),
            q2: Exponent::Finite(4.0),
        }
    }
}

impl BilinearParams {
    /// Indices of the `B^{-2}_{p,p}` variant, which needs `1/q1 + 1/q2 = 1`.
    pub fn endpoint() -> Self {
        BilinearParams {
            q1: Exponent::Finite(2.0),
            q2: Exponent::Finite(2.0),
            ..Default::default()
        }
    }
}

/// `Σ_{|k-l|≤1} (∇⊥Λ^{-1}f_k)·∇g_l + (∇⊥Λ^{-1}g_l)·∇f_k`, the low-pass
/// block counted as level 0.
pub fn bilinear_sum(f: &SpectralField, g: &SpectralField, bank: &DyadicBank) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let levels = bank.levels();
    let fb = levels.iter().map(|&l| bank.block(f, l)).collect::<Result<Vec<_>>>()?;
    let gb = levels.iter().map(|&l| bank.block(g, l)).collect::<Result<Vec<_>>>()?;
    let mut acc = ProductAccumulator::new(f.grid());
    for k in 0..levels.len() {
        let lo = k.saturating_sub(1);
        let hi = (k + 1).min(levels.len() - 1);
        let mut gk = gb[lo].clone();
        for gl in &gb[lo + 1..=hi] {
            gk = gk.add(gl)?;
        }
        acc.add_dot(&riesz_perp_velocity(&fb[k]), &gradient(&gk));
        acc.add_dot(&riesz_perp_velocity(&gk), &gradient(&fb[k]));
    }
    acc.finish()
}

/// `‖Σ_{|k-l|≤1}(...)‖_{B^s_{p,q}} ≲ ‖f‖_{B^{s'}_{p1,q1}}‖g‖_{B^{s+1-s'}_{p2,q2}}`.
pub fn verify_bilinear<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    params: BilinearParams,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let BilinearParams { s, s_prime, p, p1, p2, q, q1, q2 } = params;
    if !(s > -2.0) {
        return param("bilinear estimate needs s > -2");
    }
    check_holder(p, p1, p2, "bilinear")?;
    check_holder(q, q1, q2, "bilinear")?;
    let lhs_idx = BesovIndex::new(s, p, q)?;
    let f_idx = BesovIndex::new(s_prime, p1, q1)?;
    let g_idx = BesovIndex::new(s + 1.0 - s_prime, p2, q2)?;
    bilinear_report("bilinear", bank, params, lhs_idx, f_idx, g_idx, source, trials)
}

/// The `B^{-2}_{p,p}` variant: `≲ ‖f‖_{B^{s'}_{p1,q1}}‖g‖_{B^{-1-s'}_{p2,q2}}`
/// with `1/q1 + 1/q2 = 1`.
pub fn verify_bilinear_endpoint<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    params: BilinearParams,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let BilinearParams { s_prime, p, p1, p2, q1, q2, .. } = params;
    check_holder(p, p1, p2, "bilinear endpoint")?;
    if (q1.reciprocal() + q2.reciprocal() - 1.0).abs() > 1e-12 {
        return param("bilinear endpoint needs 1/q1 + 1/q2 = 1");
    }
    let lhs_idx = BesovIndex::new(-2.0, p, p)?;
    let f_idx = BesovIndex::new(s_prime, p1, q1)?;
    let g_idx = BesovIndex::new(-1.0 - s_prime, p2, q2)?;
    let params = BilinearParams { s: -2.0, q: p, ..params };
    bilinear_report("bilinear-endpoint", bank, params, lhs_idx, f_idx, g_idx, source, trials)
}

#[allow(clippy::too_many_arguments)]
fn bilinear_report<S: TrialSource + ?Sized>(
    id: &str,
    bank: &DyadicBank,
    params: BilinearParams,
    lhs_idx: BesovIndex,
    f_idx: BesovIndex,
    g_idx: BesovIndex,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let mut report = EstimateReport::new(id, source.seed(), trials)
        .param("s", params.s)
        .param("s_prime", params.s_prime)
        .param("p", params.p)
        .param("p1", params.p1)
        .param("p2", params.p2)
        .param("q", params.q)
        .param("q1", params.q1)
        .param("q2", params.q2)
        .param("n", bank.grid().n());
    run_trials(&mut report, source, trials, |t, data| {
        let [f, g] = fields(data, 2)? else { unreachable!() };
        let b = bilinear_sum(f, g, bank)?;
        let rhs = besov_norm(f, bank, f_idx)? * besov_norm(g, bank, g_idx)?;
        let blocks = bank.block_norms(&b, lhs_idx.p)?;
        let mut rows = vec![row(t, None, "norm", lhs_idx.combine(&blocks), rhs)];
        for j in 1..=bank.j_max() {
            rows.push(row(t, Some(j), "block", 2f64.powf(lhs_idx.s * j as f64) * blocks[j], rhs));
        }
        Ok(rows)
    })?;
    Ok(report)
}

/// Indices of the transport product estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductParams {
    pub p: Exponent,
    pub s: f64,
    pub eps: f64,
    pub q: Exponent,
    pub q1: Exponent,
    pub q2: Exponent,
}

impl Default for ProductParams {
    fn default() -> Self {
        ProductParams {
            p: Exponent::Finite(4.0),
            s: -0.5,
            eps: 0.25,
            q: Exponent::Finite(2.0),
            q1: Exponent::Infinite,
            q2: Exponent::Finite(2.0),
        }
    }
}

/// `‖u·∇θ‖_{B^s_{p,q}} ≲ ‖u‖_{B^{2/p-ε}_{p,q1}}‖θ‖_{B^{s+ε+1}_{p,q2}}` with
/// `u = ∇⊥Λ^{-1}f`.
pub fn verify_product<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    params: ProductParams,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let ProductParams { p, s, eps, q, q1, q2 } = params;
    let two_p = 2.0 * p.reciprocal();
    if !(s + two_p + 1.0 > 0.0 && eps > 0.0 && s + eps < two_p) {
        return param("product estimate needs s + 2/p + 1 > 0, ε > 0 and s + ε < 2/p");
    }
    check_holder(q, q1, q2, "product")?;
    let lhs_idx = BesovIndex::new(s, p, q)?;
    let u_idx = BesovIndex::new(two_p - eps, p, q1)?;
    let th_idx = BesovIndex::new(s + eps + 1.0, p, q2)?;
    let mut report = EstimateReport::new("product", source.seed(), trials)
        .param("s", s)
        .param("eps", eps)
        .param("p", p)
        .param("q", q)
        .param("q1", q1)
        .param("q2", q2)
        .param("n", bank.grid().n());
    run_trials(&mut report, source, trials, |t, data| {
        let [f, theta] = fields(data, 2)? else { unreachable!() };
        let u = riesz_perp_velocity(f);
        let lhs = besov_norm(&dot_product(&u, &gradient(theta))?, bank, lhs_idx)?;
        let rhs = besov_norm_components(&u, bank, u_idx)? * besov_norm(theta, bank, th_idx)?;
        Ok(vec![row(t, None, "norm", lhs, rhs)])
    })?;
    Ok(report)
}

/// `[Δ, u]·∇θ = Δ(u·∇θ) − u·∇(Δθ)` for the block `Δ` of `level`.
pub fn block_commutator(u: &[SpectralField; 2], theta: &SpectralField, bank: &DyadicBank, level: Level) -> Result<SpectralField> {
    let transported = dot_product(u, &gradient(theta))?;
    let first = bank.block(&transported, level)?;
    let second = dot_product(u, &gradient(&bank.block(theta, level)?))?;
    first.sub(&second)
}

/// `[T, b]·∇g = T(b·∇g) − (b·∇)(Tg)` with `T = ∇⊥Λ^{-1}ψ*` and
/// `b = ∇⊥Λ^{-1}f`; returns both components.
pub fn riesz_commutator(f: &SpectralField, g: &SpectralField, bank: &DyadicBank) -> Result<[SpectralField; 2]> {
    f.check_same_grid(g)?;
    let b = riesz_perp_velocity(f);
    let transported = dot_product(&b, &gradient(g))?;
    let first = riesz_perp_velocity(&bank.block(&transported, Level::Psi)?);
    let tg = riesz_perp_velocity(&bank.block(g, Level::Psi)?);
    let c0 = first[0].sub(&dot_product(&b, &gradient(&tg[0]))?)?;
    let c1 = first[1].sub(&dot_product(&b, &gradient(&tg[1]))?)?;
    Ok([c0, c1])
}

/// The five terms bounding the Riesz commutator in `L^∞`:
/// `‖ψg‖Σ_{k>4}‖f_k‖`, `‖ψf‖‖ψg‖`, `‖ψf‖‖g_1‖`, `‖f_1‖‖ψg‖` and
/// `Σ_{|k-l|≤6}‖f_k‖‖g_l‖`.
pub fn riesz_commutator_terms(f: &SpectralField, g: &SpectralField, bank: &DyadicBank) -> Result<[f64; 5]> {
    let nf = bank.block_norms(f, Exponent::Infinite)?;
    let ng = bank.block_norms(g, Exponent::Infinite)?;
    let jm = bank.j_max();
    let high: f64 = (5..=jm).map(|k| nf[k]).sum();
    let mut diag = 0.0;
    for k in 1..=jm {
        for l in 1..=jm {
            if k.abs_diff(l) <= 6 {
                diag += nf[k] * ng[l];
            }
        }
    }
    Ok([ng[0] * high, nf[0] * ng[0], nf[0] * ng[1], nf[1] * ng[0], diag])
}

/// Indices of the block commutator estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorParams {
    pub p: Exponent,
    pub s: f64,
    pub eps: f64,
    pub q: Exponent,
    pub q1: Exponent,
    pub q2: Exponent,
}

impl Default for CommutatorParams {
    fn default() -> Self {
        CommutatorParams {
            p: Exponent::Finite(4.0),
            s: -0.5,
            eps: 0.5,
            q: Exponent::Finite(2.0),
            q1: Exponent::Infinite,
            q2: Exponent::Finite(2.0),
        }
    }
}

/// Records `block` (the full `ℓ^q` commutator norm against
/// `‖∇u‖_{B^{2/p-ε}_{p,q1}}‖∇θ‖_{B^{s+ε-1}_{p,q2}}`, `u = ∇⊥Λ^{-1}f`),
/// `block_level` (each `2^{sj}‖[φ_j,u]·∇θ‖_p` against the same right-hand
/// side) and `riesz` (the Riesz commutator against its five-term sum).
pub fn verify_commutators<S: TrialSource + ?Sized>(
    bank: &DyadicBank,
    params: CommutatorParams,
    source: &S,
    trials: usize,
) -> Result<EstimateReport> {
    let CommutatorParams { p, s, eps, q, q1, q2 } = params;
    let two_p = 2.0 * p.reciprocal();
    if !(s + two_p + 1.0 > 0.0 && eps > 0.0 && eps < two_p + 1.0 && s + eps < two_p + 1.0) {
        return param("commutator estimate needs s + 2/p + 1 > 0, 0 < ε < 2/p + 1 and s + ε < 2/p + 1");
    }
    check_holder(q, q1, q2, "commutator")?;
    let lhs_idx = BesovIndex::new(s, p, q)?;
    let du_idx = BesovIndex::new(two_p - eps, p, q1)?;
    let dth_idx = BesovIndex::new(s + eps - 1.0, p, q2)?;
    let mut report = EstimateReport::new("commutator", source.seed(), trials)
        .param("s", s)
        .param("eps", eps)
        .param("p", p)
        .param("q", q)
        .param("q1", q1)
        .param("q2", q2)
        .param("n", bank.grid().n());
    run_trials(&mut report, source, trials, |t, data| {
        let [f, theta] = fields(data, 2)? else { unreachable!() };
        let u = riesz_perp_velocity(f);
        let grad_u: Vec<SpectralField> = u.iter().flat_map(gradient).collect();
        let rhs = besov_norm_components(&grad_u, bank, du_idx)? * besov_norm_components(&gradient(theta), bank, dth_idx)?;
        let mut norms = Vec::with_capacity(bank.j_max() + 1);
        for level in bank.levels() {
            norms.push(lp_norm(&block_commutator(&u, theta, bank, level)?, p)?);
        }
        let mut rows = vec![row(t, None, "block", lhs_idx.combine(&norms), rhs)];
        for j in 1..=bank.j_max() {
            rows.push(row(t, Some(j), "block_level", 2f64.powf(s * j as f64) * norms[j], rhs));
        }
        let c = riesz_commutator(f, theta, bank)?;
        let terms = riesz_commutator_terms(f, theta, bank)?;
        rows.push(row(t, None, "riesz", lp_norm_magnitude(&c, Exponent::Infinite)?, terms.iter().sum()));
        Ok(rows)
    })?;
    Ok(report)
}

/// Scaling exponent of the Duhamel bound as `T → 0`.
pub fn duhamel_exponent(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return param(format!("α must lie in (0, 2], got {alpha}"));
    }
    Ok(if alpha > 1.5 {
        1.0 / (2.0 * alpha)
    } else if alpha == 1.5 {
        1.0 / 3.0
    } else if alpha > 1.0 {
        2.0 - 2.0 / alpha
    } else {
        0.5
    })
}

/// Spatial exponent `p` and Besov index of the norms in the Duhamel bound.
pub fn duhamel_norm_index(alpha: f64) -> Result<(Exponent, BesovIndex)> {
    duhamel_exponent(alpha)?;
    if alpha > 1.5 {
        let p = 4.0 / (2.0 * alpha - 3.0);
        let pe = Exponent::finite(p)?;
        Ok((pe, BesovIndex::new(-0.5, pe, Exponent::finite(p / (p - 2.0))?)?))
    } else if alpha == 1.5 {
        Ok((Exponent::Infinite, BesovIndex::new(-0.5, Exponent::Infinite, Exponent::Finite(1.0))?))
    } else {
        Ok((Exponent::Infinite, BesovIndex::new(1.0 - alpha, Exponent::Infinite, Exponent::Infinite)?))
    }
}

/// `sup_t ‖∫_0^t e^{-(t-s)Λ^α}(∇⊥Λ^{-1}θ)θ ds‖_{L^p}` along a trajectory.
pub fn duhamel_sup_norm(series: &TimeSeriesField, alpha: f64, p: Exponent) -> Result<f64> {
    let comps = duhamel_of(series, alpha, |f| Ok(scale_vector(&riesz_perp_velocity(f), f)?.to_vec()))?;
    comps
        .iter()
        .map(|c| lp_norm_magnitude(c, p))
        .try_fold(0.0, |m, v| Ok(f64::max(m, v?)))
}

/// Norm product on the right of the Duhamel bound (without the `T` factor).
pub fn duhamel_rhs_norms(series: &TimeSeriesField, alpha: f64, bank: &DyadicBank) -> Result<f64> {
    let (_, idx) = duhamel_norm_index(alpha)?;
    let mut theta_sup = 0.0f64;
    let mut vel_sup = 0.0f64;
    for f in series.fields() {
        theta_sup = theta_sup.max(besov_norm(f, bank, idx)?);
        if alpha <= 1.5 {
            vel_sup = vel_sup.max(besov_norm_components(&riesz_perp_velocity(f), bank, idx)?);
        }
    }
    Ok(if alpha > 1.5 { theta_sup * theta_sup } else { vel_sup * theta_sup })
}

/// Horizons `2^{-k}` with `2^{-αJ} ≤ T ≤ 2^{-α(J-3)}`, where the ladder
/// resolves the small-time regime of the bank's levels.
pub fn duhamel_ladder(bank: &DyadicBank, alpha: f64) -> Vec<f64> {
    let j = bank.j_max() as f64;
    let lo = 2f64.powf(-alpha * j);
    let hi = 2f64.powf(-alpha * (j - 3.0));
    (0..64)
        .map(|k| 0.5f64.powi(k))
        .filter(|t| *t >= lo * (1.0 - 1e-12) && *t <= hi * (1.0 + 1e-12))
        .collect()
}

/// Step count for a Duhamel run of horizon `t` on the bank's grid.
fn ladder_steps(bank: &DyadicBank, alpha: f64, t: f64) -> usize {
    let need = (t * bank.grid().retained_kmax().powf(alpha) / STIFFNESS_CAP).ceil() as usize;
    need.max(32).next_power_of_two()
}

/// Duhamel bound on the solver's own trajectory from `theta0`, at each
/// horizon of `ladder`. Summary: fitted log-log `slope` of the left side in
/// `T` and the predicted `exponent`.
pub fn verify_duhamel_bound(alpha: f64, theta0: &SpectralField, bank: &DyadicBank, ladder: &[f64]) -> Result<EstimateReport> {
    let exponent = duhamel_exponent(alpha)?;
    let (p, idx) = duhamel_norm_index(alpha)?;
    if ladder.is_empty() || ladder.iter().any(|t| !(*t > 0.0)) {
        return param("horizon ladder must be non-empty and positive");
    }
    let grid = bank.grid();
    if theta0.grid() != grid {
        return Err(SqgError::GridMismatch);
    }
    let mut report = EstimateReport::new("duhamel", 0, ladder.len())
        .param("alpha", alpha)
        .param("p", p)
        .param("s", idx.s)
        .param("q", idx.q)
        .param("n", grid.n())
        .param("box", grid.box_length());
    let mut points = Vec::new();
    for (i, &t) in ladder.iter().enumerate() {
        let steps = ladder_steps(bank, alpha, t);
        let params = SolveParams::new(alpha, grid.n(), grid.box_length(), t, t / steps as f64);
        let sol = march(theta0, &params)?;
        let lhs = duhamel_sup_norm(&sol.series, alpha, p)?;
        let norms = duhamel_rhs_norms(&sol.series, alpha, bank)?;
        report.push(i, None, "scaling", lhs, t.max(t.powf(exponent)) * norms);
        if lhs > 0.0 && norms > 0.0 {
            points.push((t.ln(), (lhs / norms).ln()));
        }
    }
    report.summary.push(("exponent".into(), exponent.min(1.0)));
    if let Some(slope) = regression_slope(&points) {
        report.summary.push(("slope".into(), slope));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::RandomSource;
    use crate::{build_bank, BumpProfile, Grid2};
    use std::f64::consts::PI;

    fn bank() -> DyadicBank {
        build_bank(&Grid2::new(64, PI / 2.0).unwrap(), BumpProfile::default()).unwrap()
    }

    #[test]
    fn bernstein_single_mode_is_exact() {
        let b = bank();
        let g = b.grid().clone();
        let mode = SpectralField::cosine_mode(&g, 3, 0, 1.0, 0.3);
        let k = g.kmag(g.index_of(3, 0));
        let j = (1..=b.j_max()).find(|&j| b.phi_hat(j, k) > 0.99).unwrap();
        let src = |_t: usize| Ok(vec![mode.clone()]);
        let r = verify_bernstein(&b, Exponent::Finite(2.0), &[j], &src, 1).unwrap();
        let grad = r.sup_of("gradient");
        assert!((grad - k / 2f64.powi(j as i32)).abs() < 1e-12);
    }

    #[test]
    fn bernstein_rejects_bad_levels_and_skips_zero() {
        let b = bank();
        let zero = SpectralField::zeros(b.grid());
        let src = |_t: usize| Ok(vec![zero.clone()]);
        assert!(verify_bernstein(&b, Exponent::Finite(2.0), &[0], &src, 1).is_err());
        let r = verify_bernstein(&b, Exponent::Finite(2.0), &[2, 3], &src, 3).unwrap();
        assert_eq!(r.skipped, 6);
        assert!(r.records.is_empty());
    }

    #[test]
    fn semigroup_at_zero_time_is_identity() {
        let b = bank();
        let src = RandomSource::full_band(&b, 5, 1);
        let r = verify_semigroup_decay(&b, 1.5, Exponent::Infinite, &[2, 3], &[0.0], &src, 2).unwrap();
        assert!(r.records.iter().all(|x| (x.ratio - 1.0).abs() < 1e-12));
    }

    #[test]
    fn regression_recovers_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 - 0.5 * i as f64)).collect();
        assert!((regression_slope(&pts).unwrap() + 0.5).abs() < 1e-14);
        assert!(regression_slope(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn exponents_follow_cases() {
        assert_eq!(duhamel_exponent(2.0).unwrap(), 0.25);
        assert_eq!(duhamel_exponent(1.5).unwrap(), 1.0 / 3.0);
        assert!((duhamel_exponent(1.25).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(duhamel_exponent(0.5).unwrap(), 0.5);
        assert!(duhamel_exponent(0.0).is_err());
        let (p, idx) = duhamel_norm_index(2.0).unwrap();
        assert_eq!(p, Exponent::Finite(4.0));
        assert_eq!(idx.q, Exponent::Finite(2.0));
    }

    #[test]
    fn constant_velocity_commutes_with_blocks() {
        let b = bank();
        let g = b.grid().clone();
        let one = SpectralField::from_fn(&g, |_, _| 1.0);
        let u = [one.scale(0.7), one.scale(-1.3)];
        let src = RandomSource::full_band(&b, 9, 1);
        let theta = &src.fields(0).unwrap()[0];
        for level in b.levels() {
            let c = block_commutator(&u, theta, &b, level).unwrap();
            assert!(c.coefficient_norm() < 1e-12 * theta.coefficient_norm().max(1.0));
        }
    }

    #[test]
    fn paraproduct_of_zero_is_zero() {
        let b = bank();
        let src = RandomSource::product_band(&b, 2, 2);
        let data = src.fields(0).unwrap();
        let zero = SpectralField::zeros(b.grid());
        assert_eq!(paraproduct_low_high(&zero, &data[1], &b).unwrap().coefficient_norm(), 0.0);
        assert_eq!(bilinear_sum(&data[0], &zero, &b).unwrap().coefficient_norm(), 0.0);
    }
}
