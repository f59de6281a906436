//! Dyadic Littlewood–Paley filter bank, Besov norms and Chemin–Lerner norms.
//!
//! The bank is built from a radial cutoff `χ̃` with `χ̃ = 1` on `|ξ| ≤ 3/4`
//! and `χ̃ = 0` on `|ξ| ≥ 4/3`. Then `ψ̂ = χ̃` and
//! `φ̂_j(ξ) = χ̃(ξ/2^j) − χ̃(ξ/2^{j−1})`, supported in
//! `3/4·2^{j−1} ≤ |ξ| ≤ 8/3·2^{j−1}`, and the partial sums telescope to
//! `χ̃(ξ/2^J)`.

use rustfft::num_complex::Complex64;

use crate::error::{param, Result, SqgError};
use crate::spectral::{lp_norm_magnitude, lp_norm_samples, Exponent, Grid2, SpectralField};

/// `C^∞` step rising from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
pub fn smooth_step(t: f64) -> f64 {
    fn h(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-1.0 / x).exp()
        }
    }
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = h(t);
        a / (a + h(1.0 - t))
    }
}

/// Radial cutoff equal to 1 below `inner` and 0 above `outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    pub inner: f64,
    pub outer: f64,
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile {
            inner: 0.75,
            outer: 4.0 / 3.0,
        }
    }
}

impl BumpProfile {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return param(format!("bump radii must satisfy 0 < inner < outer, got {inner}, {outer}"));
        }
        Ok(BumpProfile { inner, outer })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.inner {
            1.0
        } else if r >= self.outer {
            0.0
        } else {
            1.0 - smooth_step((r - self.inner) / (self.outer - self.inner))
        }
    }
}

/// A dyadic level: the low-pass block or annulus `j ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Psi,
    J(usize),
}

#[derive(Debug, Clone)]
struct SparseSymbol {
    indices: Vec<usize>,
    weights: Vec<f64>,
}

/// Littlewood–Paley symbols sampled on a grid's frequency lattice.
#[derive(Debug, Clone)]
pub struct DyadicBank {
    grid: Grid2,
    profile: BumpProfile,
    j_max: usize,
    psi: SparseSymbol,
    phi: Vec<SparseSymbol>,
}

/// Builds the bank; `J_max` is the highest level whose annulus fits inside
/// the dealiasing disk.
pub fn build_bank(grid: &Grid2, profile: BumpProfile) -> Result<DyadicBank> {
    let radius = grid.dealias_radius() * (1.0 + 1e-12);
    let mut j_max = 0;
    // Level j reaches out to outer·2^j.
    while profile.outer * 2f64.powi(j_max as i32 + 1) <= radius {
        j_max += 1;
    }
    if j_max < 3 {
        return Err(SqgError::GridTooSmall {
            n: grid.n(),
            box_length: grid.box_length(),
            levels: j_max,
        });
    }
    let sample = |f: &dyn Fn(f64) -> f64| {
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        for (idx, &k) in grid.kmags().iter().enumerate() {
            let w = f(k);
            if w > 0.0 {
                indices.push(idx);
                weights.push(w);
            }
        }
        SparseSymbol { indices, weights }
    };
    let psi = sample(&|r| profile.eval(r));
    let phi = (1..=j_max)
        .map(|j| sample(&|r| annulus(&profile, j, r)))
        .collect();
    Ok(DyadicBank {
        grid: grid.clone(),
        profile,
        j_max,
        psi,
        phi,
    })
}

pub(crate) fn annulus(profile: &BumpProfile, j: usize, r: f64) -> f64 {
    let hi = profile.eval(r / 2f64.powi(j as i32));
    let lo = profile.eval(r / 2f64.powi(j as i32 - 1));
    (hi - lo).max(0.0)
}

impl DyadicBank {
    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn profile(&self) -> BumpProfile {
        self.profile
    }

    /// All levels in order: `ψ, 1, ..., J_max`.
    pub fn levels(&self) -> Vec<Level> {
        std::iter::once(Level::Psi)
            .chain((1..=self.j_max).map(Level::J))
            .collect()
    }

    /// Radius below which the sampled partition of unity is exact.
    pub fn partition_radius(&self) -> f64 {
        self.profile.inner * 2f64.powi(self.j_max as i32)
    }

    /// Continuum `ψ̂(|ξ|)`.
    pub fn psi_hat(&self, r: f64) -> f64 {
        self.profile.eval(r)
    }

    /// Continuum `φ̂_j(|ξ|)` for any `j ≥ 1`, including levels beyond the grid.
    pub fn phi_hat(&self, j: usize, r: f64) -> f64 {
        if j == 0 {
            return 0.0;
        }
        annulus(&self.profile, j, r)
    }

    /// Continuum symbol of a level.
    pub fn symbol(&self, level: Level, r: f64) -> f64 {
        match level {
            Level::Psi => self.psi_hat(r),
            Level::J(j) => self.phi_hat(j, r),
        }
    }

    /// Inner and outer radius of a level's support.
    pub fn support(&self, level: Level) -> (f64, f64) {
        match level {
            Level::Psi => (0.0, self.profile.outer),
            Level::J(j) => {
                let s = 2f64.powi(j as i32 - 1);
                (self.profile.inner * s, 2.0 * self.profile.outer * s)
            }
        }
    }

    fn sparse(&self, level: Level) -> Result<&SparseSymbol> {
        match level {
            Level::Psi => Ok(&self.psi),
            Level::J(0) => param("dyadic levels start at 1"),
            Level::J(j) if j > self.j_max => Err(SqgError::LevelOutOfRange {
                level: j,
                j_max: self.j_max,
            }),
            Level::J(j) => Ok(&self.phi[j - 1]),
        }
    }

    /// Lattice samples of a level's symbol as a dense array.
    pub fn dense_symbol(&self, level: Level) -> Result<Vec<f64>> {
        let s = self.sparse(level)?;
        let mut out = vec![0.0; self.grid.len()];
        for (&i, &w) in s.indices.iter().zip(&s.weights) {
            out[i] = w;
        }
        Ok(out)
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.grid() == &self.grid {
            Ok(())
        } else {
            Err(SqgError::GridMismatch)
        }
    }

    /// `φ_j * f` (or `ψ * f`).
    pub fn block(&self, f: &SpectralField, level: Level) -> Result<SpectralField> {
        self.check(f)?;
        let s = self.sparse(level)?;
        let src = f.coefficients();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); src.len()];
        for (&i, &w) in s.indices.iter().zip(&s.weights) {
            coeffs[i] = src[i] * w;
        }
        Ok(SpectralField::from_parts(&self.grid, coeffs, f.is_real()))
    }

    /// `S_j f = ψ*f + Σ_{k≤j} φ_k*f`; `j = 0` gives `ψ*f`.
    pub fn s_partial(&self, f: &SpectralField, j: usize) -> Result<SpectralField> {
        self.check(f)?;
        if j > self.j_max {
            return Err(SqgError::LevelOutOfRange {
                level: j,
                j_max: self.j_max,
            });
        }
        let mut weight = self.dense_symbol(Level::Psi)?;
        for k in 1..=j {
            let s = self.sparse(Level::J(k))?;
            for (&i, &w) in s.indices.iter().zip(&s.weights) {
                weight[i] += w;
            }
        }
        let coeffs = f
            .coefficients()
            .iter()
            .zip(&weight)
            .map(|(c, w)| c * *w)
            .collect();
        Ok(SpectralField::from_parts(&self.grid, coeffs, f.is_real()))
    }

    /// `S̃_j f = f − S_j f`.
    pub fn tilde_s(&self, f: &SpectralField, j: usize) -> Result<SpectralField> {
        f.sub(&self.s_partial(f, j)?)
    }

    /// `‖ψ*f‖_{L^p}, ‖φ_1*f‖_{L^p}, ..., ‖φ_{J_max}*f‖_{L^p}`.
    pub fn block_norms(&self, f: &SpectralField, p: Exponent) -> Result<Vec<f64>> {
        self.check(f)?;
        let levels = self.levels();
        let mut out = Vec::with_capacity(levels.len());
        for pair in levels.chunks(2) {
            let a = self.block(f, pair[0])?;
            if pair.len() == 2 {
                let b = self.block(f, pair[1])?;
                let (pa, pb) = SpectralField::to_physical_pair(&a, &b);
                out.push(lp_norm_samples(&self.grid, &pa, p));
                out.push(lp_norm_samples(&self.grid, &pb, p));
            } else {
                out.push(lp_norm_samples(&self.grid, &a.to_physical(), p));
            }
        }
        Ok(out)
    }

    /// Block norms of a vector or tensor field using the pointwise magnitude.
    pub fn block_norms_components(&self, comps: &[SpectralField], p: Exponent) -> Result<Vec<f64>> {
        self.levels()
            .into_iter()
            .map(|level| {
                let blocks = comps
                    .iter()
                    .map(|c| self.block(c, level))
                    .collect::<Result<Vec<_>>>()?;
                lp_norm_magnitude(&blocks, p)
            })
            .collect()
    }
}

/// Besov index `(s, p, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: Exponent,
    pub q: Exponent,
}

impl BesovIndex {
    pub fn new(s: f64, p: Exponent, q: Exponent) -> Result<Self> {
        if !s.is_finite() {
            return param("regularity index must be finite");
        }
        for e in [p, q] {
            if let Exponent::Finite(v) = e {
                Exponent::finite(v)?;
            }
        }
        Ok(BesovIndex { s, p, q })
    }

    /// Combines block norms `[ψ, 1, ..., J]` into the Besov norm.
    pub fn combine(&self, norms: &[f64]) -> f64 {
        let Some((&low, rest)) = norms.split_first() else {
            return 0.0;
        };
        let weighted = rest
            .iter()
            .enumerate()
            .map(|(i, &v)| 2f64.powf(self.s * (i + 1) as f64) * v);
        low + self.q.sequence_norm(weighted)
    }
}

/// `‖f‖_{B^s_{p,q}} = ‖ψ*f‖_{L^p} + ‖{2^{sj}‖φ_j*f‖_{L^p}}‖_{ℓ^q}`.
pub fn besov_norm(f: &SpectralField, bank: &DyadicBank, idx: BesovIndex) -> Result<f64> {
    Ok(idx.combine(&bank.block_norms(f, idx.p)?))
}

/// Besov norm of a vector or tensor field.
pub fn besov_norm_components(comps: &[SpectralField], bank: &DyadicBank, idx: BesovIndex) -> Result<f64> {
    Ok(idx.combine(&bank.block_norms_components(comps, idx.p)?))
}

/// Field samples at increasing instants.
#[derive(Debug, Clone)]
pub struct TimeSeriesField {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl TimeSeriesField {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if times.is_empty() {
            return Err(SqgError::EmptySeries);
        }
        if times.len() != fields.len() {
            return param("times and fields differ in length");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return param("times must be strictly increasing");
        }
        let grid = fields[0].grid();
        if fields.iter().any(|f| f.grid() != grid) {
            return Err(SqgError::GridMismatch);
        }
        Ok(TimeSeriesField { times, fields })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn grid(&self) -> &Grid2 {
        self.fields[0].grid()
    }

    pub fn last(&self) -> &SpectralField {
        &self.fields[self.fields.len() - 1]
    }

    /// Pointwise-in-time difference of two aligned series.
    pub fn difference(&self, other: &TimeSeriesField) -> Result<TimeSeriesField> {
        if self.times != other.times {
            return param("series are sampled at different instants");
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(TimeSeriesField {
            times: self.times.clone(),
            fields,
        })
    }

    /// Keeps the instants `t ≤ horizon`.
    pub fn truncate(&self, horizon: f64) -> Result<TimeSeriesField> {
        let keep = self.times.iter().take_while(|&&t| t <= horizon * (1.0 + 1e-12)).count();
        TimeSeriesField::new(self.times[..keep].to_vec(), self.fields[..keep].to_vec())
    }
}

/// `L^r` norm in time of non-negative samples by the trapezoid rule.
pub fn time_norm(times: &[f64], values: &[f64], r: Exponent) -> f64 {
    match r {
        Exponent::Infinite => values.iter().copied().fold(0.0, f64::max),
        Exponent::Finite(r) => {
            let scale = values.iter().copied().fold(0.0, f64::max);
            if scale == 0.0 {
                return 0.0;
            }
            let integral: f64 = times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * ((v[0] / scale).powf(r) + (v[1] / scale).powf(r)))
                .sum();
            scale * integral.powf(1.0 / r)
        }
    }
}

/// `‖f‖_{L̃^r(0,T;B^s_{p,q})}`: time norm per block, then the `ℓ^q` sum.
pub fn chemin_lerner_norm(series: &TimeSeriesField, bank: &DyadicBank, idx: BesovIndex, r: Exponent) -> Result<f64> {
    let per_time = series
        .fields
        .iter()
        .map(|f| bank.block_norms(f, idx.p))
        .collect::<Result<Vec<_>>>()?;
    let levels = per_time[0].len();
    let per_level: Vec<f64> = (0..levels)
        .map(|l| {
            let v: Vec<f64> = per_time.iter().map(|n| n[l]).collect();
            time_norm(&series.times, &v, r)
        })
        .collect();
    Ok(idx.combine(&per_level))
}

/// `‖f‖_{L^r(0,T;B^s_{p,q})}`: Besov norm per instant, then the time norm.
pub fn bochner_norm(series: &TimeSeriesField, bank: &DyadicBank, idx: BesovIndex, r: Exponent) -> Result<f64> {
    let values = series
        .fields
        .iter()
        .map(|f| besov_norm(f, bank, idx))
        .collect::<Result<Vec<_>>>()?;
    Ok(time_norm(&series.times, &values, r))
}
