//! Periodic 2D grid, discrete Fourier transforms and Fourier-symbol operators.
//!
//! A [`SpectralField`] stores the coefficients `c(k)` of the trigonometric
//! polynomial `f(x) = Σ_k c(k) e^{i k·x}` on the torus `[0, L)²`. The
//! frequency lattice is `(2π/L)·m` with integer `m ∈ [-n/2, n/2)` per axis.
//! Sample `(a, b)` sits at `x = (a·L/n, b·L/n)` and is stored at `b·n + a`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Result, SqgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// An integrability or summability exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(value: f64) -> Result<Self> {
        if !(value >= 1.0) || !value.is_finite() {
            return param(format!("exponent must lie in [1, ∞), got {value}"));
        }
        Ok(Exponent::Finite(value))
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    /// Builds the exponent whose reciprocal is `r` (`r = 0` gives `∞`).
    pub fn from_reciprocal(r: f64) -> Result<Self> {
        if r == 0.0 {
            Ok(Exponent::Infinite)
        } else {
            Exponent::finite(1.0 / r)
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    /// `ℓ^p` norm of a finite sequence of non-negative numbers.
    pub fn sequence_norm(self, values: impl IntoIterator<Item = f64>) -> f64 {
        match self {
            Exponent::Infinite => values.into_iter().fold(0.0, f64::max),
            Exponent::Finite(p) => {
                let v: Vec<f64> = values.into_iter().collect();
                let scale = v.iter().copied().fold(0.0, f64::max);
                if scale == 0.0 {
                    return 0.0;
                }
                let sum: f64 = v.iter().map(|x| (x / scale).powf(p)).sum();
                scale * sum.powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = SqgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| SqgError::Parameter(format!("cannot parse exponent '{other}'")))?;
                Exponent::finite(v)
            }
        }
    }
}

struct GridInner {
    n: usize,
    box_length: f64,
    dk: f64,
    /// Integer mode number per axis index.
    modes: Vec<i64>,
    /// Physical wavenumber per axis index.
    freqs: Vec<f64>,
    kmag: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Uniform periodic grid on `[0, L)²`.
#[derive(Clone)]
pub struct Grid2 {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2")
            .field("n", &self.inner.n)
            .field("box_length", &self.inner.box_length)
            .finish()
    }
}

impl PartialEq for Grid2 {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.box_length == other.inner.box_length)
    }
}

impl Grid2 {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return param(format!("grid size must be a power of two ≥ 16, got {n}"));
        }
        if !(box_length > 0.0) || !box_length.is_finite() {
            return param(format!("box length must be positive, got {box_length}"));
        }
        let dk = 2.0 * PI / box_length;
        let modes: Vec<i64> = (0..n)
            .map(|a| if a < n / 2 { a as i64 } else { a as i64 - n as i64 })
            .collect();
        let freqs: Vec<f64> = modes.iter().map(|&m| m as f64 * dk).collect();
        let mut kmag = vec![0.0; n * n];
        for b in 0..n {
            for a in 0..n {
                kmag[b * n + a] = freqs[a].hypot(freqs[b]);
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid2 {
            inner: Arc::new(GridInner {
                n,
                box_length,
                dk,
                modes,
                freqs,
                kmag,
                fwd,
                inv,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn box_length(&self) -> f64 {
        self.inner.box_length
    }

    /// Lattice spacing `2π/L`.
    pub fn dk(&self) -> f64 {
        self.inner.dk
    }

    /// Number of samples, `n²`.
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Area of one physical cell, `(L/n)²`.
    pub fn cell_area(&self) -> f64 {
        let h = self.inner.box_length / self.inner.n as f64;
        h * h
    }

    pub fn area(&self) -> f64 {
        self.inner.box_length * self.inner.box_length
    }

    /// Integer mode pair `(m1, m2)` of a flat index.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        let n = self.inner.n;
        (self.inner.modes[idx % n], self.inner.modes[idx / n])
    }

    /// Physical wavevector of a flat index.
    pub fn wavevector(&self, idx: usize) -> (f64, f64) {
        let n = self.inner.n;
        (self.inner.freqs[idx % n], self.inner.freqs[idx / n])
    }

    pub fn kmag(&self, idx: usize) -> f64 {
        self.inner.kmag[idx]
    }

    pub fn kmags(&self) -> &[f64] {
        &self.inner.kmag
    }

    /// Flat index of the integer mode `(m1, m2)`, wrapping negative modes.
    pub fn index_of(&self, m1: i64, m2: i64) -> usize {
        let n = self.inner.n as i64;
        let a = m1.rem_euclid(n) as usize;
        let b = m2.rem_euclid(n) as usize;
        b * self.inner.n + a
    }

    /// Flat index of `-k`.
    pub fn negated(&self, idx: usize) -> usize {
        let n = self.inner.n;
        let (a, b) = (idx % n, idx / n);
        ((n - b) % n) * n + (n - a) % n
    }

    /// Whether the index lies on the Nyquist row or column.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let n = self.inner.n;
        idx % n == n / 2 || idx / n == n / 2
    }

    /// Largest retained integer mode per axis under the 2/3 rule.
    pub fn dealias_mode_cutoff(&self) -> i64 {
        (self.inner.n / 3) as i64
    }

    /// Radius of the largest disk contained in the retained square.
    pub fn dealias_radius(&self) -> f64 {
        self.inner.n as f64 / 3.0 * self.inner.dk
    }

    /// Largest wavenumber magnitude kept by the dealiasing filter.
    pub fn retained_kmax(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.dealias_mode_cutoff() as f64 * self.inner.dk
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        let (m1, m2) = self.mode(idx);
        let c = self.dealias_mode_cutoff();
        m1.abs() <= c && m2.abs() <= c
    }

    /// Physical coordinate of sample `(a, b)`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let n = self.inner.n;
        let h = self.inner.box_length / n as f64;
        ((idx % n) as f64 * h, (idx / n) as f64 * h)
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let inner = &*self.inner;
        let n = inner.n;
        let plan = if inverse { &inner.inv } else { &inner.fwd };
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        let mut t = vec![ZERO; n * n];
        transpose(data, &mut t, n);
        plan.process_with_scratch(&mut t, &mut scratch);
        transpose(&t, data, n);
    }

    /// Unnormalized forward DFT followed by division by `n²`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let s = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// Synthesis `f(x) = Σ c(k) e^{ik·x}`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const TILE: usize = 32;
    for bi in (0..n).step_by(TILE) {
        for bj in (0..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                for j in bj..(bj + TILE).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// A real 2D periodic field carried by its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid2,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid2) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
            real: true,
        }
    }

    pub fn from_physical(grid: &Grid2, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return param(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return param("non-finite sample");
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.forward(&mut data);
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs: data,
            real: true,
        })
    }

    pub fn from_fn(grid: &Grid2, f: impl Fn(f64, f64) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len())
            .map(|i| {
                let (x1, x2) = grid.point(i);
                f(x1, x2)
            })
            .collect();
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        grid.forward(&mut data);
        SpectralField {
            grid: grid.clone(),
            coeffs: data,
            real: true,
        }
    }

    /// Wraps coefficients; the reality flag is set when they are conjugate
    /// symmetric to `1e-12` relative.
    pub fn from_coefficients(grid: &Grid2, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return param(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            ));
        }
        let mut f = SpectralField {
            grid: grid.clone(),
            coeffs,
            real: false,
        };
        let scale = f.coefficient_norm();
        f.real = f.hermitian_defect() <= 1e-12 * scale.max(f64::MIN_POSITIVE);
        Ok(f)
    }

    pub(crate) fn from_parts(grid: &Grid2, coeffs: Vec<Complex64>, real: bool) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs,
            real,
        }
    }

    /// Single real Fourier mode `amplitude·cos(k·x + phase)` with integer mode `(m1, m2)`.
    pub fn cosine_mode(grid: &Grid2, m1: i64, m2: i64, amplitude: f64, phase: f64) -> Self {
        let mut f = SpectralField::zeros(grid);
        let c = Complex64::from_polar(0.5 * amplitude, phase);
        let i = grid.index_of(m1, m2);
        let j = grid.index_of(-m1, -m2);
        if i == j {
            f.coeffs[i] += Complex64::new(amplitude * phase.cos(), 0.0);
        } else {
            f.coeffs[i] += c;
            f.coeffs[j] += c.conj();
        }
        f
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Coefficient of the integer mode `(m1, m2)`.
    pub fn coefficient(&self, m1: i64, m2: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(m1, m2)]
    }

    /// Spatial mean, the `k = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `max_k |c(k) - conj(c(-k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let j = self.grid.negated(i);
                (self.coeffs[i] - self.coeffs[j].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `ℓ²` norm of the coefficient vector.
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `L²(torus)` norm through Plancherel: `L·(Σ|c|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.grid.box_length() * self.coefficient_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Physical samples (real part of the synthesis).
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        self.grid.inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Synthesizes two real fields with one complex transform.
    pub fn to_physical_pair(a: &SpectralField, b: &SpectralField) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut data: Vec<Complex64> = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(&x, &y)| x + i * y)
            .collect();
        a.grid.inverse(&mut data);
        let re = data.iter().map(|c| c.re).collect();
        let im = data.iter().map(|c| c.im).collect();
        (re, im)
    }

    /// Analyzes two real sample arrays with one complex transform.
    pub fn from_physical_pair(grid: &Grid2, a: &[f64], b: &[f64]) -> (SpectralField, SpectralField) {
        let mut data: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        grid.forward(&mut data);
        let mut ca = vec![ZERO; grid.len()];
        let mut cb = vec![ZERO; grid.len()];
        for idx in 0..grid.len() {
            let z = data[idx];
            let zn = data[grid.negated(idx)].conj();
            ca[idx] = (z + zn) * 0.5;
            cb[idx] = (z - zn) * Complex64::new(0.0, -0.5);
        }
        (
            SpectralField::from_parts(grid, ca, true),
            SpectralField::from_parts(grid, cb, true),
        )
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(SqgError::GridMismatch)
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(SpectralField::from_parts(&self.grid, coeffs, self.real && other.real))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(SpectralField::from_parts(&self.grid, coeffs, self.real && other.real))
    }

    pub fn scale(&self, factor: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        SpectralField::from_parts(&self.grid, coeffs, self.real)
    }

    pub fn add_assign_scaled(&mut self, other: &SpectralField, factor: f64) -> Result<()> {
        self.check_same_grid(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * factor;
        }
        self.real &= other.real;
        Ok(())
    }

    /// Multiplies every coefficient by `symbol(k1, k2, |k|)`. The reality flag
    /// is kept, so callers must pass real-preserving symbols.
    pub fn map_symbol(&self, symbol: impl Fn(f64, f64, f64) -> Complex64) -> SpectralField {
        let grid = &self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if c == ZERO {
                    return ZERO;
                }
                let (k1, k2) = grid.wavevector(idx);
                c * symbol(k1, k2, grid.kmag(idx))
            })
            .collect();
        SpectralField::from_parts(grid, coeffs, self.real)
    }

    /// Relative `ℓ²` distance between coefficient vectors.
    pub fn relative_distance(&self, other: &SpectralField) -> f64 {
        let diff: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = self.coefficient_norm().max(other.coefficient_norm());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// Fourier multipliers of the equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolOp {
    /// `|k|^α`.
    FractionalLaplacian { alpha: f64 },
    /// `1/|k|`, zero at `k = 0`.
    InverseLambda,
    /// `i k_axis`.
    Gradient { axis: usize },
    /// Component of `i k⊥/|k|` with `k⊥ = (-k2, k1)`, zero at `k = 0`.
    RieszPerp { axis: usize },
    /// `exp(-t|k|^α)`.
    Semigroup { alpha: f64, t: f64 },
}

impl SymbolOp {
    /// Whether the symbol is odd in `k` (imaginary), which forces the Nyquist
    /// row and column to zero for real fields.
    fn is_odd(self) -> bool {
        matches!(self, SymbolOp::Gradient { .. } | SymbolOp::RieszPerp { .. })
    }

    /// Symbol value at wavevector `(k1, k2)`.
    pub fn eval(self, k1: f64, k2: f64) -> Complex64 {
        let k = k1.hypot(k2);
        match self {
            SymbolOp::FractionalLaplacian { alpha } => Complex64::new(k.powf(alpha), 0.0),
            SymbolOp::InverseLambda => {
                if k == 0.0 {
                    ZERO
                } else {
                    Complex64::new(1.0 / k, 0.0)
                }
            }
            SymbolOp::Gradient { axis } => Complex64::new(0.0, if axis == 0 { k1 } else { k2 }),
            SymbolOp::RieszPerp { axis } => {
                if k == 0.0 {
                    ZERO
                } else {
                    let kp = if axis == 0 { -k2 } else { k1 };
                    Complex64::new(0.0, kp / k)
                }
            }
            SymbolOp::Semigroup { alpha, t } => Complex64::new((-t * k.powf(alpha)).exp(), 0.0),
        }
    }

    pub fn apply(self, f: &SpectralField) -> SpectralField {
        let grid = f.grid();
        let odd = self.is_odd();
        let coeffs = f
            .coefficients()
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if c == ZERO || (odd && grid.is_nyquist(idx)) {
                    return ZERO;
                }
                let (k1, k2) = grid.wavevector(idx);
                c * self.eval(k1, k2)
            })
            .collect();
        SpectralField::from_parts(grid, coeffs, f.is_real())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        param(format!("α must lie in (0, 2], got {alpha}"))
    }
}

/// `Λ^α f`.
pub fn fractional_laplacian(f: &SpectralField, alpha: f64) -> Result<SpectralField> {
    check_alpha(alpha)?;
    Ok(SymbolOp::FractionalLaplacian { alpha }.apply(f))
}

/// `Λ^{-1} f` with the mean annihilated.
pub fn inverse_lambda(f: &SpectralField) -> SpectralField {
    SymbolOp::InverseLambda.apply(f)
}

/// `∇f`.
pub fn gradient(f: &SpectralField) -> [SpectralField; 2] {
    [
        SymbolOp::Gradient { axis: 0 }.apply(f),
        SymbolOp::Gradient { axis: 1 }.apply(f),
    ]
}

/// `∇⊥f = (-∂₂f, ∂₁f)`.
pub fn perp_gradient(f: &SpectralField) -> [SpectralField; 2] {
    let [g1, g2] = gradient(f);
    [g2.scale(-1.0), g1]
}

/// `∇·(v1, v2)`.
pub fn divergence(v: &[SpectralField; 2]) -> Result<SpectralField> {
    let d1 = SymbolOp::Gradient { axis: 0 }.apply(&v[0]);
    let d2 = SymbolOp::Gradient { axis: 1 }.apply(&v[1]);
    d1.add(&d2)
}

/// Velocity `u = ∇⊥Λ^{-1}θ`.
pub fn riesz_perp_velocity(theta: &SpectralField) -> [SpectralField; 2] {
    [
        SymbolOp::RieszPerp { axis: 0 }.apply(theta),
        SymbolOp::RieszPerp { axis: 1 }.apply(theta),
    ]
}

/// `e^{-tΛ^α} f`.
pub fn semigroup_apply(f: &SpectralField, alpha: f64, t: f64) -> Result<SpectralField> {
    check_alpha(alpha)?;
    if !(t >= 0.0) || !t.is_finite() {
        return param(format!("semigroup time must be ≥ 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(SymbolOp::Semigroup { alpha, t }.apply(f))
}

/// 2/3-rule truncation: zeros coefficients with `max(|m1|, |m2|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let coeffs = f
        .coefficients()
        .iter()
        .enumerate()
        .map(|(idx, &c)| if grid.is_retained(idx) { c } else { ZERO })
        .collect();
    SpectralField::from_parts(grid, coeffs, f.is_real())
}

/// In-place form of [`dealias`].
pub(crate) fn dealias_in_place(f: &mut SpectralField) {
    let grid = f.grid.clone();
    for (idx, c) in f.coeffs.iter_mut().enumerate() {
        if !grid.is_retained(idx) {
            *c = ZERO;
        }
    }
}

/// Uniform-grid quadrature of `‖·‖_{L^p}` for raw samples.
pub fn lp_norm_samples(grid: &Grid2, samples: &[f64], p: Exponent) -> f64 {
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Infinite => scale,
        Exponent::Finite(p) => {
            if scale == 0.0 {
                return 0.0;
            }
            let sum: f64 = samples.iter().map(|v| (v.abs() / scale).powf(p)).sum();
            scale * (sum * grid.cell_area()).powf(1.0 / p)
        }
    }
}

/// `‖f‖_{L^p}` on the torus; `p = ∞` is the grid maximum of `|f|`.
pub fn lp_norm(f: &SpectralField, p: Exponent) -> Result<f64> {
    if let Exponent::Finite(v) = p {
        if !(v >= 1.0) {
            return param(format!("p must be ≥ 1, got {v}"));
        }
    }
    Ok(lp_norm_samples(f.grid(), &f.to_physical(), p))
}

/// `L^p` norm of the pointwise Euclidean magnitude of a vector (or tensor)
/// field given by its components.
pub fn lp_norm_magnitude(components: &[SpectralField], p: Exponent) -> Result<f64> {
    let Some(first) = components.first() else {
        return Ok(0.0);
    };
    let grid = first.grid().clone();
    for c in components {
        first.check_same_grid(c)?;
    }
    let mut sq = vec![0.0; grid.len()];
    for pair in components.chunks(2) {
        let (a, b) = if pair.len() == 2 {
            SpectralField::to_physical_pair(&pair[0], &pair[1])
        } else {
            (pair[0].to_physical(), vec![0.0; grid.len()])
        };
        for ((s, x), y) in sq.iter_mut().zip(&a).zip(&b) {
            *s += x * x + y * y;
        }
    }
    let mag: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
    Ok(lp_norm_samples(&grid, &mag, p))
}

/// Dealiased product: both factors are truncated, multiplied pointwise and
/// the result truncated again.
pub fn product(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    a.check_same_grid(b)?;
    let (pa, pb) = SpectralField::to_physical_pair(&dealias(a), &dealias(b));
    let prod: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    let mut out = SpectralField::from_physical(a.grid(), &prod)?;
    dealias_in_place(&mut out);
    Ok(out)
}

/// Dealiased dot product `a·b` of two vector fields.
pub fn dot_product(a: &[SpectralField; 2], b: &[SpectralField; 2]) -> Result<SpectralField> {
    let grid = a[0].grid().clone();
    let (a1, a2) = SpectralField::to_physical_pair(&dealias(&a[0]), &dealias(&a[1]));
    let (b1, b2) = SpectralField::to_physical_pair(&dealias(&b[0]), &dealias(&b[1]));
    a[0].check_same_grid(&b[0])?;
    let prod: Vec<f64> = (0..grid.len()).map(|i| a1[i] * b1[i] + a2[i] * b2[i]).collect();
    let mut out = SpectralField::from_physical(&grid, &prod)?;
    dealias_in_place(&mut out);
    Ok(out)
}

/// Dealiased scalar-times-vector product `v·s`.
pub fn scale_vector(v: &[SpectralField; 2], s: &SpectralField) -> Result<[SpectralField; 2]> {
    let grid = s.grid().clone();
    v[0].check_same_grid(s)?;
    let (v1, v2) = SpectralField::to_physical_pair(&dealias(&v[0]), &dealias(&v[1]));
    let ps = dealias(s).to_physical();
    let p1: Vec<f64> = v1.iter().zip(&ps).map(|(a, b)| a * b).collect();
    let p2: Vec<f64> = v2.iter().zip(&ps).map(|(a, b)| a * b).collect();
    let (mut o1, mut o2) = SpectralField::from_physical_pair(&grid, &p1, &p2);
    dealias_in_place(&mut o1);
    dealias_in_place(&mut o2);
    Ok([o1, o2])
}
