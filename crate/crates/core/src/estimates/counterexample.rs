//! Bump constructions showing that single products of negative-regularity
//! data are ill-defined while the symmetrized nonlinearity is not.
//!
//! Data are sums of radial bumps `χ` (radius 1/10) centred at `±2^n e₁`
//! with weights `c_n = 2^{-sn} n^{-2}`. Pairings are double frequency
//! integrals over products of bump supports, evaluated by a tensor midpoint
//! rule refined until successive estimates agree.

use rustfft::num_complex::Complex64;

use crate::error::{param, Result, SqgError};
use crate::littlewood_paley::{annulus, BumpProfile};
use crate::spectral::Grid2;

/// Support radius of the bump `χ`.
pub const BUMP_RADIUS: f64 = 0.1;

/// Radius below which `χ ≡ 1`.
pub const BUMP_PLATEAU: f64 = 0.05;

const BUMP: BumpProfile = BumpProfile {
    inner: BUMP_PLATEAU,
    outer: BUMP_RADIUS,
};

const DYADIC: BumpProfile = BumpProfile {
    inner: 0.75,
    outer: 4.0 / 3.0,
};

/// Largest `N` accepted in quadrature mode.
pub const QUADRATURE_MAX_TERMS: usize = 1000;

/// The bump `χ(|ξ|)`.
pub fn bump(r: f64) -> f64 {
    BUMP.eval(r)
}

/// Where the bump data live.
#[derive(Debug, Clone, PartialEq)]
pub enum CounterexampleMode {
    /// Exact frequency-domain integrals; no grid.
    Quadrature,
    /// Lattice Riemann sums on a periodic grid (small `N` only).
    Grid(Grid2),
}

/// Sign pattern of the bump centres.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpLayout {
    /// Bumps at `+2^n e₁`.
    Positive,
    /// Bumps at `-2^n e₁`.
    Negative,
    /// Bumps at both `±2^n e₁`.
    Symmetric,
}

/// Which of the two constructions to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// `f_N` at `+2^n e₁`, `g_N` at `-2^n e₁`.
    Pairing,
    /// `f_N = g_N` with bumps at both signs.
    Product,
}

/// One of the two bump sums.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpPair {
    pub s: f64,
    pub n_terms: usize,
    pub layout: BumpLayout,
    pub mode: CounterexampleMode,
}

/// `c_n = 2^{-sn} n^{-2}`.
pub fn coefficient(s: f64, n: usize) -> f64 {
    2f64.powf(-s * n as f64) / (n as f64 * n as f64)
}

impl BumpPair {
    pub fn new(s: f64, n_terms: usize, layout: BumpLayout, mode: CounterexampleMode) -> Result<Self> {
        if !(s < 0.0) || !s.is_finite() {
            return param(format!("counterexamples need s < 0, got {s}"));
        }
        match &mode {
            CounterexampleMode::Quadrature => {
                let top = coefficient(s, n_terms.max(1)).powi(2) * 2f64.powi(n_terms as i32);
                if n_terms > QUADRATURE_MAX_TERMS || !top.is_finite() {
                    return Err(SqgError::FrequencyBudget(format!(
                        "N = {n_terms} overflows the quadrature weights (limit {QUADRATURE_MAX_TERMS})"
                    )));
                }
            }
            CounterexampleMode::Grid(grid) => {
                if grid.dk() > BUMP_RADIUS / 4.0 {
                    return Err(SqgError::FrequencyBudget(format!(
                        "lattice spacing {} does not resolve bumps of radius {BUMP_RADIUS}; use a box of length ≥ {:.1}",
                        grid.dk(),
                        8.0 * std::f64::consts::PI / BUMP_RADIUS
                    )));
                }
                let reach = 2f64.powi(n_terms as i32) + BUMP_RADIUS;
                if reach > grid.dealias_radius() {
                    return Err(SqgError::FrequencyBudget(format!(
                        "bump at 2^{n_terms} needs |k| up to {reach:.3} but the grid resolves {:.3}",
                        grid.dealias_radius()
                    )));
                }
            }
        }
        Ok(BumpPair {
            s,
            n_terms,
            layout,
            mode,
        })
    }

    /// `(centre, weight)` of every bump.
    pub fn bumps(&self) -> Vec<([f64; 2], f64)> {
        let mut out = Vec::new();
        for n in 1..=self.n_terms {
            let c = coefficient(self.s, n);
            let x = 2f64.powi(n as i32);
            if matches!(self.layout, BumpLayout::Positive | BumpLayout::Symmetric) {
                out.push(([x, 0.0], c));
            }
            if matches!(self.layout, BumpLayout::Negative | BumpLayout::Symmetric) {
                out.push(([-x, 0.0], c));
            }
        }
        out
    }

    /// The Fourier transform at `ξ`.
    pub fn fourier(&self, xi: [f64; 2]) -> f64 {
        self.bumps()
            .iter()
            .map(|(c, w)| w * bump(((xi[0] - c[0]).powi(2) + (xi[1] - c[1]).powi(2)).sqrt()))
            .sum()
    }

    /// `2^{sj}(c_{j-1} + c_j)` for `j = 1..=N+1`: each bump touches the two
    /// levels `n` and `n+1`, so these bound `2^{sj}‖φ_j*f_N‖_{L^p}` in units of
    /// `‖F^{-1}χ‖_{L^p}` (times the number of signs).
    pub fn block_amplitudes(&self) -> Vec<f64> {
        let c = |n: usize| {
            if n == 0 || n > self.n_terms {
                0.0
            } else {
                coefficient(self.s, n)
            }
        };
        let signs = if self.layout == BumpLayout::Symmetric { 2.0 } else { 1.0 };
        (1..=self.n_terms + 1)
            .map(|j| signs * 2f64.powf(self.s * j as f64) * (c(j - 1) + c(j)))
            .collect()
    }

    /// Closed-form Besov bound `‖{block amplitudes}‖_{ℓ^q}`.
    pub fn besov_norm_units(&self, q: crate::Exponent) -> f64 {
        q.sequence_norm(self.block_amplitudes())
    }
}

/// Dyadic levels whose annulus meets the bump centred at distance `2^n`.
pub fn active_levels(n: usize) -> Vec<usize> {
    let r = 2f64.powi(n as i32);
    (1..=n + 3)
        .filter(|&j| {
            let s = 2f64.powi(j as i32 - 1);
            let (lo, hi) = (DYADIC.inner * s, 2.0 * DYADIC.outer * s);
            r + BUMP_RADIUS > lo && r - BUMP_RADIUS < hi
        })
        .collect()
}

/// Builds `(f_N, g_N)` for the requested construction.
pub fn build_counterexample_pair(
    s: f64,
    n_terms: usize,
    construction: Construction,
    mode: CounterexampleMode,
) -> Result<(BumpPair, BumpPair)> {
    let (lf, lg) = match construction {
        Construction::Pairing => (BumpLayout::Positive, BumpLayout::Negative),
        Construction::Product => (BumpLayout::Symmetric, BumpLayout::Symmetric),
    };
    Ok((
        BumpPair::new(s, n_terms, lf, mode.clone())?,
        BumpPair::new(s, n_terms, lg, mode)?,
    ))
}

/// Which pairing against the test function `φ = F^{-1}χ(-·)` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingKind {
    /// `Σ_{|k-l|≤1} ⟨(∂₁Λ^{-1}f_k) g_l, φ⟩ / i`.
    Single,
    /// `Σ_{|k-l|≤1} ⟨(∂₁Λ^{-1}f_k) g_l + (∂₁Λ^{-1}g_l) f_k, φ⟩ / i`.
    Symmetrized,
}

/// Midpoint lattice on `[-r, r]²` with `m` points per axis.
struct Lattice {
    m: usize,
    h: f64,
}

impl Lattice {
    fn new(m: usize) -> Self {
        Lattice {
            m,
            h: 2.0 * BUMP_RADIUS / m as f64,
        }
    }

    fn coord(&self, i: usize) -> f64 {
        -BUMP_RADIUS + (i as f64 + 0.5) * self.h
    }

    /// Samples `f(a)` at the `m²` nodes.
    fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m * self.m);
        for i2 in 0..self.m {
            for i1 in 0..self.m {
                out.push(f(self.coord(i1), self.coord(i2)));
            }
        }
        out
    }

    /// Samples `X(c)` at the `(2m-1)²` sums `a + b` of two nodes.
    fn sample_sums(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let w = 2 * self.m - 1;
        let c = |s: usize| -2.0 * BUMP_RADIUS + (s as f64 + 1.0) * self.h;
        let mut out = Vec::with_capacity(w * w);
        for s2 in 0..w {
            for s1 in 0..w {
                out.push(f(c(s1), c(s2)));
            }
        }
        out
    }

    /// `C(a) = Σ_b B(b) X(a+b)`.
    fn correlate(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let w = 2 * m - 1;
        let mut out = vec![0.0; m * m];
        for j2 in 0..m {
            for j1 in 0..m {
                let bv = b[j2 * m + j1];
                if bv == 0.0 {
                    continue;
                }
                for i2 in 0..m {
                    let xrow = &x[(i2 + j2) * w + j1..(i2 + j2) * w + j1 + m];
                    let orow = &mut out[i2 * m..(i2 + 1) * m];
                    for (o, xv) in orow.iter_mut().zip(xrow) {
                        *o += bv * xv;
                    }
                }
            }
        }
        out
    }
}

/// A bilinear integral `Σ_{ia,ib} w[ia][ib] ∫∫ A_ia(a) B_ib(b) X(a+b) da db`
/// over `a, b ∈ [-r, r]²`.
struct SeparableIntegral<'a> {
    a: Vec<Box<dyn Fn(f64, f64) -> f64 + 'a>>,
    b: Vec<Box<dyn Fn(f64, f64) -> f64 + 'a>>,
    weights: Vec<Vec<f64>>,
    coupling: Box<dyn Fn(f64, f64) -> f64 + 'a>,
}

impl SeparableIntegral<'_> {
    /// Midpoint value and an upper bound on the integral of `|integrand|`.
    fn evaluate(&self, m: usize) -> (f64, f64) {
        let lat = Lattice::new(m);
        let x = lat.sample_sums(&self.coupling);
        let xmax = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let a: Vec<Vec<f64>> = self.a.iter().map(|f| lat.sample(f)).collect();
        let mut value = 0.0;
        let mut scale = 0.0;
        let cell = lat.h.powi(4);
        for (ib, bf) in self.b.iter().enumerate() {
            if self.weights.iter().all(|row| row[ib] == 0.0) {
                continue;
            }
            let b = lat.sample(bf);
            let b1: f64 = b.iter().map(|v| v.abs()).sum();
            if b1 == 0.0 {
                continue;
            }
            let c = lat.correlate(&b, &x);
            for (ia, av) in a.iter().enumerate() {
                let w = self.weights[ia][ib];
                if w == 0.0 {
                    continue;
                }
                let dot: f64 = av.iter().zip(&c).map(|(p, q)| p * q).sum();
                value += w * dot * cell;
                scale += w.abs() * av.iter().map(|v| v.abs()).sum::<f64>() * b1 * xmax * cell;
            }
        }
        (value, scale)
    }
}

const START_POINTS: usize = 16;
const MAX_POINTS: usize = 128;
const TARGET_TOLERANCE: f64 = 1e-10;
const FAILURE_TOLERANCE: f64 = 1e-2;

/// Refines the midpoint rule until successive estimates agree.
fn refine(integral: &SeparableIntegral) -> Result<f64> {
    let (mut prev, _) = integral.evaluate(START_POINTS);
    let mut m = START_POINTS;
    let mut estimate;
    loop {
        m *= 2;
        let (value, scale) = integral.evaluate(m);
        let reference = value.abs().max(1e-6 * scale);
        estimate = if reference > 0.0 {
            (value - prev).abs() / 3.0 / reference
        } else {
            0.0
        };
        if estimate <= TARGET_TOLERANCE || m >= MAX_POINTS {
            if estimate > FAILURE_TOLERANCE {
                return Err(SqgError::QuadratureNotConverged { estimate, points: m });
            }
            return Ok(value);
        }
        prev = value;
    }
}

/// Levels whose annulus can be non-zero within the bump around `centre`.
fn candidate_levels(centre: [f64; 2]) -> Vec<usize> {
    let r = (centre[0] * centre[0] + centre[1] * centre[1]).sqrt();
    let top = (r + BUMP_RADIUS).log2().ceil().max(1.0) as usize + 2;
    (1..=top)
        .filter(|&j| {
            let s = 2f64.powi(j as i32 - 1);
            r + BUMP_RADIUS > DYADIC.inner * s && r - BUMP_RADIUS < 2.0 * DYADIC.outer * s
        })
        .collect()
}

fn norm2(x: f64, y: f64) -> f64 {
    (x * x + y * y).sqrt()
}

/// Contribution of one pair of bump centres `(F, G)` to a pairing.
fn pairing_piece(fc: [f64; 2], gc: [f64; 2], kind: PairingKind) -> Result<f64> {
    let kf = candidate_levels(fc);
    let kg = candidate_levels(gc);
    let mut a: Vec<Box<dyn Fn(f64, f64) -> f64>> = Vec::new();
    let mut b: Vec<Box<dyn Fn(f64, f64) -> f64>> = Vec::new();
    for &k in &kf {
        a.push(Box::new(move |x, y| {
            let (z1, z2) = (fc[0] + x, fc[1] + y);
            let r = norm2(z1, z2);
            z1 / r * annulus(&DYADIC, k, r) * bump(norm2(x, y))
        }));
    }
    for &l in &kg {
        b.push(Box::new(move |x, y| {
            let r = norm2(gc[0] + x, gc[1] + y);
            annulus(&DYADIC, l, r) * bump(norm2(x, y))
        }));
    }
    let adjacent = |k: usize, l: usize| if k.abs_diff(l) <= 1 { 1.0 } else { 0.0 };
    let mut weights: Vec<Vec<f64>> = kf
        .iter()
        .map(|&k| {
            let mut row: Vec<f64> = kg.iter().map(|&l| adjacent(k, l)).collect();
            if kind == PairingKind::Symmetrized {
                row.extend(kg.iter().map(|_| 0.0));
            }
            row
        })
        .collect();
    if kind == PairingKind::Symmetrized {
        for &k in &kf {
            a.push(Box::new(move |x, y| {
                let r = norm2(fc[0] + x, fc[1] + y);
                annulus(&DYADIC, k, r) * bump(norm2(x, y))
            }));
            let mut row: Vec<f64> = kg.iter().map(|_| 0.0).collect();
            row.extend(kg.iter().map(|&l| adjacent(k, l)));
            weights.push(row);
        }
        for &l in &kg {
            b.push(Box::new(move |x, y| {
                let (e1, e2) = (gc[0] + x, gc[1] + y);
                let r = norm2(e1, e2);
                e1 / r * annulus(&DYADIC, l, r) * bump(norm2(x, y))
            }));
        }
    }
    let shift = [fc[0] + gc[0], fc[1] + gc[1]];
    let integral = SeparableIntegral {
        a,
        b,
        weights,
        coupling: Box::new(move |x, y| bump(norm2(shift[0] + x, shift[1] + y))),
    };
    refine(&integral)
}

/// Bump pairs whose frequency sum can reach the support of `coupling_radius`.
fn interacting(f: &BumpPair, g: &BumpPair, coupling_radius: f64) -> Vec<(usize, usize, [f64; 2], [f64; 2], f64)> {
    let mut out = Vec::new();
    for (i, (fc, fw)) in f.bumps().into_iter().enumerate() {
        for (j, (gc, gw)) in g.bumps().into_iter().enumerate() {
            let d = norm2(fc[0] + gc[0], fc[1] + gc[1]);
            if d < coupling_radius + 2.0 * BUMP_RADIUS {
                out.push((i, j, fc, gc, fw * gw));
            }
        }
    }
    out
}

fn order_of(centre: [f64; 2]) -> usize {
    norm2(centre[0], centre[1]).log2().round() as usize
}

/// Pairing value for `N = 1, ..., n_terms`, each one a sum over the
/// interacting bump pairs of order at most `N`.
pub fn pairing_series(f: &BumpPair, g: &BumpPair, kind: PairingKind) -> Result<Vec<f64>> {
    let n = f.n_terms.max(g.n_terms);
    let mut per_order = vec![0.0; n + 1];
    for (_, _, fc, gc, w) in interacting(f, g, BUMP_RADIUS) {
        let order = order_of(fc).max(order_of(gc));
        per_order[order] += w * pairing_piece(fc, gc, kind)?;
    }
    let mut acc = 0.0;
    Ok(per_order[1..]
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect())
}

/// `Σ_{|k-l|≤1}∫∫ (ζ₁/|ζ|) φ̂_k(ζ) f̂_N(ζ) φ̂_l(η) ĝ_N(η) χ(ζ+η) dζ dη`
/// (and its symmetrized counterpart), i.e. the pairing with
/// `φ = F^{-1}χ(-·)` divided by `i`.
pub fn pairing_quadrature(f: &BumpPair, g: &BumpPair, kind: PairingKind) -> Result<f64> {
    if f.n_terms == 0 || g.n_terms == 0 {
        return Ok(0.0);
    }
    Ok(*pairing_series(f, g, kind)?.last().unwrap_or(&0.0))
}

/// The same pairing as a lattice Riemann sum: products are formed on the
/// grid and tested against `χ`. Both inputs must be in grid mode on the
/// same grid.
pub fn pairing_grid(f: &BumpPair, g: &BumpPair, kind: PairingKind) -> Result<f64> {
    let grid = match (&f.mode, &g.mode) {
        (CounterexampleMode::Grid(a), CounterexampleMode::Grid(b)) if a == b => a.clone(),
        _ => return param("grid pairing needs both bump sums on the same grid"),
    };
    if f.n_terms == 0 || g.n_terms == 0 {
        return Ok(0.0);
    }
    let len = grid.len();
    let top = f.n_terms.max(g.n_terms) + 2;
    let fhat: Vec<f64> = (0..len)
        .map(|i| {
            let (k1, k2) = grid.wavevector(i);
            f.fourier([k1, k2])
        })
        .collect();
    let ghat: Vec<f64> = (0..len)
        .map(|i| {
            let (k1, k2) = grid.wavevector(i);
            g.fourier([k1, k2])
        })
        .collect();
    let riesz1 = |i: usize| {
        let (k1, _) = grid.wavevector(i);
        let r = grid.kmag(i);
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k1 / r)
        }
    };
    let level = |data: &[f64], k: usize, with_riesz: bool| -> Vec<Complex64> {
        let mut out: Vec<Complex64> = (0..len)
            .map(|i| {
                let v = Complex64::new(data[i] * annulus(&DYADIC, k, grid.kmag(i)), 0.0);
                if with_riesz {
                    v * riesz1(i)
                } else {
                    v
                }
            })
            .collect();
        grid.inverse(&mut out);
        out
    };
    let neighbourhood = |data: &[f64], k: usize, with_riesz: bool| -> Vec<Complex64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for l in k.saturating_sub(1).max(1)..=k + 1 {
            for (a, v) in acc.iter_mut().zip(level(data, l, with_riesz)) {
                *a += v;
            }
        }
        acc
    };
    let mut product = vec![Complex64::new(0.0, 0.0); len];
    for k in 1..=top {
        let fk = level(&fhat, k, true);
        let gk = neighbourhood(&ghat, k, false);
        for ((p, a), b) in product.iter_mut().zip(&fk).zip(&gk) {
            *p += a * b;
        }
        if kind == PairingKind::Symmetrized {
            let fk = level(&fhat, k, false);
            let gk = neighbourhood(&ghat, k, true);
            for ((p, a), b) in product.iter_mut().zip(&fk).zip(&gk) {
                *p += a * b;
            }
        }
    }
    grid.forward(&mut product);
    let dk = grid.dk();
    let total: Complex64 = product
        .iter()
        .enumerate()
        .map(|(i, c)| c * bump(grid.kmag(i)))
        .sum::<Complex64>()
        * dk.powi(4);
    Ok(total.im)
}

/// `Σ_{n=1}^{N} 2^{rate·n} n^{-4}`.
pub fn partial_sum(rate: f64, n_terms: usize) -> f64 {
    (1..=n_terms)
        .map(|n| 2f64.powf(rate * n as f64) / (n as f64).powi(4))
        .sum()
}

/// Low-frequency lower bound and its quadrature for the product
/// `(Λ^{-1}f_N)g_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductNormValue {
    /// `Σ_{n=1}^{N} 2^{(-2s-1)n} n^{-4}`.
    pub lower_bound: f64,
    /// `∫ψ̂(ξ)∫ |ξ-η|^{-1} f̂_N(ξ-η) ĝ_N(η) dη dξ`.
    pub quadrature: f64,
}

/// Evaluates the lower-bound series and its quadrature for the symmetric
/// bump data with `N` terms.
pub fn product_norm_lower_bound(s: f64, n_terms: usize) -> Result<ProductNormValue> {
    let lower_bound = partial_sum(-2.0 * s - 1.0, n_terms);
    if n_terms == 0 {
        return Ok(ProductNormValue {
            lower_bound,
            quadrature: 0.0,
        });
    }
    let (f, g) = build_counterexample_pair(s, n_terms, Construction::Product, CounterexampleMode::Quadrature)?;
    let mut quadrature = 0.0;
    for (_, _, fc, gc, w) in interacting(&f, &g, DYADIC.outer) {
        let shift = [fc[0] + gc[0], fc[1] + gc[1]];
        let integral = SeparableIntegral {
            a: vec![Box::new(move |x, y| bump(norm2(x, y)) / norm2(fc[0] + x, fc[1] + y))],
            b: vec![Box::new(|x, y| bump(norm2(x, y)))],
            weights: vec![vec![1.0]],
            coupling: Box::new(move |x, y| DYADIC.eval(norm2(shift[0] + x, shift[1] + y))),
        };
        quadrature += w * refine(&integral)?;
    }
    Ok(ProductNormValue { lower_bound, quadrature })
}
