//! Mild solutions `θ(t) = e^{-tΛ^α}θ0 − ∫_0^t e^{-(t-s)Λ^α}∇·(uθ)(s) ds`.
//!
//! The nonlinear term is kept in divergence form: `uθ` is formed from
//! dealiased factors, truncated, and only then differentiated spectrally.
//! Time integration uses exponential weights, so the linear part is exact.

use rustfft::num_complex::Complex64;

use crate::error::{param, Result, SqgError};
use crate::littlewood_paley::{DyadicBank, Level, TimeSeriesField};
use crate::spectral::{
    dealias, dealias_in_place, divergence, dot_product, gradient, inverse_lambda, lp_norm_samples, perp_gradient,
    riesz_perp_velocity, scale_vector, Exponent, Grid2, SpectralField, SymbolOp,
};

/// Any grid value above this aborts a run.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

/// Largest admissible `dt·k_max^α`.
pub const STIFFNESS_CAP: f64 = 40.0;

/// Parameters of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    pub alpha: f64,
    pub n: usize,
    pub box_length: f64,
    pub horizon: f64,
    pub dt: f64,
    pub picard_depth: usize,
    pub dealias: bool,
    /// When false the transport term is dropped and runs are purely linear.
    pub nonlinear: bool,
}

impl SolveParams {
    pub fn new(alpha: f64, n: usize, box_length: f64, horizon: f64, dt: f64) -> Self {
        SolveParams {
            alpha,
            n,
            box_length,
            horizon,
            dt,
            picard_depth: 1,
            dealias: true,
            nonlinear: true,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.picard_depth = depth;
        self
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Number of steps `T/dt`.
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Checks ranges against `grid`, which must match `n` and `box_length`.
    pub fn validate(&self, grid: &Grid2) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return param(format!("α must lie in (0, 2], got {}", self.alpha));
        }
        if grid.n() != self.n || grid.box_length() != self.box_length {
            return Err(SqgError::GridMismatch);
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return param(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon * (1.0 + 1e-12)) {
            return param(format!("dt must lie in (0, T], got {}", self.dt));
        }
        let ratio = self.horizon / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return param(format!("T/dt = {ratio} is not an integer"));
        }
        if self.picard_depth == 0 {
            return param("Picard depth must be at least 1");
        }
        let stiff = self.dt * grid.retained_kmax().powf(self.alpha);
        if stiff > STIFFNESS_CAP {
            return param(format!(
                "dt·k_max^α = {stiff:.3} exceeds {STIFFNESS_CAP}; reduce dt or n"
            ));
        }
        Ok(())
    }

    /// Output instants `0, dt, ..., T`.
    pub fn times(&self) -> Vec<f64> {
        let steps = self.steps();
        (0..=steps)
            .map(|i| self.horizon * i as f64 / steps as f64)
            .collect()
    }
}

/// Norms recorded at each output instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub time: f64,
    pub mean: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
}

impl StepDiagnostics {
    pub fn of(time: f64, f: &SpectralField) -> Self {
        let phys = f.to_physical();
        let g = f.grid();
        StepDiagnostics {
            time,
            mean: f.mean(),
            l2: lp_norm_samples(g, &phys, Exponent::Finite(2.0)),
            l4: lp_norm_samples(g, &phys, Exponent::Finite(4.0)),
            linf: lp_norm_samples(g, &phys, Exponent::Infinite),
        }
    }
}

/// A computed solution and its per-step diagnostics.
#[derive(Debug, Clone)]
pub struct MildSolution {
    pub params: SolveParams,
    pub series: TimeSeriesField,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Sup-in-time `L²` distances between successive Picard iterates; empty
    /// for direct marches.
    pub picard_distances: Vec<f64>,
}

impl MildSolution {
    fn new(params: SolveParams, series: TimeSeriesField, picard_distances: Vec<f64>) -> Self {
        let diagnostics = series
            .times()
            .iter()
            .zip(series.fields())
            .map(|(&t, f)| StepDiagnostics::of(t, f))
            .collect();
        MildSolution {
            params,
            series,
            diagnostics,
            picard_distances,
        }
    }

    /// Besov norm of `θ(t)` at every instant.
    pub fn besov_diagnostics(&self, bank: &DyadicBank, idx: crate::BesovIndex) -> Result<Vec<f64>> {
        self.series
            .fields()
            .iter()
            .map(|f| crate::besov_norm(f, bank, idx))
            .collect()
    }
}

/// `−∇·(uθ)` with `u = ∇⊥Λ^{-1}θ`.
fn transport(theta: &SpectralField, dealias_products: bool) -> Result<SpectralField> {
    let grid = theta.grid().clone();
    let th = if dealias_products { dealias(theta) } else { theta.clone() };
    let [u1, u2] = riesz_perp_velocity(&th);
    let (p1, p2) = SpectralField::to_physical_pair(&u1, &u2);
    let pt = th.to_physical();
    let f1: Vec<f64> = p1.iter().zip(&pt).map(|(a, b)| a * b).collect();
    let f2: Vec<f64> = p2.iter().zip(&pt).map(|(a, b)| a * b).collect();
    let (mut q1, mut q2) = SpectralField::from_physical_pair(&grid, &f1, &f2);
    if dealias_products {
        dealias_in_place(&mut q1);
        dealias_in_place(&mut q2);
    }
    Ok(divergence(&[q1, q2])?.scale(-1.0))
}

/// The nonlinear right-hand side `−∇·(uθ)` used by the solver.
pub fn nonlinear_rhs(theta: &SpectralField) -> Result<SpectralField> {
    transport(theta, true)
}

fn blow_up_check(f: &SpectralField, step: usize, time: f64) -> Result<()> {
    if !f.is_finite() {
        return Err(SqgError::BlowUp {
            step,
            time,
            reason: "non-finite coefficient".into(),
        });
    }
    let bound: f64 = f.coefficients().iter().map(|c| c.norm()).sum();
    if bound > BLOW_UP_THRESHOLD {
        let max = f.to_physical().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max > BLOW_UP_THRESHOLD {
            return Err(SqgError::BlowUp {
                step,
                time,
                reason: format!("grid maximum {max:.3e} exceeds {BLOW_UP_THRESHOLD:.0e}"),
            });
        }
    }
    Ok(())
}

/// `φ1(−z) = (1 − e^{−z})/z` and `φ2(−z) = (z − 1 + e^{−z})/z²`.
fn phi_functions(z: f64) -> (f64, f64) {
    if z < 1.0 {
        let (mut p1, mut p2) = (0.0, 0.0);
        let mut term = 1.0;
        for m in 0..30 {
            // term = (−z)^m / (m+1)!
            term = if m == 0 { 1.0 } else { term * (-z) / (m as f64 + 1.0) };
            p1 += term;
            p2 += term / (m as f64 + 2.0);
        }
        (p1, p2)
    } else {
        let em1 = -(-z).exp_m1();
        (em1 / z, (z - em1) / (z * z))
    }
}

/// Exponential weights for one step of length `h`, per lattice mode.
struct Propagator {
    decay: Vec<f64>,
    /// `∫_0^h e^{-(h-s)λ} ds`.
    total: Vec<f64>,
    /// Weight of the left endpoint in the linear-interpolant rule.
    w_left: Vec<f64>,
    /// Weight of the right endpoint.
    w_right: Vec<f64>,
}

impl Propagator {
    fn new(grid: &Grid2, alpha: f64, h: f64) -> Self {
        let len = grid.len();
        let mut p = Propagator {
            decay: Vec::with_capacity(len),
            total: Vec::with_capacity(len),
            w_left: Vec::with_capacity(len),
            w_right: Vec::with_capacity(len),
        };
        for &k in grid.kmags() {
            let z = h * k.powf(alpha);
            let e = (-z).exp();
            let (phi1, phi2) = phi_functions(z);
            let (total, wr) = (h * phi1, h * phi2);
            let wl = total - wr;
            p.decay.push(e);
            p.total.push(total);
            p.w_left.push(wl);
            p.w_right.push(wr);
        }
        p
    }

    /// `e^{-hL}a + w·b` with per-mode weights `w`.
    fn combine(&self, a: &SpectralField, b: &SpectralField, weights: &[f64]) -> SpectralField {
        let coeffs = a
            .coefficients()
            .iter()
            .zip(b.coefficients())
            .enumerate()
            .map(|(i, (x, y))| x * self.decay[i] + y * weights[i])
            .collect();
        SpectralField::from_parts(a.grid(), coeffs, a.is_real() && b.is_real())
    }
}

/// One exponential time step of length `dt` starting at time `t`.
pub struct Stepper {
    params: SolveParams,
    prop: Propagator,
}

impl Stepper {
    pub fn new(grid: &Grid2, params: &SolveParams) -> Result<Self> {
        params.validate(grid)?;
        Ok(Stepper {
            params: *params,
            prop: Propagator::new(grid, params.alpha, params.dt),
        })
    }

    fn rhs(&self, theta: &SpectralField) -> Result<SpectralField> {
        if self.params.nonlinear {
            transport(theta, self.params.dealias)
        } else {
            Ok(SpectralField::zeros(theta.grid()))
        }
    }

    /// Second-order exponential Runge–Kutta step.
    pub fn step(&self, theta: &SpectralField, step: usize) -> Result<SpectralField> {
        let time = step as f64 * self.params.dt;
        if !self.params.nonlinear {
            let zero = SpectralField::zeros(theta.grid());
            let out = self.prop.combine(theta, &zero, &self.prop.total);
            blow_up_check(&out, step + 1, time + self.params.dt)?;
            return Ok(out);
        }
        let g0 = self.rhs(theta)?;
        let a = self.prop.combine(theta, &g0, &self.prop.total);
        blow_up_check(&a, step + 1, time + self.params.dt)?;
        let g1 = self.rhs(&a)?;
        let mut out = a;
        for (i, c) in out.coefficients_mut().iter_mut().enumerate() {
            *c += (g1.coefficients()[i] - g0.coefficients()[i]) * self.prop.w_right[i];
        }
        blow_up_check(&out, step + 1, time + self.params.dt)?;
        Ok(out)
    }
}

/// Advances `θ(t)` by one step of `params.dt`.
pub fn duhamel_step(theta: &SpectralField, params: &SolveParams, t: f64) -> Result<SpectralField> {
    let stepper = Stepper::new(theta.grid(), params)?;
    let step = (t / params.dt).round() as usize;
    stepper.step(theta, step)
}

/// Direct time march over `[0, T]`.
pub fn march(theta0: &SpectralField, params: &SolveParams) -> Result<MildSolution> {
    let stepper = Stepper::new(theta0.grid(), params)?;
    blow_up_check(theta0, 0, 0.0)?;
    let mut fields = Vec::with_capacity(params.steps() + 1);
    fields.push(theta0.clone());
    for step in 0..params.steps() {
        let next = stepper.step(&fields[step], step)?;
        fields.push(next);
    }
    let series = TimeSeriesField::new(params.times(), fields)?;
    Ok(MildSolution::new(*params, series, Vec::new()))
}

/// `e^{-tΛ^α}θ0` at the instants of `params`.
pub fn linear_series(theta0: &SpectralField, params: &SolveParams) -> Result<TimeSeriesField> {
    params.validate(theta0.grid())?;
    let times = params.times();
    let fields = times
        .iter()
        .map(|&t| SymbolOp::Semigroup { alpha: params.alpha, t }.apply(theta0))
        .collect();
    TimeSeriesField::new(times, fields)
}

/// `D[θ](t_n) = −∫_0^{t_n} e^{-(t_n-s)Λ^α}∇·(uθ)(s) ds` for a given
/// trajectory, with the integrand interpolated linearly between instants.
pub fn duhamel_integral(series: &TimeSeriesField, params: &SolveParams) -> Result<TimeSeriesField> {
    params.validate(series.grid())?;
    let comps = duhamel_of(series, params.alpha, |f| {
        if params.nonlinear {
            Ok(vec![transport(f, params.dealias)?])
        } else {
            Ok(vec![SpectralField::zeros(f.grid())])
        }
    })?;
    TimeSeriesField::new(series.times().to_vec(), comps.into_iter().map(|mut v| v.remove(0)).collect())
}

/// `∫_0^{t_n} e^{-(t_n-s)Λ^α} F(θ(s)) ds` for a multi-component integrand
/// `F`, returning the components at every instant.
pub fn duhamel_of<F>(series: &TimeSeriesField, alpha: f64, integrand: F) -> Result<Vec<Vec<SpectralField>>>
where
    F: Fn(&SpectralField) -> Result<Vec<SpectralField>>,
{
    if !(alpha > 0.0 && alpha <= 2.0) {
        return param(format!("α must lie in (0, 2], got {alpha}"));
    }
    let grid = series.grid().clone();
    let times = series.times();
    let mut g_prev = integrand(&series.fields()[0])?;
    let mut out = vec![vec![SpectralField::zeros(&grid); g_prev.len()]];
    if times.len() == 1 {
        return Ok(out);
    }
    let h = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
        return param("Duhamel integral needs uniformly spaced instants");
    }
    let prop = Propagator::new(&grid, alpha, h);
    for (n, f) in series.fields().iter().enumerate().skip(1) {
        let g_next = integrand(f)?;
        let mut row = Vec::with_capacity(g_next.len());
        for (c, (gp, gn)) in g_prev.iter().zip(&g_next).enumerate() {
            let prev = &out[n - 1][c];
            let coeffs: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    prev.coefficients()[i] * prop.decay[i]
                        + gp.coefficients()[i] * prop.w_left[i]
                        + gn.coefficients()[i] * prop.w_right[i]
                })
                .collect();
            let next = SpectralField::from_parts(&grid, coeffs, true);
            blow_up_check(&next, n, times[n])?;
            row.push(next);
        }
        out.push(row);
        g_prev = g_next;
    }
    Ok(out)
}

/// The solution map `Φ(θ) = e^{-tΛ^α}θ0 + D[θ]`.
pub fn solution_map(theta0: &SpectralField, series: &TimeSeriesField, params: &SolveParams) -> Result<TimeSeriesField> {
    let lin = linear_series(theta0, params)?;
    let d = duhamel_integral(series, params)?;
    let fields = lin
        .fields()
        .iter()
        .zip(d.fields())
        .map(|(a, b)| a.add(b))
        .collect::<Result<Vec<_>>>()?;
    TimeSeriesField::new(lin.times().to_vec(), fields)
}

/// `sup_t ‖a(t) − b(t)‖_{L²}`.
pub fn sup_l2_distance(a: &TimeSeriesField, b: &TimeSeriesField) -> Result<f64> {
    let d = a.difference(b)?;
    Ok(d.fields().iter().map(|f| f.l2_norm()).fold(0.0, f64::max))
}

/// Picard iteration over the whole horizon starting from the linear solution.
pub fn picard_solve(theta0: &SpectralField, params: &SolveParams) -> Result<MildSolution> {
    let mut current = linear_series(theta0, params)?;
    let mut distances = Vec::with_capacity(params.picard_depth);
    let mut growth = 0;
    for _ in 0..params.picard_depth {
        let next = solution_map(theta0, &current, params)?;
        let d = sup_l2_distance(&next, &current)?;
        if let Some(&last) = distances.last() {
            if d > last {
                growth += 1;
            } else {
                growth = 0;
            }
        }
        distances.push(d);
        if growth >= 3 {
            return Err(SqgError::NonContraction { distances });
        }
        current = next;
    }
    Ok(MildSolution::new(*params, current, distances))
}

/// `N(w, θ) = (∇⊥Λ^{-1}w)θ + (∇⊥Λ^{-1}θ)w` from dealiased products.
pub fn nonlinear_n(w: &SpectralField, theta: &SpectralField) -> Result<[SpectralField; 2]> {
    w.check_same_grid(theta)?;
    let a = scale_vector(&riesz_perp_velocity(w), theta)?;
    let b = scale_vector(&riesz_perp_velocity(theta), w)?;
    Ok([a[0].add(&b[0])?, a[1].add(&b[1])?])
}

/// Relative discrepancy between the two sides of
/// `(∇⊥Λ^{-1}f_k)·∇g_l + (∇⊥Λ^{-1}g_l)·∇f_k = ∇·((∇⊥Λ^{-1}f_k)g_l − (Λ^{-1}g_l)∇⊥f_k)`.
pub fn divergence_form_check(
    f: &SpectralField,
    g: &SpectralField,
    bank: &DyadicBank,
    k: usize,
    l: usize,
) -> Result<f64> {
    if k.abs_diff(l) > 1 {
        return param(format!("levels {k} and {l} are not adjacent"));
    }
    let fk = bank.block(f, Level::J(k))?;
    let gl = bank.block(g, Level::J(l))?;
    let (lhs, rhs) = divergence_form_sides(&fk, &gl)?;
    let scale = lhs.coefficient_norm().max(rhs.coefficient_norm());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs.sub(&rhs)?.coefficient_norm() / scale)
}

/// Both sides of the divergence-form identity for already-localized inputs.
pub fn divergence_form_sides(fk: &SpectralField, gl: &SpectralField) -> Result<(SpectralField, SpectralField)> {
    let lhs = dot_product(&riesz_perp_velocity(fk), &gradient(gl))?
        .add(&dot_product(&riesz_perp_velocity(gl), &gradient(fk))?)?;
    let first = scale_vector(&riesz_perp_velocity(fk), gl)?;
    let second = scale_vector(&perp_gradient(fk), &inverse_lambda(gl))?;
    let rhs = divergence(&[first[0].sub(&second[0])?, first[1].sub(&second[1])?])?;
    Ok((lhs, rhs))
}

/// `∇φ_j * v = φ_j * ∇·v` for a vector field `v`.
fn grad_block(v: &[SpectralField; 2], bank: &DyadicBank, j: usize) -> Result<SpectralField> {
    bank.block(&divergence(v)?, Level::J(j))
}

/// `A_j(f,g) = [∇φ_j*, ∇⊥Λ^{-1}f]g + ∇φ_j*((∇⊥Λ^{-1}g)f)`, with the bracket
/// read as `∇φ_j*((∇⊥Λ^{-1}f)g) − (∇⊥Λ^{-1}f)·∇(φ_j*g)`.
pub fn commutator_a_j(f: &SpectralField, g: &SpectralField, bank: &DyadicBank, j: usize) -> Result<SpectralField> {
    let bracket = commutator_bracket(f, g, bank, j)?;
    let tail = grad_block(&scale_vector(&riesz_perp_velocity(g), f)?, bank, j)?;
    bracket.add(&tail)
}

/// `[∇φ_j*, ∇⊥Λ^{-1}f]g`.
pub fn commutator_bracket(f: &SpectralField, g: &SpectralField, bank: &DyadicBank, j: usize) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let b = riesz_perp_velocity(f);
    let first = grad_block(&scale_vector(&b, g)?, bank, j)?;
    let gj = bank.block(g, Level::J(j))?;
    let second = dot_product(&b, &gradient(&gj))?;
    first.sub(&second)
}

/// The same combination re-associated as `∇φ_j*N(f,g) − (∇⊥Λ^{-1}f)·∇(φ_j*g)`.
pub fn commutator_a_j_expanded(
    f: &SpectralField,
    g: &SpectralField,
    bank: &DyadicBank,
    j: usize,
) -> Result<SpectralField> {
    let n = nonlinear_n(f, g)?;
    let first = grad_block(&n, bank, j)?;
    let gj = bank.block(g, Level::J(j))?;
    let second = dot_product(&riesz_perp_velocity(f), &gradient(&gj))?;
    first.sub(&second)
}
