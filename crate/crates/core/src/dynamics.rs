//! The semi-discrete (method-of-lines) system
//!
//! ```text
//! i u' + Δh u = β |u|² u + α g(v) u
//!   v' + D³ v + λ D0 f(v) = γ D0 (g'(v) |u|²)
//! ```
//!
//! on the constrained grid space, a classical RK4 reference integrator, and
//! the conserved-quantity diagnostics (mass, cross invariant, discrete
//! energy) plus the a-priori quantities built from the initial data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    check_same_grid, d_cubed, d_zero, forward_diff_norm, inner, laplacian_h, norm2,
    norm_inf, norm_p, ComplexGridFn, Grid, GridFn, Nodal, RealGridFn,
};
use crate::truncation::Truncation;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Explicit RK4 step budget is `RK4_STABILITY * min(h², h³)`.
pub const RK4_STABILITY: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Weight of the quasilinear flux: 1 for `∂x(v²)`, ½ for `v ∂x v`.
    pub lambda: f64,
    pub truncation: Truncation,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            lambda: 1.0,
            truncation: Truncation::Off,
        }
    }

    /// Coefficients for which the sech/sech² traveling waves are exact:
    /// `β = −1`, `γ = α/2`, `λ = ½`.
    pub fn traveling_wave_system(alpha: f64) -> Self {
        Self {
            alpha,
            beta: -1.0,
            gamma: 0.5 * alpha,
            lambda: 0.5,
            truncation: Truncation::Off,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    /// Whether `αγ > 0`, the sign condition under which the energy controls
    /// the H¹ norm. Reported, never enforced.
    pub fn hypothesis_holds(&self) -> bool {
        self.alpha * self.gamma > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
        ] {
            if !x.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: ComplexGridFn,
    pub v: RealGridFn,
}

impl State {
    pub fn new(t: f64, u: ComplexGridFn, v: RealGridFn) -> Result<Self> {
        check_same_grid(u.grid(), v.grid())?;
        Ok(Self { t, u, v })
    }

    pub fn rest(grid: Grid) -> Self {
        Self {
            t: 0.0,
            u: GridFn::zeros(grid),
            v: GridFn::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.u.is_finite() && self.v.is_finite()
    }

    /// `max(‖Δu‖_∞, ‖Δv‖_∞)` over all nodes.
    pub fn max_abs_diff(&self, other: &State) -> Result<f64> {
        Ok(self.u.max_abs_diff(&other.u)?.max(self.v.max_abs_diff(&other.v)?))
    }
}

/// Sampled time series of the monitored quantities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDiagnostics {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub q_invariant: Vec<f64>,
    pub energy: Vec<f64>,
    pub v_sup: Vec<f64>,
    /// Inner iterations of the step that produced each sample (0 at `t = 0`
    /// and for explicit integrators).
    pub inner_iters_u: Vec<usize>,
    pub inner_iters_v: Vec<usize>,
    pub iterations: IterationStats,
}

/// Per-step inner iteration counts, accumulated over a whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IterationStats {
    pub steps: usize,
    pub max_u: usize,
    pub max_v: usize,
    pub total_u: usize,
    pub total_v: usize,
}

impl IterationStats {
    pub fn record(&mut self, iters_u: usize, iters_v: usize) {
        self.steps += 1;
        self.max_u = self.max_u.max(iters_u);
        self.max_v = self.max_v.max(iters_v);
        self.total_u += iters_u;
        self.total_v += iters_v;
    }

    pub fn max(&self) -> usize {
        self.max_u.max(self.max_v)
    }

    pub fn mean_u(&self) -> f64 {
        self.total_u as f64 / self.steps.max(1) as f64
    }

    pub fn mean_v(&self) -> f64 {
        self.total_v as f64 / self.steps.max(1) as f64
    }
}

impl RunDiagnostics {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, state: &State, params: &ModelParams, iters_u: usize, iters_v: usize) {
        self.times.push(state.t);
        self.mass.push(mass(state));
        self.q_invariant.push(q_invariant(state, params));
        self.energy.push(energy(state, params));
        self.v_sup.push(norm_inf(&state.v));
        self.inner_iters_u.push(iters_u);
        self.inner_iters_v.push(iters_v);
    }

    /// `max |q(t) − q(0)| / |q(0)|` for one of the sampled series.
    pub fn relative_drift(series: &[f64]) -> f64 {
        let Some(&first) = series.first() else {
            return 0.0;
        };
        let worst = series.iter().map(|x| (x - first).abs()).fold(0.0, f64::max);
        if first == 0.0 {
            worst
        } else {
            worst / first.abs()
        }
    }

    pub fn max_v_sup(&self) -> f64 {
        self.v_sup.iter().copied().fold(0.0, f64::max)
    }
}

/// A run that stopped early; carries everything sampled before the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("run failed at step {step} (t = {t}): {error}")]
pub struct RunFailure {
    #[source]
    pub error: Error,
    pub step: usize,
    pub t: f64,
    pub diagnostics: RunDiagnostics,
}

/// Time derivatives `(u', v')` of the semi-discrete system.
pub fn rhs(state: &State, params: &ModelParams) -> (ComplexGridFn, RealGridFn) {
    let grid = *state.grid();
    let (u, v) = (&state.u, &state.v);
    let tr = &params.truncation;

    let lap = laplacian_h(u);
    let du = GridFn::from_fn(grid, |j, _| {
        let uj = u.get(j);
        let potential = params.beta * uj.norm_sqr() + params.alpha * tr.g(v.get(j));
        I * (lap.get(j) - uj * potential)
    });

    let flux = v.map(|x| tr.f(x));
    let forcing = GridFn::from_fn(grid, |j, _| tr.g_prime(v.get(j)) * u.get(j).norm_sqr());
    let d3 = d_cubed(v);
    let dflux = d_zero(&flux);
    let dforcing = d_zero(&forcing);
    let dv = GridFn::from_fn(grid, |j, _| {
        -d3.get(j) - params.lambda * dflux.get(j) + params.gamma * dforcing.get(j)
    });
    (du, dv)
}

pub fn rk4_budget(grid: &Grid) -> f64 {
    let h = grid.h();
    RK4_STABILITY * (h * h).min(h * h * h)
}

fn axpy_state(base: &State, dt: f64, k: &(ComplexGridFn, RealGridFn)) -> State {
    let mut u = base.u.clone();
    u.update(|vals| {
        for (x, d) in vals.iter_mut().zip(k.0.values()) {
            *x += d * dt;
        }
    });
    let mut v = base.v.clone();
    v.update(|vals| {
        for (x, d) in vals.iter_mut().zip(k.1.values()) {
            *x += d * dt;
        }
    });
    State { t: base.t + dt, u, v }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(state: &State, params: &ModelParams, dt: f64) -> Result<State> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let budget = rk4_budget(state.grid());
    if dt > budget {
        return Err(Error::StabilityBudget { dt, budget });
    }
    let k1 = rhs(state, params);
    let k2 = rhs(&axpy_state(state, 0.5 * dt, &k1), params);
    let k3 = rhs(&axpy_state(state, 0.5 * dt, &k2), params);
    let k4 = rhs(&axpy_state(state, dt, &k3), params);

    let w = dt / 6.0;
    let mut u = state.u.clone();
    u.update(|vals| {
        for (j, x) in vals.iter_mut().enumerate() {
            *x += (k1.0.get(j) + (k2.0.get(j) + k3.0.get(j)) * 2.0 + k4.0.get(j)) * w;
        }
    });
    let mut v = state.v.clone();
    v.update(|vals| {
        for (j, x) in vals.iter_mut().enumerate() {
            *x += (k1.1.get(j) + 2.0 * (k2.1.get(j) + k3.1.get(j)) + k4.1.get(j)) * w;
        }
    });
    let next = State {
        t: state.t + dt,
        u,
        v,
    };
    if !next.is_finite() {
        return Err(Error::BlowUp { t: state.t, dt });
    }
    Ok(next)
}

/// `‖u‖₂`.
pub fn mass(state: &State) -> f64 {
    norm2(&state.u)
}

/// Discrete cross invariant `α ‖v‖₂² + 2γ Im Σ h u_j conj((D0 u)_j)`.
pub fn q_invariant(state: &State, params: &ModelParams) -> f64 {
    let du = d_zero(&state.u);
    let cross = inner(&state.u, &du).expect("same grid").im;
    params.alpha * norm2(&state.v).powi(2) + 2.0 * params.gamma * cross
}

/// Discrete energy
/// `γ‖D+u‖² + (α/2)‖D+v‖² + (βγ/2)‖u‖₄⁴ + αγ Σ h g(v)|u|² − αλ Σ h F(v)`.
///
/// `λ` multiplies the potential term so the functional stays conserved
/// when the flux carries a weight.
pub fn energy(state: &State, params: &ModelParams) -> f64 {
    let grid = state.grid();
    let h = grid.h();
    let tr = &params.truncation;
    let (u, v) = (&state.u, &state.v);
    let (alpha, beta, gamma) = (params.alpha, params.beta, params.gamma);

    let du = forward_diff_norm(u, 2.0).expect("p = 2").powi(2);
    let dv = forward_diff_norm(v, 2.0).expect("p = 2").powi(2);
    let quartic: f64 = grid.active().map(|j| u.get(j).norm_sqr().powi(2)).sum::<f64>() * h;
    // ghost entries vanish, so the 1..=J sums reduce to the active range
    let coupling: f64 = grid.active().map(|j| tr.g(v.get(j)) * u.get(j).norm_sqr()).sum::<f64>() * h;
    let potential: f64 = grid.active().map(|j| tr.f_integral(v.get(j))).sum::<f64>() * h;

    gamma * du + 0.5 * alpha * dv + 0.5 * beta * gamma * quartic + alpha * gamma * coupling
        - alpha * params.lambda * potential
}

/// Initial-data bounds that do not depend on the truncation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriQuantities {
    pub e0: f64,
    pub m0: f64,
    pub q0: f64,
}

pub fn apriori_quantities(u0: &ComplexGridFn, v0: &RealGridFn, params: &ModelParams) -> AprioriQuantities {
    let (a, b, g) = (params.alpha.abs(), params.beta.abs(), params.gamma.abs());
    let du = forward_diff_norm(u0, 2.0).expect("p = 2");
    let dv = forward_diff_norm(v0, 2.0).expect("p = 2");
    let u4 = norm_p(u0, 4.0).expect("p = 4");
    let v3 = norm_p(v0, 3.0).expect("p = 3");
    let v2 = norm2(v0);
    let e0 = g * du * du + 0.5 * a * dv * dv + a * g * v2 * u4 * u4 + a / 3.0 * v3.powi(3)
        + 0.5 * b * g * u4.powi(4);
    let state = State {
        t: 0.0,
        u: u0.clone(),
        v: v0.clone(),
    };
    AprioriQuantities {
        e0,
        m0: norm2(u0),
        q0: q_invariant(&state, params),
    }
}

/// Number of steps of size `dt` needed to first reach `horizon`.
pub(crate) fn step_count(horizon: f64, dt: f64) -> usize {
    let ratio = horizon / dt;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Drives [`rk4_step`] to the first time `≥ horizon`, sampling diagnostics
/// at `t = 0`, every `sample_every` steps, and at the final time.
pub fn integrate_semidiscrete(
    initial: &State,
    params: &ModelParams,
    dt: f64,
    horizon: f64,
    sample_every: usize,
) -> std::result::Result<(State, RunDiagnostics), RunFailure> {
    let fail = |error, step, t, diagnostics| RunFailure {
        error,
        step,
        t,
        diagnostics,
    };
    let mut diag = RunDiagnostics::default();
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(fail(Error::invalid("T", "must be positive"), 0, initial.t, diag));
    }
    if sample_every == 0 {
        return Err(fail(Error::invalid("sample_every", "must be >= 1"), 0, initial.t, diag));
    }
    diag.push(initial, params, 0, 0);
    let steps = step_count(horizon, dt);
    let t0 = initial.t;
    let mut state = initial.clone();
    for n in 1..=steps {
        match rk4_step(&state, params, dt) {
            Ok(mut next) => {
                next.t = t0 + n as f64 * dt;
                state = next;
            }
            Err(e) => return Err(fail(e, n, state.t, diag)),
        }
        diag.iterations.record(0, 0);
        if n % sample_every == 0 || n == steps {
            diag.push(&state, params, 0, 0);
        }
    }
    Ok((state, diag))
}
