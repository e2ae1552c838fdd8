//! Fully discrete time stepper.
//!
//! Per step of size `τ`:
//!
//! * Schrödinger part: Crank–Nicolson in `u^{n+1/2} = (u^{n+1} + u^n)/2`,
//!   with the potential `β|u^{n+1/2}|² + α g(v^n)` frozen at the previous
//!   inner iterate. Every inner iterate is a complex tridiagonal solve.
//! * KdV part: implicit Euler, forcing built from `|u^n|²`, solved by
//!   Newton's method with the analytic pentadiagonal Jacobian.
//!
//! Both inner loops start from the previous time level and stop when the
//! discrete L² norm of the update falls below `tol`.

use num_complex::Complex64;

use crate::dynamics::{step_count, ModelParams, RunDiagnostics, RunFailure, State};
use crate::error::{Error, Result};
use crate::grid::{d_cubed, d_zero, laplacian_h, ComplexGridFn, GridFn, Nodal, RealGridFn};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative pivot threshold shared by both banded eliminations.
const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub horizon: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_ITER: usize = 50;

    pub fn new(tau: f64, horizon: f64) -> Self {
        Self {
            tau,
            horizon,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::invalid("tau", format!("must be positive, got {}", self.tau)));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("T", format!("must be positive, got {}", self.horizon)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Banded linear algebra

/// Complex tridiagonal matrix. `lower[i] = A[i][i-1]` (`lower[0]` unused),
/// `upper[i] = A[i][i+1]` (`upper[n-1]` unused).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub lower: Vec<Complex64>,
    pub diag: Vec<Complex64>,
    pub upper: Vec<Complex64>,
}

impl Tridiag {
    pub fn new(lower: Vec<Complex64>, diag: Vec<Complex64>, upper: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::Dimension(format!(
                "tridiagonal bands of lengths {}/{}/{}",
                lower.len(),
                n,
                upper.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match j as isize - i as isize {
            -1 => self.lower[i],
            0 => self.diag[i],
            1 => self.upper[i],
            _ => Complex64::new(0.0, 0.0),
        }
    }
}

/// Thomas algorithm without pivoting.
pub fn solve_tridiag(system: &Tridiag, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = system.len();
    if rhs.len() != n {
        return Err(Error::Dimension(format!("rhs of length {} for a {n}x{n} system", rhs.len())));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (a, b, c) = (&system.lower, &system.diag, &system.upper);
    let row_scale = |i: usize| {
        let mut s = b[i].norm();
        if i > 0 {
            s += a[i].norm();
        }
        if i + 1 < n {
            s += c[i].norm();
        }
        s
    };

    let mut c_prime = vec![Complex64::new(0.0, 0.0); n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut pivot = b[0];
    if pivot.norm() <= PIVOT_TOL * row_scale(0) {
        return Err(Error::Singular { row: 0, pivot: pivot.norm() });
    }
    c_prime[0] = c[0] / pivot;
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = b[i] - a[i] * c_prime[i - 1];
        if pivot.norm() <= PIVOT_TOL * row_scale(i) {
            return Err(Error::Singular { row: i, pivot: pivot.norm() });
        }
        if i + 1 < n {
            c_prime[i] = c[i] / pivot;
        }
        x[i] = (rhs[i] - a[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] = x[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}

/// Real matrix with bandwidth two on each side. Row `i` stores
/// `A[i][i-2..=i+2]`; entries that would fall outside the matrix are zero.
///
/// After [`lu_penta`] the same storage holds the unit-lower multipliers
/// (offsets −2, −1) and the upper factor (offsets 0..=2).
#[derive(Debug, Clone, PartialEq)]
pub struct Pentadiag {
    rows: Vec<[f64; 5]>,
    factored: bool,
}

impl Pentadiag {
    pub fn zeros(n: usize) -> Self {
        Self {
            rows: vec![[0.0; 5]; n],
            factored: false,
        }
    }

    /// From the five diagonals, each of length `n`, indexed by row
    /// (`l2[i] = A[i][i-2]`, `u2[i] = A[i][i+2]`, out-of-range slots ignored).
    pub fn from_diagonals(l2: &[f64], l1: &[f64], d: &[f64], u1: &[f64], u2: &[f64]) -> Result<Self> {
        let n = d.len();
        if [l2.len(), l1.len(), u1.len(), u2.len()].iter().any(|&len| len != n) {
            return Err(Error::Dimension("pentadiagonal bands must all have length n".into()));
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.rows[i] = [l2[i], l1[i], d[i], u1[i], u2[i]];
        }
        m.clear_outside();
        Ok(m)
    }

    fn clear_outside(&mut self) {
        let n = self.rows.len();
        for i in 0..n {
            for k in 0..5 {
                let col = i as isize + k as isize - 2;
                if col < 0 || col >= n as isize {
                    self.rows[i][k] = 0.0;
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_factored(&self) -> bool {
        self.factored
    }

    /// Entry `(i, j)` of the stored matrix (raw) or of the packed factors.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let off = j as isize - i as isize;
        if off.abs() > 2 {
            0.0
        } else {
            self.rows[i][(off + 2) as usize]
        }
    }

    /// Adds `value` to entry `(i, j)`; ignored outside the band or matrix.
    pub fn add(&mut self, i: usize, j: isize, value: f64) {
        let n = self.rows.len() as isize;
        let off = j - i as isize;
        if j >= 0 && j < n && off.abs() <= 2 {
            self.rows[i][(off + 2) as usize] += value;
        }
    }

    /// Unit lower factor entry (factored form only).
    pub fn l_factor(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.factored);
        match i as isize - j as isize {
            0 => 1.0,
            1 | 2 => self.get(i, j),
            _ => 0.0,
        }
    }

    /// Upper factor entry (factored form only).
    pub fn u_factor(&self, i: usize, j: usize) -> f64 {
        debug_assert!(self.factored);
        if j >= i {
            self.get(i, j)
        } else {
            0.0
        }
    }

    /// Forward/back substitution with the packed factors.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if !self.factored {
            return lu_penta(self.clone())?.solve(rhs);
        }
        let n = self.rows.len();
        if rhs.len() != n {
            return Err(Error::Dimension(format!("rhs of length {} for a {n}x{n} system", rhs.len())));
        }
        let mut y = rhs.to_vec();
        for i in 0..n {
            if i >= 1 {
                y[i] -= self.rows[i][1] * y[i - 1];
            }
            if i >= 2 {
                y[i] -= self.rows[i][0] * y[i - 2];
            }
        }
        for i in (0..n).rev() {
            let r = &self.rows[i];
            if i + 1 < n {
                y[i] -= r[3] * y[i + 1];
            }
            if i + 2 < n {
                y[i] -= r[4] * y[i + 2];
            }
            y[i] /= r[2];
        }
        Ok(y)
    }
}

/// In-band Doolittle LU without pivoting.
pub fn lu_penta(mut system: Pentadiag) -> Result<Pentadiag> {
    if system.factored {
        return Ok(system);
    }
    let n = system.rows.len();
    let scales: Vec<f64> = system
        .rows
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .collect();
    for k in 0..n {
        let pivot = system.rows[k][2];
        if !(pivot.abs() > PIVOT_TOL * scales[k]) {
            return Err(Error::Singular { row: k, pivot: pivot.abs() });
        }
        for i in k + 1..(k + 3).min(n) {
            // A[i][k] lives at offset k - i
            let lik_slot = 2 + k - i;
            let l = system.rows[i][lik_slot] / pivot;
            system.rows[i][lik_slot] = l;
            for j in k + 1..(k + 3).min(n) {
                // A[i][j] -= l * A[k][j]
                let ukj = system.rows[k][2 + j - k];
                system.rows[i][2 + j - i] -= l * ukj;
            }
        }
    }
    system.factored = true;
    Ok(system)
}

// ---------------------------------------------------------------------------
// Time stepping

/// Result of one inner solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Update<F> {
    pub field: F,
    pub iters: usize,
    /// Discrete L² norm of each inner increment, in order.
    pub increments: Vec<f64>,
}

fn active_l2<T: Copy>(values: &[T], h: f64, mod2: impl Fn(T) -> f64) -> f64 {
    (h * values.iter().map(|&x| mod2(x)).sum::<f64>()).sqrt()
}

/// One Crank–Nicolson step for the short wave with the long wave held at
/// `v_n`.
pub fn schrodinger_update(
    u_n: &ComplexGridFn,
    v_n: &RealGridFn,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Update<ComplexGridFn>> {
    let grid = *u_n.grid();
    let h = grid.h();
    let n = grid.active_len();
    let inv_tau = 1.0 / cfg.tau;
    let inv_h2 = 1.0 / (h * h);
    let tr = &params.truncation;

    let u0 = u_n.active_values();
    let lap0 = laplacian_h(u_n);
    let coupling: Vec<f64> = grid.active().map(|j| params.alpha * tr.g(v_n.get(j))).collect();
    let off = Complex64::new(0.5 * inv_h2, 0.0);

    let mut current = u0.to_vec();
    let mut increments = Vec::new();
    let mut system = Tridiag {
        lower: vec![off; n],
        diag: vec![Complex64::new(0.0, 0.0); n],
        upper: vec![off; n],
    };
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    for iter in 1..=cfg.max_iter {
        for r in 0..n {
            let mid = (current[r] + u0[r]) * 0.5;
            let potential = params.beta * mid.norm_sqr() + coupling[r];
            system.diag[r] = I * inv_tau - inv_h2 - 0.5 * potential;
            rhs[r] = I * inv_tau * u0[r] - 0.5 * lap0.get(r + 2) + 0.5 * potential * u0[r];
        }
        let next = solve_tridiag(&system, &rhs)?;
        let inc = active_l2(
            &next.iter().zip(&current).map(|(a, b)| a - b).collect::<Vec<_>>(),
            h,
            |z| z.norm_sqr(),
        );
        current = next;
        increments.push(inc);
        if !inc.is_finite() {
            break;
        }
        if inc <= cfg.tol {
            return Ok(Update {
                field: GridFn::from_active(grid, &current)?,
                iters: iter,
                increments,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "Schrödinger fixed-point iteration",
        iters: increments.len(),
        residual: increments.last().copied().unwrap_or(f64::NAN),
        history: increments,
    })
}

/// Implicit-Euler residual on the active nodes,
/// `(w − v^n)/τ + D³w + λ D0 f(w) − γ D0(g'(w)|u^n|²)`.
pub fn kdv_residual(
    w: &RealGridFn,
    v_n: &RealGridFn,
    u_n: &ComplexGridFn,
    params: &ModelParams,
    tau: f64,
) -> Vec<f64> {
    let grid = *w.grid();
    let tr = &params.truncation;
    let d3 = d_cubed(w);
    let flux = d_zero(&w.map(|x| tr.f(x)));
    let forcing = GridFn::from_fn(grid, |j, _| tr.g_prime(w.get(j)) * u_n.get(j).norm_sqr());
    let dforcing = d_zero(&forcing);
    grid.active()
        .map(|j| {
            (w.get(j) - v_n.get(j)) / tau + d3.get(j) + params.lambda * flux.get(j)
                - params.gamma * dforcing.get(j)
        })
        .collect()
}

/// Analytic Jacobian of [`kdv_residual`] with respect to the active values
/// of `w`.
pub fn kdv_jacobian(w: &RealGridFn, u_n: &ComplexGridFn, params: &ModelParams, tau: f64) -> Pentadiag {
    let grid = *w.grid();
    let h = grid.h();
    let n = grid.active_len();
    let tr = &params.truncation;
    let c3 = 0.5 / (h * h * h);
    let c0 = 0.5 / h;
    // derivative of λ f(w_k) − γ g'(w_k)|u_k|² with respect to w_k
    let flux_slope = |k: usize| {
        params.lambda * tr.f_prime(w.get(k)) - params.gamma * tr.g_second(w.get(k)) * u_n.get(k).norm_sqr()
    };
    let mut jac = Pentadiag::zeros(n);
    for r in 0..n {
        let j = r + 2;
        let ri = r as isize;
        jac.add(r, ri, 1.0 / tau);
        jac.add(r, ri + 2, c3);
        jac.add(r, ri + 1, -2.0 * c3 + c0 * flux_slope(j + 1));
        jac.add(r, ri - 1, 2.0 * c3 - c0 * flux_slope(j - 1));
        jac.add(r, ri - 2, -c3);
    }
    jac
}

/// Implicit Euler step for the long wave, forced by `|u_n|²`.
pub fn kdv_update(
    v_n: &RealGridFn,
    u_n: &ComplexGridFn,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Update<RealGridFn>> {
    let grid = *v_n.grid();
    let h = grid.h();
    let mut w = v_n.clone();
    let mut increments = Vec::new();
    for iter in 1..=cfg.max_iter {
        let residual = kdv_residual(&w, v_n, u_n, params, cfg.tau);
        let jac = lu_penta(kdv_jacobian(&w, u_n, params, cfg.tau))?;
        let neg: Vec<f64> = residual.iter().map(|r| -r).collect();
        let delta = jac.solve(&neg)?;
        w.update(|vals| {
            for (x, d) in vals[2..grid.j()].iter_mut().zip(&delta) {
                *x += d;
            }
        });
        let inc = active_l2(&delta, h, |x| x * x);
        increments.push(inc);
        if !inc.is_finite() {
            break;
        }
        if inc <= cfg.tol {
            return Ok(Update {
                field: w,
                iters: iter,
                increments,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "KdV Newton iteration",
        iters: increments.len(),
        residual: increments.last().copied().unwrap_or(f64::NAN),
        history: increments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    pub iters_u: usize,
    pub iters_v: usize,
}

/// Advances both fields by `τ`; each update reads the other field at the
/// old time level.
pub fn step(state: &State, params: &ModelParams, cfg: &SolverConfig) -> Result<StepOutcome> {
    let su = schrodinger_update(&state.u, &state.v, params, cfg)?;
    let sv = kdv_update(&state.v, &state.u, params, cfg)?;
    let next = State {
        t: state.t + cfg.tau,
        u: su.field,
        v: sv.field,
    };
    if !next.is_finite() {
        return Err(Error::BlowUp {
            t: state.t,
            dt: cfg.tau,
        });
    }
    Ok(StepOutcome {
        state: next,
        iters_u: su.iters,
        iters_v: sv.iters,
    })
}

/// Steps to the first time `≥ cfg.horizon`, sampling diagnostics at
/// `t = 0`, every `sample_every` steps and at the end.
pub fn run(
    initial: &State,
    params: &ModelParams,
    cfg: &SolverConfig,
    sample_every: usize,
) -> std::result::Result<(State, RunDiagnostics), RunFailure> {
    run_with(initial, params, cfg, sample_every, |_, _| {})
}

/// [`run`] with a callback invoked after every step.
pub fn run_with(
    initial: &State,
    params: &ModelParams,
    cfg: &SolverConfig,
    sample_every: usize,
    mut observe: impl FnMut(usize, &StepOutcome),
) -> std::result::Result<(State, RunDiagnostics), RunFailure> {
    let mut diag = RunDiagnostics::default();
    let precheck = cfg
        .validate()
        .and_then(|_| params.validate())
        .and_then(|_| {
            if sample_every == 0 {
                Err(Error::invalid("sample_every", "must be >= 1"))
            } else {
                Ok(())
            }
        });
    if let Err(error) = precheck {
        return Err(RunFailure {
            error,
            step: 0,
            t: initial.t,
            diagnostics: diag,
        });
    }
    diag.push(initial, params, 0, 0);
    let steps = step_count(cfg.horizon, cfg.tau);
    let t0 = initial.t;
    let mut state = initial.clone();
    for n in 1..=steps {
        let mut outcome = match step(&state, params, cfg) {
            Ok(o) => o,
            Err(error) => {
                return Err(RunFailure {
                    error,
                    step: n,
                    t: state.t,
                    diagnostics: diag,
                })
            }
        };
        outcome.state.t = t0 + n as f64 * cfg.tau;
        diag.iterations.record(outcome.iters_u, outcome.iters_v);
        observe(n, &outcome);
        if n % sample_every == 0 || n == steps {
            diag.push(&outcome.state, params, outcome.iters_u, outcome.iters_v);
        }
        state = outcome.state;
    }
    Ok((state, diag))
}
