//! Shared fixtures and dense reference implementations for the integration
//! tests. The dense oracles deliberately avoid the banded code paths under
//! test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swlw_core::dynamics::rhs;
use swlw_core::grid::{norm2, sample};
use swlw_core::oracle::exact_state;
use swlw_core::solver::{kdv_jacobian, kdv_residual, Pentadiag, Tridiag};
use swlw_core::{Complex64, ComplexGridFn, Grid, GridFn, ModelParams, RealGridFn, SolverConfig, State, TravelingWave};

pub const ALPHA: f64 = -1.0 / 12.0;
pub const WINDOW: (f64, f64) = (-20.0, 50.0);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_real(rng: &mut ChaCha8Rng, grid: Grid, amp: f64) -> RealGridFn {
    GridFn::from_fn(grid, |_, _| rng.random_range(-amp..amp))
}

pub fn random_complex(rng: &mut ChaCha8Rng, grid: Grid, amp: f64) -> ComplexGridFn {
    GridFn::from_fn(grid, |_, _| {
        Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp))
    })
}

pub fn random_grid(rng: &mut ChaCha8Rng, max_j: usize) -> Grid {
    let j = rng.random_range(swlw_core::grid::MIN_J..=max_j);
    let length = rng.random_range(0.5..100.0);
    Grid::new(j, length).unwrap()
}

/// Smooth, compactly concentrated state with a nontrivial phase.
pub fn smooth_state(grid: Grid, amp: f64) -> State {
    let l = grid.length();
    let bump = |x: f64| (-(x - 0.5 * l).powi(2) / (0.01 * l * l)).exp();
    let u = GridFn::from_fn(grid, |_, x| Complex64::from_polar(amp * bump(x), 4.0 * x / l));
    let v = GridFn::from_fn(grid, |_, x| amp * bump(x));
    State::new(0.0, u, v).unwrap()
}

/// The α = −1/12, ω = 0 wave on the window `[-20, 50]`.
pub fn window_wave(x0: f64) -> TravelingWave {
    TravelingWave::new(ALPHA, 0.0, x0).unwrap().on_window(WINDOW.0)
}

pub fn window_grid(j: usize) -> Grid {
    Grid::new(j, WINDOW.1 - WINDOW.0).unwrap()
}

pub fn wave_params() -> ModelParams {
    ModelParams::traveling_wave_system(ALPHA)
}

pub fn desk_solver() -> SolverConfig {
    SolverConfig::new(1e-3, 1.0)
}

// ---------------------------------------------------------------------------
// Dense oracles

pub fn dense_tridiag(t: &Tridiag) -> DMatrix<Complex64> {
    let n = t.len();
    DMatrix::from_fn(n, n, |i, j| t.get(i, j))
}

pub fn dense_penta(p: &Pentadiag) -> DMatrix<f64> {
    let n = p.len();
    DMatrix::from_fn(n, n, |i, j| p.get(i, j))
}

pub fn dense_solve_complex(a: &DMatrix<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("nonsingular")
        .iter()
        .copied()
        .collect()
}

pub fn dense_solve_real(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("nonsingular")
        .iter()
        .copied()
        .collect()
}

/// Random diagonally dominant complex tridiagonal system of size `n`.
pub fn random_tridiag(rng: &mut ChaCha8Rng, n: usize) -> Tridiag {
    let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let lower: Vec<Complex64> = (0..n).map(|_| c()).collect();
    let upper: Vec<Complex64> = (0..n).map(|_| c()).collect();
    let diag: Vec<Complex64> = (0..n)
        .map(|i| {
            let off = lower[i].norm() + upper[i].norm();
            let z = c();
            z / z.norm().max(1e-3) * (off + 0.5 + z.norm())
        })
        .collect();
    Tridiag::new(lower, diag, upper).unwrap()
}

/// Random diagonally dominant real pentadiagonal system of size `n`.
pub fn random_penta(rng: &mut ChaCha8Rng, n: usize) -> Pentadiag {
    let mut band = |_| rng.random_range(-1.0..1.0);
    let l2: Vec<f64> = (0..n).map(&mut band).collect();
    let l1: Vec<f64> = (0..n).map(&mut band).collect();
    let u1: Vec<f64> = (0..n).map(&mut band).collect();
    let u2: Vec<f64> = (0..n).map(&mut band).collect();
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let off = l2[i].abs() + l1[i].abs() + u1[i].abs() + u2[i].abs();
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            sign * (off + rng.random_range(0.5..2.0))
        })
        .collect();
    Pentadiag::from_diagonals(&l2, &l1, &d, &u1, &u2).unwrap()
}

/// Matrix of `Δh` on the active unknowns.
pub fn laplacian_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.active_len();
    let h2 = grid.h() * grid.h();
    DMatrix::from_fn(n, n, |i, j| match i as isize - j as isize {
        0 => -2.0 / h2,
        1 | -1 => 1.0 / h2,
        _ => 0.0,
    })
}

/// Matrix of `D³` on the active unknowns.
pub fn d3_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.active_len();
    let c = 0.5 / grid.h().powi(3);
    DMatrix::from_fn(n, n, |i, j| match j as isize - i as isize {
        2 => c,
        1 => -2.0 * c,
        -1 => 2.0 * c,
        -2 => -c,
        _ => 0.0,
    })
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// `exp(A)` by scaling and squaring a Taylor series; adequate for the small
/// dense operators used here.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let norm: f64 = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * a.nrows() as f64;
    let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
    let scaled = a / Complex64::new(2f64.powi(squarings), 0.0);
    let n = a.nrows();
    let mut term = DMatrix::<Complex64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &scaled / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Worst entrywise relative gap between the analytic KdV Jacobian and
/// central differences of the residual at a random state on `J = 16`.
pub fn jacobian_error(params: &ModelParams, seed: u64, v_amp: f64) -> f64 {
    let grid = Grid::new(16, 8.0).unwrap();
    let mut rng = rng(seed);
    let w = random_real(&mut rng, grid, v_amp);
    let v_n = random_real(&mut rng, grid, v_amp);
    let u_n = random_complex(&mut rng, grid, 1.0);
    let tau = 1e-2;
    let jac = kdv_jacobian(&w, &u_n, params, tau);
    let n = grid.active_len();
    let mut fd = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let eps = 1e-6 * w.get(k + 2).abs().max(1.0);
        let shifted = |d: f64| {
            let mut x = w.clone();
            x.update(|vals| vals[k + 2] += d);
            kdv_residual(&x, &v_n, &u_n, params, tau)
        };
        let (plus, minus) = (shifted(eps), shifted(-eps));
        for r in 0..n {
            fd[(r, k)] = (plus[r] - minus[r]) / (2.0 * eps);
        }
    }
    let floor = 1e-8 * fd.abs().max();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for k in 0..n {
            let (a, b) = (jac.get(r, k), fd[(r, k)]);
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(floor));
        }
    }
    worst
}

/// L² norms of `rhs(exact) − ∂t exact` for both fields.
pub fn stencil_residual(wave: &TravelingWave, j: usize) -> (f64, f64) {
    let grid = window_grid(j);
    let t = 0.0;
    let exact = exact_state(wave, grid, t).unwrap();
    let (du, dv) = rhs(&exact, &wave_params());
    let origin = wave.origin();
    let ut = sample(|x| wave.time_derivative(origin + x, t).0, grid).unwrap();
    let vt = sample(|x| wave.time_derivative(origin + x, t).1, grid).unwrap();
    (norm2(&(&du - &ut)), norm2(&(&dv - &vt)))
}

pub fn max_rel_diff_complex(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

pub fn max_rel_diff_real(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Bitwise equality of every nodal value and of the time.
pub fn bitwise_equal(a: &State, b: &State) -> bool {
    use swlw_core::Nodal;
    let same_u = a.u.values().iter().zip(b.u.values()).all(|(x, y)| {
        x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
    });
    let same_v = a.v.values().iter().zip(b.v.values()).all(|(x, y)| x.to_bits() == y.to_bits());
    same_u && same_v && a.t.to_bits() == b.t.to_bits()
}
