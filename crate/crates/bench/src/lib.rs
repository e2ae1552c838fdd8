//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use swlw_core::grid::{sample, MIN_J};
use swlw_core::solver::{Pentadiag, Tridiag};
use swlw_core::{Grid, ModelParams, State, TravelingWave};

/// Domain of the traveling-wave problems.
pub const WINDOW: (f64, f64) = (-20.0, 50.0);
pub const ALPHA: f64 = -1.0 / 12.0;

/// Diagonally dominant Crank–Nicolson style system of size `n`.
pub fn tridiag(n: usize) -> (Tridiag, Vec<Complex64>) {
    let off = Complex64::new(0.0, -0.5);
    let system = Tridiag::new(vec![off; n], vec![Complex64::new(1.0, 1.0); n], vec![off; n]).unwrap();
    let rhs = (0..n).map(|k| Complex64::new((k as f64).sin(), (k as f64).cos())).collect();
    (system, rhs)
}

/// Implicit Euler Airy matrix `I + τD³` on `n` unknowns.
pub fn airy_penta(n: usize, tau_over_h3: f64) -> (Pentadiag, Vec<f64>) {
    let c = 0.5 * tau_over_h3;
    let system = Pentadiag::from_diagonals(
        &vec![-c; n],
        &vec![2.0 * c; n],
        &vec![1.0; n],
        &vec![-2.0 * c; n],
        &vec![c; n],
    )
    .unwrap();
    let rhs = (0..n).map(|k| (0.1 * k as f64).sin()).collect();
    (system, rhs)
}

/// The α = −1/12 wave sampled on `j` interior nodes of the window.
pub fn wave_state(j: usize) -> (State, ModelParams) {
    assert!(j >= MIN_J);
    let grid = Grid::new(j, WINDOW.1 - WINDOW.0).unwrap();
    let wave = TravelingWave::new(ALPHA, 0.0, 0.0).unwrap().on_window(WINDOW.0);
    let origin = wave.origin();
    let u = sample(|x| wave.evaluate(origin + x, 0.0).0, grid).unwrap();
    let v = sample(|x| wave.evaluate(origin + x, 0.0).1, grid).unwrap();
    (State::new(0.0, u, v).unwrap(), ModelParams::traveling_wave_system(ALPHA))
}
