//! Finite-difference solver for a coupled Schrödinger/KdV system describing
//! the interaction of short and long waves on a bounded interval.
//!
//! The crate is layered bottom-up:
//!
//! * [`grid`]: uniform mesh with Dirichlet ghost nodes, difference operators,
//!   discrete norms and piecewise interpolants.
//! * [`truncation`]: the smooth nonlinearity cut-off family used for the
//!   a-priori analysis.
//! * [`dynamics`]: the semi-discrete right-hand side, its invariants and an
//!   RK4 reference integrator.
//! * [`solver`]: the fully discrete scheme (Crank–Nicolson for the short
//!   wave, implicit Euler with Newton for the long wave) and its banded
//!   linear solvers.
//! * [`oracle`]: exact traveling waves for verification.
//! * [`harness`]: run configuration and the experiments behind the CLI.

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod oracle;
pub mod solver;
pub mod truncation;

pub use dynamics::{ModelParams, RunDiagnostics, RunFailure, State};
pub use error::{Error, Result};
pub use grid::{ComplexGridFn, Grid, GridFn, MeshFn, Nodal, RealGridFn};
pub use num_complex::Complex64;
pub use oracle::{FieldErrors, TravelingWave};
pub use solver::SolverConfig;
pub use truncation::Truncation;
