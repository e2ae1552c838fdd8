//! Uniform mesh on `(0, L)`, grid functions with a two-layer homogeneous
//! Dirichlet condition, finite-difference operators, discrete norms and the
//! piecewise interpolators used by the diagnostics.
//!
//! A mesh with parameter `J` has nodes `x_j = j h`, `j = 0..=J+1`, with
//! `h = L / (J + 1)`. Grid functions in the constrained space vanish at the
//! four outermost nodes `0, 1, J, J+1`; the *active* index range is
//! `2..=J-1`. Inner products and norms sum over the active range only.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Range, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest admissible `J`: the five-point third difference needs a
/// non-empty active range.
pub const MIN_J: usize = 4;

/// Field element of a grid function: `f64` for the long wave, `Complex64`
/// for the short wave.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + 'static
{
    const ZERO: Self;
    fn modulus(self) -> f64;
    fn modulus_sqr(self) -> f64;
    fn to_complex(self) -> Complex64;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn modulus_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }
    #[inline]
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    j: usize,
    length: f64,
    h: f64,
}

impl Grid {
    pub fn new(j: usize, length: f64) -> Result<Self> {
        if j < MIN_J {
            return Err(Error::invalid("J", format!("must be at least {MIN_J}, got {j}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid("L", format!("must be positive and finite, got {length}")));
        }
        Ok(Self {
            j,
            length,
            h: length / (j as f64 + 1.0),
        })
    }

    /// The mesh parameter `J` (there are `J + 2` nodes).
    pub fn j(&self) -> usize {
        self.j
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of stored nodes, `J + 2`.
    pub fn nodes(&self) -> usize {
        self.j + 2
    }

    pub fn x(&self, node: usize) -> f64 {
        node as f64 * self.h
    }

    /// Active index range `2..=J-1` as a half-open range.
    pub fn active(&self) -> Range<usize> {
        2..self.j
    }

    /// Number of active unknowns, `J - 2`.
    pub fn active_len(&self) -> usize {
        self.j - 2
    }

    pub fn is_ghost(&self, node: usize) -> bool {
        node < 2 || node >= self.j
    }
}

/// Read access shared by constrained grid functions and raw operator output.
pub trait Nodal<T: Scalar> {
    fn grid(&self) -> &Grid;
    fn values(&self) -> &[T];
}

/// A member of the constrained space: `values[0] = values[1] = values[J] =
/// values[J+1] = 0` always holds.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn<T: Scalar> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealGridFn = GridFn<f64>;
pub type ComplexGridFn = GridFn<Complex64>;

/// Unconstrained nodal values, typically the output of a difference
/// operator (e.g. `D+ z` is non-zero at node 1).
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFn<T: Scalar> {
    grid: Grid,
    values: Vec<T>,
}

impl<T: Scalar> Nodal<T> for GridFn<T> {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn values(&self) -> &[T] {
        &self.values
    }
}

impl<T: Scalar> Nodal<T> for MeshFn<T> {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn values(&self) -> &[T] {
        &self.values
    }
}

fn zero_ghosts<T: Scalar>(grid: &Grid, values: &mut [T]) {
    let j = grid.j;
    values[0] = T::ZERO;
    values[1] = T::ZERO;
    values[j] = T::ZERO;
    values[j + 1] = T::ZERO;
}

impl<T: Scalar> GridFn<T> {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![T::ZERO; grid.nodes()],
        }
    }

    /// Takes ownership of `J + 2` nodal values; ghost entries are overwritten
    /// with zero.
    pub fn from_values(grid: Grid, mut values: Vec<T>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::Dimension(format!(
                "expected {} nodal values, got {}",
                grid.nodes(),
                values.len()
            )));
        }
        zero_ghosts(&grid, &mut values);
        Ok(Self { grid, values })
    }

    /// Builds from `f(node, x_node)` evaluated on the active range.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(usize, f64) -> T) -> Self {
        let mut values = vec![T::ZERO; grid.nodes()];
        for j in grid.active() {
            values[j] = f(j, grid.x(j));
        }
        Self { grid, values }
    }

    /// Builds from the active values only (`J - 2` entries, node 2 first).
    pub fn from_active(grid: Grid, active: &[T]) -> Result<Self> {
        if active.len() != grid.active_len() {
            return Err(Error::Dimension(format!(
                "expected {} active values, got {}",
                grid.active_len(),
                active.len()
            )));
        }
        let mut values = vec![T::ZERO; grid.nodes()];
        values[2..grid.j].copy_from_slice(active);
        Ok(Self { grid, values })
    }

    pub fn get(&self, node: usize) -> T {
        self.values[node]
    }

    pub fn active_values(&self) -> &[T] {
        &self.values[2..self.grid.j]
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Mutates the nodal values in place; the ghost constraint is restored
    /// afterwards.
    pub fn update(&mut self, f: impl FnOnce(&mut [T])) {
        f(&mut self.values);
        zero_ghosts(&self.grid, &mut self.values);
    }

    pub fn map<S: Scalar>(&self, mut f: impl FnMut(T) -> S) -> GridFn<S> {
        let mut values: Vec<S> = self.values.iter().map(|&z| f(z)).collect();
        zero_ghosts(&self.grid, &mut values);
        GridFn {
            grid: self.grid,
            values,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|z| z * a)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }

    /// Largest pointwise modulus of `self - other` over all nodes.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).modulus())
            .fold(0.0, f64::max))
    }

    pub fn into_mesh(self) -> MeshFn<T> {
        MeshFn {
            grid: self.grid,
            values: self.values,
        }
    }
}

impl<T: Scalar> MeshFn<T> {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![T::ZERO; grid.nodes()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.nodes() {
            return Err(Error::Dimension(format!(
                "expected {} nodal values, got {}",
                grid.nodes(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn get(&self, node: usize) -> T {
        self.values[node]
    }

    /// Projects onto the constrained space by zeroing the ghost entries.
    pub fn into_grid_fn(mut self) -> GridFn<T> {
        zero_ghosts(&self.grid, &mut self.values);
        GridFn {
            grid: self.grid,
            values: self.values,
        }
    }
}

impl<T: Scalar> Add for &GridFn<T> {
    type Output = GridFn<T>;
    fn add(self, rhs: Self) -> GridFn<T> {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in addition");
        GridFn {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &GridFn<T> {
    type Output = GridFn<T>;
    fn sub(self, rhs: Self) -> GridFn<T> {
        assert_eq!(self.grid, rhs.grid, "grid mismatch in subtraction");
        GridFn {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(&a, &b)| a - b).collect(),
        }
    }
}

pub(crate) fn check_same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "grid (J = {}, L = {}) vs grid (J = {}, L = {})",
            a.j, a.length, b.j, b.length
        )))
    }
}

/// Samples `f` at the active nodes; ghost entries are zero.
pub fn sample<T: Scalar>(f: impl Fn(f64) -> T, grid: Grid) -> Result<GridFn<T>> {
    let mut values = vec![T::ZERO; grid.nodes()];
    for j in grid.active() {
        let x = grid.x(j);
        let y = f(x);
        if !y.is_finite() {
            return Err(Error::NonFinite { node: j, x });
        }
        values[j] = y;
    }
    Ok(GridFn { grid, values })
}

// ---------------------------------------------------------------------------
// Difference operators. Outputs are zero wherever the stencil would leave the
// stored node range.

/// `(D+ z)_j = (z_{j+1} - z_j) / h` for `j = 0..=J`; node `J+1` is zero.
pub fn d_plus<T: Scalar, Z: Nodal<T>>(z: &Z) -> MeshFn<T> {
    let grid = *z.grid();
    let v = z.values();
    let inv_h = 1.0 / grid.h;
    let mut out = vec![T::ZERO; grid.nodes()];
    for j in 0..=grid.j {
        out[j] = (v[j + 1] - v[j]) * inv_h;
    }
    MeshFn { grid, values: out }
}

/// `(D- z)_j = (z_j - z_{j-1}) / h` for `j = 1..=J+1`; node 0 is zero.
pub fn d_minus<T: Scalar, Z: Nodal<T>>(z: &Z) -> MeshFn<T> {
    let grid = *z.grid();
    let v = z.values();
    let inv_h = 1.0 / grid.h;
    let mut out = vec![T::ZERO; grid.nodes()];
    for j in 1..=grid.j + 1 {
        out[j] = (v[j] - v[j - 1]) * inv_h;
    }
    MeshFn { grid, values: out }
}

/// `(D0 z)_j = (z_{j+1} - z_{j-1}) / 2h` for `j = 1..=J`.
pub fn d_zero<T: Scalar, Z: Nodal<T>>(z: &Z) -> MeshFn<T> {
    let grid = *z.grid();
    let v = z.values();
    let inv_2h = 0.5 / grid.h;
    let mut out = vec![T::ZERO; grid.nodes()];
    for j in 1..=grid.j {
        out[j] = (v[j + 1] - v[j - 1]) * inv_2h;
    }
    MeshFn { grid, values: out }
}

/// `(Δh z)_j = (z_{j+1} - 2 z_j + z_{j-1}) / h²` for `j = 1..=J`.
pub fn laplacian_h<T: Scalar, Z: Nodal<T>>(z: &Z) -> MeshFn<T> {
    let grid = *z.grid();
    let v = z.values();
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let mut out = vec![T::ZERO; grid.nodes()];
    for j in 1..=grid.j {
        out[j] = (v[j + 1] - v[j] * 2.0 + v[j - 1]) * inv_h2;
    }
    MeshFn { grid, values: out }
}

/// Five-point third difference
/// `(z_{j+2} - 2 z_{j+1} + 2 z_{j-1} - z_{j-2}) / 2h³` for `j = 2..=J-1`.
pub fn d_cubed<T: Scalar, Z: Nodal<T>>(z: &Z) -> MeshFn<T> {
    let grid = *z.grid();
    let v = z.values();
    let h = grid.h;
    let inv_2h3 = 0.5 / (h * h * h);
    let mut out = vec![T::ZERO; grid.nodes()];
    for j in grid.active() {
        out[j] = (v[j + 2] - v[j + 1] * 2.0 + v[j - 1] * 2.0 - v[j - 2]) * inv_2h3;
    }
    MeshFn { grid, values: out }
}

// ---------------------------------------------------------------------------
// Inner product and norms over the active range.

/// `(z, w) = Σ_{j=2}^{J-1} h z_j conj(w_j)`.
pub fn inner<T: Scalar, S: Scalar>(z: &impl Nodal<T>, w: &impl Nodal<S>) -> Result<Complex64> {
    check_same_grid(z.grid(), w.grid())?;
    let grid = z.grid();
    let (zv, wv) = (z.values(), w.values());
    let sum: Complex64 = grid
        .active()
        .map(|j| zv[j].to_complex() * wv[j].to_complex().conj())
        .sum();
    Ok(sum * grid.h)
}

fn norm_over<T: Scalar>(values: &[T], range: Range<usize>, h: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid("p", format!("norm exponent must be >= 1, got {p}")));
    }
    let vals = values[range].iter().map(|z| z.modulus_sqr());
    Ok(if p == f64::INFINITY {
        vals.fold(0.0, f64::max).sqrt()
    } else if p == 2.0 {
        (h * vals.sum::<f64>()).sqrt()
    } else {
        (h * vals.map(|m2| m2.powf(0.5 * p)).sum::<f64>()).powf(1.0 / p)
    })
}

/// Discrete `p`-norm over the active range; pass `f64::INFINITY` for the
/// max-norm.
pub fn norm_p<T: Scalar>(z: &impl Nodal<T>, p: f64) -> Result<f64> {
    norm_over(z.values(), z.grid().active(), z.grid().h, p)
}

pub fn norm2<T: Scalar>(z: &impl Nodal<T>) -> f64 {
    norm_over(z.values(), z.grid().active(), z.grid().h, 2.0).expect("p = 2 is valid")
}

pub fn norm_inf<T: Scalar>(z: &impl Nodal<T>) -> f64 {
    norm_over(z.values(), z.grid().active(), z.grid().h, f64::INFINITY).expect("p = inf is valid")
}

/// `‖D+ z‖_p` summed over `j = 1..=J-1`, i.e. every difference between two
/// nodes that can be non-zero is counted exactly once. For `z` in the
/// constrained space `(D+ z)_0 = (D+ z)_J = 0`, so nothing is lost.
pub fn forward_diff_norm<T: Scalar>(z: &GridFn<T>, p: f64) -> Result<f64> {
    let dz = d_plus(z);
    norm_over(&dz.values, 1..z.grid.j, z.grid.h, p)
}

// ---------------------------------------------------------------------------
// Interpolators.

/// Continuous piecewise-linear reconstruction with node values `z_j`.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear<T: Scalar> {
    grid: Grid,
    nodes: Vec<T>,
}

/// Piecewise-constant reconstruction, value `z_j` on `(x_j, x_{j+1})`,
/// cells `j = 0..=J`.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant<T: Scalar> {
    grid: Grid,
    cells: Vec<T>,
}

pub fn interp_p1<T: Scalar>(z: &impl Nodal<T>) -> PiecewiseLinear<T> {
    PiecewiseLinear {
        grid: *z.grid(),
        nodes: z.values().to_vec(),
    }
}

pub fn interp_p0<T: Scalar>(z: &impl Nodal<T>) -> PiecewiseConstant<T> {
    let grid = *z.grid();
    PiecewiseConstant {
        grid,
        cells: z.values()[..=grid.j].to_vec(),
    }
}

fn locate(grid: &Grid, x: f64) -> (usize, f64) {
    let s = x / grid.h;
    let cell = (s.floor().max(0.0) as usize).min(grid.j);
    (cell, s - cell as f64)
}

// h ∫_0^1 |d + s e|² ds
fn cell_sq_integral(h: f64, d: Complex64, e: Complex64) -> f64 {
    h * (d.norm_sqr() + (d * e.conj()).re + e.norm_sqr() / 3.0)
}

impl<T: Scalar> PiecewiseLinear<T> {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eval(&self, x: f64) -> T {
        let (cell, s) = locate(&self.grid, x);
        let a = self.nodes[cell];
        let b = self.nodes[cell + 1];
        a + (b - a) * s
    }

    /// Exact `L²(0, L)` norm, integrated cell by cell in closed form.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.h;
        (0..=self.grid.j)
            .map(|c| {
                let a = self.nodes[c].to_complex();
                let b = self.nodes[c + 1].to_complex();
                cell_sq_integral(h, a, b - a)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// The distributional derivative, `P0 D+ z`.
    pub fn derivative(&self) -> PiecewiseConstant<T> {
        let inv_h = 1.0 / self.grid.h;
        PiecewiseConstant {
            grid: self.grid,
            cells: (0..=self.grid.j)
                .map(|c| (self.nodes[c + 1] - self.nodes[c]) * inv_h)
                .collect(),
        }
    }

    /// Exact `‖self - other‖_{L²(0, L)}`.
    pub fn l2_distance(&self, other: &PiecewiseConstant<T>) -> Result<f64> {
        check_same_grid(&self.grid, &other.grid)?;
        let h = self.grid.h;
        Ok((0..=self.grid.j)
            .map(|c| {
                let a = self.nodes[c].to_complex();
                let b = self.nodes[c + 1].to_complex();
                cell_sq_integral(h, a - other.cells[c].to_complex(), b - a)
            })
            .sum::<f64>()
            .sqrt())
    }
}

impl<T: Scalar> PiecewiseConstant<T> {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eval(&self, x: f64) -> T {
        self.cells[locate(&self.grid, x).0]
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.h * self.cells.iter().map(|c| c.modulus_sqr()).sum::<f64>()).sqrt()
    }
}
