//! Uniform grids on a box `[-L/2, L/2)`, Fourier collocation operators and
//! the quadrature rules shared by the numerical modules.
//!
//! Functions on the box are sampled at `x_j = -L/2 + j h`. The default
//! boundary condition is periodic; an antiperiodic ("twisted") variant is
//! available for profiles such as `tanh` whose values at the two box ends are
//! negatives of each other.

mod quadrature;

pub use quadrature::{
    gauss_legendre, integrate, integrate_breaks, quad_halfline_sqrt, QuadOutcome, QuadRule, QuadValue,
};

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Boundary condition used to close the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// `f(x + L) = f(x)`; momenta `2π j / L`, `j ∈ {-n/2, …, n/2-1}`.
    #[default]
    Periodic,
    /// `f(x + L) = -f(x)`; momenta `2π (j + 1/2) / L`.
    Antiperiodic,
}

/// Uniform grid on `[-L/2, L/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n: usize,
    boundary: Boundary,
}

impl Grid1D {
    /// Periodic grid with `n` nodes on a box of length `length`.
    pub fn new(length: f64, n: usize) -> Result<Self> {
        Self::with_boundary(length, n, Boundary::Periodic)
    }

    pub fn with_boundary(length: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(LabError::InvalidGrid(format!(
                "node count must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { length, n, boundary })
    }

    /// Same nodes, different boundary closure.
    pub fn twisted(&self, boundary: Boundary) -> Self {
        Self { boundary, ..self.clone() }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|j| self.node(j)))
    }

    /// Index of the node closest to `x` (clamped to the box).
    pub fn nearest_node(&self, x: f64) -> usize {
        let j = ((x + 0.5 * self.length) / self.spacing()).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Momentum of FFT bin `q`.
    pub fn momentum(&self, q: usize) -> f64 {
        let n = self.n as i64;
        let q = q as i64;
        let signed = if q < n / 2 { q } else { q - n };
        let shift = match self.boundary {
            Boundary::Periodic => 0.0,
            Boundary::Antiperiodic => 0.5,
        };
        2.0 * PI * (signed as f64 + shift) / self.length
    }

    /// Momentum lattice in FFT bin order (`0, 1, …, n/2-1, -n/2, …, -1` for
    /// the periodic closure; the Nyquist frequency carries the negative sign).
    pub fn momenta(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|q| self.momentum(q)))
    }

    /// Momentum lattice in ascending order.
    pub fn sorted_momenta(&self) -> Vec<f64> {
        let mut k = self.momenta().to_vec();
        k.sort_by(f64::total_cmp);
        k
    }

    /// Largest momentum magnitude on the lattice.
    pub fn max_momentum(&self) -> f64 {
        self.momenta().iter().fold(0.0_f64, |m, k| m.max(k.abs()))
    }

    /// Samples of a real function at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|j| f(self.node(j))))
    }

    /// Trapezoid (equivalently, rectangle) rule on the nodes.
    pub fn integrate_samples(&self, values: &[f64]) -> f64 {
        self.spacing() * values.iter().sum::<f64>()
    }

    /// Phase `e^{iπ x_j / L}` used to map antiperiodic functions to periodic ones.
    fn twist_phase(&self, j: usize) -> Complex64 {
        match self.boundary {
            Boundary::Periodic => Complex64::new(1.0, 0.0),
            Boundary::Antiperiodic => Complex64::from_polar(1.0, PI * self.node(j) / self.length),
        }
    }
}

/// Validated grid constructor.
pub fn make_grid(length: f64, n: usize) -> Result<Grid1D> {
    Grid1D::new(length, n)
}

/// First column `c_d = (1/n) Σ_q f(k_q) e^{i k_q d h}` of the circulant matrix
/// representing the Fourier multiplier `f` in the untwisted frame.
fn circulant_column<F: Fn(f64) -> Complex64>(grid: &Grid1D, f: F) -> Vec<Complex64> {
    let n = grid.len();
    let base = grid.twist(Boundary::Periodic);
    let shift = grid.momentum(0) - base.momentum(0);
    let mut col: Vec<Complex64> = (0..n).map(|q| f(base.momentum(q) + shift)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut col);
    let scale = 1.0 / n as f64;
    col.iter_mut().for_each(|c| *c *= scale);
    col
}

impl Grid1D {
    fn twist(&self, boundary: Boundary) -> Grid1D {
        self.twisted(boundary)
    }
}

/// Dense matrix of the Fourier multiplier `f(D)`, `D = -i d/dx`, on the grid.
///
/// For real-valued `f` the result is Hermitian; it is symmetrized to remove
/// round-off asymmetry.
pub fn fourier_multiplier<F: Fn(f64) -> Complex64>(grid: &Grid1D, f: F) -> Array2<Complex64> {
    let n = grid.len();
    let col = circulant_column(grid, f);
    let phases: Vec<Complex64> = (0..n).map(|j| grid.twist_phase(j)).collect();
    Array2::from_shape_fn((n, n), |(j, l)| {
        let d = (j + n - l) % n;
        phases[j] * col[d] * phases[l].conj()
    })
}

/// Hermitian matrix of `-i d/dx` (Fourier collocation).
pub fn spectral_derivative(grid: &Grid1D) -> Array2<Complex64> {
    let mut m = fourier_multiplier(grid, |k| Complex64::new(k, 0.0));
    symmetrize(&mut m);
    m
}

/// Replace `M` by `(M + M†)/2`.
pub fn symmetrize(m: &mut Array2<Complex64>) {
    let n = m.nrows();
    for j in 0..n {
        m[[j, j]].im = 0.0;
        for l in (j + 1)..n {
            let avg = 0.5 * (m[[j, l]] + m[[l, j]].conj());
            m[[j, l]] = avg;
            m[[l, j]] = avg.conj();
        }
    }
}

/// Apply the Fourier multiplier `f(D)` to a sampled vector in `O(n log n)`.
pub fn apply_multiplier<F: Fn(f64) -> Complex64>(
    grid: &Grid1D,
    f: F,
    values: &[Complex64],
) -> Vec<Complex64> {
    let n = grid.len();
    assert_eq!(values.len(), n, "vector length must match the grid");
    let mut buf: Vec<Complex64> =
        (0..n).map(|j| grid.twist_phase(j).conj() * values[j]).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let base = grid.twist(Boundary::Periodic);
    let shift = grid.momentum(0) - base.momentum(0);
    for (q, b) in buf.iter_mut().enumerate() {
        *b *= f(base.momentum(q) + shift) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter()
        .enumerate()
        .map(|(j, b)| grid.twist_phase(j) * b)
        .collect()
}

/// Spectral derivative of real samples: returns `d^order f/dx^order`.
pub fn differentiate(grid: &Grid1D, values: &[f64], order: u32) -> Vec<f64> {
    let c: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    // d/dx = i D, so (d/dx)^p has multiplier (i k)^p.
    let out = apply_multiplier(grid, |k| Complex64::new(0.0, k).powu(order), &c);
    out.iter().map(|z| z.re).collect()
}

/// Unitary discrete Fourier matrix applied to every column:
/// `(F M)[q, l] = n^{-1/2} Σ_j e^{-i k_q x_j} M[j, l]`, rows in FFT bin order.
pub fn fourier_columns(grid: &Grid1D, m: &Array2<Complex64>) -> Array2<Complex64> {
    let n = grid.len();
    assert_eq!(m.nrows(), n, "row count must match the grid");
    let base = grid.twist(Boundary::Periodic);
    let shift = grid.momentum(0) - base.momentum(0);
    let pre: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -shift * j as f64 * grid.spacing()))
        .collect();
    let post: Vec<Complex64> = (0..n)
        .map(|q| Complex64::from_polar(1.0 / (n as f64).sqrt(), 0.5 * grid.momentum(q) * grid.length()))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = Array2::zeros(m.raw_dim());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for l in 0..m.ncols() {
        for j in 0..n {
            buf[j] = pre[j] * m[[j, l]];
        }
        fft.process(&mut buf);
        for q in 0..n {
            out[[q, l]] = post[q] * buf[q];
        }
    }
    out
}

/// `F M F†`: the matrix `M` expressed in the plane-wave basis of the grid.
pub fn to_momentum_basis(grid: &Grid1D, m: &Array2<Complex64>) -> Array2<Complex64> {
    let x = fourier_columns(grid, m);
    let y = fourier_columns(grid, &x.t().mapv(|z| z.conj()));
    y.t().mapv(|z| z.conj())
}
