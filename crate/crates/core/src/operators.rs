//! Discretized operators `A₋ = D ⊗ I_m`, `A₊ = A₋ + Φ`, the path `A(t)`,
//! spectral truncations and the 2×2 boosted-soliton operator.
//!
//! Block ordering is node-major: row `j·m + a` is component `a` at node `x_j`.

use ndarray::{s, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{spectral_derivative, symmetrize, to_momentum_basis, Boundary, Grid1D};
use crate::matfun::eig;
use crate::model::{MatrixPotential, SwitchFunction};
use crate::{adjoint, max_abs, re, LabError, Result};

#[derive(Debug, Clone)]
pub struct HermitianOperator {
    pub matrix: Array2<Complex64>,
    pub grid: Grid1D,
    pub m: usize,
    pub label: String,
    /// Set for the free operator, whose eigenpairs are the grid plane waves.
    free: bool,
}

impl HermitianOperator {
    pub fn new(matrix: Array2<Complex64>, grid: Grid1D, m: usize, label: impl Into<String>) -> Result<Self> {
        let dim = grid.len() * m;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(LabError::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(Self { matrix, grid, m, label: label.into(), free: false })
    }

    /// True when the operator is `D ⊗ I_m` and diagonalized by plane waves.
    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖M - M†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.matrix - &adjoint(&self.matrix)))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diag().sum()
    }
}

/// `A ⊗ I_m` in node-major ordering.
fn kron_identity(a: &Array2<Complex64>, m: usize) -> Array2<Complex64> {
    let n = a.nrows();
    let mut out = Array2::zeros((n * m, n * m));
    for j in 0..n {
        for l in 0..n {
            for c in 0..m {
                out[[j * m + c, l * m + c]] = a[[j, l]];
            }
        }
    }
    out
}

/// Block-diagonal multiplication operator `diag(Φ(x_0), …, Φ(x_{n-1}))`.
pub fn multiplication_operator(grid: &Grid1D, phi: &MatrixPotential) -> Array2<Complex64> {
    let (n, m) = (grid.len(), phi.m());
    let mut out = Array2::zeros((n * m, n * m));
    for j in 0..n {
        let block = phi.sample(grid.node(j));
        out.slice_mut(s![j * m..(j + 1) * m, j * m..(j + 1) * m]).assign(&block);
    }
    out
}

fn derivative_multiplication(grid: &Grid1D, phi: &MatrixPotential) -> Array2<Complex64> {
    let (n, m) = (grid.len(), phi.m());
    let mut out = Array2::zeros((n * m, n * m));
    for j in 0..n {
        let block = phi.derivative(grid.node(j));
        out.slice_mut(s![j * m..(j + 1) * m, j * m..(j + 1) * m]).assign(&block);
    }
    out
}

/// `A₋ = D ⊗ I_m`. With the periodic closure the Nyquist momentum `-π/h`
/// has no partner, so `tr A₋ = -m·π/h` rather than 0 in exact arithmetic.
pub fn build_a_minus(grid: &Grid1D, m: usize) -> Result<HermitianOperator> {
    if m == 0 {
        return Err(LabError::InvalidParameter("block size m must be >= 1".into()));
    }
    let d = spectral_derivative(grid);
    let mut op = HermitianOperator::new(kron_identity(&d, m), grid.clone(), m, format!("A_minus(m={m})"))?;
    op.free = true;
    Ok(op)
}

/// `A + coupling·Φ`.
pub fn add_potential(a: &HermitianOperator, phi: &MatrixPotential, coupling: f64) -> Result<HermitianOperator> {
    if phi.m() != a.m {
        return Err(LabError::DimensionMismatch { expected: a.m, found: phi.m() });
    }
    let mut mat = a.matrix.clone();
    if coupling != 0.0 {
        mat.scaled_add(re(coupling), &multiplication_operator(&a.grid, phi));
    }
    HermitianOperator::new(mat, a.grid.clone(), a.m, format!("{} + {coupling}*{}", a.label, phi.label()))
}

/// `A(t) = A₋ + θ(t)Φ`.
pub fn build_a_t(a_minus: &HermitianOperator, phi: &MatrixPotential, theta: &SwitchFunction, t: f64) -> Result<HermitianOperator> {
    add_potential(a_minus, phi, theta.value(t))
}

/// Spectral projection of `A₋` onto `|eigenvalue| < cutoff`.
#[derive(Debug, Clone)]
pub struct SpectralTruncation {
    pub cutoff: f64,
    pub rank: usize,
    pub projector: Array2<Complex64>,
}

impl SpectralTruncation {
    pub fn new(a_minus: &HermitianOperator, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) {
            return Err(LabError::InvalidParameter(format!("cutoff must be positive, got {cutoff}")));
        }
        let es = eig(a_minus)?;
        let dim = a_minus.dim();
        let selected: Vec<usize> = (0..dim).filter(|&i| es.eigenvalues[i].abs() < cutoff).collect();
        let rank = selected.len();
        // Exact endpoints so that the extreme cutoffs reproduce A₋ and A₊ bit for bit.
        let projector = if rank == dim {
            Array2::eye(dim)
        } else if rank == 0 {
            Array2::zeros((dim, dim))
        } else {
            let v = es.eigenvectors.select(ndarray::Axis(1), &selected);
            let mut p = v.dot(&adjoint(&v));
            symmetrize(&mut p);
            p
        };
        Ok(Self { cutoff, rank, projector })
    }
}

/// `A₊,ₙ = A₋ + P Φ P` with `P` the spectral projection of `A₋` on
/// `(-cutoff, cutoff)` (strict inequality).
pub fn spectral_truncate(a_minus: &HermitianOperator, phi: &MatrixPotential, cutoff: f64) -> Result<(HermitianOperator, SpectralTruncation)> {
    let tr = SpectralTruncation::new(a_minus, cutoff)?;
    let phi_mat = multiplication_operator(&a_minus.grid, phi);
    let dim = a_minus.dim();
    let mut mat = a_minus.matrix.clone();
    if tr.rank == dim {
        mat += &phi_mat;
    } else if tr.rank > 0 {
        let mut p = tr.projector.dot(&phi_mat).dot(&tr.projector);
        symmetrize(&mut p);
        mat += &p;
    }
    let op = HermitianOperator::new(mat, a_minus.grid.clone(), a_minus.m, format!("A_plus_truncated(cutoff={cutoff})"))?;
    Ok((op, tr))
}

/// `‖[A₋, Φ] + iΦ′‖_max`, measured in the plane-wave basis on the lower half
/// of the momentum band (`|k|, |k′| < k_max/2`). The full matrix is dominated
/// by aliasing of the product `Φ·f` at the band edge, which is not a property
/// of the continuum commutator.
pub fn commutator_residual(a_minus: &HermitianOperator, phi: &MatrixPotential) -> Result<f64> {
    if phi.m() != a_minus.m {
        return Err(LabError::DimensionMismatch { expected: a_minus.m, found: phi.m() });
    }
    let grid = &a_minus.grid;
    let (n, m) = (grid.len(), a_minus.m);
    let pm = multiplication_operator(grid, phi);
    let mut c = a_minus.matrix.dot(&pm) - pm.dot(&a_minus.matrix);
    c.scaled_add(Complex64::new(0.0, 1.0), &derivative_multiplication(grid, phi));
    let band = 0.5 * grid.max_momentum();
    let keep: Vec<bool> = (0..n).map(|q| grid.momentum(q).abs() < band).collect();
    let mut worst = 0.0_f64;
    for a in 0..m {
        for b in 0..m {
            let sub = Array2::from_shape_fn((n, n), |(j, l)| c[[j * m + a, l * m + b]]);
            let k = to_momentum_basis(grid, &sub);
            for q in 0..n {
                for p in 0..n {
                    if keep[q] && keep[p] {
                        worst = worst.max(k[[q, p]].norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Boundary closure for the 2×2 boosted-soliton operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GmwBoundary {
    /// Twisted when the profile changes sign across the box, periodic otherwise.
    #[default]
    Auto,
    Periodic,
    /// First component periodic, second antiperiodic.
    Twisted,
}

/// `i(d/dx)σ₃ + φ(x)·[[0, e^{iθ}], [e^{-iθ}, 0]]` for an arbitrary real profile.
///
/// A kink profile (`φ(-L/2) ≈ -φ(L/2)`) on a periodic box creates a spurious
/// anti-kink at the seam with its own zero mode; the twisted closure makes
/// the second component antiperiodic, which is consistent with the coupling
/// `φ·u₂` being periodic and removes the seam.
pub fn build_gmw_a_profile<F: Fn(f64) -> f64>(theta_angle: f64, grid: &Grid1D, phi: F, boundary: GmwBoundary) -> Result<HermitianOperator> {
    let n = grid.len();
    let base = grid.twisted(Boundary::Periodic);
    let twisted = match boundary {
        GmwBoundary::Periodic => false,
        GmwBoundary::Twisted => true,
        GmwBoundary::Auto => {
            let left = phi(base.node(0));
            let right = phi(base.node(n - 1) + base.spacing());
            left * right < 0.0
        }
    };
    let d1 = spectral_derivative(&base);
    let d2 = if twisted { spectral_derivative(&base.twisted(Boundary::Antiperiodic)) } else { d1.clone() };
    let zeta = Complex64::from_polar(1.0, theta_angle);
    let mut mat = Array2::zeros((2 * n, 2 * n));
    for j in 0..n {
        for l in 0..n {
            mat[[2 * j, 2 * l]] = -d1[[j, l]];
            mat[[2 * j + 1, 2 * l + 1]] = d2[[j, l]];
        }
        let f = phi(base.node(j));
        mat[[2 * j, 2 * j + 1]] = zeta * f;
        mat[[2 * j + 1, 2 * j]] = zeta.conj() * f;
    }
    let closure = if twisted { "twisted" } else { "periodic" };
    HermitianOperator::new(mat, base, 2, format!("gmw(theta={theta_angle}, {closure})"))
}

/// Boosted-soliton operator with `φ(t, x) = tanh(x cosθ + t sinθ)`.
pub fn build_gmw_a(theta_angle: f64, t: f64, grid: &Grid1D) -> Result<HermitianOperator> {
    check_gmw_angle(theta_angle)?;
    let (s, c) = theta_angle.sin_cos();
    build_gmw_a_profile(theta_angle, grid, |x| (x * c + t * s).tanh(), GmwBoundary::Auto)
}

/// Reject angles within `1e-3` of `0`, `π/2`, `π` or outside `(0, π)`.
pub fn check_gmw_angle(theta_angle: f64) -> Result<()> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let ok = theta_angle.is_finite()
        && theta_angle > 1e-3
        && theta_angle < PI - 1e-3
        && (theta_angle - FRAC_PI_2).abs() > 1e-3;
    if ok {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!(
            "boost angle must lie in (0, π) away from 0, π/2, π; got {theta_angle}"
        )))
    }
}
