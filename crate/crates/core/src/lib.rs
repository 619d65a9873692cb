//! Numerical spectral-shift laboratory for one-dimensional Dirac-type
//! operators `A₋ = -i d/dx ⊗ I_m` and `A₊ = A₋ + Φ`.
//!
//! The crate discretizes the operators on a uniform box, evaluates matrix
//! functions and trace differences by dense eigendecomposition, and checks
//! the results against independent routes (integral representations, gauge
//! transport, principal-value kernels, finite-dimensional spectral shift
//! oracles).

pub mod commutators;
mod error;
pub mod gauge;
pub mod gmw;
pub mod grid;
pub mod krein;
pub mod matfun;
pub mod model;
pub mod operators;
pub mod pvconv;

pub use error::{LabError, Result};
pub use num_complex::Complex64;

/// Shorthand for a complex number with zero imaginary part.
#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Max-abs entry of a complex matrix.
pub fn max_abs(m: &ndarray::Array2<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Conjugate transpose.
pub fn adjoint(m: &ndarray::Array2<Complex64>) -> ndarray::Array2<Complex64> {
    m.t().mapv(|z| z.conj())
}
