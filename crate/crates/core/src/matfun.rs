//! Matrix functions of Hermitian matrices by eigendecomposition, and the
//! half-line integral representation of `g_z` as an independent route.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ShapeBuilder};
use ndarray_linalg::{Eigh, EigValsh, Inverse, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{quad_halfline_sqrt, symmetrize, Grid1D, QuadRule};
use crate::operators::HermitianOperator;
use crate::{adjoint, re, LabError, Result};

/// Spectral decomposition `A = V diag(λ) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<Complex64>,
    pub label: String,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

pub fn eig_matrix(a: &Array2<Complex64>, label: impl Into<String>) -> Result<EigenSystem> {
    // The LAPACK wrapper returns conjugated eigenvectors for row-major complex
    // input; hand it a column-major copy.
    let mut f = Array2::zeros(a.raw_dim().f());
    f.assign(a);
    let (w, v) = f.eigh(UPLO::Lower)?;
    Ok(EigenSystem { eigenvalues: w, eigenvectors: v, label: label.into() })
}

/// Full eigendecomposition of a discretized operator.
///
/// Free operators use the exact plane-wave eigenpairs of the collocation
/// matrix; operators whose components do not couple are diagonalized one
/// component at a time. Everything else goes to dense LAPACK.
pub fn eig(a: &HermitianOperator) -> Result<EigenSystem> {
    if a.is_free() {
        return Ok(plane_wave_system(&a.grid, a.m, &a.label));
    }
    if a.m > 1 && components_decouple(a) {
        let (n, m) = (a.grid.len(), a.m);
        let mut pairs: Vec<(f64, usize, Array1<Complex64>)> = Vec::with_capacity(n * m);
        for c in 0..m {
            let es = eig_matrix(&component_block(a, c), "")?;
            for (k, &lam) in es.eigenvalues.iter().enumerate() {
                pairs.push((lam, c, es.eigenvectors.column(k).to_owned()));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut vecs = Array2::zeros((n * m, n * m));
        let mut vals = Array1::zeros(n * m);
        for (col, (lam, c, v)) in pairs.into_iter().enumerate() {
            vals[col] = lam;
            for j in 0..n {
                vecs[[j * m + c, col]] = v[j];
            }
        }
        return Ok(EigenSystem { eigenvalues: vals, eigenvectors: vecs, label: a.label.clone() });
    }
    eig_matrix(&a.matrix, a.label.clone())
}

/// Plane waves `e^{i k x_j}/√n ⊗ e_c`, ordered by ascending momentum.
fn plane_wave_system(grid: &Grid1D, m: usize, label: &str) -> EigenSystem {
    let n = grid.len();
    let mut order: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|q| (0..m).map(move |c| (q, c)))
        .map(|(q, c)| (grid.momentum(q), q, c))
        .collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
    let norm = 1.0 / (n as f64).sqrt();
    let mut vecs = Array2::zeros((n * m, n * m));
    for (col, &(k, _, c)) in order.iter().enumerate() {
        for j in 0..n {
            vecs[[j * m + c, col]] = Complex64::from_polar(norm, k * grid.node(j));
        }
    }
    EigenSystem {
        eigenvalues: order.iter().map(|o| o.0).collect(),
        eigenvectors: vecs,
        label: label.to_string(),
    }
}

fn components_decouple(a: &HermitianOperator) -> bool {
    let m = a.m;
    a.matrix
        .indexed_iter()
        .all(|((r, c), z)| r % m == c % m || *z == Complex64::new(0.0, 0.0))
}

fn component_block(a: &HermitianOperator, c: usize) -> Array2<Complex64> {
    let (n, m) = (a.grid.len(), a.m);
    Array2::from_shape_fn((n, n), |(j, l)| a.matrix[[j * m + c, l * m + c]])
}

/// Ascending eigenvalues only.
pub fn eigenvalues_matrix(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let mut f = Array2::zeros(a.raw_dim().f());
    f.assign(a);
    Ok(f.eigvalsh(UPLO::Lower)?.to_vec())
}

/// Ascending eigenvalues of a discretized operator (same shortcuts as [`eig`]).
pub fn eigenvalues(a: &HermitianOperator) -> Result<Vec<f64>> {
    if a.is_free() {
        let mut k: Vec<f64> = (0..a.grid.len())
            .flat_map(|q| std::iter::repeat_n(a.grid.momentum(q), a.m))
            .collect();
        k.sort_by(f64::total_cmp);
        return Ok(k);
    }
    if a.m > 1 && components_decouple(a) {
        let mut all = Vec::with_capacity(a.dim());
        for c in 0..a.m {
            all.extend(eigenvalues_matrix(&component_block(a, c))?);
        }
        all.sort_by(f64::total_cmp);
        return Ok(all);
    }
    eigenvalues_matrix(&a.matrix)
}

/// Scalar functions used in the functional calculus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "z", rename_all = "snake_case")]
pub enum SpectralFunction {
    Identity,
    Arctan,
    /// `sgn` with `sgn(0) = 0`.
    Sign,
    /// `g_z(x) = x (x² - z)^{-1/2}`, principal branch.
    Gz(Complex64),
    /// `(x - z)^{-1}`.
    Resolvent(Complex64),
}

impl SpectralFunction {
    /// `g = g_{-1}`.
    pub fn smooth_sign() -> Self {
        SpectralFunction::Gz(re(-1.0))
    }

    pub fn gz(z: f64) -> Self {
        SpectralFunction::Gz(re(z))
    }

    pub fn name(&self) -> String {
        match self {
            SpectralFunction::Identity => "identity".into(),
            SpectralFunction::Arctan => "arctan".into(),
            SpectralFunction::Sign => "sgn".into(),
            SpectralFunction::Gz(z) => format!("g_z(z={z})"),
            SpectralFunction::Resolvent(z) => format!("resolvent(z={z})"),
        }
    }

    /// Reject parameters for which the function is undefined somewhere on ℝ.
    pub fn validate(&self) -> Result<()> {
        if let SpectralFunction::Gz(z) = self {
            if z.im == 0.0 && z.re >= 0.0 {
                return Err(LabError::InvalidParameter(format!("g_z needs z outside [0, ∞), got {z}")));
            }
        }
        Ok(())
    }

    /// Value at a real point. For `g_z`, `x² - z` never meets the principal
    /// branch cut `(-∞, 0]` when `z ∉ [0, ∞)`, so the principal square root
    /// is continuous in `z` on the whole slit plane.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(match *self {
            SpectralFunction::Identity => re(x),
            SpectralFunction::Arctan => re(x.atan()),
            SpectralFunction::Sign => re(if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }),
            SpectralFunction::Gz(z) => {
                self.validate()?;
                x / (re(x * x) - z).sqrt()
            }
            SpectralFunction::Resolvent(z) => {
                let d = re(x) - z;
                if d.norm() < 1e-14 * (1.0 + x.abs()) {
                    return Err(LabError::SingularFunction(format!("resolvent at z = {z} hits eigenvalue {x}")));
                }
                d.inv()
            }
        })
    }
}

/// `V h(Λ) V†` for an arbitrary scalar function.
pub fn apply_fn<F: Fn(f64) -> Complex64>(es: &EigenSystem, h: F) -> Array2<Complex64> {
    let v = &es.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, &lam) in scaled.columns_mut().into_iter().zip(es.eigenvalues.iter()) {
        let f = h(lam);
        col.mapv_inplace(|z| z * f);
    }
    scaled.dot(&adjoint(v))
}

/// `h(A)` for one of the named spectral functions. The result is symmetrized
/// when `h` is real-valued on ℝ.
pub fn apply_function(es: &EigenSystem, h: &SpectralFunction) -> Result<Array2<Complex64>> {
    let vals: Vec<Complex64> = es.eigenvalues.iter().map(|&x| h.eval(x)).collect::<Result<_>>()?;
    let mut out = apply_fn_values(es, &vals);
    if vals.iter().all(|z| z.im == 0.0) {
        symmetrize(&mut out);
    }
    Ok(out)
}

fn apply_fn_values(es: &EigenSystem, vals: &[Complex64]) -> Array2<Complex64> {
    let v = &es.eigenvectors;
    let mut scaled = v.clone();
    for (mut col, f) in scaled.columns_mut().into_iter().zip(vals) {
        col.mapv_inplace(|z| z * f);
    }
    scaled.dot(&adjoint(v))
}

/// `g_z(A) = (1/π) ∫_0^∞ λ^{-1/2} A (A² - z + λ)^{-1} dλ` for real `z < 0`,
/// evaluated with matrix-valued quadrature and dense inverses.
pub fn gz_via_integral(a: &Array2<Complex64>, z: f64, rule: QuadRule) -> Result<Array2<Complex64>> {
    if !(z < 0.0) {
        return Err(LabError::InvalidParameter(format!("integral route needs z < 0, got {z}")));
    }
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut failure: Option<LabError> = None;
    let out = quad_halfline_sqrt(
        |lam: f64| {
            let mut m = a2.clone();
            for i in 0..n {
                m[[i, i]] += re(lam - z);
            }
            match m.inv() {
                Ok(inv) => inv.dot(a),
                Err(e) => {
                    failure.get_or_insert(e.into());
                    Array2::zeros((n, n))
                }
            }
        },
        rule,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut g = out.checked()?.mapv(|v| v / PI);
    symmetrize(&mut g);
    Ok(g)
}

/// `Σ_i h(a_i) - h(b_i)` over sorted spectra.
pub fn trace_diff_eigs(h: &SpectralFunction, a: &[f64], b: &[f64]) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(LabError::DimensionMismatch { expected: b.len(), found: a.len() });
    }
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let mut acc = re(0.0);
    for (x, y) in sa.iter().zip(&sb) {
        acc += h.eval(*x)? - h.eval(*y)?;
    }
    Ok(acc)
}

/// `tr h(A) - tr h(B)` via eigenvalue sums (no matrix subtraction).
pub fn trace_diff(h: &SpectralFunction, a: &HermitianOperator, b: &HermitianOperator) -> Result<Complex64> {
    trace_diff_eigs(h, &eigenvalues(a)?, &eigenvalues(b)?)
}
