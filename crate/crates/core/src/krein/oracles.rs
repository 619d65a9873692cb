//! Exact finite-dimensional spectral shift oracles: counting function,
//! perturbation determinant, boundary-phase SSF, square and rectangular
//! resolvent regularizations, and the Richardson limit used for the Witten
//! index.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::{Determinant, Inverse, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::matfun::eigenvalues_matrix;
use crate::{adjoint, re, LabError, Result};

/// `ξ(λ) = #{A₀ ≤ λ} - #{A ≤ λ}` from precomputed spectra.
pub fn counting_ssf_eigs(ev_a: &[f64], ev_a0: &[f64], lambda: f64) -> i64 {
    let count = |ev: &[f64]| ev.iter().filter(|&&e| e <= lambda).count() as i64;
    count(ev_a0) - count(ev_a)
}

/// Counting spectral shift function of the pair `(A, A₀)`.
pub fn counting_ssf(a: &Array2<Complex64>, a0: &Array2<Complex64>, lambda: f64) -> Result<i64> {
    check_square_pair(a, a0)?;
    Ok(counting_ssf_eigs(&eigenvalues_matrix(a)?, &eigenvalues_matrix(a0)?, lambda))
}

/// `∫ ξ(λ) h′(λ) dλ` for the piecewise-constant counting SSF, integrated in
/// closed form as `Σ ξ_k (h(b_{k+1}) - h(b_k))` over consecutive break points.
pub fn krein_stieltjes<H: Fn(f64) -> f64>(ev_a: &[f64], ev_a0: &[f64], h: H) -> f64 {
    let mut pts: Vec<f64> = ev_a.iter().chain(ev_a0).copied().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let xi = counting_ssf_eigs(ev_a, ev_a0, w[0]);
        if xi != 0 {
            acc += xi as f64 * (h(w[1]) - h(w[0]));
        }
    }
    acc
}

fn check_square_pair(a: &Array2<Complex64>, a0: &Array2<Complex64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.dim() != a0.dim() {
        return Err(LabError::DimensionMismatch { expected: a0.nrows(), found: a.nrows() });
    }
    Ok(())
}

fn shifted(a: &Array2<Complex64>, z: Complex64) -> Array2<Complex64> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[[i, i]] -= z;
    }
    m
}

fn det_c(m: &Array2<Complex64>) -> Result<Complex64> {
    Ok(m.det()?)
}

fn inv_c(m: &Array2<Complex64>, what: &str) -> Result<Array2<Complex64>> {
    m.inv().map_err(|e| LabError::SingularFunction(format!("{what}: {e}")))
}

/// `D̃(z; z₀) = det((A - z)(A - z̄₀)^{-1}(A₀ - z̄₀)(A₀ - z)^{-1})`.
pub fn perturbation_determinant(a: &Array2<Complex64>, a0: &Array2<Complex64>, z: Complex64, z0: Complex64) -> Result<Complex64> {
    check_square_pair(a, a0)?;
    if !(z0.im > 0.0) {
        return Err(LabError::InvalidParameter(format!("reference point needs Im z₀ > 0, got {z0}")));
    }
    let zb = z0.conj();
    let prod = shifted(a, z)
        .dot(&inv_c(&shifted(a, zb), "A - conj(z0)")?)
        .dot(&shifted(a0, zb))
        .dot(&inv_c(&shifted(a0, z), "A0 - z")?);
    det_c(&prod)
}

/// `tr[(A - z)^{-1} - (A₀ - z)^{-1}]`.
pub fn resolvent_trace_diff(a: &Array2<Complex64>, a0: &Array2<Complex64>, z: Complex64) -> Result<Complex64> {
    check_square_pair(a, a0)?;
    let ra = inv_c(&shifted(a, z), "A - z")?;
    let r0 = inv_c(&shifted(a0, z), "A0 - z")?;
    Ok(ra.diag().sum() - r0.diag().sum())
}

/// `-d/dz ln D̃` by a central difference of `ln(D̃(z+δ)/D̃(z-δ))`.
pub fn log_derivative_fd(a: &Array2<Complex64>, a0: &Array2<Complex64>, z: Complex64, z0: Complex64, delta: f64) -> Result<Complex64> {
    let dp = perturbation_determinant(a, a0, z + delta, z0)?;
    let dm = perturbation_determinant(a, a0, z - delta, z0)?;
    Ok(-(dp / dm).ln() / (2.0 * delta))
}

/// Boundary-value SSF `(2π)^{-1}[arg D̃(λ+iε) - arg D̃(λ-iε)]`.
///
/// Both arguments are followed continuously from the anchor
/// `μ₀ = min spec(A) ∪ spec(A₀) - 1`, where the SSF is 0 by construction,
/// along the rectangle `μ₀ ± iε → μ₀ ± i → λ ± i → λ ± iε`. Steps are kept
/// below `|Im z|/32`, so no factor of `D̃` turns by more than about 1/32 rad
/// per step and the integer ambiguity of the logarithm cannot be skipped;
/// a step whose phase increment still exceeds 0.5 rad is halved.
pub fn ssf_from_determinant(a: &Array2<Complex64>, a0: &Array2<Complex64>, lambda: f64, eps: f64) -> Result<f64> {
    check_square_pair(a, a0)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(LabError::InvalidParameter(format!("ε must lie in (0, 1), got {eps}")));
    }
    let lo = eigenvalues_matrix(a)?
        .into_iter()
        .chain(eigenvalues_matrix(a0)?)
        .fold(f64::INFINITY, f64::min);
    let anchor = lo - 1.0;
    if lambda <= anchor {
        return Ok(0.0);
    }
    let z0 = Complex64::new(0.0, 1.0);
    let d = |z: Complex64| perturbation_determinant(a, a0, z, z0);
    let mut theta = 0.0;
    for sign in [1.0, -1.0] {
        let c = |x: f64, y: f64| Complex64::new(x, sign * y);
        let path = [c(anchor, eps), c(anchor, 1.0), c(lambda, 1.0), c(lambda, eps)];
        theta += sign * track_arg(&d, &path)?;
    }
    Ok(theta / (2.0 * PI))
}

fn track_arg<F: Fn(Complex64) -> Result<Complex64>>(f: &F, path: &[Complex64]) -> Result<f64> {
    let mut total = 0.0;
    let mut prev = f(path[0])?;
    for seg in path.windows(2) {
        let (za, zb) = (seg[0], seg[1]);
        let len = (zb - za).norm();
        let mut s = 0.0;
        while s < len {
            let here = za + (zb - za) * (s / len);
            let mut step = (here.im.abs() / 32.0).min(len - s);
            loop {
                let next_s = if s + step >= len { len } else { s + step };
                let val = f(za + (zb - za) * (next_s / len))?;
                let inc = (val / prev).arg();
                if inc.abs() > 0.5 && step > 1e-14 * len {
                    step *= 0.5;
                    continue;
                }
                total += inc;
                prev = val;
                s = next_s;
                break;
            }
        }
    }
    Ok(total)
}

/// `tr[(DD† - z)^{-1}] - tr[(D†D - z)^{-1}]` for square `D`; zero because
/// `DD†` and `D†D` are isospectral.
pub fn square_truncation_obstruction(d: &Array2<Complex64>, z: Complex64) -> Result<Complex64> {
    if d.nrows() != d.ncols() {
        return Err(LabError::DimensionMismatch { expected: d.nrows(), found: d.ncols() });
    }
    let dd = d.dot(&adjoint(d));
    let ddt = adjoint(d).dot(d);
    let a = inv_c(&shifted(&dd, z), "DD† - z")?;
    let b = inv_c(&shifted(&ddt, z), "D†D - z")?;
    Ok(a.diag().sum() - b.diag().sum())
}

/// Possibly rectangular factor `T: ℂ^q → ℂ^p` (a `p × q` matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct RectFactor {
    pub matrix: Array2<Complex64>,
}

impl RectFactor {
    pub fn new(matrix: Array2<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn from_real(rows: &[&[f64]]) -> Self {
        let p = rows.len();
        let q = rows.first().map_or(0, |r| r.len());
        Self::new(Array2::from_shape_fn((p, q), |(i, j)| re(rows[i][j])))
    }

    /// `dim ker T - dim ker T†`, from the numerical rank.
    pub fn index(&self) -> Result<i64> {
        let (p, q) = self.matrix.dim();
        let rank = if p == 0 || q == 0 {
            0
        } else {
            let (_, s, _) = self.matrix.svd(false, false)?;
            let smax = s.iter().fold(0.0_f64, |a, &b| a.max(b));
            s.iter().filter(|&&x| x > 1e-12 * smax.max(1.0)).count()
        };
        Ok((q - rank) as i64 - (p - rank) as i64)
    }
}

/// `Δ_r(T, λ) = (-λ) tr[(T†T - λ)^{-1} - (TT† - λ)^{-1}]` for `λ < 0`.
pub fn delta_r(t: &RectFactor, lambda: f64) -> Result<f64> {
    if !(lambda < 0.0) {
        return Err(LabError::InvalidParameter(format!("λ must be negative, got {lambda}")));
    }
    let m = &t.matrix;
    let tt = adjoint(m).dot(m);
    let ttd = m.dot(&adjoint(m));
    let tr = |x: &Array2<Complex64>| -> Result<f64> {
        if x.nrows() == 0 {
            return Ok(0.0);
        }
        Ok(inv_c(&shifted(x, re(lambda)), "T†T - λ")?.diag().iter().map(|z| z.re).sum())
    };
    Ok(-lambda * (tr(&tt)? - tr(&ttd)?))
}

/// Richardson extrapolation of `Δ(λ_k)` along `λ_k ↑ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WittenLimit {
    pub value: f64,
    pub converged: bool,
    /// Leading extrapolant of each Richardson column.
    pub extrapolants: Vec<f64>,
}

/// Extrapolate `λ ↑ 0` from samples on a geometric ladder with ratio 2
/// (`λ_{k+1} = λ_k / 2`), using the last five points. Declared converged when
/// the last three extrapolants agree to `1e-6`.
pub fn witten_limit(samples: &[(f64, f64)]) -> Result<WittenLimit> {
    if samples.is_empty() {
        return Err(LabError::InvalidParameter("no samples".into()));
    }
    for w in samples.windows(2) {
        let r = w[0].0 / w[1].0;
        if !(w[0].0 < 0.0 && w[1].0 < 0.0 && (r - 2.0).abs() < 1e-9) {
            return Err(LabError::InvalidParameter("samples must lie on a ratio-2 ladder increasing to 0".into()));
        }
    }
    let tail = &samples[samples.len().saturating_sub(5)..];
    let mut col: Vec<f64> = tail.iter().map(|s| s.1).collect();
    let mut extrapolants = vec![*col.last().expect("non-empty")];
    let mut j = 1;
    while col.len() > 1 {
        let f = (1u64 << j) as f64 - 1.0;
        col = col.windows(2).map(|w| w[1] + (w[1] - w[0]) / f).collect();
        extrapolants.push(*col.last().expect("non-empty"));
        j += 1;
    }
    let value = *extrapolants.last().expect("non-empty");
    let k = extrapolants.len();
    let converged = k >= 3 && {
        let last = &extrapolants[k - 3..];
        let hi = last.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lo = last.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        hi - lo < 1e-6
    } || samples.iter().all(|s| s.1 == samples[0].1);
    Ok(WittenLimit { value, converged, extrapolants })
}

/// Ladder `λ_k = -2^{-k}`.
pub fn geometric_ladder(ks: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    ks.map(|k| -(2f64).powi(-k)).collect()
}
