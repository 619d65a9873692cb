//! Singular-value growth of `[ψ, g(D)]` versus `[ψ, sgn(D)]`, `D = -i d/dx`.
//!
//! Both functions of `D` are applied through their convolution kernels on
//! an open (non-periodic) box, sampled with the Nyström rule:
//!
//! * `sgn(D)`: `(i/π) p.v. 1/(x - y)`,
//! * `g(D) = D (D² + 1)^{-1/2}`: `(i/π) K₁(|x - y|) sgn(x - y)`,
//!
//! The commutator kernel `(ψ(x) - ψ(y)) k(x - y)` is continuous, with
//! diagonal value `(i/π) ψ′(x)`, which is what the Nyström diagonal holds. A
//! periodic box would glue the two different limits of `ψ` together and add
//! a jump that is not part of the experiment.

use std::f64::consts::PI;

use ndarray::Array2;
use ndarray_linalg::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gauge::scalar_transport;
use crate::grid::Grid1D;
use crate::model::MatrixPotential;
use crate::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorFunction {
    SmoothSignG,
    Sgn,
}

impl CommutatorFunction {
    pub fn name(self) -> &'static str {
        match self {
            CommutatorFunction::SmoothSignG => "smooth_sign_g",
            CommutatorFunction::Sgn => "sgn",
        }
    }

    /// Kernel value at separation `d ≠ 0`, without the `i/π` prefactor.
    fn kernel(self, d: f64) -> f64 {
        match self {
            CommutatorFunction::Sgn => 1.0 / d,
            CommutatorFunction::SmoothSignG => bessel_k1(d.abs()) * d.signum(),
        }
    }
}

/// Modified Bessel function `K₁(x)`, `x > 0`, from
/// `K₁(x) = ∫_0^∞ e^{-x cosh t} cosh t dt` with the trapezoid rule, which
/// converges geometrically for this analytic, double-exponentially decaying
/// integrand.
pub fn bessel_k1(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::INFINITY;
    }
    let step: f64 = 0.02;
    let mut sum = 0.5 * (-x).exp();
    let mut t = step;
    loop {
        let c = t.cosh();
        let e = x * c;
        if e > 745.0 {
            break;
        }
        sum += (-e).exp() * c;
        t += step;
    }
    sum * step
}

/// `∫_ℝ φ`, the total phase picked up by `ψ`.
pub fn total_phase(phi: &MatrixPotential, grid: &Grid1D) -> Result<f64> {
    if phi.m() != 1 {
        return Err(LabError::DimensionMismatch { expected: 1, found: phi.m() });
    }
    Ok(phi.integral_of_trace(grid))
}

/// Distance of the total phase from `2πℤ`.
pub fn quantization_distance(phi: &MatrixPotential, grid: &Grid1D) -> Result<f64> {
    let p = total_phase(phi, grid)?;
    Ok((p - 2.0 * PI * (p / (2.0 * PI)).round()).abs())
}

/// Toeplitz matrix of `f(D)` on the grid.
pub fn kernel_matrix(f: CommutatorFunction, grid: &Grid1D) -> Array2<Complex64> {
    let n = grid.len();
    let h = grid.spacing();
    let col: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { h / PI * f.kernel(k as f64 * h) }).collect();
    Array2::from_shape_fn((n, n), |(j, l)| {
        let v = if j >= l { col[j - l] } else { -col[l - j] };
        Complex64::new(0.0, v)
    })
}

/// `(ψ_j - ψ_l) K_jl`, diagonal `(ih/π) ψ′_j`.
fn commutator_from(psi: &[Complex64], dpsi: &[Complex64], k: &Array2<Complex64>, h: f64) -> Array2<Complex64> {
    Array2::from_shape_fn(k.dim(), |(j, l)| {
        if j == l {
            Complex64::new(0.0, h / PI) * dpsi[j]
        } else {
            (psi[j] - psi[l]) * k[[j, l]]
        }
    })
}

fn psi_samples(phi: &MatrixPotential, grid: &Grid1D) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let psi: Vec<Complex64> = scalar_transport(phi, grid, 0.0)?.matrices.iter().map(|m| m[[0, 0]]).collect();
    let dpsi = psi
        .iter()
        .enumerate()
        .map(|(j, &p)| Complex64::new(0.0, -phi.scalar(grid.node(j))) * p)
        .collect();
    Ok((psi, dpsi))
}

/// `[ψ, f(D)]` with `ψ(x) = exp(-i ∫_0^x φ)`. The total phase must stay at
/// least 0.1 away from `2πℤ`; an identically vanishing potential is let
/// through since its commutator is simply zero.
pub fn build_commutator(phi: &MatrixPotential, f: CommutatorFunction, grid: &Grid1D) -> Result<Array2<Complex64>> {
    let dist = quantization_distance(phi, grid)?;
    let vanishing = grid.nodes().iter().all(|&x| phi.scalar(x) == 0.0);
    if dist <= 0.1 && !vanishing {
        return Err(LabError::InvalidParameter(format!(
            "total phase is within {dist:.3} of 2πℤ; the commutator experiment needs a non-quantized phase"
        )));
    }
    let (psi, dpsi) = psi_samples(phi, grid)?;
    Ok(commutator_from(&psi, &dpsi, &kernel_matrix(f, grid), grid.spacing()))
}

/// Singular values, non-increasing.
pub fn singular_values(m: &Array2<Complex64>) -> Result<Vec<f64>> {
    let (_, s, _) = m.svd(false, false)?;
    let mut s = s.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRecord {
    pub n: usize,
    pub length: f64,
    /// `Σ_{k ≤ K} s_k` for `K = 1..=n`.
    pub partial_sums: Vec<f64>,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Stabilizing,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SVGrowthRecord {
    pub function: CommutatorFunction,
    pub spacing: f64,
    pub sizes: Vec<SizeRecord>,
    /// `total(n_{i+1}) / total(n_i) - 1`.
    pub relative_changes: Vec<f64>,
    /// Least-squares slope of the total against `ln n`.
    pub log_slope: f64,
    pub growth: Growth,
}

/// One size of the study: box `[-nh/2, nh/2)` with the fixed spacing `h`.
pub fn sv_size_record(phi: &MatrixPotential, f: CommutatorFunction, n: usize, spacing: f64) -> Result<SizeRecord> {
    let grid = Grid1D::new(n as f64 * spacing, n)?;
    let s = singular_values(&build_commutator(phi, f, &grid)?)?;
    let partial_sums: Vec<f64> = s
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let total = *partial_sums.last().unwrap_or(&0.0);
    Ok(SizeRecord { n, length: grid.length(), partial_sums, total })
}

/// Classify precomputed size records (ascending `n`, doubling).
/// Stabilizing: the last relative change is below 2%. Diverging: every
/// doubling adds more than 10% and the fitted slope is positive.
pub fn classify_growth(f: CommutatorFunction, spacing: f64, sizes: Vec<SizeRecord>) -> Result<SVGrowthRecord> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[1].n != 2 * w[0].n) {
        return Err(LabError::InvalidParameter("sizes must be at least two successive doublings".into()));
    }
    let relative_changes: Vec<f64> = sizes
        .windows(2)
        .map(|w| if w[0].total == 0.0 { 0.0 } else { w[1].total / w[0].total - 1.0 })
        .collect();
    let xs: Vec<f64> = sizes.iter().map(|s| (s.n as f64).ln()).collect();
    let ys: Vec<f64> = sizes.iter().map(|s| s.total).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let log_slope = sxy / sxx;
    let last = *relative_changes.last().expect("two sizes");
    let growth = if last.abs() < 0.02 {
        Growth::Stabilizing
    } else if relative_changes.iter().all(|&c| c > 0.10) && log_slope > 0.0 {
        Growth::Diverging
    } else {
        Growth::Inconclusive
    };
    Ok(SVGrowthRecord { function: f, spacing, sizes, relative_changes, log_slope, growth })
}

pub fn sv_growth_study(phi: &MatrixPotential, f: CommutatorFunction, sizes: &[usize], spacing: f64) -> Result<SVGrowthRecord> {
    let recs = sizes.iter().map(|&n| sv_size_record(phi, f, n, spacing)).collect::<Result<Vec<_>>>()?;
    classify_growth(f, spacing, recs)
}
