//! Ginzburg–Landau solitons and the boosted-soliton Dirac operator
//! `A(t) = i(d/dx)σ₃ + φ(t, x)·[[0, e^{iθ}], [e^{-iθ}, 0]]`,
//! `φ(t, x) = tanh(x cosθ + t sinθ)`.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{differentiate, Grid1D};
use crate::matfun::eigenvalues;
use crate::operators::{build_gmw_a, build_gmw_a_profile, check_gmw_angle, GmwBoundary};
use crate::{LabError, Result};

fn check_modulus(k: f64) -> Result<()> {
    if (0.0..=1.0).contains(&k) {
        Ok(())
    } else {
        Err(LabError::InvalidParameter(format!("elliptic modulus must lie in [0, 1], got {k}")))
    }
}

/// Complete elliptic integral `K(k) = π / (2 AGM(1, √(1-k²)))`.
pub fn elliptic_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    if k == 1.0 {
        return Ok(f64::INFINITY);
    }
    let (mut a, mut b) = (1.0_f64, (1.0 - k * k).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    Ok(PI / (2.0 * a))
}

/// Jacobi `sn(u; k)` by the descending Landen (AGM) scheme.
pub fn jacobi_sn(u: f64, k: f64) -> Result<f64> {
    check_modulus(k)?;
    if k == 1.0 {
        return Ok(u.tanh());
    }
    let mut a = vec![1.0_f64];
    let mut c = vec![k];
    let mut b = (1.0 - k * k).sqrt();
    while c.last().expect("non-empty").abs() > f64::EPSILON * a.last().expect("non-empty") && a.len() < 64 {
        let an = *a.last().expect("non-empty");
        c.push(0.5 * (an - b));
        a.push(0.5 * (an + b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    Ok(phi.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolitonKind {
    Tanh,
    Sn { k: f64 },
}

/// Solution of `ξ² ψ″ = ψ³ - ψ`:
/// `ψ(x) = √(2k²/(1+k²)) sn((x - x₀)/(ξ√(1+k²)); k)`, which is
/// `tanh((x - x₀)/(√2 ξ))` at `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonProfile {
    pub kind: SolitonKind,
    pub xi_gl: f64,
    #[serde(default)]
    pub x0: f64,
}

impl SolitonProfile {
    pub fn tanh(xi_gl: f64) -> Self {
        Self { kind: SolitonKind::Tanh, xi_gl, x0: 0.0 }
    }

    pub fn sn(k: f64, xi_gl: f64) -> Result<Self> {
        check_modulus(k)?;
        Ok(Self { kind: SolitonKind::Sn { k }, xi_gl, x0: 0.0 })
    }

    pub fn modulus(&self) -> f64 {
        match self.kind {
            SolitonKind::Tanh => 1.0,
            SolitonKind::Sn { k } => k,
        }
    }

    fn amplitude_and_scale(&self) -> (f64, f64) {
        let k = self.modulus();
        ((2.0 * k * k / (1.0 + k * k)).sqrt(), self.xi_gl * (1.0 + k * k).sqrt())
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let y = x - self.x0;
        match self.kind {
            SolitonKind::Tanh => Ok((y / (2f64.sqrt() * self.xi_gl)).tanh()),
            SolitonKind::Sn { k } => {
                let (amp, scale) = self.amplitude_and_scale();
                Ok(amp * jacobi_sn(y / scale, k)?)
            }
        }
    }

    /// Spatial period `4K(k)·ξ√(1+k²)`; infinite for the kink.
    pub fn period(&self) -> Result<f64> {
        let (_, scale) = self.amplitude_and_scale();
        Ok(4.0 * elliptic_k(self.modulus())? * scale)
    }

    /// Grid matched to the profile: `periods` whole periods for `sn`
    /// (periodic), or an antiperiodic box of length `length` for the kink.
    pub fn natural_grid(&self, periods: usize, length: f64, n: usize) -> Result<Grid1D> {
        match self.kind {
            SolitonKind::Tanh => Grid1D::with_boundary(length, n, crate::grid::Boundary::Antiperiodic),
            SolitonKind::Sn { k } if k < 1.0 => Grid1D::new(periods as f64 * self.period()?, n),
            SolitonKind::Sn { .. } => Grid1D::with_boundary(length, n, crate::grid::Boundary::Antiperiodic),
        }
    }
}

/// `max |ξ²ψ″ - ψ³ + ψ|` over the central half of the box, `ψ″` spectral.
pub fn gl_residual_samples(values: &[f64], xi_gl: f64, grid: &Grid1D) -> f64 {
    let d2 = differentiate(grid, values, 2);
    let n = grid.len();
    let l = grid.length();
    (0..n)
        .filter(|&j| grid.node(j).abs() <= l / 4.0)
        .map(|j| {
            let p = values[j];
            (xi_gl * xi_gl * d2[j] - p * p * p + p).abs()
        })
        .fold(0.0, f64::max)
}

pub fn gl_residual(profile: &SolitonProfile, grid: &Grid1D) -> Result<f64> {
    let vals = grid.nodes().iter().map(|&x| profile.value(x)).collect::<Result<Vec<f64>>>()?;
    Ok(gl_residual_samples(&vals, profile.xi_gl, grid))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMWConfig {
    pub theta: f64,
    pub t: f64,
    pub grid: Grid1D,
}

impl GMWConfig {
    pub fn new(theta: f64, t: f64, grid: Grid1D) -> Result<Self> {
        check_gmw_angle(theta)?;
        Ok(Self { theta, t, grid })
    }

    /// `φ(t, x)`.
    pub fn phi(&self, x: f64) -> f64 {
        let (s, c) = self.theta.sin_cos();
        (x * c + self.t * s).tanh()
    }
}

#[derive(Debug, Clone)]
pub struct ZeroMode {
    /// Node-major samples `(ψ₁(x_j), ψ₂(x_j))`, unit ℓ² norm.
    pub vector: Array1<Complex64>,
    /// `‖A(t)ψ‖ / ‖ψ‖`.
    pub residual: f64,
}

/// `ψ₁ = cosh(u)^{∓1/cosθ}`, `ψ₂ = ±i e^{-iθ} ψ₁` with `u = x cosθ + t sinθ`;
/// the upper sign for `cosθ > 0`, so that the mode decays on both sides.
pub fn zero_mode(cfg: &GMWConfig) -> Result<ZeroMode> {
    check_gmw_angle(cfg.theta)?;
    let (s, c) = cfg.theta.sin_cos();
    if c.abs() < 0.05 {
        return Err(LabError::InvalidParameter(format!("|cos θ| = {:.3} < 0.05: zero-mode exponent overflows", c.abs())));
    }
    let sign = c.signum();
    let expo = -1.0 / c.abs();
    let coupling = Complex64::new(0.0, sign) * Complex64::from_polar(1.0, -cfg.theta);
    let grid = &cfg.grid;
    let n = grid.len();
    let mut v = Array1::<Complex64>::zeros(2 * n);
    for j in 0..n {
        let u = grid.node(j) * c + cfg.t * s;
        // cosh(u)^p evaluated as exp(p ln cosh u) with a stable ln cosh.
        let lc = u.abs() + (-2.0 * u.abs()).exp().ln_1p() - std::f64::consts::LN_2;
        let p1 = (expo * lc).exp();
        v[2 * j] = Complex64::new(p1, 0.0);
        v[2 * j + 1] = coupling * p1;
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|z| z / norm);
    let a = build_gmw_a(cfg.theta, cfg.t, grid)?;
    let av = a.matrix.dot(&v);
    let residual = av.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(ZeroMode { vector: v, residual })
}

/// Eigenvalues of `A(t)` inside `(-1/4, 1/4)`, a quarter of the essential gap.
pub fn kernel_dimension_probe(cfg: &GMWConfig) -> Result<usize> {
    let a = build_gmw_a(cfg.theta, cfg.t, &cfg.grid)?;
    Ok(count_small(&eigenvalues(&a)?, 0.25))
}

/// Same count for the asymptotic operator with `φ ≡ value`.
pub fn constant_profile_count(theta: f64, value: f64, grid: &Grid1D, window: f64) -> Result<usize> {
    check_gmw_angle(theta)?;
    let a = build_gmw_a_profile(theta, grid, |_| value, GmwBoundary::Periodic)?;
    Ok(count_small(&eigenvalues(&a)?, window))
}

fn count_small(ev: &[f64], window: f64) -> usize {
    ev.iter().filter(|e| e.abs() < window).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BprimeRow {
    pub t: f64,
    /// `sup_x |φ_t(t, x)|`.
    pub sup_norm: f64,
    /// `‖B′(t)(|A₋| + I)^{-1}‖²_F` of the full 2×2-block matrix.
    pub hs2_block: f64,
    /// The same with the unitary 2×2 factor divided out (`hs2_block / 2`).
    pub hs2_scalar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BprimeReport {
    pub theta: f64,
    pub rows: Vec<BprimeRow>,
    pub sup_predicted: f64,
    pub hs2_predicted: f64,
    pub sup_spread: f64,
    pub hs2_spread: f64,
}

/// `(4/3π) sin²θ / |cosθ|`.
pub fn hs2_prediction(theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    4.0 / (3.0 * PI) * s * s / c.abs()
}

fn sup_refined<F: Fn(f64) -> f64>(grid: &Grid1D, f: F) -> f64 {
    let n = grid.len();
    let (jmax, _) = (0..n).map(|j| (j, f(grid.node(j)))).fold((0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    let h = grid.spacing();
    let (mut a, mut b) = (grid.node(jmax) - h, grid.node(jmax) + h);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let (x1, x2) = (b - r * (b - a), a + r * (b - a));
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    f(0.5 * (a + b)).max(f(grid.node(jmax)))
}

/// `‖B′(t)‖ = sup |φ_t|` (grid maximum refined by golden section between
/// neighbouring nodes) and the Frobenius norm of `B′(t)(|A₋| + I)^{-1}`.
///
/// With `U` the unitary DFT, `‖diag(a) U diag(b) U†‖²_F = Σ_j Σ_q |a_j|²|b_q|²/n`;
/// the off-diagonal phase matrix contributes a factor `‖·‖²_F = 2`.
pub fn bprime_norm_identities(theta: f64, t_list: &[f64], grid: &Grid1D) -> Result<BprimeReport> {
    check_gmw_angle(theta)?;
    let (s, c) = theta.sin_cos();
    let n = grid.len();
    let mult: f64 = grid.momenta().iter().map(|k| (k.abs() + 1.0).powi(-2)).sum::<f64>() / n as f64;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let phi_t = |x: f64| {
            let ch = (x * c + t * s).cosh();
            (s / (ch * ch)).abs()
        };
        let sup_norm = sup_refined(grid, phi_t);
        let a2: f64 = (0..n).map(|j| phi_t(grid.node(j)).powi(2)).sum();
        let hs2_scalar = a2 * mult;
        rows.push(BprimeRow { t, sup_norm, hs2_block: 2.0 * hs2_scalar, hs2_scalar });
    }
    let spread = |v: Vec<f64>| {
        let hi = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lo = v.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        if hi > 0.0 { (hi - lo) / hi } else { 0.0 }
    };
    Ok(BprimeReport {
        theta,
        sup_spread: spread(rows.iter().map(|r| r.sup_norm).collect()),
        hs2_spread: spread(rows.iter().map(|r| r.hs2_scalar).collect()),
        rows,
        sup_predicted: s,
        hs2_predicted: hs2_prediction(theta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{fourier_multiplier, make_grid};
    use crate::{max_abs, re};
    use ndarray::Array2;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sn_limits_and_period() {
        for i in 0..=100 {
            let u = -5.0 + 0.1 * i as f64;
            assert!((jacobi_sn(u, 0.0).unwrap() - u.sin()).abs() < 1e-12);
            assert_eq!(jacobi_sn(u, 1.0).unwrap(), u.tanh());
        }
        for k in [0.0, 0.3, 0.9, 0.999, 1.0] {
            assert_eq!(jacobi_sn(0.0, k).unwrap(), 0.0);
        }
        assert!((elliptic_k(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        // K(1/√2) = Γ(1/4)²/(4√π).
        assert!((elliptic_k(0.5f64.sqrt()).unwrap() - 1.854_074_677_301_372).abs() < 1e-13);
        let kk = elliptic_k(0.5).unwrap();
        for u in [0.1, 0.7, 1.9, -2.4] {
            assert!((jacobi_sn(u + 4.0 * kk, 0.5).unwrap() - jacobi_sn(u, 0.5).unwrap()).abs() < 1e-8);
            assert!((jacobi_sn(u + 2.0 * kk, 0.5).unwrap() + jacobi_sn(u, 0.5).unwrap()).abs() < 1e-8);
        }
        assert!((jacobi_sn(kk, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!(jacobi_sn(0.3, 1.2).is_err());
    }

    #[test]
    fn gl_residuals() {
        let tanh = SolitonProfile::tanh(0.5f64.sqrt());
        let g = tanh.natural_grid(0, 40.0, 1024).unwrap();
        assert!(gl_residual(&tanh, &g).unwrap() < 1e-8);
        let sn = SolitonProfile::sn(0.9, 0.5f64.sqrt()).unwrap();
        let g = sn.natural_grid(4, 0.0, 512).unwrap();
        assert!(gl_residual(&sn, &g).unwrap() < 1e-6, "{}", gl_residual(&sn, &g).unwrap());
        assert!(sn.value(0.3).unwrap().abs() <= 1.0);
        assert_eq!(gl_residual_samples(&vec![0.0; 64], 1.0, &make_grid(10.0, 64).unwrap()), 0.0);
        // Wrong amplitude is not a solution.
        let vals: Vec<f64> = g.nodes().iter().map(|&x| 0.9 * sn.value(x).unwrap()).collect();
        assert!(gl_residual_samples(&vals, sn.xi_gl, &g) > 1e-2);
    }

    #[test]
    fn zero_modes() {
        let grid = make_grid(60.0, 1024).unwrap();
        for (theta, t) in [(PI / 3.0, 0.0), (PI / 3.0, 2.0), (2.0 * PI / 3.0, 0.0), (PI / 4.0, 1.0)] {
            let zm = zero_mode(&GMWConfig::new(theta, t, grid.clone()).unwrap()).unwrap();
            assert!(zm.residual < 1e-5, "θ={theta} t={t}: {}", zm.residual);
        }
        let zm = zero_mode(&GMWConfig::new(PI / 3.0, 0.0, grid.clone()).unwrap()).unwrap();
        let (j, j0) = (grid.nearest_node(3.0), grid.nearest_node(0.0));
        let want = (grid.node(j) / 2.0).cosh().powi(-2) / (grid.node(j0) / 2.0).cosh().powi(-2);
        assert!((zm.vector[2 * j + 1].norm() / zm.vector[2 * j0].norm() - want).abs() < 1e-12);
        assert!(zero_mode(&GMWConfig::new(FRAC_PI_2 - 0.01, 0.0, grid).unwrap()).is_err());
        assert!(GMWConfig::new(FRAC_PI_2, 0.0, make_grid(10.0, 16).unwrap()).is_err());
    }

    #[test]
    fn zero_mode_residual_decreases_with_refinement() {
        // On L = 60 the mode is ~e^{-30} at the box ends, far below these residuals.
        let r: Vec<f64> = [64usize, 128, 256]
            .iter()
            .map(|&n| zero_mode(&GMWConfig::new(PI / 3.0, 0.5, make_grid(60.0, n).unwrap()).unwrap()).unwrap().residual)
            .collect();
        assert!(r[1] < r[0] && r[2] < r[1], "{r:?}");
    }

    #[test]
    fn kernel_counts() {
        let grid = make_grid(60.0, 512).unwrap();
        assert_eq!(kernel_dimension_probe(&GMWConfig::new(PI / 3.0, 0.0, grid.clone()).unwrap()).unwrap(), 1);
        assert_eq!(kernel_dimension_probe(&GMWConfig::new(PI / 4.0, 1.0, grid.clone()).unwrap()).unwrap(), 1);
        let small = make_grid(30.0, 128).unwrap();
        assert_eq!(constant_profile_count(PI / 3.0, 1.0, &small, 0.9).unwrap(), 0);
        assert_eq!(constant_profile_count(PI / 3.0, -1.0, &small, 0.9).unwrap(), 0);
    }

    #[test]
    fn bprime_identities() {
        let grid = make_grid(60.0, 8192).unwrap();
        let r = bprime_norm_identities(PI / 6.0, &[-2.0, 0.0, 2.0], &grid).unwrap();
        assert!(r.rows.iter().all(|row| (row.sup_norm - 0.5).abs() < 1e-3));
        assert!(r.sup_spread < 1e-3 && r.hs2_spread < 1e-3);
        let r = bprime_norm_identities(PI / 4.0, &[-2.0, 0.0, 2.0], &grid).unwrap();
        assert!((r.hs2_predicted - 0.300_105).abs() < 1e-5);
        for row in &r.rows {
            assert!((row.hs2_scalar / r.hs2_predicted - 1.0).abs() < 0.02, "{row:?}");
            assert_eq!(row.hs2_block, 2.0 * row.hs2_scalar);
        }
    }

    #[test]
    fn closed_form_frobenius_matches_dense_build() {
        let grid = make_grid(12.0, 32).unwrap();
        let theta = PI / 3.0;
        let (s, c) = theta.sin_cos();
        let t = 0.4;
        let n = grid.len();
        let inv = fourier_multiplier(&grid, |k| re(1.0 / (k.abs() + 1.0)));
        let zeta = Complex64::from_polar(1.0, theta);
        let mut b = Array2::<Complex64>::zeros((2 * n, 2 * n));
        let mut resolv = Array2::<Complex64>::zeros((2 * n, 2 * n));
        for j in 0..n {
            let ch = (grid.node(j) * c + t * s).cosh();
            let f = s / (ch * ch);
            b[[2 * j, 2 * j + 1]] = zeta * f;
            b[[2 * j + 1, 2 * j]] = zeta.conj() * f;
            for l in 0..n {
                resolv[[2 * j, 2 * l]] = inv[[j, l]];
                resolv[[2 * j + 1, 2 * l + 1]] = inv[[j, l]];
            }
        }
        let prod = b.dot(&resolv);
        let dense: f64 = prod.iter().map(|z| z.norm_sqr()).sum();
        let r = bprime_norm_identities(theta, &[t], &grid).unwrap();
        assert!((dense - r.rows[0].hs2_block).abs() < 1e-12 * dense);
        assert!(max_abs(&prod) > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn sn_bounded_and_odd(u in -20.0f64..20.0, k in 0.0f64..1.0) {
            let v = jacobi_sn(u, k).unwrap();
            prop_assert!(v.abs() <= 1.0 + 1e-15);
            prop_assert!((v + jacobi_sn(-u, k).unwrap()).abs() < 1e-12);
        }
    }
}
