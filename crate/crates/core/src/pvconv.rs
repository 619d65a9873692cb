//! Principal-value convolution realization of `arctan(D)`, the `Q_t`
//! regularization, and the explicit kernels of `arctan(A₊) - arctan(A₋)`.
//!
//! `arctan(D)η = -(1/2i) p.v. (e^{-|x|}/x) * η`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gauge::GaugeTransport;
use crate::grid::Grid1D;
use crate::model::MatrixPotential;
use crate::{adjoint, LabError, Result};

/// `-(1/2i) = i/2`.
const PREFACTOR: Complex64 = Complex64::new(0.0, 0.5);

#[derive(Debug, Clone)]
pub struct PVKernel {
    pub grid: Grid1D,
    pub matrix: Array2<Complex64>,
}

impl PVKernel {
    pub fn apply(&self, v: &Array1<Complex64>) -> Array1<Complex64> {
        self.matrix.dot(v)
    }
}

/// Discretized `η ↦ -(1/2i) p.v.(e^{-|x|}/x) * η` on the box (no wrap).
///
/// Off the diagonal `M[j,l] = -(1/2i)·h·e^{-|x_j-x_l|}/(x_j-x_l)`; the
/// diagonal is zero. Pairing `l = j ± r` turns the p.v. integral into a
/// trapezoid sum over `t > 0` whose `t = 0` end term `-h η′(x_j)` is dropped
/// by the zero diagonal. It is restored with a centered difference, which
/// puts `∓1/(4i)` on the first off-diagonals and keeps `M` Hermitian.
pub fn pv_convolution_matrix(grid: &Grid1D) -> PVKernel {
    let n = grid.len();
    let h = grid.spacing();
    let mut m = Array2::from_shape_fn((n, n), |(j, l)| {
        if j == l {
            Complex64::new(0.0, 0.0)
        } else {
            let d = grid.node(j) - grid.node(l);
            PREFACTOR * (h * (-d.abs()).exp() / d)
        }
    });
    let corr = Complex64::new(0.0, -0.25);
    for j in 0..n - 1 {
        m[[j, j + 1]] += corr;
        m[[j + 1, j]] -= corr;
    }
    PVKernel { grid: grid.clone(), matrix: m }
}

/// `Q_t(x) = x e^{-|x|} / (t² + x²)`.
pub fn q_t(t: f64, x: f64) -> f64 {
    x * (-x.abs()).exp() / (t * t + x * x)
}

/// Unitary Fourier transform `(2π)^{-1/2} ∫ Q_t(x) e^{-isx} dx` by the
/// rectangle rule on the grid nodes.
pub fn q_t_transform(t: f64, grid: &Grid1D, s: f64) -> Complex64 {
    let h = grid.spacing();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..grid.len() {
        let x = grid.node(j);
        acc += Complex64::from_polar(q_t(t, x), -s * x);
    }
    acc * (h / (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QtCheck {
    pub t: f64,
    /// Frequencies examined: lattice momenta with `|s| ≤ s_window`.
    pub s_window: f64,
    pub points: usize,
    /// `max_s |F(Q_t)(s) + (2i/√(2π)) arctan s|`.
    pub deviation: f64,
    /// `max_s |Re F(Q_t)(s)|` (zero by oddness).
    pub max_real_part: f64,
}

/// Compare `F(Q_t)` with its `t → 0` limit `-(2i/√(2π)) arctan s`.
///
/// The limit holds pointwise, not uniformly: for fixed `t`, `F(Q_t)(s) → 0`
/// as `s → ∞` while `arctan s → π/2`, so the sup over the whole lattice stays
/// near `√(π/2)`. The check is therefore taken on `|s| ≤ s_window`.
pub fn qt_fourier_check(t: f64, grid: &Grid1D, s_window: f64) -> Result<QtCheck> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(LabError::InvalidParameter(format!("t must lie in (0, 1], got {t}")));
    }
    let c = 2.0 / (2.0 * PI).sqrt();
    let mut deviation = 0.0_f64;
    let mut max_real_part = 0.0_f64;
    let mut points = 0;
    for s in grid.sorted_momenta() {
        if s.abs() > s_window {
            continue;
        }
        points += 1;
        let f = q_t_transform(t, grid, s);
        max_real_part = max_real_part.max(f.re.abs());
        deviation = deviation.max((f + Complex64::new(0.0, c * s.atan())).norm());
    }
    Ok(QtCheck { t, s_window, points, deviation, max_real_part })
}

/// Kernel matrix of `arctan(A₊) - arctan(A₋)` and its diagonal trace.
#[derive(Debug, Clone)]
pub struct ArctanKernel {
    /// `h·K(x_j, x_l)` blocks in node-major order.
    pub matrix: Array2<Complex64>,
    pub trace: f64,
    /// `(1/2)∫ tr Φ`.
    pub predicted: f64,
    /// `max |K(x,y)| / ((1/2)‖Φ‖_∞ e^{-|x-y|})` over off-diagonal node pairs.
    pub bound_ratio: f64,
}

/// `K(x,y) = -(1/2i) e^{-|x-y|}/(x-y) · (Ψ(x)Ψ(y)† - I)`, the kernel of
/// `Ψ arctan(A₋) Ψ† - arctan(A₋)`. On the diagonal the limit is
/// `-(1/2i) Ψ′(x)Ψ(x)† = Φ(x)/2`, with `Ψ′ = -iΦΨ` taken from the transport
/// equation rather than a finite difference.
pub fn arctan_diff_kernel_general(phi: &MatrixPotential, psi: &GaugeTransport, grid: &Grid1D) -> Result<ArctanKernel> {
    let m = phi.m();
    if psi.m() != m || psi.matrices.len() != grid.len() {
        return Err(LabError::DimensionMismatch { expected: m, found: psi.m() });
    }
    let n = grid.len();
    let h = grid.spacing();
    let mut mat = Array2::zeros((n * m, n * m));
    let mut trace = 0.0;
    let mut sup_phi = 0.0_f64;
    let minus_i = Complex64::new(0.0, -1.0);
    for j in 0..n {
        let pj = &psi.matrices[j];
        let dpj = phi.sample(grid.node(j)).dot(pj).mapv(|z| z * minus_i);
        let diag = dpj.dot(&adjoint(pj)).mapv(|z| z * PREFACTOR);
        for a in 0..m {
            for b in 0..m {
                mat[[j * m + a, j * m + b]] = diag[[a, b]] * h;
            }
            trace += h * diag[[a, a]].re;
        }
        sup_phi = sup_phi.max(phi.sample(grid.node(j)).iter().fold(0.0_f64, |s, z| s.max(z.norm())));
    }
    let mut bound_ratio = 0.0_f64;
    for j in 0..n {
        for l in 0..n {
            if j == l {
                continue;
            }
            let d = grid.node(j) - grid.node(l);
            let w = PREFACTOR * ((-d.abs()).exp() / d);
            let mut blk = psi.matrices[j].dot(&adjoint(&psi.matrices[l]));
            for a in 0..m {
                blk[[a, a]] -= Complex64::new(1.0, 0.0);
            }
            for a in 0..m {
                for b in 0..m {
                    let k = w * blk[[a, b]];
                    mat[[j * m + a, l * m + b]] = k * h;
                    if sup_phi > 0.0 {
                        bound_ratio = bound_ratio.max(k.norm() / (0.5 * sup_phi * (-d.abs()).exp()));
                    }
                }
            }
        }
    }
    let predicted = 0.5 * phi.integral_of_trace(grid);
    Ok(ArctanKernel { matrix: mat, trace, predicted, bound_ratio })
}

/// Scalar case (`m = 1`).
pub fn arctan_diff_kernel(phi: &MatrixPotential, psi: &GaugeTransport, grid: &Grid1D) -> Result<ArctanKernel> {
    if phi.m() != 1 {
        return Err(LabError::DimensionMismatch { expected: 1, found: phi.m() });
    }
    arctan_diff_kernel_general(phi, psi, grid)
}

/// `Σ_k h Σ_j K_k(x_j, x_j)` with `K_k(x,x) = -(1/2i) Σ_l Ψ′_{kl} conj(Ψ_{kl})`,
/// returned with its prediction `(1/2)∫ tr Φ`.
pub fn arctan_diff_kernel_matrix_case(phi: &MatrixPotential, psi: &GaugeTransport, grid: &Grid1D) -> Result<(f64, f64)> {
    let m = phi.m();
    if psi.m() != m {
        return Err(LabError::DimensionMismatch { expected: m, found: psi.m() });
    }
    let h = grid.spacing();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut trace = 0.0;
    for (j, p) in psi.matrices.iter().enumerate() {
        let dp = phi.sample(grid.node(j)).dot(p).mapv(|z| z * minus_i);
        for k in 0..m {
            let s: Complex64 = (0..m).map(|l| dp[[k, l]] * p[[k, l]].conj()).sum();
            trace += h * (PREFACTOR * s).re;
        }
    }
    Ok((trace, 0.5 * phi.integral_of_trace(grid)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{bump_panel, transport};
    use crate::grid::{apply_multiplier, make_grid};
    use crate::matfun::{apply_function, eig, trace_diff, SpectralFunction};
    use crate::model::{gaussian_potential, sech2_potential, Shape};
    use crate::operators::{add_potential, build_a_minus};
    use crate::{max_abs, re};

    fn rel(a: &Array1<Complex64>, b: &Array1<Complex64>) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        d / b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn kernel_structure() {
        let g = make_grid(40.0, 256).unwrap();
        let k = pv_convolution_matrix(&g);
        assert!(max_abs(&(&k.matrix - &adjoint(&k.matrix))) < 1e-13);
        let ones = Array1::from_elem(256, re(1.0));
        let out = k.apply(&ones);
        // Only the unpaired end node x = -L/2 contributes (≈ h e^{-20}/40).
        assert!(out[128].norm() < 1e-9);
        // Entry at separation 10.
        let l = 128 + (10.0 / g.spacing()).round() as usize;
        assert!(k.matrix[[l, 128]].norm() / g.spacing() < (-10.0f64).exp() / 10.0 + 1e-12);
        let rows = k.matrix.rows().into_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        assert!(rows.is_finite());
    }

    #[test]
    fn convolution_matches_arctan_multiplier() {
        let g = make_grid(40.0, 1024).unwrap();
        let k = pv_convolution_matrix(&g);
        let es = eig(&build_a_minus(&g, 1).unwrap()).unwrap();
        let at = apply_function(&es, &SpectralFunction::Arctan).unwrap();
        for v in bump_panel(&g, 1) {
            let a = k.apply(&v);
            let b = at.dot(&v);
            assert!(rel(&a, &b) < 1e-3, "{}", rel(&a, &b));
            let c: Array1<Complex64> = apply_multiplier(&g, |s| re(s.atan()), &v.to_vec()).into();
            assert!(rel(&c, &b) < 1e-10);
        }
    }

    #[test]
    fn qt_limit_on_a_window() {
        let g = make_grid(80.0, 4096).unwrap();
        let d: Vec<QtCheck> = [0.5, 0.1, 0.05, 0.02, 0.01].iter().map(|&t| qt_fourier_check(t, &g, 0.5).unwrap()).collect();
        assert!(d.windows(2).all(|w| w[1].deviation < w[0].deviation), "{d:?}");
        assert!(d[4].deviation < 2e-2);
        assert!(d.iter().all(|c| c.max_real_part < 1e-10));
        assert!(qt_fourier_check(0.0, &g, 0.5).is_err());
    }

    #[test]
    fn qt_limit_is_not_uniform() {
        let g = make_grid(80.0, 4096).unwrap();
        for t in [0.1, 0.02] {
            let c = qt_fourier_check(t, &g, f64::INFINITY).unwrap();
            assert!((c.deviation - (PI / 2.0).sqrt()).abs() < 0.05, "{c:?}");
        }
    }

    #[test]
    fn scalar_kernel_traces() {
        let g = make_grid(40.0, 2048).unwrap();
        for (phi, want) in [
            (gaussian_potential(1.0, 1, 0).unwrap(), PI.sqrt() / 2.0),
            (sech2_potential(1.0, 1, 0).unwrap(), 1.0),
        ] {
            let t = transport(&phi, &g, 0.0).unwrap();
            let (tr, pred) = arctan_diff_kernel_matrix_case(&phi, &t, &g).unwrap();
            assert!((tr - want).abs() < 1e-3 && (pred - want).abs() < 1e-10);
        }
        let z = crate::model::MatrixPotential::zero(1);
        let t = transport(&z, &g, 0.0).unwrap();
        let (tr, _) = arctan_diff_kernel_matrix_case(&z, &t, &g).unwrap();
        assert_eq!(tr, 0.0);
    }

    #[test]
    fn kernel_matrix_matches_eigen_route() {
        let g = make_grid(20.0, 256).unwrap();
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        let t = transport(&phi, &g, 0.0).unwrap();
        let k = arctan_diff_kernel(&phi, &t, &g).unwrap();
        assert!(k.bound_ratio <= 1.0 + 1e-12, "{}", k.bound_ratio);
        assert!((k.trace - k.predicted).abs() < 1e-10);
        let am = build_a_minus(&g, 1).unwrap();
        let ap = add_potential(&am, &phi, 1.0).unwrap();
        let diff = apply_function(&eig(&ap).unwrap(), &SpectralFunction::Arctan).unwrap()
            - apply_function(&eig(&am).unwrap(), &SpectralFunction::Arctan).unwrap();
        let v = &bump_panel(&g, 1)[3];
        assert!(rel(&k.matrix.dot(v), &diff.dot(v)) < 5e-2);
        let eig_trace = trace_diff(&SpectralFunction::Arctan, &ap, &am).unwrap().re;
        assert!((eig_trace - k.trace).abs() < 0.02 * k.trace);
    }

    #[test]
    fn matrix_case_traces() {
        let g = make_grid(40.0, 1024).unwrap();
        for (entries, want) in [
            (vec![(Shape::Gaussian, 1.0), (Shape::Gaussian, 0.0)], PI.sqrt() / 2.0),
            (vec![(Shape::Gaussian, 1.0), (Shape::Gaussian, 1.0)], PI.sqrt()),
            (vec![(Shape::Gaussian, 0.0), (Shape::Gaussian, 0.0)], 0.0),
        ] {
            let phi = MatrixPotential::diagonal(&entries);
            let t = transport(&phi, &g, 0.0).unwrap();
            let (tr, pred) = arctan_diff_kernel_matrix_case(&phi, &t, &g).unwrap();
            assert!((tr - want).abs() < 1e-3, "{tr} vs {want}");
            assert!((pred - want).abs() < 1e-10);
        }
    }
}
