//! Unitary gauge transport `∂ₓΨ(x, x₀) = -iΦ(x)Ψ(x, x₀)`, `Ψ(x₀, x₀) = I`,
//! which conjugates `A₋` into `A₊`: `A₊ Ψ = Ψ A₋`.
//!
//! Integration runs outward from `x₀` in both directions; there is no
//! periodic wrap.

use ndarray::{Array1, Array2};
use ndarray_linalg::Determinant;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{apply_multiplier, gauss_legendre, Grid1D};
use crate::matfun::{eig, SpectralFunction};
use crate::model::MatrixPotential;
use crate::operators::HermitianOperator;
use crate::{adjoint, max_abs, LabError, Result};

/// Largest RK4 substep.
const MAX_SUBSTEP: f64 = 1e-3;
/// Gauss–Legendre points per grid cell for phase integrals.
const PHASE_NODES: usize = 12;

#[derive(Debug, Clone)]
pub struct GaugeTransport {
    pub base_index: usize,
    pub base_point: f64,
    /// `Ψ(x_j, x₀)` for every node.
    pub matrices: Vec<Array2<Complex64>>,
    /// RK4 substep, or 0 for the exact scalar exponential.
    pub substep: f64,
}

impl GaugeTransport {
    pub fn m(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// `Ψ(x_j, x_k) = Ψ(x_j, x₀) Ψ(x_k, x₀)†`.
    pub fn between(&self, j: usize, k: usize) -> Array2<Complex64> {
        self.matrices[j].dot(&adjoint(&self.matrices[k]))
    }

    /// Apply the block-diagonal multiplication by `Ψ` (or `Ψ†`) to a vector.
    pub fn apply(&self, v: &Array1<Complex64>, dagger: bool) -> Array1<Complex64> {
        let m = self.m();
        let mut out = Array1::zeros(v.len());
        for (j, p) in self.matrices.iter().enumerate() {
            for a in 0..m {
                let mut acc = Complex64::new(0.0, 0.0);
                for b in 0..m {
                    let e = if dagger { p[[b, a]].conj() } else { p[[a, b]] };
                    acc += e * v[j * m + b];
                }
                out[j * m + a] = acc;
            }
        }
        out
    }
}

fn base_index(grid: &Grid1D, x0: f64) -> Result<usize> {
    let j = grid.nearest_node(x0);
    if (grid.node(j) - x0).abs() > 1e-9 * grid.spacing() {
        return Err(LabError::InvalidParameter(format!("base point {x0} is not a grid node")));
    }
    Ok(j)
}

/// `∫_{x₀}^{x_j} f` at every node, by Gauss–Legendre on each cell.
pub fn cumulative_integral<F: Fn(f64) -> f64>(grid: &Grid1D, base: usize, f: F) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(PHASE_NODES);
    let h = grid.spacing();
    let cell = |a: f64| -> f64 {
        gx.iter().zip(&gw).map(|(x, w)| 0.5 * h * w * f(a + 0.5 * h * (1.0 + x))).sum()
    };
    let n = grid.len();
    let mut out = vec![0.0; n];
    for j in base + 1..n {
        out[j] = out[j - 1] + cell(grid.node(j - 1));
    }
    for j in (0..base).rev() {
        out[j] = out[j + 1] - cell(grid.node(j));
    }
    out
}

/// `ψ(x_j) = exp(-i∫_{x₀}^{x_j} φ)` for a scalar potential.
pub fn scalar_transport(phi: &MatrixPotential, grid: &Grid1D, x0: f64) -> Result<GaugeTransport> {
    if phi.m() != 1 {
        return Err(LabError::DimensionMismatch { expected: 1, found: phi.m() });
    }
    let base = base_index(grid, x0)?;
    let phase = cumulative_integral(grid, base, |x| phi.scalar(x));
    let matrices = phase
        .iter()
        .map(|&p| Array2::from_elem((1, 1), Complex64::from_polar(1.0, -p)))
        .collect();
    Ok(GaugeTransport { base_index: base, base_point: grid.node(base), matrices, substep: 0.0 })
}

fn rk4_cell(phi: &MatrixPotential, y: &Array2<Complex64>, x: f64, dx: f64, steps: usize) -> Array2<Complex64> {
    let mi = Complex64::new(0.0, -1.0);
    let rhs = |x: f64, y: &Array2<Complex64>| phi.sample(x).dot(y).mapv(|z| z * mi);
    let h = dx / steps as f64;
    let mut y = y.clone();
    let mut t = x;
    for _ in 0..steps {
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * h, &(&y + &k1.mapv(|z| z * 0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&y + &k2.mapv(|z| z * 0.5 * h)));
        let k4 = rhs(t + h, &(&y + &k3.mapv(|z| z * h)));
        y = &y + &(&k1 + &k2.mapv(|z| z * 2.0) + &k3.mapv(|z| z * 2.0) + &k4).mapv(|z| z * (h / 6.0));
        t += h;
    }
    y
}

/// Classical RK4 with substeps `≤ min(h/4, 10⁻³)`, for any block size.
pub fn transport_ode(phi: &MatrixPotential, grid: &Grid1D, x0: f64) -> Result<GaugeTransport> {
    let base = base_index(grid, x0)?;
    let h = grid.spacing();
    let steps = ((h / MAX_SUBSTEP).ceil() as usize).max(4);
    let n = grid.len();
    let m = phi.m();
    let mut matrices = vec![Array2::zeros((m, m)); n];
    matrices[base] = Array2::eye(m);
    for j in base + 1..n {
        matrices[j] = rk4_cell(phi, &matrices[j - 1], grid.node(j - 1), h, steps);
    }
    for j in (0..base).rev() {
        matrices[j] = rk4_cell(phi, &matrices[j + 1], grid.node(j + 1), -h, steps);
    }
    Ok(GaugeTransport { base_index: base, base_point: grid.node(base), matrices, substep: h / steps as f64 })
}

/// Gauge transport: exact exponential for `m = 1`, RK4 otherwise.
pub fn transport(phi: &MatrixPotential, grid: &Grid1D, x0: f64) -> Result<GaugeTransport> {
    if phi.m() == 1 {
        scalar_transport(phi, grid, x0)
    } else {
        transport_ode(phi, grid, x0)
    }
}

/// Residuals of the structural laws of the transport.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawReport {
    /// `max_j ‖Ψ_j†Ψ_j - I‖_max`.
    pub unitarity: f64,
    /// `Ψ(x,x′)Ψ(x′,x″)` vs `Ψ(x,x″)`, both reconstructed from the base point.
    pub cocycle: f64,
    /// Reconstructed `Ψ(x,x′)` vs a fresh transport started at `x′`.
    pub cocycle_direct: f64,
    /// `max_j |arg det Ψ_j + ∫_{x₀}^{x_j} tr Φ|` with the phase unwrapped outward from `x₀`.
    pub determinant: f64,
    /// `max_j ||det Ψ_j| - 1|`.
    pub det_modulus: f64,
}

impl LawReport {
    pub fn max_residual(&self) -> f64 {
        [self.unitarity, self.cocycle, self.cocycle_direct, self.determinant, self.det_modulus]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn det(m: &Array2<Complex64>) -> Result<Complex64> {
    if m.nrows() == 1 {
        return Ok(m[[0, 0]]);
    }
    Ok(m.det()?)
}

/// Check unitarity, the cocycle law and the determinant law on `samples`
/// random node triples.
pub fn verify_laws(psi: &GaugeTransport, phi: &MatrixPotential, grid: &Grid1D, seed: u64, samples: usize) -> Result<LawReport> {
    let m = psi.m();
    let n = grid.len();
    let eye: Array2<Complex64> = Array2::eye(m);
    let unitarity = psi
        .matrices
        .iter()
        .map(|p| max_abs(&(adjoint(p).dot(p) - &eye)))
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cocycle = 0.0_f64;
    for _ in 0..samples {
        let (a, b, c) = (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n));
        let lhs = psi.between(a, b).dot(&psi.between(b, c));
        cocycle = cocycle.max(max_abs(&(lhs - psi.between(a, c))));
    }

    let mut cocycle_direct = 0.0_f64;
    let fresh_bases = 3.min(samples.max(1));
    for _ in 0..fresh_bases {
        let b = rng.random_range(0..n);
        let other = if psi.substep == 0.0 && m == 1 {
            scalar_transport(phi, grid, grid.node(b))?
        } else {
            transport_ode(phi, grid, grid.node(b))?
        };
        for _ in 0..samples.div_ceil(fresh_bases) {
            let a = rng.random_range(0..n);
            cocycle_direct = cocycle_direct.max(max_abs(&(psi.between(a, b) - &other.matrices[a])));
        }
    }

    let predicted = cumulative_integral(grid, psi.base_index, |x| phi.trace_at(x));
    let dets: Vec<Complex64> = psi.matrices.iter().map(det).collect::<Result<_>>()?;
    let det_modulus = dets.iter().map(|d| (d.norm() - 1.0).abs()).fold(0.0, f64::max);
    let mut phase = vec![0.0; n];
    let unwrap = |prev: f64, d: Complex64| {
        let raw = d.arg();
        prev + (raw - prev + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI
    };
    let b = psi.base_index;
    phase[b] = dets[b].arg();
    for j in b + 1..n {
        phase[j] = unwrap(phase[j - 1], dets[j]);
    }
    for j in (0..b).rev() {
        phase[j] = unwrap(phase[j + 1], dets[j]);
    }
    let determinant = (0..n).map(|j| (phase[j] + predicted[j]).abs()).fold(0.0, f64::max);

    Ok(LawReport { unitarity, cocycle, cocycle_direct, determinant, det_modulus })
}

/// Eight Gaussian bumps spread over the central half of the box, cycling
/// through the components.
pub fn bump_panel(grid: &Grid1D, m: usize) -> Vec<Array1<Complex64>> {
    let l = grid.length();
    (0..8)
        .map(|k| {
            let c = -0.25 * l + 0.5 * l * k as f64 / 7.0;
            let comp = k % m;
            let mut v = Array1::zeros(grid.len() * m);
            for j in 0..grid.len() {
                let x = grid.node(j) - c;
                v[j * m + comp] = Complex64::new((-x * x).exp(), 0.0);
            }
            v
        })
        .collect()
}

/// `max_v ‖h(A₊)v - Ψ h(A₋) Ψ† v‖ / ‖h(A₊)v‖` over the bump panel.
pub fn conjugation_residual(psi: &GaugeTransport, a_minus: &HermitianOperator, a_plus: &HermitianOperator, h: &SpectralFunction) -> Result<f64> {
    let grid = &a_minus.grid;
    let m = a_minus.m;
    let es = eig(a_plus)?;
    let vals: Vec<Complex64> = es.eigenvalues.iter().map(|&x| h.eval(x)).collect::<Result<_>>()?;
    let vdag = adjoint(&es.eigenvectors);
    let mut worst = 0.0_f64;
    for v in bump_panel(grid, m) {
        let mut c = vdag.dot(&v);
        c.iter_mut().zip(&vals).for_each(|(ci, f)| *ci *= f);
        let lhs = es.eigenvectors.dot(&c);

        let w = psi.apply(&v, true);
        let mut hw = Array1::zeros(w.len());
        for comp in 0..m {
            let part: Vec<Complex64> = (0..grid.len()).map(|j| w[j * m + comp]).collect();
            let out = apply_multiplier(grid, |k| h.eval(k).unwrap_or(Complex64::new(f64::NAN, 0.0)), &part);
            for j in 0..grid.len() {
                hw[j * m + comp] = out[j];
            }
        }
        let rhs = psi.apply(&hw, false);
        let num = (&lhs - &rhs).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let den = lhs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if den > 0.0 {
            worst = worst.max(num / den);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::{gaussian_potential, MatrixPotential, Shape};
    use crate::operators::{add_potential, build_a_minus};
    use std::f64::consts::PI;

    #[test]
    fn zero_potential_gives_identity() {
        let g = make_grid(10.0, 64).unwrap();
        for m in [1, 2] {
            let z = MatrixPotential::zero(m);
            for t in [transport(&z, &g, 0.0).unwrap(), transport_ode(&z, &g, 0.0).unwrap()] {
                assert!(t.matrices.iter().all(|p| max_abs(&(p - &Array2::<Complex64>::eye(m))) == 0.0));
                let r = verify_laws(&t, &z, &g, 1, 20).unwrap();
                assert!(r.max_residual() < 1e-15, "{r:?}");
            }
        }
    }

    #[test]
    fn full_phase_across_box() {
        let g = make_grid(40.0, 1024).unwrap();
        for a in [1.0, 0.3] {
            let phi = gaussian_potential(a, 1, 0).unwrap();
            let t = transport(&phi, &g, 0.0).unwrap();
            let across = t.matrices[1023][[0, 0]] * t.matrices[0][[0, 0]].conj();
            assert!((across - Complex64::from_polar(1.0, -a * PI.sqrt())).norm() < 1e-10);
        }
    }

    #[test]
    fn scalar_and_ode_paths_agree() {
        let g = make_grid(40.0, 1024).unwrap();
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        let a = scalar_transport(&phi, &g, 0.0).unwrap();
        let b = transport_ode(&phi, &g, 0.0).unwrap();
        let d = a.matrices.iter().zip(&b.matrices).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max);
        assert!(d < 1e-12, "{d}");
        assert!(b.substep <= g.spacing() / 4.0);
    }

    #[test]
    fn decoupled_block_is_scalar_transport() {
        let g = make_grid(20.0, 256).unwrap();
        let phi2 = MatrixPotential::diagonal(&[(Shape::Gaussian, 1.0), (Shape::Gaussian, 0.0)]);
        let phi1 = gaussian_potential(1.0, 1, 0).unwrap();
        let t2 = transport(&phi2, &g, 0.0).unwrap();
        let t1 = transport(&phi1, &g, 0.0).unwrap();
        for j in 0..256 {
            assert!((t2.matrices[j][[0, 0]] - t1.matrices[j][[0, 0]]).norm() < 1e-12);
            assert!((t2.matrices[j][[1, 1]] - 1.0).norm() < 1e-15);
            assert_eq!(t2.matrices[j][[0, 1]].norm(), 0.0);
        }
    }

    #[test]
    fn laws_hold_for_gaussian() {
        let g = make_grid(40.0, 1024).unwrap();
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        for t in [transport(&phi, &g, 0.0).unwrap(), transport_ode(&phi, &g, g.node(300)).unwrap()] {
            let r = verify_laws(&t, &phi, &g, 7, 50).unwrap();
            assert!(r.max_residual() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn determinant_law_for_coupled_block() {
        let g = make_grid(20.0, 256).unwrap();
        // Non-commuting samples: diag(φ, φ) plus a constant-direction off-diagonal bump.
        let phi = MatrixPotential::from_fns(
            2,
            "coupled",
            crate::model::DecayClass::RapidlyDecaying,
            |x| {
                let e = (-x * x).exp();
                let s = (-(x - 1.0).powi(2)).exp();
                ndarray::array![[Complex64::new(e, 0.0), Complex64::new(0.0, s)], [Complex64::new(0.0, -s), Complex64::new(e * x, 0.0)]]
            },
            |x| {
                let e = (-x * x).exp();
                let s = -2.0 * (x - 1.0) * (-(x - 1.0).powi(2)).exp();
                ndarray::array![[Complex64::new(-2.0 * x * e, 0.0), Complex64::new(0.0, s)], [Complex64::new(0.0, -s), Complex64::new(e - 2.0 * x * x * e, 0.0)]]
            },
        );
        let t = transport(&phi, &g, 0.0).unwrap();
        let r = verify_laws(&t, &phi, &g, 3, 40).unwrap();
        assert!(r.max_residual() < 1e-9, "{r:?}");
        let dd = MatrixPotential::diagonal(&[(Shape::Gaussian, 1.0), (Shape::Gaussian, 1.0)]);
        let t = transport(&dd, &g, 0.0).unwrap();
        let d = t.matrices[255].det().unwrap() * t.matrices[0].det().unwrap().conj();
        assert!((d - Complex64::from_polar(1.0, -2.0 * PI.sqrt())).norm() < 1e-10);
    }

    #[test]
    fn conjugation_residual_shrinks_with_box() {
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        let mut res = Vec::new();
        for (l, n) in [(10.0, 256usize), (20.0, 512)] {
            let g = make_grid(l, n).unwrap();
            let am = build_a_minus(&g, 1).unwrap();
            let ap = add_potential(&am, &phi, 1.0).unwrap();
            let t = transport(&phi, &g, 0.0).unwrap();
            res.push(conjugation_residual(&t, &am, &ap, &SpectralFunction::smooth_sign()).unwrap());
        }
        assert!(res[1] < res[0], "{res:?}");
        assert!(res[1] < 1e-2, "{res:?}");
        let g = make_grid(10.0, 128).unwrap();
        let am = build_a_minus(&g, 1).unwrap();
        let z = MatrixPotential::zero(1);
        let ap = add_potential(&am, &z, 1.0).unwrap();
        let t = transport(&z, &g, 0.0).unwrap();
        for h in [SpectralFunction::Identity, SpectralFunction::Arctan, SpectralFunction::smooth_sign()] {
            assert!(conjugation_residual(&t, &am, &ap, &h).unwrap() < 1e-12);
        }
    }

    #[test]
    fn base_point_must_be_a_node() {
        let g = make_grid(10.0, 64).unwrap();
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        assert!(transport(&phi, &g, 0.01).is_err());
    }
}
