//! Trace-level checks on the discretized model `A₊ = A₋ + Φ`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::oracles::{witten_limit, WittenLimit};
use super::profile::{pushnitski_transform, SSFProfile};
use super::report::{TraceReport, ValueRecord};
use crate::grid::{integrate, Grid1D, QuadRule};
use crate::matfun::{apply_function, eig, eigenvalues, eigenvalues_matrix, trace_diff_eigs, SpectralFunction};
use crate::model::MatrixPotential;
use crate::operators::{add_potential, build_a_minus, multiplication_operator, spectral_truncate};
use crate::{max_abs, LabError, Result};

/// Spectra of `A₋` and `A₊` plus `∫ tr Φ`, computed once and shared by the
/// trace checks.
#[derive(Debug, Clone)]
pub struct ModelSpectra {
    pub grid: Grid1D,
    pub m: usize,
    pub label: String,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    pub integral_trace: f64,
}

impl ModelSpectra {
    pub fn new(phi: &MatrixPotential, grid: &Grid1D) -> Result<Self> {
        let a_minus = build_a_minus(grid, phi.m())?;
        let minus = eigenvalues(&a_minus)?;
        let plus = if max_abs(&multiplication_operator(grid, phi)) == 0.0 {
            minus.clone()
        } else {
            eigenvalues(&add_potential(&a_minus, phi, 1.0)?)?
        };
        Ok(Self {
            grid: grid.clone(),
            m: phi.m(),
            label: phi.label().to_string(),
            minus,
            plus,
            integral_trace: phi.integral_of_trace(grid),
        })
    }

    /// `(1/2π) ∫ tr Φ`.
    pub fn predicted_xi(&self) -> f64 {
        self.integral_trace / (2.0 * PI)
    }

    /// `tr h(A₊) - tr h(A₋)`, real part.
    pub fn trace_diff(&self, h: &SpectralFunction) -> Result<f64> {
        Ok(trace_diff_eigs(h, &self.plus, &self.minus)?.re)
    }

    fn inputs(&self) -> serde_json::Value {
        json!({
            "potential": self.label,
            "m": self.m,
            "grid": {"length": self.grid.length(), "n": self.grid.len(), "boundary": self.grid.boundary()},
        })
    }
}

/// Constant SSF estimated with two test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsfFit {
    /// `tr(arctan A₊ - arctan A₋)/π`.
    pub xi_arctan: f64,
    /// `tr(g A₊ - g A₋)/2`.
    pub xi_g: f64,
    pub spread: f64,
    pub predicted: f64,
}

pub fn ssf_constant_fit_spectra(s: &ModelSpectra) -> Result<SsfFit> {
    let xi_arctan = s.trace_diff(&SpectralFunction::Arctan)? / PI;
    let xi_g = s.trace_diff(&SpectralFunction::smooth_sign())? / 2.0;
    Ok(SsfFit { xi_arctan, xi_g, spread: (xi_arctan - xi_g).abs(), predicted: s.predicted_xi() })
}

pub fn ssf_constant_fit(phi: &MatrixPotential, grid: &Grid1D) -> Result<SsfFit> {
    ssf_constant_fit_spectra(&ModelSpectra::new(phi, grid)?)
}

fn check_negative(z_list: &[f64]) -> Result<()> {
    if z_list.is_empty() || z_list.iter().any(|&z| !(z < 0.0)) {
        return Err(LabError::InvalidParameter(format!("z list must be non-empty and negative, got {z_list:?}")));
    }
    Ok(())
}

/// `-∫_0^∞ ξ_H(λ) (λ - z)^{-2} dλ`, with `λ = tan²θ`.
pub fn ssf_resolvent_side(xi: &SSFProfile, z: f64) -> Result<f64> {
    check_negative(&[z])?;
    let mut failure = None;
    let out = integrate(
        |theta: f64| {
            if theta <= 0.0 || theta >= FRAC_PI_2 {
                return 0.0;
            }
            let t = theta.tan();
            let lam = t * t;
            match pushnitski_transform(xi, lam) {
                Ok(v) => v * 2.0 * t * (1.0 + lam) / (lam - z).powi(2),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        FRAC_PI_2,
        QuadRule::adaptive(1e-12),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(-out.checked()?)
}

/// `∫_ℝ (ν² - z)^{-3/2} dν`, with `ν = √(-z) tan u`.
pub fn nu_kernel_integral(z: f64) -> Result<f64> {
    check_negative(&[z])?;
    let s = (-z).sqrt();
    let out = integrate(
        |u: f64| {
            let (sn, c) = u.sin_cos();
            if c <= 0.0 {
                return 0.0;
            }
            let nu = s * sn / c;
            s / (c * c) * (nu * nu - z).powf(-1.5)
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        QuadRule::adaptive(1e-13),
    );
    out.checked()
}

fn relative_spread(v: &[f64]) -> f64 {
    let hi = v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lo = v.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if mean.abs() > 1e-10 {
        (hi - lo) / mean.abs()
    } else {
        hi - lo
    }
}

/// Compares `R(z) = tr[g_z(A₊) - g_z(A₋)]/(2z)` against the SSF side
/// `L(z) = -∫ ξ_H (λ - z)^{-2}` with `ξ_H` the transform of the constant
/// fitted from `arctan`, and reports the z-independence of `2zR(z)`.
pub fn principal_trace_consistency_spectra(s: &ModelSpectra, z_list: &[f64]) -> Result<TraceReport> {
    check_negative(z_list)?;
    let fit = ssf_constant_fit_spectra(s)?;
    let profile = SSFProfile::constant(fit.xi_arctan);
    let mut values = Vec::new();
    let mut two_z_r = Vec::new();
    for &z in z_list {
        let td = s.trace_diff(&SpectralFunction::gz(z))?;
        let r = td / (2.0 * z);
        two_z_r.push(td);
        let l = ssf_resolvent_side(&profile, z)?;
        values.push(ValueRecord::new(format!("R(z={z})"), r, l, 0.02, "trace formula for g_z against the SSF resolvent identity"));
        values.push(ValueRecord::new(
            format!("2zR(z={z})"),
            td,
            s.integral_trace / PI,
            0.01,
            "z-independence of the g_z trace",
        ));
        let route = -z * fit.xi_arctan * nu_kernel_integral(z)?;
        values.push(ValueRecord::new(format!("nu_route(z={z})"), td, route, 0.02, "g_z trace through the constant SSF in the spectral variable"));
    }
    values.push(ValueRecord::new("spread_2zR", relative_spread(&two_z_r), 0.0, 0.005, "z-independence of the g_z trace"));
    let mut inputs = s.inputs();
    inputs["z_list"] = json!(z_list);
    Ok(TraceReport::new("principal_trace_consistency", inputs, values))
}

pub fn principal_trace_consistency(phi: &MatrixPotential, grid: &Grid1D, z_list: &[f64]) -> Result<TraceReport> {
    principal_trace_consistency_spectra(&ModelSpectra::new(phi, grid)?, z_list)
}

/// `Δ_r(λ) = tr[g_λ(A₊) - g_λ(A₋)]/2` on the ladder `λ = -2^{-k}`, followed
/// by the Richardson limit.
pub fn witten_model_route(s: &ModelSpectra, ks: std::ops::RangeInclusive<i32>) -> Result<(Vec<(f64, f64)>, WittenLimit)> {
    let samples = super::oracles::geometric_ladder(ks)
        .into_iter()
        .map(|l| Ok((l, s.trace_diff(&SpectralFunction::gz(l))? / 2.0)))
        .collect::<Result<Vec<_>>>()?;
    let lim = witten_limit(&samples)?;
    Ok((samples, lim))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub cutoff: f64,
    pub rank: usize,
    pub nuclear_norm: f64,
}

/// `‖g(A₊,ₙ) - g(A₊)‖₁` for each cutoff. The difference is Hermitian, so
/// its singular values are the moduli of its eigenvalues.
pub fn truncation_convergence(phi: &MatrixPotential, grid: &Grid1D, cutoffs: &[f64]) -> Result<Vec<TruncationRow>> {
    if cutoffs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LabError::InvalidParameter("cutoffs must be strictly ascending".into()));
    }
    let g = SpectralFunction::smooth_sign();
    let a_minus = build_a_minus(grid, phi.m())?;
    let a_plus = add_potential(&a_minus, phi, 1.0)?;
    let g_plus = apply_function(&eig(&a_plus)?, &g)?;
    let mut rows = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        let (a_n, tr) = spectral_truncate(&a_minus, phi, cutoff)?;
        let nuclear_norm = if a_n.matrix == a_plus.matrix {
            0.0
        } else {
            let diff = &apply_function(&eig(&a_n)?, &g)? - &g_plus;
            eigenvalues_matrix(&diff)?.iter().map(|v| v.abs()).sum()
        };
        rows.push(TruncationRow { cutoff, rank: tr.rank, nuclear_norm });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::model::gaussian_potential;

    const XI_HAT: f64 = 0.282_094_791_773_878_1; // 1/(2√π)

    #[test]
    fn resolvent_side_and_nu_kernel_closed_forms() {
        for z in [-0.3, -1.0, -4.0] {
            let l = ssf_resolvent_side(&SSFProfile::constant(0.7), z).unwrap();
            assert!((l - 0.7 / z).abs() < 1e-10);
            assert!((nu_kernel_integral(z).unwrap() - 2.0 / -z).abs() < 1e-11);
        }
        assert!(ssf_resolvent_side(&SSFProfile::constant(0.0), -1.0).unwrap() == 0.0);
        assert!(nu_kernel_integral(0.5).is_err());
    }

    #[test]
    fn gaussian_model_trace_checks() {
        let grid = make_grid(40.0, 1024).unwrap();
        let s = ModelSpectra::new(&gaussian_potential(1.0, 1, 0).unwrap(), &grid).unwrap();
        assert!((s.predicted_xi() - XI_HAT).abs() < 1e-10);
        let fit = ssf_constant_fit_spectra(&s).unwrap();
        assert!((fit.xi_arctan - XI_HAT).abs() < 0.01 * XI_HAT, "{fit:?}");
        assert!((fit.xi_g - XI_HAT).abs() < 0.01 * XI_HAT, "{fit:?}");
        let rep = principal_trace_consistency_spectra(&s, &[-0.5, -1.0, -2.0, -4.0]).unwrap();
        for v in &rep.values {
            assert!(v.pass, "{v:?}");
        }
        assert!(rep.pass);
        let (samples, lim) = witten_model_route(&s, -1..=3).unwrap();
        assert_eq!(samples.len(), 5);
        assert!((lim.value - XI_HAT).abs() < 0.01 * XI_HAT, "{lim:?}");
    }

    #[test]
    fn amplitude_two_doubles_the_constant() {
        let grid = make_grid(40.0, 256).unwrap();
        let f1 = ssf_constant_fit(&gaussian_potential(1.0, 1, 0).unwrap(), &grid).unwrap();
        let f2 = ssf_constant_fit(&gaussian_potential(2.0, 1, 0).unwrap(), &grid).unwrap();
        assert!((f2.predicted - 2.0 * f1.predicted).abs() < 1e-12);
        assert!((f2.xi_g / f1.xi_g - 2.0).abs() < 0.02, "{f1:?} {f2:?}");
    }

    #[test]
    fn zero_potential_gives_zero_everywhere() {
        let grid = make_grid(20.0, 64).unwrap();
        let zero = MatrixPotential::zero(1);
        let fit = ssf_constant_fit(&zero, &grid).unwrap();
        assert_eq!((fit.xi_arctan, fit.xi_g), (0.0, 0.0));
        let rep = principal_trace_consistency(&zero, &grid, &[-1.0, -2.0]).unwrap();
        assert!(rep.pass && rep.values.iter().all(|v| v.measured == 0.0 && v.prediction == 0.0));
        let rows = truncation_convergence(&zero, &grid, &[1.0, 4.0, 100.0]).unwrap();
        assert!(rows.iter().all(|r| r.nuclear_norm == 0.0));
        assert!(principal_trace_consistency(&zero, &grid, &[1.0]).is_err());
    }

    #[test]
    fn truncation_ladder_decreases_to_zero() {
        let grid = make_grid(40.0, 256).unwrap();
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        let full = grid.max_momentum() + 1.0;
        let rows = truncation_convergence(&phi, &grid, &[2.0, 4.0, 8.0, 16.0, full]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].nuclear_norm < w[0].nuclear_norm, "{rows:?}");
        }
        assert_eq!(rows[4].nuclear_norm, 0.0);
        assert_eq!(rows[4].rank, 256);
        assert!(truncation_convergence(&phi, &grid, &[4.0, 2.0]).is_err());
    }
}
