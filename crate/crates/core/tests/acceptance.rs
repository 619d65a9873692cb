//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use kreinlab::commutators::{sv_growth_study, CommutatorFunction};
use kreinlab::gauge::{bump_panel, scalar_transport, transport, transport_ode, verify_laws};
use kreinlab::gmw::{
    bprime_norm_identities, gl_residual, kernel_dimension_probe, zero_mode, GMWConfig, SolitonProfile,
};
use kreinlab::grid::{apply_multiplier, Grid1D};
use kreinlab::krein::{
    oracle_suite, principal_trace_consistency_spectra, pushnitski_transform, ssf_constant_fit_spectra, truncation_convergence,
    ModelSpectra, SSFProfile,
};
use kreinlab::matfun::SpectralFunction;
use kreinlab::model::{gaussian_potential, MatrixPotential, Shape};
use kreinlab::pvconv::{arctan_diff_kernel_matrix_case, pv_convolution_matrix, qt_fourier_check};
use kreinlab::{max_abs, re, Complex64, Result};

struct Line {
    pass: bool,
    detail: String,
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.2e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn trace_identity(s: &ModelSpectra) -> Result<Line> {
    let want = 1.0 / PI.sqrt();
    let mut t = Vec::new();
    for z in [-0.5, -1.0, -2.0, -4.0] {
        t.push(s.trace_diff(&SpectralFunction::gz(z))?);
    }
    let worst = t.iter().map(|&v| rel(v, want)).fold(0.0, f64::max);
    let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let spread = (hi - lo) / want;
    Ok(Line {
        pass: worst < 0.01 && spread < 0.005,
        detail: format!("traces {t:.7?}, worst rel err {worst:.2e} (< 1e-2), spread {spread:.2e} (< 5e-3)"),
    })
}

fn arctan_trace(s1: &ModelSpectra, grid: &Grid1D) -> Result<Line> {
    let phi1 = gaussian_potential(1.0, 1, 0)?;
    let phi2 = MatrixPotential::diagonal(&[(Shape::Gaussian, 1.0), (Shape::Gaussian, 1.0)]);
    let s2 = ModelSpectra::new(&phi2, grid)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (phi, s, want) in [(&phi1, s1, PI.sqrt() / 2.0), (&phi2, &s2, PI.sqrt())] {
        let eig = s.trace_diff(&SpectralFunction::Arctan)?;
        let (kern, _) = arctan_diff_kernel_matrix_case(phi, &transport(phi, grid, 0.0)?, grid)?;
        let (e1, e2, e3) = (rel(eig, want), rel(kern, want), rel(eig, kern));
        ok &= e1 < 0.01 && e2 < 0.01 && e3 < 0.01;
        parts.push(format!("m={}: eig {eig:.6} kernel {kern:.6} vs {want:.6} (errs {e1:.1e}, {e2:.1e}, {e3:.1e})", phi.m()));
    }
    Ok(Line { pass: ok, detail: parts.join("; ") })
}

fn ssf_constant(s: &ModelSpectra) -> Result<Line> {
    let fit = ssf_constant_fit_spectra(s)?;
    let want = 0.5 / PI.sqrt();
    let (e1, e2) = (rel(fit.xi_arctan, want), rel(fit.xi_arctan, fit.xi_g));
    Ok(Line {
        pass: e1 < 0.01 && e2 < 0.01 && rel(fit.xi_g, want) < 0.01,
        detail: format!("xi_arctan {:.7}, xi_g {:.7} vs {want:.7}; rel err {e1:.2e}, fits differ by {e2:.2e}", fit.xi_arctan, fit.xi_g),
    })
}

fn pushnitski() -> Result<Line> {
    let mut worst = 0.0_f64;
    for c in [0.0, 0.37, 0.5 / PI.sqrt()] {
        for l in [0.1, 1.0, 10.0] {
            worst = worst.max((pushnitski_transform(&SSFProfile::constant(c), l)? - c).abs());
        }
    }
    let ind = SSFProfile::indicator(-1.0, 1.0)?;
    let a = pushnitski_transform(&ind, 0.25)?;
    let b = pushnitski_transform(&ind, 4.0)?;
    let ierr = (a - 1.0).abs().max((b - 1.0 / 3.0).abs());
    Ok(Line {
        pass: worst < 1e-10 && ierr < 1e-4,
        detail: format!("constant max err {worst:.1e} (< 1e-10); indicator {a:.8}, {b:.8} err {ierr:.1e} (< 1e-4)"),
    })
}

fn principal(s: &ModelSpectra, square: f64) -> Result<Line> {
    let z = [-0.5, -1.0, -2.0, -4.0];
    let rep = principal_trace_consistency_spectra(s, &z)?;
    let worst = rep.values.iter().filter(|v| v.key.starts_with("R(")).map(|v| v.rel_err).fold(0.0, f64::max);
    Ok(Line {
        pass: worst < 0.02 && square < 1e-10,
        detail: format!("max side discrepancy {worst:.2e} (< 2e-2); square truncation {square:.1e} (< 1e-10)"),
    })
}

fn oracles(o: &kreinlab::krein::OracleSuite) -> Line {
    let rect = o.rect.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    let idx: Vec<i64> = o.rect.iter().map(|r| r.index).collect();
    Line {
        pass: o.krein_max_residual < 1e-10
            && o.logdet_max_rel_err < 1e-6
            && o.ssf_det_max_diff < 0.01
            && o.ssf_det_points > 0
            && idx == [1, 2, 0]
            && rect < 1e-12,
        detail: format!(
            "krein {:.1e}, logdet {:.1e}, det-vs-count {:.1e} over {} points, rect indices {idx:?} dev {rect:.1e}",
            o.krein_max_residual, o.logdet_max_rel_err, o.ssf_det_max_diff, o.ssf_det_points
        ),
    }
}

fn gauge(grid: &Grid1D) -> Result<Line> {
    let phi = gaussian_potential(1.0, 1, 0)?;
    let psi = transport(&phi, grid, 0.0)?;
    let laws = verify_laws(&psi, &phi, grid, 11, 32)?;
    let a = scalar_transport(&phi, grid, 0.0)?;
    let b = transport_ode(&phi, grid, 0.0)?;
    let d = a.matrices.iter().zip(&b.matrices).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max);
    let laws_max = laws.unitarity.max(laws.cocycle).max(laws.cocycle_direct).max(laws.determinant);
    Ok(Line {
        pass: laws_max < 1e-8 && d < 1e-12,
        detail: format!(
            "unitarity {:.1e}, cocycle {:.1e}, determinant {:.1e} (< 1e-8); scalar vs ode {d:.1e} (< 1e-12)",
            laws.unitarity,
            laws.cocycle.max(laws.cocycle_direct),
            laws.determinant
        ),
    })
}

fn pv_fourier(grid: &Grid1D) -> Result<Line> {
    let k = pv_convolution_matrix(grid);
    let mut worst = 0.0_f64;
    for v in bump_panel(grid, 1) {
        let a = k.apply(&v);
        let b = apply_multiplier(grid, |s| re(s.atan()), &v.to_vec());
        let num = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(num / b.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt());
    }
    let fine = Grid1D::new(80.0, 4096)?;
    let d: Vec<f64> = [0.5, 0.1, 0.02].iter().map(|&t| qt_fourier_check(t, &fine, 0.5).map(|c| c.deviation)).collect::<Result<_>>()?;
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    Ok(Line {
        pass: worst < 1e-3 && decreasing && d[2] < 2e-2,
        detail: format!("bump rel err {worst:.1e} (< 1e-3); Q_t deviations {}, decreasing {decreasing}", sci(&d)),
    })
}

fn commutators() -> Result<Line> {
    let phi = gaussian_potential(1.0, 1, 0)?;
    let sizes = [256, 512, 1024, 2048];
    let h = 40.0 / 1024.0;
    let g = sv_growth_study(&phi, CommutatorFunction::SmoothSignG, &sizes, h)?;
    let s = sv_growth_study(&phi, CommutatorFunction::Sgn, &sizes, h)?;
    let g_last = g.relative_changes.last().copied().unwrap_or(f64::NAN).abs();
    let s_min = s.relative_changes.iter().copied().fold(f64::INFINITY, f64::min);
    let gt: Vec<f64> = g.sizes.iter().map(|r| r.total).collect();
    let st: Vec<f64> = s.sizes.iter().map(|r| r.total).collect();
    Ok(Line {
        pass: g_last < 0.02 && s_min > 0.10 && s.log_slope > 0.0,
        detail: format!(
            "g totals {gt:.6?} last change {g_last:.1e} (< 2e-2); sgn totals {st:.4?} min change {s_min:.3} (> 0.1), log slope {:.3}",
            s.log_slope
        ),
    })
}

fn gmw() -> Result<Line> {
    let xi = 0.5f64.sqrt();
    let tanh = SolitonProfile::tanh(xi);
    let r_tanh = gl_residual(&tanh, &tanh.natural_grid(0, 40.0, 1024)?)?;
    let sn = SolitonProfile::sn(0.9, xi)?;
    let r_sn = gl_residual(&sn, &sn.natural_grid(4, 0.0, 512)?)?;
    let mut ok = r_tanh < 1e-8 && r_sn < 1e-6;
    let mut parts = vec![format!("GL tanh {r_tanh:.1e}, sn {r_sn:.1e}")];
    let coarse = Grid1D::new(60.0, 512)?;
    let modes = Grid1D::new(60.0, 1024)?;
    let fine = Grid1D::new(60.0, 8192)?;
    let ts = [-2.0, 0.0, 2.0];
    for theta in [PI / 6.0, PI / 4.0, PI / 3.0] {
        let mut res = 0.0_f64;
        for &t in &ts {
            res = res.max(zero_mode(&GMWConfig::new(theta, t, modes.clone())?)?.residual);
        }
        let count = kernel_dimension_probe(&GMWConfig::new(theta, 0.0, coarse.clone())?)?;
        let b = bprime_norm_identities(theta, &ts, &fine)?;
        let sup_err = b.rows.iter().map(|r| (r.sup_norm - theta.sin()).abs()).fold(0.0, f64::max);
        let hs_err = b.rows.iter().map(|r| rel(r.hs2_scalar, b.hs2_predicted)).fold(0.0, f64::max);
        ok &= res < 1e-5 && count == 1 && sup_err < 1e-3 && b.sup_spread < 1e-3 && hs_err < 0.02;
        parts.push(format!(
            "θ={theta:.4}: zero mode {res:.1e}, kernel {count}, |B′| err {sup_err:.1e} spread {:.1e}, HS² err {hs_err:.1e}",
            b.sup_spread
        ));
    }
    Ok(Line { pass: ok, detail: parts.join("; ") })
}

fn truncation() -> Result<Line> {
    let grid = Grid1D::new(40.0, 256)?;
    let phi = gaussian_potential(1.0, 1, 0)?;
    let cutoffs = [2.0, 4.0, 8.0, 16.0, grid.max_momentum() + 1.0];
    let rows = truncation_convergence(&phi, &grid, &cutoffs)?;
    let norms: Vec<f64> = rows.iter().map(|r| r.nuclear_norm).collect();
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    Ok(Line { pass: decreasing && norms[norms.len() - 1] == 0.0, detail: format!("trace-norm distances {}", sci(&norms)) })
}

fn main() -> ExitCode {
    let start = Instant::now();
    let grid = Grid1D::new(40.0, 1024).expect("grid");
    let phi = gaussian_potential(1.0, 1, 0).expect("potential");
    let spectra = ModelSpectra::new(&phi, &grid).expect("spectra");
    let suite = oracle_suite(2024).expect("oracle suite");

    let results: Vec<(&str, Result<Line>)> = vec![
        ("g_z trace identity", trace_identity(&spectra)),
        ("arctan trace", arctan_trace(&spectra, &grid)),
        ("constant spectral shift", ssf_constant(&spectra)),
        ("Pushnitski transform", pushnitski()),
        ("principal trace consistency", principal(&spectra, suite.square_obstruction)),
        ("finite-dimensional oracles", Ok(oracles(&suite))),
        ("gauge laws", gauge(&grid)),
        ("p.v. and Fourier limits", pv_fourier(&grid)),
        ("commutator contrast", commutators()),
        ("boosted soliton", gmw()),
        ("truncation convergence", truncation()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.into_iter().enumerate() {
        let line = r.unwrap_or_else(|e| Line { pass: false, detail: format!("error: {e}") });
        if !line.pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {}", if line.pass { "PASS" } else { "FAIL" }, i + 1, line.detail);
    }
    println!("acceptance: {} of 11 passed in {:.0} s", 11 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
