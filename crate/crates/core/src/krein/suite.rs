//! Seeded batch of the finite-dimensional oracle checks.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::oracles::{
    counting_ssf, delta_r, geometric_ladder, krein_stieltjes, log_derivative_fd, resolvent_trace_diff, square_truncation_obstruction,
    ssf_from_determinant, RectFactor,
};
use crate::matfun::{eigenvalues_matrix, trace_diff_eigs, SpectralFunction};
use crate::{adjoint, re, Result};

/// Entries uniform in the unit square.
pub fn random_complex(p: usize, q: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    Array2::from_shape_fn((p, q), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `(M + M†)/2` with `M` from [`random_complex`].
pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    let m = random_complex(n, n, rng);
    (&m + &adjoint(&m)).mapv(|z| z * 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectCheck {
    pub label: String,
    pub index: i64,
    /// `max_k |Δ_r(λ_k) - index|` over the ladder.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSuite {
    pub seed: u64,
    /// Krein identity on 20 pairs of size 8, `h ∈ {arctan, g}`.
    pub krein_max_residual: f64,
    /// Relative error of the log-derivative identity on 10 pairs of size 6.
    pub logdet_max_rel_err: f64,
    /// `max |ξ_det - ξ_count|` at midpoints of spectral gaps wider than 0.05.
    pub ssf_det_max_diff: f64,
    pub ssf_det_points: usize,
    /// `|tr(DD† + 1)^{-1} - tr(D†D + 1)^{-1}|` over 5 square factors of size 10.
    pub square_obstruction: f64,
    pub rect: Vec<RectCheck>,
}

pub fn oracle_suite(seed: u64) -> Result<OracleSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut krein = 0.0_f64;
    let g = |x: f64| x / (x * x + 1.0).sqrt();
    for _ in 0..20 {
        let (a, a0) = (random_hermitian(8, &mut rng), random_hermitian(8, &mut rng));
        let (ea, e0) = (eigenvalues_matrix(&a)?, eigenvalues_matrix(&a0)?);
        let r1 = trace_diff_eigs(&SpectralFunction::Arctan, &ea, &e0)?.re - krein_stieltjes(&ea, &e0, f64::atan);
        let r2 = trace_diff_eigs(&SpectralFunction::smooth_sign(), &ea, &e0)?.re - krein_stieltjes(&ea, &e0, g);
        krein = krein.max(r1.abs()).max(r2.abs());
    }
    let z0 = Complex64::new(0.3, 1.0);
    let mut logdet = 0.0_f64;
    for _ in 0..10 {
        let (a, a0) = (random_hermitian(6, &mut rng), random_hermitian(6, &mut rng));
        let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(0.2..1.0));
        let fd = log_derivative_fd(&a, &a0, z, z0, 1e-5)?;
        let exact = resolvent_trace_diff(&a, &a0, z)?;
        logdet = logdet.max((fd - exact).norm() / exact.norm());
    }
    let mut ssf_diff = 0.0_f64;
    let mut points = 0;
    for _ in 0..4 {
        let (a, a0) = (random_hermitian(6, &mut rng), random_hermitian(6, &mut rng));
        let mut all: Vec<f64> = eigenvalues_matrix(&a)?.into_iter().chain(eigenvalues_matrix(&a0)?).collect();
        all.sort_by(f64::total_cmp);
        for w in all.windows(2) {
            if w[1] - w[0] < 0.05 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let d = ssf_from_determinant(&a, &a0, mid, 1e-4)? - counting_ssf(&a, &a0, mid)? as f64;
            ssf_diff = ssf_diff.max(d.abs());
            points += 1;
        }
    }
    let mut square = 0.0_f64;
    for _ in 0..5 {
        let d = random_complex(10, 10, &mut rng);
        square = square.max(square_truncation_obstruction(&d, re(-1.0))?.norm());
    }
    let factors = [
        ("[[1, 0]]", RectFactor::from_real(&[&[1.0, 0.0]])),
        ("zeros(1x3)", RectFactor::new(Array2::zeros((1, 3)))),
        ("random(4x4)", RectFactor::new(random_complex(4, 4, &mut rng))),
    ];
    let ladder = geometric_ladder(-1..=8);
    let mut rect = Vec::new();
    for (label, t) in factors {
        let index = t.index()?;
        let mut dev = 0.0_f64;
        for &l in &ladder {
            dev = dev.max((delta_r(&t, l)? - index as f64).abs());
        }
        rect.push(RectCheck { label: label.to_string(), index, max_deviation: dev });
    }
    Ok(OracleSuite {
        seed,
        krein_max_residual: krein,
        logdet_max_rel_err: logdet,
        ssf_det_max_diff: ssf_diff,
        ssf_det_points: points,
        square_obstruction: square,
        rect,
    })
}
