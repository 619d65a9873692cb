//! Gauss–Legendre and adaptive Gauss–Kronrod quadrature over values in a
//! real vector space (scalars, complex numbers, dense matrices).

use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{LabError, Result};

/// Minimal vector-space interface needed by the integrators.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    fn axpy(&mut self, a: f64, x: &Self);
    /// Max-abs norm, used for error control.
    fn norm_max(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn norm_max(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn norm_max(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for Array2<Complex64> {
    fn zero_like(&self) -> Self {
        Array2::zeros(self.raw_dim())
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        self.scaled_add(Complex64::new(a, 0.0), x);
    }
    fn norm_max(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}

impl QuadValue for Array2<f64> {
    fn zero_like(&self) -> Self {
        Array2::zeros(self.raw_dim())
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        self.scaled_add(a, x);
    }
    fn norm_max(&self) -> f64 {
        self.iter().fold(0.0_f64, |m, z| m.max(z.abs()))
    }
}

/// Quadrature rule selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadRule {
    /// Fixed Gauss–Legendre rule with `nodes` points (on the half line, after
    /// the substitution `λ = tan²θ`).
    GaussOnHalflineSqrt { nodes: usize },
    /// Globally adaptive Gauss–Kronrod (7/15) bisection.
    Adaptive {
        abs_tol: f64,
        rel_tol: f64,
        max_intervals: usize,
    },
}

impl Default for QuadRule {
    fn default() -> Self {
        QuadRule::GaussOnHalflineSqrt { nodes: 96 }
    }
}

impl QuadRule {
    pub fn adaptive(tol: f64) -> Self {
        QuadRule::Adaptive {
            abs_tol: tol,
            rel_tol: tol,
            max_intervals: 2000,
        }
    }
}

/// Result of a quadrature call.
#[derive(Debug, Clone)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// False when the adaptive budget ran out before the tolerance was met.
    pub converged: bool,
}

impl<T> QuadOutcome<T> {
    /// Turn a non-converged outcome into an error.
    pub fn checked(self) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(LabError::QuadratureNotConverged {
                error_estimate: self.error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

// Kronrod 15-point abscissae (non-negative half) and weights; the Gauss
// 7-point rule uses every other abscissa.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc.zero_like();
    let mut gauss = fc.zero_like();
    kron.axpy(WGK[7], &fc);
    gauss.axpy(WG[3], &fc);
    for j in 0..7 {
        let dx = hw * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron.axpy(WGK[j], &f1);
        kron.axpy(WGK[j], &f2);
        if j % 2 == 1 {
            gauss.axpy(WG[j / 2], &f1);
            gauss.axpy(WG[j / 2], &f2);
        }
    }
    let mut diff = kron.clone();
    diff.axpy(-1.0, &gauss);
    let mut out = kron.zero_like();
    out.axpy(hw, &kron);
    (out, (hw * diff.norm_max()).abs())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `∫_a^b f` over consecutive break points `points[0] < points[1] < …`.
pub fn integrate_breaks<T, F>(mut f: F, points: &[f64], rule: QuadRule) -> QuadOutcome<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    assert!(points.len() >= 2, "need at least one interval");
    match rule {
        QuadRule::GaussOnHalflineSqrt { nodes } => {
            let (x, w) = gauss_legendre(nodes);
            let mut total: Option<T> = None;
            for seg in points.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                let (c, hw) = (0.5 * (a + b), 0.5 * (b - a));
                for (xi, wi) in x.iter().zip(&w) {
                    let v = f(c + hw * xi);
                    let acc = total.get_or_insert_with(|| v.zero_like());
                    acc.axpy(hw * wi, &v);
                }
            }
            QuadOutcome {
                value: total.expect("non-empty rule"),
                error_estimate: f64::NAN,
                evaluations: nodes * (points.len() - 1),
                converged: true,
            }
        }
        QuadRule::Adaptive {
            abs_tol,
            rel_tol,
            max_intervals,
        } => {
            let mut heap = BinaryHeap::new();
            let mut evals = 0;
            for seg in points.windows(2) {
                let (value, err) = gk15(&mut f, seg[0], seg[1]);
                evals += 15;
                heap.push(Panel { a: seg[0], b: seg[1], value, err });
            }
            loop {
                let (total, err) = sum_panels(&heap);
                let tol = abs_tol.max(rel_tol * total.norm_max());
                if err <= tol {
                    return QuadOutcome { value: total, error_estimate: err, evaluations: evals, converged: true };
                }
                if heap.len() >= max_intervals {
                    return QuadOutcome { value: total, error_estimate: err, evaluations: evals, converged: false };
                }
                let worst = heap.pop().expect("heap is non-empty");
                let mid = 0.5 * (worst.a + worst.b);
                if mid <= worst.a || mid >= worst.b {
                    // Interval can no longer be split in floating point.
                    heap.push(Panel { err: 0.0, ..worst });
                    let (total, err) = sum_panels(&heap);
                    return QuadOutcome { value: total, error_estimate: err, evaluations: evals, converged: false };
                }
                for (a, b) in [(worst.a, mid), (mid, worst.b)] {
                    let (value, err) = gk15(&mut f, a, b);
                    evals += 15;
                    heap.push(Panel { a, b, value, err });
                }
            }
        }
    }
}

fn sum_panels<T: QuadValue>(heap: &BinaryHeap<Panel<T>>) -> (T, f64) {
    // Deterministic summation order: by left endpoint.
    let mut panels: Vec<&Panel<T>> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = panels[0].value.zero_like();
    let mut err = 0.0;
    for p in panels {
        total.axpy(1.0, &p.value);
        err += p.err;
    }
    (total, err)
}

/// `∫_a^b f`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, rule: QuadRule) -> QuadOutcome<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    integrate_breaks(f, &[a, b], rule)
}

/// `∫_0^∞ λ^{-1/2} f(λ) dλ` for `f = O(1/λ)` at infinity.
///
/// With `λ = u²` the weight disappears (`2∫_0^∞ f(u²) du`); `u = tan θ` then
/// maps the half line onto `[0, π/2)`, where the integrand
/// `2 sec²θ f(tan²θ)` stays bounded.
pub fn quad_halfline_sqrt<T, F>(mut f: F, rule: QuadRule) -> QuadOutcome<T>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    let g = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let u = s / c;
        let v = f(u * u);
        let mut out = v.zero_like();
        out.axpy(2.0 / (c * c), &v);
        out
    };
    integrate(g, 0.0, FRAC_PI_2, rule)
}
