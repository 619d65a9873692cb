//! Potentials `Φ`, switching functions `θ` and their norm and hypothesis
//! diagnostics.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use ndarray_linalg::{EigValsh, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{integrate_breaks, Grid1D, QuadRule};
use crate::{adjoint, max_abs, re, LabError, Result};

type MatrixFn = Arc<dyn Fn(f64) -> Array2<Complex64> + Send + Sync>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    RapidlyDecaying,
    W11Cb,
}

/// Scalar shapes available for diagonal potentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Gaussian,
    Sech2,
}

impl Shape {
    pub fn value(self, x: f64) -> f64 {
        match self {
            Shape::Gaussian => (-x * x).exp(),
            Shape::Sech2 => {
                let c = x.cosh();
                if c.is_finite() {
                    1.0 / (c * c)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Shape::Gaussian => -2.0 * x * (-x * x).exp(),
            Shape::Sech2 => -2.0 * x.tanh() * self.value(x),
        }
    }

    /// `∫_ℝ` of the shape.
    pub fn integral(self) -> f64 {
        match self {
            Shape::Gaussian => PI.sqrt(),
            Shape::Sech2 => 2.0,
        }
    }
}

/// Self-adjoint matrix-valued potential given by analytic samplers.
#[derive(Clone)]
pub struct MatrixPotential {
    m: usize,
    label: String,
    decay: DecayClass,
    sampler: MatrixFn,
    derivative: MatrixFn,
}

impl fmt::Debug for MatrixPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixPotential")
            .field("m", &self.m)
            .field("label", &self.label)
            .field("decay", &self.decay)
            .finish()
    }
}

impl MatrixPotential {
    pub fn from_fns<F, G>(m: usize, label: impl Into<String>, decay: DecayClass, f: F, df: G) -> Self
    where
        F: Fn(f64) -> Array2<Complex64> + Send + Sync + 'static,
        G: Fn(f64) -> Array2<Complex64> + Send + Sync + 'static,
    {
        assert!(m >= 1, "block size must be positive");
        Self { m, label: label.into(), decay, sampler: Arc::new(f), derivative: Arc::new(df) }
    }

    /// Diagonal potential `diag(a_1 s_1(x), …, a_m s_m(x))`.
    pub fn diagonal(entries: &[(Shape, f64)]) -> Self {
        let m = entries.len();
        let e1: Vec<(Shape, f64)> = entries.to_vec();
        let e2 = e1.clone();
        let label = format!(
            "diag({})",
            entries
                .iter()
                .map(|(s, a)| format!("{a}*{s:?}").to_lowercase())
                .collect::<Vec<_>>()
                .join(", ")
        );
        Self::from_fns(
            m,
            label,
            DecayClass::RapidlyDecaying,
            move |x| Array2::from_shape_fn((m, m), |(i, j)| if i == j { re(e1[i].1 * e1[i].0.value(x)) } else { re(0.0) }),
            move |x| Array2::from_shape_fn((m, m), |(i, j)| if i == j { re(e2[i].1 * e2[i].0.derivative(x)) } else { re(0.0) }),
        )
    }

    pub fn zero(m: usize) -> Self {
        Self::from_fns(m, "zero", DecayClass::RapidlyDecaying, move |_| Array2::zeros((m, m)), move |_| Array2::zeros((m, m)))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn decay(&self) -> DecayClass {
        self.decay
    }

    pub fn sample(&self, x: f64) -> Array2<Complex64> {
        (self.sampler)(x)
    }

    pub fn derivative(&self, x: f64) -> Array2<Complex64> {
        (self.derivative)(x)
    }

    /// `tr_{ℂ^m} Φ(x)` (real for Hermitian samples).
    pub fn trace_at(&self, x: f64) -> f64 {
        self.sample(x).diag().iter().map(|z| z.re).sum()
    }

    /// Scalar profile `φ(x)` of an `m = 1` potential.
    pub fn scalar(&self, x: f64) -> f64 {
        debug_assert_eq!(self.m, 1);
        self.sample(x)[[0, 0]].re
    }

    pub fn scalar_derivative(&self, x: f64) -> f64 {
        debug_assert_eq!(self.m, 1);
        self.derivative(x)[[0, 0]].re
    }

    /// `c Φ`.
    pub fn scaled(&self, c: f64) -> Self {
        let (f, df) = (self.sampler.clone(), self.derivative.clone());
        Self {
            m: self.m,
            label: format!("{c}*{}", self.label),
            decay: self.decay,
            sampler: Arc::new(move |x| f(x).mapv(|z| z * c)),
            derivative: Arc::new(move |x| df(x).mapv(|z| z * c)),
        }
    }

    /// `∫ tr Φ` over the box, by adaptive quadrature on unit cells.
    pub fn integral_of_trace(&self, grid: &Grid1D) -> f64 {
        let cells = unit_cells(grid);
        integrate_breaks(|x| self.trace_at(x), &cells, QuadRule::adaptive(1e-13)).value
    }
}

/// `amplitude · e^{-x²}` in diagonal slot `slot` of an `m × m` block.
pub fn gaussian_potential(amplitude: f64, m: usize, slot: usize) -> Result<MatrixPotential> {
    slotted(Shape::Gaussian, amplitude, m, slot)
}

/// `amplitude · sech²(x)` in diagonal slot `slot`.
pub fn sech2_potential(amplitude: f64, m: usize, slot: usize) -> Result<MatrixPotential> {
    slotted(Shape::Sech2, amplitude, m, slot)
}

fn slotted(shape: Shape, amplitude: f64, m: usize, slot: usize) -> Result<MatrixPotential> {
    if m == 0 {
        return Err(LabError::InvalidParameter("block size m must be >= 1".into()));
    }
    if slot >= m {
        return Err(LabError::InvalidParameter(format!("slot {slot} out of range for m = {m}")));
    }
    let entries: Vec<(Shape, f64)> = (0..m).map(|i| (shape, if i == slot { amplitude } else { 0.0 })).collect();
    Ok(MatrixPotential::diagonal(&entries))
}

/// Config-level description of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one_usize")]
    pub m: usize,
    #[serde(default)]
    pub slot: usize,
    /// Per-slot amplitudes for `matrix_diag`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag: Option<Vec<f64>>,
    /// Shape used by `matrix_diag`.
    #[serde(default)]
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Gaussian,
    Sech2,
    MatrixDiag,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { kind: PotentialKind::Gaussian, amplitude: 1.0, m: 1, slot: 0, diag: None, shape: Shape::Gaussian }
    }
}

impl PotentialSpec {
    pub fn build(&self) -> Result<MatrixPotential> {
        match self.kind {
            PotentialKind::Gaussian => gaussian_potential(self.amplitude, self.m, self.slot),
            PotentialKind::Sech2 => sech2_potential(self.amplitude, self.m, self.slot),
            PotentialKind::MatrixDiag => {
                let diag = self
                    .diag
                    .as_ref()
                    .ok_or_else(|| LabError::InvalidParameter("matrix_diag needs a `diag` list".into()))?;
                if diag.len() != self.m {
                    return Err(LabError::DimensionMismatch { expected: self.m, found: diag.len() });
                }
                let entries: Vec<(Shape, f64)> = diag.iter().map(|&a| (self.shape, a * self.amplitude)).collect();
                Ok(MatrixPotential::diagonal(&entries))
            }
        }
    }
}

/// Switching function `θ` with `θ(-∞) = 0`, `θ(+∞) = 1`.
#[derive(Clone)]
pub struct SwitchFunction {
    label: String,
    probe: f64,
    theta: RealFn,
    derivative: RealFn,
}

impl fmt::Debug for SwitchFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SwitchFunction").field("label", &self.label).field("probe", &self.probe).finish()
    }
}

impl SwitchFunction {
    pub fn from_fns<F, G>(label: impl Into<String>, probe: f64, theta: F, derivative: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { label: label.into(), probe, theta: Arc::new(theta), derivative: Arc::new(derivative) }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_fns(format!("const({c})"), 30.0, move |_| c, |_| 0.0)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Probe distance `T` at which the limits are checked.
    pub fn probe(&self) -> f64 {
        self.probe
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.theta)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }
}

/// `θ(t) = (1 + tanh(t/scale))/2`.
pub fn tanh_switch(scale: f64) -> Result<SwitchFunction> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(LabError::InvalidParameter(format!("switch scale must be positive, got {scale}")));
    }
    Ok(SwitchFunction::from_fns(
        format!("tanh_switch({scale})"),
        30.0 * scale,
        // (1 + tanh u)/2 written as a logistic so the left tail does not round to 0.
        move |t| 1.0 / (1.0 + (-2.0 * t / scale).exp()),
        move |t| {
            let c = (t / scale).cosh();
            if c.is_finite() {
                0.5 / (scale * c * c)
            } else {
                0.0
            }
        },
    ))
}

/// Norm summary of a potential on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub linf: f64,
    /// `‖Φ‖₁ + ‖Φ′‖₁`.
    pub w11: f64,
    /// `Σ_n (∫_{cell n} |Φ_ij|²)^{1/2}`, maximized over entries.
    pub l1_l2: f64,
    pub warning: Option<String>,
}

/// Unit-cell break points covering the box, with the integers inside it.
fn unit_cells(grid: &Grid1D) -> Vec<f64> {
    let (a, b) = (-0.5 * grid.length(), 0.5 * grid.length());
    let mut pts = vec![a];
    let mut k = a.floor() + 1.0;
    while k < b {
        if k > a {
            pts.push(k);
        }
        k += 1.0;
    }
    pts.push(b);
    pts
}

fn op_norm(m: &Array2<Complex64>) -> f64 {
    if m.nrows() == 1 {
        return m[[0, 0]].norm();
    }
    let gram = adjoint(m).dot(m);
    let ev = gram.eigvalsh(UPLO::Lower).map(|e| e.to_vec()).unwrap_or_else(|_| vec![f64::NAN]);
    ev.iter().fold(0.0_f64, |a, &b| a.max(b)).max(0.0).sqrt()
}

/// Quadrature values of `‖Φ‖₁`, `‖Φ‖_∞`, `‖Φ‖_{1,1}` and `‖Φ‖_{ℓ¹(L²)}` on the box
/// (operator norm on `ℂ^m` for the first three).
pub fn norms(phi: &MatrixPotential, grid: &Grid1D) -> Norms {
    let cells = unit_cells(grid);
    let rule = QuadRule::adaptive(1e-13);
    let l1 = integrate_breaks(|x| op_norm(&phi.sample(x)), &cells, rule).value;
    let d1 = integrate_breaks(|x| op_norm(&phi.derivative(x)), &cells, rule).value;
    let h = grid.spacing() / 8.0;
    let steps = (grid.length() / h).round() as usize;
    let linf = (0..=steps)
        .map(|j| op_norm(&phi.sample(-0.5 * grid.length() + j as f64 * h)))
        .fold(0.0_f64, f64::max);

    let m = phi.m();
    let mut l1_l2 = 0.0_f64;
    let mut edge_mass = 0.0_f64;
    let mut total_mass = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            let mut sum = 0.0;
            for (c, w) in cells.windows(2).enumerate() {
                let mass = integrate_breaks(|x| phi.sample(x)[[i, j]].norm_sqr(), w, rule).value;
                sum += mass.sqrt();
                total_mass += mass;
                if c == 0 || c == cells.len() - 2 {
                    edge_mass += mass;
                }
            }
            l1_l2 = l1_l2.max(sum);
        }
    }
    let warning = (total_mass > 0.0 && edge_mass > 1e-8 * total_mass).then(|| {
        format!("boundary cells carry {:.3e} of the squared mass; enlarge the box", edge_mass / total_mass)
    });
    Norms { l1, linf, w11: l1 + d1, l1_l2, warning }
}

/// One clause of the hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub clauses: Vec<Clause>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

fn below(name: &str, measured: f64, threshold: f64) -> Clause {
    Clause { name: name.into(), pass: measured.is_finite() && measured < threshold, measured, threshold }
}

/// Check the standing assumptions on `(Φ, θ)` with measured surrogates on the box.
pub fn check_hypothesis(phi: &MatrixPotential, theta: &SwitchFunction, grid: &Grid1D) -> HypothesisReport {
    let xs = grid.nodes();
    let mut herm = 0.0_f64;
    let mut fd = 0.0_f64;
    let mut dsup = 0.0_f64;
    let delta = 1e-4;
    for &x in xs.iter() {
        let s = phi.sample(x);
        herm = herm.max(max_abs(&(&s - &adjoint(&s))));
        let d = phi.derivative(x);
        dsup = dsup.max(op_norm(&d));
        let central = (&phi.sample(x + delta) - &phi.sample(x - delta)).mapv(|z| z / (2.0 * delta));
        fd = fd.max(max_abs(&(&d - &central)));
    }
    let n = norms(phi, grid);
    let scale = 1.0 + n.linf;

    let t = theta.probe();
    let mut theta_min = f64::INFINITY;
    let mut dtheta_sup = 0.0_f64;
    let steps = 4000;
    for k in 0..=steps {
        let s = -t + 2.0 * t * k as f64 / steps as f64;
        theta_min = theta_min.min(theta.value(s));
        dtheta_sup = dtheta_sup.max(theta.derivative(s).abs());
    }
    let dtheta_l1 = integrate_breaks(|s| theta.derivative(s).abs(), &[-t, 0.0, t], QuadRule::adaptive(1e-12)).value;
    let rise = theta.value(t) - theta.value(-t);

    let clauses = vec![
        below("phi_self_adjoint", herm, 1e-12),
        below("phi_w11_finite", n.w11, f64::INFINITY),
        below("phi_bounded", n.linf, f64::INFINITY),
        below("phi_prime_bounded", dsup, f64::INFINITY),
        below("phi_prime_consistent", fd, 1e-6 * scale),
        Clause { name: "theta_positive".into(), pass: theta_min > 0.0, measured: theta_min, threshold: 0.0 },
        below("theta_lower_limit", theta.value(-t).abs(), 1e-10),
        below("theta_upper_limit", (theta.value(t) - 1.0).abs(), 1e-10),
        // θ′ ∈ L¹: its mass on the probe window must account for the full rise.
        below("theta_prime_l1", (dtheta_l1 - rise.abs()).abs() + (1.0 - rise).abs(), 1e-8),
        below("theta_prime_bounded", dtheta_sup, f64::INFINITY),
    ];
    HypothesisReport { clauses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn box40() -> Grid1D {
        make_grid(40.0, 1024).unwrap()
    }

    #[test]
    fn gaussian_samples_and_integral() {
        let g = gaussian_potential(1.0, 1, 0).unwrap();
        assert_eq!(g.sample(0.0)[[0, 0]], re(1.0));
        let grid = box40();
        let trap = grid.integrate_samples(&grid.sample(|x| g.scalar(x)).to_vec());
        assert!((trap - PI.sqrt()).abs() < 1e-10);
        assert!((g.integral_of_trace(&grid) - PI.sqrt()).abs() < 1e-10);
        let g2 = gaussian_potential(2.0, 2, 1).unwrap();
        assert!((g2.trace_at(0.0) - 2.0).abs() < 1e-15);
        assert_eq!(g2.sample(0.0)[[0, 0]], re(0.0));
        assert!(gaussian_potential(1.0, 2, 2).is_err());
    }

    #[test]
    fn sech2_integral_and_zero_amplitude() {
        let grid = box40();
        let s = sech2_potential(1.0, 1, 0).unwrap();
        assert_eq!(s.scalar(0.0), 1.0);
        assert!((s.integral_of_trace(&grid) - 2.0).abs() < 1e-10);
        let z = sech2_potential(0.0, 1, 0).unwrap();
        assert!(grid.nodes().iter().all(|&x| z.scalar(x) == 0.0));
    }

    #[test]
    fn tanh_switch_properties() {
        let th = tanh_switch(1.5).unwrap();
        assert_eq!(th.value(0.0), 0.5);
        assert!(th.value(-30.0 * 1.5) < 1e-10);
        let g = make_grid(60.0, 4096).unwrap();
        let mass = g.integrate_samples(&g.sample(|t| th.derivative(t)).to_vec());
        assert!((mass - 1.0).abs() < 1e-10);
        assert!(tanh_switch(0.0).is_err());
    }

    #[test]
    fn gaussian_norms() {
        let n = norms(&gaussian_potential(1.0, 1, 0).unwrap(), &box40());
        assert!((n.l1 - PI.sqrt()).abs() < 1e-9);
        assert!((n.w11 - (PI.sqrt() + 2.0)).abs() < 1e-9);
        assert!((n.linf - 1.0).abs() < 1e-12);
        assert!(n.l1_l2.is_finite() && n.l1_l2 > 0.0);
        assert!(n.warning.is_none());
        let z = norms(&MatrixPotential::zero(2), &box40());
        assert_eq!((z.l1, z.linf, z.w11, z.l1_l2), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn l1l2_stable_under_box_doubling() {
        let p = sech2_potential(1.0, 1, 0).unwrap();
        let a = norms(&p, &make_grid(40.0, 256).unwrap()).l1_l2;
        let b = norms(&p, &make_grid(80.0, 512).unwrap()).l1_l2;
        assert!((a - b).abs() < 1e-8 * a);
        let n = norms(&p, &make_grid(40.0, 256).unwrap());
        assert!(n.l1_l2 <= 2.0 * n.w11);
    }

    #[test]
    fn boundary_mass_warning() {
        let p = gaussian_potential(1.0, 1, 0).unwrap();
        let n = norms(&p, &make_grid(6.0, 64).unwrap());
        assert!(n.warning.is_some());
    }

    #[test]
    fn hypothesis_clauses() {
        let grid = make_grid(40.0, 256).unwrap();
        let phi = gaussian_potential(1.0, 1, 0).unwrap();
        let th = tanh_switch(1.0).unwrap();
        let rep = check_hypothesis(&phi, &th, &grid);
        assert!(rep.all_pass(), "{rep:?}");

        let bad = MatrixPotential::from_fns(
            2,
            "skew",
            DecayClass::RapidlyDecaying,
            |x| {
                let e = (-x * x).exp();
                ndarray::array![[re(e), re(e)], [re(0.0), re(0.0)]]
            },
            |x| {
                let e = -2.0 * x * (-x * x).exp();
                ndarray::array![[re(e), re(e)], [re(0.0), re(0.0)]]
            },
        );
        let rep = check_hypothesis(&bad, &th, &grid);
        assert!(!rep.clause("phi_self_adjoint").unwrap().pass);

        let rep = check_hypothesis(&phi, &SwitchFunction::constant(0.5), &grid);
        assert!(!rep.clause("theta_lower_limit").unwrap().pass);
        assert!(!rep.clause("theta_upper_limit").unwrap().pass);
    }

    #[test]
    fn spec_builds() {
        let spec: PotentialSpec = serde_json::from_str(r#"{"kind":"matrix_diag","m":2,"diag":[1.0,1.0]}"#).unwrap();
        let p = spec.build().unwrap();
        assert!((p.trace_at(0.0) - 2.0).abs() < 1e-15);
        let bad: PotentialSpec = serde_json::from_str(r#"{"kind":"matrix_diag","m":3,"diag":[1.0]}"#).unwrap();
        assert!(bad.build().is_err());
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"kind":"gaussian","bogus":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn norms_are_homogeneous(c in 0.01f64..20.0) {
            let grid = make_grid(20.0, 64).unwrap();
            let p = gaussian_potential(1.0, 2, 1).unwrap();
            let a = norms(&p, &grid);
            let b = norms(&p.scaled(c), &grid);
            for (x, y) in [(a.l1, b.l1), (a.linf, b.linf), (a.w11, b.w11), (a.l1_l2, b.l1_l2)] {
                prop_assert!((c * x - y).abs() <= 1e-9 * (1.0 + c * x));
            }
        }

        #[test]
        fn samples_hermitian_and_derivative_consistent(x in -6.0f64..6.0, a in -3.0f64..3.0) {
            let p = MatrixPotential::diagonal(&[(Shape::Gaussian, a), (Shape::Sech2, 1.0)]);
            let s = p.sample(x);
            prop_assert!(max_abs(&(&s - &adjoint(&s))) < 1e-12);
            let d = 1e-4;
            let fd = (&p.sample(x + d) - &p.sample(x - d)).mapv(|z| z / (2.0 * d));
            prop_assert!(max_abs(&(&p.derivative(x) - &fd)) < 1e-6);
        }
    }
}
