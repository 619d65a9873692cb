//! Spectral shift profiles in the spectral variable `ν` and the transform
//! `ξ_H(λ) = (1/π) ∫_{-√λ}^{√λ} ξ(ν) (λ - ν²)^{-1/2} dν`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::grid::{integrate_breaks, QuadRule};
use crate::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SSFProfile {
    Constant { c: f64 },
    /// `χ_{[a,b]}`.
    Indicator { a: f64, b: f64 },
    /// Piecewise-linear through `(ν_j, ξ_j)`, zero outside `[ν_0, ν_last]`.
    Sampled { nu: Vec<f64>, xi: Vec<f64> },
}

impl SSFProfile {
    pub fn constant(c: f64) -> Self {
        SSFProfile::Constant { c }
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        let p = SSFProfile::Indicator { a, b };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(nu: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        let p = SSFProfile::Sampled { nu, xi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SSFProfile::Constant { c } if !c.is_finite() => Err(LabError::InvalidParameter("constant profile must be finite".into())),
            SSFProfile::Indicator { a, b } if !(a < b) || !a.is_finite() || !b.is_finite() => {
                Err(LabError::InvalidParameter(format!("indicator needs finite a < b, got [{a}, {b}]")))
            }
            SSFProfile::Sampled { nu, xi } => {
                if nu.len() != xi.len() || nu.is_empty() {
                    return Err(LabError::DimensionMismatch { expected: nu.len(), found: xi.len() });
                }
                if nu.windows(2).any(|w| !(w[0] < w[1])) || nu.iter().chain(xi).any(|v| !v.is_finite()) {
                    return Err(LabError::InvalidParameter("sampled profile needs finite values on strictly increasing nodes".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `None` for a constant profile, otherwise the closed support interval.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            SSFProfile::Constant { .. } => None,
            SSFProfile::Indicator { a, b } => Some((*a, *b)),
            SSFProfile::Sampled { nu, .. } => Some((nu[0], nu[nu.len() - 1])),
        }
    }

    pub fn eval(&self, nu: f64) -> f64 {
        match self {
            SSFProfile::Constant { c } => *c,
            SSFProfile::Indicator { a, b } => {
                if nu >= *a && nu <= *b {
                    1.0
                } else {
                    0.0
                }
            }
            SSFProfile::Sampled { nu: xs, xi } => {
                if nu < xs[0] || nu > xs[xs.len() - 1] {
                    return 0.0;
                }
                let k = xs.partition_point(|&x| x <= nu).clamp(1, xs.len().max(2) - 1);
                if xs.len() == 1 {
                    return xi[0];
                }
                let (x0, x1) = (xs[k - 1], xs[k]);
                let t = (nu - x0) / (x1 - x0);
                xi[k - 1] + t * (xi[k] - xi[k - 1])
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            SSFProfile::Constant { .. } => vec![],
            SSFProfile::Indicator { a, b } => vec![*a, *b],
            SSFProfile::Sampled { nu, .. } => nu.clone(),
        }
    }
}

/// `ξ_H(λ)` for `λ > 0`. With `ν = √λ sin u` the weight becomes `du`, and the
/// profile's kinks are mapped to break points in `u`.
pub fn pushnitski_transform(xi: &SSFProfile, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(LabError::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    xi.validate()?;
    if let SSFProfile::Constant { c } = xi {
        return Ok(*c);
    }
    let r = lambda.sqrt();
    let mut pts = vec![-FRAC_PI_2];
    for b in xi.breakpoints() {
        if b > -r && b < r {
            pts.push((b / r).asin());
        }
    }
    pts.push(FRAC_PI_2);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let out = integrate_breaks(|u: f64| xi.eval(r * u.sin()), &pts, QuadRule::adaptive(1e-13));
    Ok(out.checked()? / PI)
}
