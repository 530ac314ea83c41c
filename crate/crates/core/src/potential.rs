//! Effective interaction of two charges confined to a helix.
//!
//! With the relative arc-length coordinate `s = s1 - s2` the 3D Coulomb
//! repulsion becomes
//!
//! ```text
//! V(s) = [ 4 R^2 sin^2(s / 2β) + (h s / 2πβ)^2 ]^(-1/2),   β = sqrt((h/2π)^2 + R^2)
//! ```
//!
//! (units ħ = e = 1). Near `s = 0` it reduces to `1/|s|`, so grids that span
//! the origin use [`RegularizedPotential`], which caps it at a plateau.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Pitch `h`, radius `r` and particle mass `mass` of the helical two-body problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelixParams {
    pub h: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "M")]
    pub mass: f64,
}

impl HelixParams {
    pub fn new(h: f64, r: f64, mass: f64) -> Result<Self> {
        let params = HelixParams { h, r, mass };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("h", self.h), ("R", self.r), ("M", self.mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Arc length per radian of winding phase.
    pub fn beta(&self) -> f64 {
        beta_of(self.h, self.r)
    }

    /// Pitch-to-radius ratio `h/R`; the only parameter the well structure depends on.
    pub fn ratio(&self) -> f64 {
        self.h / self.r
    }

    /// Same geometry rescaled by `c`, mass untouched.
    pub fn scaled(&self, c: f64) -> Self {
        HelixParams {
            h: self.h * c,
            r: self.r * c,
            mass: self.mass,
        }
    }

    /// Helical potential at relative coordinate `s`.
    pub fn potential(&self, s: f64) -> Result<f64> {
        potential_value(self, s)
    }
}

/// `sqrt((h/2π)^2 + R^2)`. Accepts the degenerate limits `h = 0` or `R = 0`.
pub fn beta_of(h: f64, r: f64) -> f64 {
    (h / TWO_PI).hypot(r)
}

#[inline]
fn inverse_sq_distance(params: &HelixParams, beta: f64, s: f64) -> f64 {
    let half = (s / (2.0 * beta)).sin();
    let axial = params.h * s / (TWO_PI * beta);
    4.0 * params.r * params.r * half * half + axial * axial
}

/// Helical potential `V(s)`; even in `s`, strictly positive, singular at 0.
pub fn potential_value(params: &HelixParams, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::Singular(s));
    }
    Ok(potential_unchecked(params, s))
}

#[inline]
pub(crate) fn potential_unchecked(params: &HelixParams, s: f64) -> f64 {
    let beta = params.beta();
    inverse_sq_distance(params, beta, s).sqrt().recip()
}

/// Analytic `dV/ds`.
pub fn potential_derivative(params: &HelixParams, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::Singular(s));
    }
    Ok(derivative_unchecked(params, s))
}

#[inline]
pub(crate) fn derivative_unchecked(params: &HelixParams, s: f64) -> f64 {
    let beta = params.beta();
    let v = inverse_sq_distance(params, beta, s).sqrt().recip();
    let a = params.h / (TWO_PI * beta);
    let r2 = params.r * params.r;
    -(r2 * (s / beta).sin() / beta + a * a * s) * v * v * v
}

/// Point on the helix at winding parameter `t`, plus its arc length from `t = 0`.
pub fn cartesian_point(params: &HelixParams, t: f64) -> ([f64; 3], f64) {
    let phase = TWO_PI * t / params.h;
    let point = [params.r * phase.cos(), params.r * phase.sin(), t];
    let arc = (1.0 + (TWO_PI * params.r / params.h).powi(2)).sqrt() * t;
    (point, arc)
}

/// Dimensionless potential `f(s'; r) = β V(β s')`, which depends on the
/// geometry only through `r = h/R`.
pub fn scaled_potential_value(ratio: f64, s_prime: f64) -> Result<f64> {
    if s_prime == 0.0 {
        return Err(Error::Singular(s_prime));
    }
    let q = ratio / TWO_PI;
    let half = (0.5 * s_prime).sin();
    let denom = 4.0 * half * half + q * q * s_prime * s_prime;
    Ok((1.0 + q * q).sqrt() / denom.sqrt())
}

/// Which interaction the relative coordinate feels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialModel {
    Helical(HelixParams),
    /// Bare `1/|s|` repulsion, the straight-line reference.
    Coulomb,
}

impl PotentialModel {
    pub fn value(&self, s: f64) -> Result<f64> {
        match self {
            PotentialModel::Helical(p) => potential_value(p, s),
            PotentialModel::Coulomb if s == 0.0 => Err(Error::Singular(s)),
            PotentialModel::Coulomb => Ok(s.abs().recip()),
        }
    }
}

/// Potential with the `s = 0` singularity replaced by a flat cap.
///
/// Inside `|s| < s_cut` the value is `V(s_cut)`; outside it is the bare model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedPotential {
    pub model: PotentialModel,
    pub s_cut: f64,
    pub v_cap: f64,
}

pub const DEFAULT_S_CUT: f64 = 1.0;

impl RegularizedPotential {
    pub fn new(model: PotentialModel, s_cut: f64) -> Result<Self> {
        if !(s_cut.is_finite() && s_cut > 0.0) {
            return Err(Error::InvalidParams(format!(
                "s_cut must be positive, got {s_cut}"
            )));
        }
        if let PotentialModel::Helical(p) = &model {
            p.validate()?;
        }
        let v_cap = model.value(s_cut)?;
        Ok(RegularizedPotential {
            model,
            s_cut,
            v_cap,
        })
    }

    pub fn helical(params: HelixParams, s_cut: f64) -> Result<Self> {
        Self::new(PotentialModel::Helical(params), s_cut)
    }

    pub fn value(&self, s: f64) -> f64 {
        regularized_value(self, s)
    }

    /// Samples at every point of `coords`.
    pub fn sample(&self, coords: &[f64]) -> Vec<f64> {
        coords.iter().map(|&s| self.value(s)).collect()
    }
}

pub fn regularized_value(reg: &RegularizedPotential, s: f64) -> f64 {
    if s.abs() < reg.s_cut {
        return reg.v_cap;
    }
    match reg.model {
        PotentialModel::Helical(p) => potential_unchecked(&p, s),
        PotentialModel::Coulomb => s.abs().recip(),
    }
}
