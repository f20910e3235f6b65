//! The three-term stroke energy
//!
//! ```text
//! F = c1 ∫ G_I(t) / r(t)^2 dt  +  c2 ∫ r(t)^-α dt  +  c3 ∫ |K(t)| dt
//! ```
//!
//! All integrals run over `[0, n]` with the midpoint rule, `quad_samples`
//! points per node interval. The curvature integral skips points within
//! `epsilon` of a constrained node so corners placed there are not smoothed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::GrayImage;
use crate::spline::{curvature_of, ConstraintSet, SplineCurve};
use crate::stroke::{gray_mass, Disc, R_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyParams {
    /// Weight of the image-coverage term.
    pub c1: f64,
    /// Weight of the radius-growth term.
    pub c2: f64,
    /// Weight of the curvature term.
    pub c3: f64,
    /// Exponent of the radius-growth term, `r^-alpha`.
    pub alpha: f64,
    /// Half-width, in node units, of the curvature-free window around
    /// constrained nodes.
    pub epsilon: f64,
    /// Midpoint-rule points per node interval.
    pub quad_samples: usize,
    /// Gray levels are multiplied by this before entering the coverage
    /// term; 255 counts them on the 8-bit scale the weights are tuned for.
    pub gray_levels: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            c1: 2.0,
            c2: 2000.0,
            c3: 50.0,
            alpha: 0.5,
            epsilon: 0.125,
            quad_samples: 32,
            gray_levels: 255.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.c3 >= 0.0) {
            return bad("c1, c2 and c3 must be non-negative");
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad("alpha must be positive");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return bad("epsilon must lie in (0, 0.5)");
        }
        if self.quad_samples < 2 {
            return bad("quad_samples must be at least 2");
        }
        if !(self.gray_levels > 0.0) || !self.gray_levels.is_finite() {
            return bad("gray_levels must be positive");
        }
        Ok(())
    }
}

/// Per-term values of one energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub f_total: f64,
    pub f_fidelity_s: f64,
    pub f_fidelity_r: f64,
    pub f_curvature: f64,
}

impl EnergyBreakdown {
    fn from_terms(f_fidelity_s: f64, f_fidelity_r: f64, f_curvature: f64) -> Self {
        Self {
            f_total: f_fidelity_s + f_fidelity_r + f_curvature,
            f_fidelity_s,
            f_fidelity_r,
            f_curvature,
        }
    }
}

/// Midpoint nodes `k + (s + 1/2) / q` over `[0, last_node]`.
pub fn quadrature_points(last_node: usize, quad_samples: usize) -> impl Iterator<Item = f64> {
    (0..last_node).flat_map(move |k| {
        (0..quad_samples).map(move |s| k as f64 + (s as f64 + 0.5) / quad_samples as f64)
    })
}

fn exempt(t: f64, constraints: &ConstraintSet, epsilon: f64) -> bool {
    constraints
        .nodes()
        .any(|node| (t - node as f64).abs() <= epsilon)
}

/// Quadrature points that enter the curvature integral.
pub fn curvature_points(
    last_node: usize,
    constraints: &ConstraintSet,
    params: &EnergyParams,
) -> Vec<f64> {
    quadrature_points(last_node, params.quad_samples)
        .filter(|&t| !exempt(t, constraints, params.epsilon))
        .collect()
}

fn fidelity_s_integrand(img: &GrayImage, [x, y, r]: [f64; 3], gray_levels: f64) -> f64 {
    if r < R_FLOOR {
        return 0.0;
    }
    gray_levels * gray_mass(img, Disc::new(x, y, r)) / (r * r)
}

fn fidelity_r_integrand(t: f64, r: f64, alpha: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius { t, r });
    }
    Ok(r.powf(-alpha))
}

/// `F_E^(S) = c1 ∫ G_I / r^2 dt`.
pub fn energy_fidelity_s(img: &GrayImage, curve: &SplineCurve, params: &EnergyParams) -> Result<f64> {
    let w = 1.0 / params.quad_samples as f64;
    let mut sum = 0.0;
    for t in quadrature_points(curve.last_node(), params.quad_samples) {
        sum += fidelity_s_integrand(img, curve.eval(t)?, params.gray_levels);
    }
    Ok(params.c1 * w * sum)
}

/// `F_E^(r) = c2 ∫ r^-alpha dt`.
pub fn energy_fidelity_r(curve: &SplineCurve, params: &EnergyParams) -> Result<f64> {
    let w = 1.0 / params.quad_samples as f64;
    let mut sum = 0.0;
    for t in quadrature_points(curve.last_node(), params.quad_samples) {
        sum += fidelity_r_integrand(t, curve.eval(t)?[2], params.alpha)?;
    }
    Ok(params.c2 * w * sum)
}

/// `F_K = c3 ∫ |K| dt` outside the windows around constrained nodes.
pub fn energy_curvature(
    curve: &SplineCurve,
    constraints: &ConstraintSet,
    params: &EnergyParams,
) -> Result<f64> {
    let w = 1.0 / params.quad_samples as f64;
    let mut sum = 0.0;
    for t in curvature_points(curve.last_node(), constraints, params) {
        sum += curvature_of(&curve.eval_derivatives(t)?).abs();
    }
    Ok(params.c3 * w * sum)
}

/// All three terms in one pass over the quadrature grid.
pub fn energy_total(
    img: &GrayImage,
    curve: &SplineCurve,
    constraints: &ConstraintSet,
    params: &EnergyParams,
) -> Result<EnergyBreakdown> {
    let w = 1.0 / params.quad_samples as f64;
    let (mut s_sum, mut r_sum, mut k_sum) = (0.0, 0.0, 0.0);
    for t in quadrature_points(curve.last_node(), params.quad_samples) {
        let value = curve.eval(t)?;
        s_sum += fidelity_s_integrand(img, value, params.gray_levels);
        r_sum += fidelity_r_integrand(t, value[2], params.alpha)?;
        if !exempt(t, constraints, params.epsilon) {
            k_sum += curvature_of(&curve.eval_derivatives(t)?).abs();
        }
    }
    Ok(EnergyBreakdown::from_terms(
        params.c1 * w * s_sum,
        params.c2 * w * r_sum,
        params.c3 * w * k_sum,
    ))
}
