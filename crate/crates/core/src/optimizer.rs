//! Per-direction adaptive descent over the interpolation-preserving
//! directions of a constraint set.
//!
//! Every direction `v_i` carries its own step `α_i`. A step moves the
//! coefficients by `-Σ α_i g_i v_i` where `g_i` is the forward-difference
//! derivative along `v_i`, and `α_i` is multiplied by `T` whenever `g_i`
//! changes sign between iterations (a zero derivative is not a sign change).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{energy_total, EnergyBreakdown, EnergyParams};
use crate::error::{Error, Result};
use crate::image_io::GrayImage;
use crate::spline::{constraint_nullspace, Channel, ConstraintSet, SparseVector, SplineCurve};

/// Tolerance on `|direction| = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// How a direction's derivative enters its update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepRule {
    /// `α_i · g_i`.
    Gradient,
    /// `α_i · sign(g_i)`: `α_i` is a length in coefficient units.
    #[default]
    Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DescentConfig {
    pub initial_step: f64,
    /// Step multiplier on a derivative sign change, in `(0, 1)`.
    pub decay: f64,
    /// Forward-difference step.
    pub fd_step: f64,
    pub max_iterations: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Stop once the relative decrease of the total energy falls below
    /// this; `0` disables the check.
    pub early_stop_rel: f64,
    pub step_rule: StepRule,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            initial_step: 2.0,
            decay: 0.5,
            fd_step: 0.5,
            max_iterations: 14,
            r_min: 3.0,
            r_max: 50.0,
            early_stop_rel: 0.0,
            step_rule: StepRule::default(),
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return bad("decay must lie in (0, 1)");
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return bad("fd_step must be positive");
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return bad("radius bounds must satisfy 0 < r_min < r_max");
        }
        if !(self.early_stop_rel >= 0.0) {
            return bad("early_stop_rel must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentState {
    pub curve: SplineCurve,
    pub step_sizes: Vec<f64>,
    /// Derivatives from the previous step; `None` before the first one.
    pub prev_derivs: Option<Vec<f64>>,
    pub iteration: usize,
}

impl DescentState {
    pub fn new(curve: SplineCurve, dimension: usize, initial_step: f64) -> Self {
        Self {
            curve,
            step_sizes: vec![initial_step; dimension],
            prev_derivs: None,
            iteration: 0,
        }
    }
}

/// A scalar function of the flattened control points
/// (`[x_-1, y_-1, r_-1, x_0, ...]`).
pub trait Objective: Sync {
    fn value(&self, coeffs: &[f64]) -> Result<f64>;
}

impl<F> Objective for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn value(&self, coeffs: &[f64]) -> Result<f64> {
        self(coeffs)
    }
}

/// `(F(c + h v) - F(c)) / h` for a unit `v`.
pub fn directional_derivative(
    objective: &impl Objective,
    coeffs: &[f64],
    direction: &SparseVector,
    h: f64,
) -> Result<f64> {
    let base = objective.value(coeffs)?;
    directional_derivative_from(objective, coeffs, base, direction, h)
}

fn directional_derivative_from(
    objective: &impl Objective,
    coeffs: &[f64],
    base: f64,
    direction: &SparseVector,
    h: f64,
) -> Result<f64> {
    let norm = direction.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::DirectionNotUnit(norm));
    }
    if let Some(&(i, _)) = direction.entries.iter().find(|(i, _)| *i >= coeffs.len()) {
        return Err(Error::DimensionMismatch {
            expected: coeffs.len(),
            got: i + 1,
        });
    }
    let mut shifted = coeffs.to_vec();
    direction.axpy(h, &mut shifted);
    let value = objective.value(&shifted)?;
    if !value.is_finite() || !base.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    Ok((value - base) / h)
}

fn clamp_radii(curve: &mut SplineCurve, constraints: &ConstraintSet, config: &DescentConfig) {
    let clamp = |curve: &mut SplineCurve| {
        for p in curve.control_points_mut() {
            p[2] = p[2].clamp(config.r_min, config.r_max);
        }
    };
    clamp(curve);
    if constraints
        .entries()
        .iter()
        .any(|c| c.mask.contains(Channel::R))
    {
        constraints.restore_channel(curve, Channel::R);
        clamp(curve);
    }
}

/// One iteration: derivatives, step adaptation, update, radius clamp.
pub fn descent_step(
    state: &DescentState,
    objective: &impl Objective,
    directions: &[SparseVector],
    constraints: &ConstraintSet,
    config: &DescentConfig,
) -> Result<DescentState> {
    if state.step_sizes.len() != directions.len() {
        return Err(Error::DimensionMismatch {
            expected: directions.len(),
            got: state.step_sizes.len(),
        });
    }
    let coeffs = state.curve.to_flat();
    let base = objective.value(&coeffs)?;
    let derivs = directions
        .par_iter()
        .map(|v| directional_derivative_from(objective, &coeffs, base, v, config.fd_step))
        .collect::<Result<Vec<f64>>>()?;

    let mut step_sizes = state.step_sizes.clone();
    if let Some(prev) = &state.prev_derivs {
        for ((alpha, d), p) in step_sizes.iter_mut().zip(&derivs).zip(prev) {
            if d * p < 0.0 {
                *alpha *= config.decay;
            }
        }
    }

    let mut next = coeffs;
    for ((v, &d), &alpha) in directions.iter().zip(&derivs).zip(&step_sizes) {
        let amount = match config.step_rule {
            StepRule::Gradient => alpha * d,
            StepRule::Sign if d > 0.0 => alpha,
            StepRule::Sign if d < 0.0 => -alpha,
            StepRule::Sign => 0.0,
        };
        if amount != 0.0 {
            v.axpy(-amount, &mut next);
        }
    }
    let mut curve = SplineCurve::from_flat(state.curve.node_count(), &next)?;
    clamp_radii(&mut curve, constraints, config);

    Ok(DescentState {
        curve,
        step_sizes,
        prev_derivs: Some(derivs),
        iteration: state.iteration + 1,
    })
}

/// Final state plus the energy before the first step and after each one.
#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub state: DescentState,
    pub trace: Vec<EnergyBreakdown>,
}

/// Energy of a curve over an image, as a function of flattened coefficients.
pub struct ImageEnergy<'a> {
    pub img: &'a GrayImage,
    pub constraints: &'a ConstraintSet,
    pub params: &'a EnergyParams,
    pub node_count: usize,
}

impl ImageEnergy<'_> {
    pub fn breakdown(&self, curve: &SplineCurve) -> Result<EnergyBreakdown> {
        let e = energy_total(self.img, curve, self.constraints, self.params)?;
        if !e.f_total.is_finite() {
            return Err(Error::NonFiniteObjective);
        }
        Ok(e)
    }
}

impl Objective for ImageEnergy<'_> {
    fn value(&self, coeffs: &[f64]) -> Result<f64> {
        let curve = SplineCurve::from_flat(self.node_count, coeffs)?;
        Ok(energy_total(self.img, &curve, self.constraints, self.params)?.f_total)
    }
}

pub fn run_descent(
    img: &GrayImage,
    initial: SplineCurve,
    constraints: &ConstraintSet,
    params: &EnergyParams,
    config: &DescentConfig,
) -> Result<DescentOutcome> {
    run_descent_with(img, initial, constraints, params, config, |_, _| {})
}

/// [`run_descent`] reporting every state, starting with the initial one.
pub fn run_descent_with(
    img: &GrayImage,
    initial: SplineCurve,
    constraints: &ConstraintSet,
    params: &EnergyParams,
    config: &DescentConfig,
    mut observer: impl FnMut(&DescentState, &EnergyBreakdown),
) -> Result<DescentOutcome> {
    params.validate()?;
    config.validate()?;
    let node_count = initial.node_count();
    let directions = constraint_nullspace(constraints, node_count)?.flattened();
    let objective = ImageEnergy {
        img,
        constraints,
        params,
        node_count,
    };

    let mut state = DescentState::new(initial, directions.len(), config.initial_step);
    let first = objective.breakdown(&state.curve)?;
    observer(&state, &first);
    let mut trace = vec![first];
    for _ in 0..config.max_iterations {
        state = descent_step(&state, &objective, &directions, constraints, config)?;
        let e = objective.breakdown(&state.curve)?;
        observer(&state, &e);
        let prev = trace.last().expect("trace starts non-empty").f_total;
        trace.push(e);
        if config.early_stop_rel > 0.0 && (prev - e.f_total) < config.early_stop_rel * prev.abs() {
            break;
        }
    }
    Ok(DescentOutcome { state, trace })
}
