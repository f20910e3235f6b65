//! Sample points in, restored stroke out.
//!
//! Sample `k` sits at node `2k`; every gap between consecutive samples gets
//! one free node. The starting curve interpolates the polyline through the
//! samples (free nodes at segment midpoints), then descent runs with the
//! samples as hard constraints.

use serde::{Deserialize, Serialize};

use crate::energy::{EnergyBreakdown, EnergyParams};
use crate::error::{Error, Result};
use crate::image_io::{BinaryMask, GrayImage};
use crate::optimizer::{run_descent_with, DescentConfig, DescentState};
use crate::spline::{ChannelMask, Constraint, ConstraintSet, SplineCurve};
use crate::stroke::{disc_pixels, gray_mass, render_stroke, Disc, RENDER_SAMPLES_PER_INTERVAL};

/// Why a point was sampled. Carried through untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointKind {
    Endpoint,
    Intersection,
    CurvatureExtremum,
    Gap,
    Densify,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<PointKind>,
}

impl SamplePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            r: None,
            kind: None,
        }
    }
}

/// Ordered stroke samples; the `{"points": [...]}` file format.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SamplePointSet {
    pub points: Vec<SamplePoint>,
}

impl SamplePointSet {
    pub fn new(points: Vec<SamplePoint>) -> Self {
        Self { points }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks count, finiteness, image bounds and explicit radii.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::TooFewPoints(self.points.len()));
        }
        for (index, p) in self.points.iter().enumerate() {
            let inside = p.x.is_finite()
                && p.y.is_finite()
                && (0.0..=width as f64).contains(&p.x)
                && (0.0..=height as f64).contains(&p.y);
            if !inside {
                return Err(Error::PointOutOfBounds {
                    index,
                    x: p.x,
                    y: p.y,
                    width,
                    height,
                });
            }
            if let Some(r) = p.r {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "point {index} has radius {r}; radii must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLayout {
    /// `n + 1`.
    pub node_count: usize,
    /// Node index of each sample, in order.
    pub constrained: Vec<usize>,
}

pub fn layout_nodes(points: &SamplePointSet) -> Result<NodeLayout> {
    let k = points.len();
    if k < 2 {
        return Err(Error::TooFewPoints(k));
    }
    Ok(NodeLayout {
        node_count: 2 * (k - 1) + 1,
        constrained: (0..k).map(|i| 2 * i).collect(),
    })
}

/// Radius search used when a sample has no explicit radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusProbe {
    /// Largest acceptable mean gray inside the probe disc.
    pub max_mean_gray: f64,
    pub step: f64,
    pub fallback: f64,
}

impl Default for RadiusProbe {
    fn default() -> Self {
        Self {
            max_mean_gray: 0.3,
            step: 0.5,
            fallback: 5.0,
        }
    }
}

impl RadiusProbe {
    /// Largest `r` in `[r_min, r_max]` on the `step` grid below `r_max`
    /// whose disc is dark enough on average.
    pub fn probe(&self, img: &GrayImage, x: f64, y: f64, r_min: f64, r_max: f64) -> f64 {
        let mut r = r_max;
        while r >= r_min {
            let disc = Disc::new(x, y, r);
            let count = disc_pixels(disc, img.width(), img.height()).count();
            if count > 0 && gray_mass(img, disc) / count as f64 <= self.max_mean_gray {
                return r;
            }
            r -= self.step;
        }
        r_min.max(self.fallback)
    }
}

/// Solves `(c_{i-1} + 4 c_i + c_{i+1}) / 6 = f_i` for every node with the
/// natural end conditions `c_{-1} - 2 c_0 + c_1 = 0` (and mirrored).
pub fn interpolate_nodes(targets: &[f64]) -> Result<Vec<f64>> {
    let m = targets.len();
    if m < 2 {
        return Err(Error::TooFewNodes(m));
    }
    let last = m - 1;
    // the end conditions collapse the end rows to c_0 = f_0, c_n = f_n
    let mut c = vec![0.0; m];
    c[0] = targets[0];
    c[last] = targets[last];
    let interior = last.saturating_sub(1);
    if interior > 0 {
        let mut rhs: Vec<f64> = (1..last).map(|i| 6.0 * targets[i]).collect();
        rhs[0] -= c[0];
        rhs[interior - 1] -= c[last];
        let solved = solve_tridiagonal(1.0, 4.0, 1.0, &rhs)?;
        c[1..last].copy_from_slice(&solved);
    }
    let mut out = Vec::with_capacity(m + 2);
    out.push(2.0 * c[0] - c[1]);
    out.extend_from_slice(&c);
    out.push(2.0 * c[last] - c[last - 1]);
    Ok(out)
}

/// Thomas algorithm for a constant-band tridiagonal system.
fn solve_tridiagonal(lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut denom = diag;
    for i in 0..n {
        if i > 0 {
            denom = diag - lower * c_prime[i - 1];
        }
        if denom.abs() < 1e-12 {
            return Err(Error::SingularSystem);
        }
        c_prime[i] = upper / denom;
        let prev = if i > 0 { d_prime[i - 1] } else { 0.0 };
        d_prime[i] = (rhs[i] - lower * prev) / denom;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = d_prime[i] - if i + 1 < n { c_prime[i] * x[i + 1] } else { 0.0 };
    }
    Ok(x)
}

/// Node targets `[x, y, r]`: samples at even nodes, midpoints between.
fn node_targets(
    img: &GrayImage,
    points: &SamplePointSet,
    config: &DescentConfig,
    probe: &RadiusProbe,
) -> Vec<[f64; 3]> {
    let radius = |x: f64, y: f64, explicit: Option<f64>| {
        explicit.unwrap_or_else(|| probe.probe(img, x, y, config.r_min, config.r_max))
    };
    let mut targets = Vec::with_capacity(2 * points.len() - 1);
    for (k, p) in points.points.iter().enumerate() {
        if k > 0 {
            let q = points.points[k - 1];
            let (mx, my) = ((p.x + q.x) / 2.0, (p.y + q.y) / 2.0);
            targets.push([mx, my, radius(mx, my, None)]);
        }
        targets.push([p.x, p.y, radius(p.x, p.y, p.r)]);
    }
    targets
}

/// The curve interpolating every node target, constraints on the samples.
pub fn initial_spline(
    img: &GrayImage,
    points: &SamplePointSet,
    config: &DescentConfig,
    probe: &RadiusProbe,
) -> Result<(SplineCurve, ConstraintSet)> {
    let layout = layout_nodes(points)?;
    let targets = node_targets(img, points, config, probe);
    let channels: Vec<Vec<f64>> = (0..3)
        .map(|ch| interpolate_nodes(&targets.iter().map(|t| t[ch]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let curve = SplineCurve::new(
        (0..layout.node_count + 2)
            .map(|j| [channels[0][j], channels[1][j], channels[2][j]])
            .collect(),
    )?;
    let entries = layout
        .constrained
        .iter()
        .zip(&points.points)
        .map(|(&node, p)| Constraint {
            node,
            target: targets[node],
            mask: if p.r.is_some() {
                ChannelMask::XYR
            } else {
                ChannelMask::XY
            },
        })
        .collect();
    let constraints = ConstraintSet::new(entries, layout.node_count)?;
    Ok((curve, constraints))
}

/// Every parameter a restoration used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RestoreConfig {
    pub energy: EnergyParams,
    pub descent: DescentConfig,
    pub probe: RadiusProbe,
    pub render_samples_per_interval: usize,
}

impl Default for RestoreConfig {
    fn default() -> Self {
        Self::new(EnergyParams::default(), DescentConfig::default())
    }
}

impl RestoreConfig {
    pub fn new(energy: EnergyParams, descent: DescentConfig) -> Self {
        Self {
            energy,
            descent,
            probe: RadiusProbe::default(),
            render_samples_per_interval: RENDER_SAMPLES_PER_INTERVAL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestorationResult {
    pub curve: SplineCurve,
    pub constraints: ConstraintSet,
    /// Baseline first, then one entry per iteration.
    pub trace: Vec<EnergyBreakdown>,
    pub mask: BinaryMask,
    pub config: RestoreConfig,
}

impl RestorationResult {
    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn trace_csv(&self) -> Result<String> {
        crate::trace::to_csv(&self.trace)
    }
}

pub fn restore(img: &GrayImage, points: &SamplePointSet, config: &RestoreConfig) -> Result<RestorationResult> {
    restore_with(img, points, config, |_, _| {})
}

/// [`restore`] reporting the curve and energy after every iteration.
pub fn restore_with(
    img: &GrayImage,
    points: &SamplePointSet,
    config: &RestoreConfig,
    observer: impl FnMut(&DescentState, &EnergyBreakdown),
) -> Result<RestorationResult> {
    config.energy.validate()?;
    config.descent.validate()?;
    points.validate(img.width(), img.height())?;
    let (initial, constraints) = initial_spline(img, points, &config.descent, &config.probe)?;
    let outcome = run_descent_with(img, initial, &constraints, &config.energy, &config.descent, observer)?;
    let mask = render_stroke(
        &outcome.state.curve,
        config.render_samples_per_interval,
        img.width(),
        img.height(),
    )?;
    Ok(RestorationResult {
        curve: outcome.state.curve,
        constraints,
        trace: outcome.trace,
        mask,
        config: *config,
    })
}

/// Pixelwise OR of the strokes' masks.
pub fn overlay_strokes(results: &[RestorationResult]) -> Result<BinaryMask> {
    overlay_masks(results.iter().map(|r| &r.mask))
}

pub fn overlay_masks<'a>(masks: impl IntoIterator<Item = &'a BinaryMask>) -> Result<BinaryMask> {
    let mut masks = masks.into_iter();
    let first = masks
        .next()
        .ok_or_else(|| Error::InvalidParams("nothing to overlay".into()))?;
    let mut out = first.clone();
    for m in masks {
        out.union_with(m)?;
    }
    Ok(out)
}
