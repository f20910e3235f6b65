//! Synthetic strokes with known ground truth, damage operators and scoring.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_io::{BinaryMask, GrayImage, StretchRange};
use crate::pipeline::{interpolate_nodes, restore, PointKind, RestoreConfig, RestorationResult, SamplePoint, SamplePointSet};
use crate::spline::SplineCurve;
use crate::stroke::{disc_pixels, render_stroke, Disc, RENDER_SAMPLES_PER_INTERVAL};

/// Node intervals of every generated ground-truth curve.
const TRUTH_INTERVALS: usize = 8;
/// Curve samples per interval used to locate the nearest parameter.
const NEAREST_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Line,
    Arc,
    SCurve,
    Corner,
}

impl Shape {
    pub const ALL: [Shape; 4] = [Shape::Line, Shape::Arc, Shape::SCurve, Shape::Corner];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Line => "line",
            Shape::Arc => "arc",
            Shape::SCurve => "s-curve",
            Shape::Corner => "corner",
        }
    }

    /// Point at arc-length fraction `u` of a shape of overall size `span`,
    /// centred on the origin.
    fn point(self, span: f64, u: f64) -> [f64; 2] {
        match self {
            Shape::Line => [span * (u - 0.5), 0.0],
            Shape::Arc => {
                let rho = span / 2.0;
                let sweep = 2.0 * std::f64::consts::PI / 3.0;
                let phi = std::f64::consts::PI / 2.0 + sweep * (0.5 - u);
                [rho * phi.cos(), rho * (1.0 - phi.sin()) - rho * 0.25]
            }
            Shape::SCurve => [
                span * (u - 0.5),
                span / 5.0 * (2.0 * std::f64::consts::PI * u).sin(),
            ],
            Shape::Corner => {
                let half = span / 2.0;
                if u <= 0.5 {
                    [-half + 2.0 * half * u, -half / 2.0]
                } else {
                    [0.0, -half / 2.0 + 2.0 * half * (u - 0.5)]
                }
            }
        }
    }

    /// Arc-length fractions: identity except for the S-curve, whose graph
    /// parameter is re-timed to constant speed.
    fn arc_length_table(self, span: f64) -> Vec<f64> {
        const FINE: usize = 4096;
        let mut cumulative = vec![0.0; FINE + 1];
        for i in 1..=FINE {
            let a = self.point(span, (i - 1) as f64 / FINE as f64);
            let b = self.point(span, i as f64 / FINE as f64);
            cumulative[i] = cumulative[i - 1] + (b[0] - a[0]).hypot(b[1] - a[1]);
        }
        cumulative
    }

    fn uniform_points(self, span: f64, count: usize) -> Vec<[f64; 2]> {
        if self != Shape::SCurve {
            return (0..count)
                .map(|k| self.point(span, k as f64 / (count - 1) as f64))
                .collect();
        }
        let table = self.arc_length_table(span);
        let total = *table.last().expect("table is non-empty");
        let fine = table.len() - 1;
        (0..count)
            .map(|k| {
                let target = total * k as f64 / (count - 1) as f64;
                let i = table.partition_point(|&s| s < target).clamp(1, fine);
                let frac = (target - table[i - 1]) / (table[i] - table[i - 1]).max(1e-300);
                self.point(span, (i as f64 - 1.0 + frac) / fine as f64)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadiusProfile {
    Constant { r: f64 },
    Taper { start: f64, end: f64 },
}

impl RadiusProfile {
    fn at(self, u: f64) -> f64 {
        match self {
            RadiusProfile::Constant { r } => r,
            RadiusProfile::Taper { start, end } => start + (end - start) * u,
        }
    }

    fn max(self) -> f64 {
        match self {
            RadiusProfile::Constant { r } => r,
            RadiusProfile::Taper { start, end } => start.max(end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub shape: Shape,
    /// Overall extent in pixels.
    pub span: f64,
}

#[derive(Debug, Clone)]
pub struct SyntheticStroke {
    pub spec: ShapeSpec,
    pub profile: RadiusProfile,
    pub curve: SplineCurve,
    pub clean: GrayImage,
    pub mask: BinaryMask,
}

impl SyntheticStroke {
    /// Points on the true skeleton at curve-parameter fractions in `[0, 1]`.
    pub fn samples(&self, fractions: &[f64]) -> Result<SamplePointSet> {
        let n = self.curve.last_node() as f64;
        let last = fractions.len().saturating_sub(1);
        fractions
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                let [x, y, _] = self.curve.eval((f * n).clamp(0.0, n))?;
                let kind = if i == 0 || i == last {
                    PointKind::Endpoint
                } else {
                    PointKind::CurvatureExtremum
                };
                Ok(SamplePoint {
                    x,
                    y,
                    r: None,
                    kind: Some(kind),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(SamplePointSet::new)
    }
}

/// Ground-truth stroke centred in a `width x height` image.
pub fn generate(spec: ShapeSpec, profile: RadiusProfile, width: usize, height: usize) -> Result<SyntheticStroke> {
    if !(spec.span > 0.0 && spec.span.is_finite()) {
        return Err(Error::InvalidShape(format!("span must be positive, got {}", spec.span)));
    }
    let radii_ok = match profile {
        RadiusProfile::Constant { r } => r > 0.0,
        RadiusProfile::Taper { start, end } => start > 0.0 && end > 0.0,
    };
    if !radii_ok {
        return Err(Error::InvalidShape("radii must be positive".into()));
    }
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let pts = spec.shape.uniform_points(spec.span, TRUTH_INTERVALS + 1);
    let targets: Vec<[f64; 3]> = pts
        .iter()
        .enumerate()
        .map(|(k, p)| [cx + p[0], cy + p[1], profile.at(k as f64 / TRUTH_INTERVALS as f64)])
        .collect();
    let channels: Vec<Vec<f64>> = (0..3)
        .map(|ch| interpolate_nodes(&targets.iter().map(|t| t[ch]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let curve = SplineCurve::new(
        (0..TRUTH_INTERVALS + 3)
            .map(|j| [channels[0][j], channels[1][j], channels[2][j]])
            .collect(),
    )?;

    let margin = profile.max();
    let n = curve.last_node() as f64;
    for k in 0..=TRUTH_INTERVALS * 16 {
        let [x, y, _] = curve.eval(n * k as f64 / (TRUTH_INTERVALS * 16) as f64)?;
        if x < margin || y < margin || x > width as f64 - 1.0 - margin || y > height as f64 - 1.0 - margin {
            return Err(Error::InvalidShape(format!(
                "{} of span {} with radius {margin} does not fit {width}x{height}",
                spec.shape.name(),
                spec.span
            )));
        }
    }
    let mask = render_stroke(&curve, RENDER_SAMPLES_PER_INTERVAL, width, height)?;
    let clean = mask.to_gray();
    Ok(SyntheticStroke {
        spec,
        profile,
        curve,
        clean,
        mask,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Degradation {
    /// Fraction of the curve parameter range, centred on the middle, whose
    /// ink is removed.
    pub erase_frac: f64,
    pub noise_sigma: f64,
    pub blotches: usize,
}

impl Degradation {
    pub const NONE: Degradation = Degradation {
        erase_frac: 0.0,
        noise_sigma: 0.0,
        blotches: 0,
    };

    pub fn label(&self) -> String {
        if *self == Self::NONE {
            "clean".into()
        } else {
            format!("erase{}-sigma{}-blotch{}", self.erase_frac, self.noise_sigma, self.blotches)
        }
    }

    /// Parameter fractions bounding the erased range.
    pub fn erased_range(&self) -> (f64, f64) {
        (0.5 - self.erase_frac / 2.0, 0.5 + self.erase_frac / 2.0)
    }
}

impl Default for Degradation {
    fn default() -> Self {
        Self {
            erase_frac: 0.2,
            noise_sigma: 0.05,
            blotches: 3,
        }
    }
}

/// Parameter of the densely sampled skeleton point nearest to `(x, y)`, as
/// a fraction of the curve's parameter range.
fn nearest_fraction(samples: &[[f64; 3]], x: f64, y: f64) -> f64 {
    let (mut best, mut best_d) = (0, f64::INFINITY);
    for (i, s) in samples.iter().enumerate() {
        let d = (s[0] - x).powi(2) + (s[1] - y).powi(2);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best as f64 / (samples.len() - 1) as f64
}

/// Erasure, clipped Gaussian noise, then dark blotches of radius 4 to 10.
pub fn degrade(s: &SyntheticStroke, d: &Degradation, seed: u64) -> Result<GrayImage> {
    if !(0.0..1.0).contains(&d.erase_frac) || !(d.noise_sigma >= 0.0) {
        return Err(Error::InvalidParams(
            "erase_frac must lie in [0, 1) and noise_sigma must be non-negative".into(),
        ));
    }
    let (w, h) = s.clean.dimensions();
    let mut pixels = s.clean.pixels().to_vec();

    if d.erase_frac > 0.0 {
        let n = s.curve.last_node();
        let total = n * NEAREST_SAMPLES;
        let samples = (0..=total)
            .map(|k| s.curve.eval(n as f64 * k as f64 / total as f64))
            .collect::<Result<Vec<_>>>()?;
        let (lo, hi) = d.erased_range();
        for (i, px) in pixels.iter_mut().enumerate() {
            if s.mask.bits()[i] {
                let f = nearest_fraction(&samples, (i % w) as f64, (i / w) as f64);
                if (lo..=hi).contains(&f) {
                    *px = 1.0;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if d.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, d.noise_sigma).map_err(|e| Error::InvalidParams(e.to_string()))?;
        for px in pixels.iter_mut() {
            *px = (*px + normal.sample(&mut rng)).clamp(0.0, 1.0);
        }
    }
    for _ in 0..d.blotches {
        let disc = Disc::new(
            rng.random_range(0.0..w as f64),
            rng.random_range(0.0..h as f64),
            rng.random_range(4.0..=10.0),
        );
        for p in disc_pixels(disc, w, h).filter(|p| p.in_bounds) {
            pixels[p.y as usize * w + p.x as usize] = 0.0;
        }
    }
    GrayImage::new(w, h, pixels)
}

/// `|A ∩ B| / |A ∪ B|`, or 0 for an empty union.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    let inter = a.intersection_count(b)?;
    let union = a.count() + b.count() - inter;
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// Zhang-Suen thinning.
pub fn skeleton(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dimensions();
    let mut img = mask.clone();
    let at = |m: &BinaryMask, x: i64, y: i64| -> u8 {
        (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && m.get(x as usize, y as usize)) as u8
    };
    loop {
        let mut changed = false;
        for pass in 0..2 {
            let mut remove = Vec::new();
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    if at(&img, x, y) == 0 {
                        continue;
                    }
                    // P2..P9 clockwise from north
                    let nb = [
                        at(&img, x, y - 1),
                        at(&img, x + 1, y - 1),
                        at(&img, x + 1, y),
                        at(&img, x + 1, y + 1),
                        at(&img, x, y + 1),
                        at(&img, x - 1, y + 1),
                        at(&img, x - 1, y),
                        at(&img, x - 1, y - 1),
                    ];
                    let b: u8 = nb.iter().sum();
                    let a = (0..8).filter(|&i| nb[i] == 0 && nb[(i + 1) % 8] == 1).count();
                    let (p2, p4, p6, p8) = (nb[0], nb[2], nb[4], nb[6]);
                    let cond = if pass == 0 {
                        p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                    } else {
                        p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                    };
                    if (2..=6).contains(&b) && a == 1 && cond {
                        remove.push((x as usize, y as usize));
                    }
                }
            }
            changed |= !remove.is_empty();
            for (x, y) in remove {
                img.set(x, y, false);
            }
        }
        if !changed {
            return img;
        }
    }
}

fn points(mask: &BinaryMask) -> Vec<(f64, f64)> {
    let w = mask.width();
    mask.bits()
        .iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| ((i % w) as f64, (i / w) as f64))
        .collect()
}

fn directed_hausdorff(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    from.par_iter()
        .map(|a| {
            to.iter()
                .map(|b| (a.0 - b.0).hypot(a.1 - b.1))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between point sets of two masks; 0 when both
/// are empty and infinite when exactly one is.
pub fn hausdorff(a: &BinaryMask, b: &BinaryMask) -> f64 {
    let (pa, pb) = (points(a), points(b));
    match (pa.is_empty(), pb.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => directed_hausdorff(&pa, &pb).max(directed_hausdorff(&pb, &pa)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub iou: f64,
    pub hausdorff: f64,
}

pub fn score(result: &BinaryMask, truth: &BinaryMask) -> Result<Score> {
    Ok(Score {
        iou: iou(result, truth)?,
        hausdorff: hausdorff(&skeleton(result), &skeleton(truth)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCase {
    pub name: String,
    pub spec: ShapeSpec,
    pub profile: RadiusProfile,
    pub width: usize,
    pub height: usize,
    pub degradation: Degradation,
    /// Sample positions as curve-parameter fractions; the erased range's
    /// ends are added when there is a gap.
    pub sample_fractions: Vec<f64>,
    pub seed: u64,
}

impl BenchCase {
    pub fn fractions(&self) -> Vec<f64> {
        let mut f = self.sample_fractions.clone();
        if self.degradation.erase_frac > 0.0 {
            let (lo, hi) = self.degradation.erased_range();
            f.extend([lo, hi]);
        }
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    pub fn sample_points(&self, truth: &SyntheticStroke) -> Result<SamplePointSet> {
        let fractions = self.fractions();
        let mut set = truth.samples(&fractions)?;
        if self.degradation.erase_frac > 0.0 {
            let (lo, hi) = self.degradation.erased_range();
            for (p, f) in set.points.iter_mut().zip(&fractions) {
                if *f == lo || *f == hi {
                    p.kind = Some(PointKind::Gap);
                }
            }
        }
        Ok(set)
    }
}

fn case(shape: Shape, profile: RadiusProfile, degradation: Degradation, fractions: &[f64], seed: u64) -> BenchCase {
    BenchCase {
        name: format!("{}-{}", shape.name(), degradation.label()),
        spec: ShapeSpec { shape, span: 160.0 },
        profile,
        width: 256,
        height: 256,
        degradation,
        sample_fractions: fractions.to_vec(),
        seed,
    }
}

/// Every shape, clean and with the default damage.
pub fn default_suite() -> Vec<BenchCase> {
    let shapes: [(Shape, RadiusProfile, &[f64]); 4] = [
        (Shape::Line, RadiusProfile::Constant { r: 8.0 }, &[0.0, 1.0]),
        (Shape::Arc, RadiusProfile::Constant { r: 6.0 }, &[0.0, 0.5, 1.0]),
        (Shape::SCurve, RadiusProfile::Constant { r: 7.0 }, &[0.0, 0.25, 0.75, 1.0]),
        (Shape::Corner, RadiusProfile::Taper { start: 9.0, end: 5.0 }, &[0.0, 0.5, 1.0]),
    ];
    let mut cases = Vec::new();
    for (i, (shape, profile, fractions)) in shapes.into_iter().enumerate() {
        for (j, d) in [Degradation::NONE, Degradation::default()].into_iter().enumerate() {
            cases.push(case(shape, profile, d, fractions, 1000 + 10 * i as u64 + j as u64));
        }
    }
    cases
}

/// Clean band from two samples, and an S-curve with a 20% gap plus noise
/// from five samples (the gap ends among them).
pub fn recovery_suite() -> Vec<BenchCase> {
    let mut band = case(
        Shape::Line,
        RadiusProfile::Constant { r: 8.0 },
        Degradation::NONE,
        &[0.0, 1.0],
        2000,
    );
    let mut s_curve = case(
        Shape::SCurve,
        RadiusProfile::Constant { r: 7.0 },
        Degradation {
            erase_frac: 0.2,
            noise_sigma: 0.05,
            blotches: 0,
        },
        &[0.0, 0.2, 1.0],
        2001,
    );
    s_curve.name = format!("recovery-{}", s_curve.name);
    band.name = format!("recovery-{}", band.name);
    vec![band, s_curve]
}

/// Suites addressable by name from the command line.
pub fn suite_by_name(name: &str) -> Option<Vec<BenchCase>> {
    match name {
        "default" => Some(default_suite()),
        "recovery" => Some(recovery_suite()),
        _ => None,
    }
}

#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub case: BenchCase,
    pub score: Score,
    pub runtime_s: f64,
    pub degraded: GrayImage,
    pub restoration: RestorationResult,
}

/// Generate, degrade, stretch, restore, score.
pub fn run_case(case: &BenchCase, config: &RestoreConfig) -> Result<CaseOutcome> {
    let truth = generate(case.spec, case.profile, case.width, case.height)?;
    let degraded = degrade(&truth, &case.degradation, case.seed)?;
    let input = degraded.histogram_stretch(StretchRange::default());
    let points = case.sample_points(&truth)?;
    let start = Instant::now();
    let restoration = restore(&input, &points, config)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let score = score(&restoration.mask, &truth.mask)?;
    Ok(CaseOutcome {
        case: case.clone(),
        score,
        runtime_s,
        degraded,
        restoration,
    })
}

pub fn run_suite(cases: &[BenchCase], config: &RestoreConfig) -> Result<Vec<CaseOutcome>> {
    cases.iter().map(|c| run_case(c, config)).collect()
}

#[derive(Serialize)]
struct ResultRow<'a> {
    case: &'a str,
    shape: &'a str,
    degradation: String,
    iou: f64,
    hausdorff: f64,
    iterations: usize,
    f_total_initial: f64,
    f_total_final: f64,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    case: &'a str,
    runtime_s: f64,
}

/// Scores only, reproducible byte for byte.
pub fn results_csv(outcomes: &[CaseOutcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for o in outcomes {
        let trace = &o.restoration.trace;
        w.serialize(ResultRow {
            case: &o.case.name,
            shape: o.case.spec.shape.name(),
            degradation: o.case.degradation.label(),
            iou: o.score.iou,
            hausdorff: o.score.hausdorff,
            iterations: o.restoration.iterations(),
            f_total_initial: trace[0].f_total,
            f_total_final: trace[trace.len() - 1].f_total,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Wall-clock time per case; varies between runs.
pub fn timings_csv(outcomes: &[CaseOutcome]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for o in outcomes {
        w.serialize(TimingRow {
            case: &o.case.name,
            runtime_s: o.runtime_s,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// `results.csv` and `timings.csv` in `dir`, plus per-case degraded input,
/// mask, spline and trace under `dir/<case>/`.
pub fn write_artifacts(outcomes: &[CaseOutcome], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("results.csv"), results_csv(outcomes)?.as_bytes())?;
    write(&dir.join("timings.csv"), timings_csv(outcomes)?.as_bytes())?;
    for o in outcomes {
        let case_dir = dir.join(&o.case.name);
        std::fs::create_dir_all(&case_dir).map_err(|e| Error::io(&case_dir, e))?;
        write(&case_dir.join("input.png"), &o.degraded.to_png_bytes()?)?;
        write(&case_dir.join("mask.png"), &o.restoration.mask.to_png_bytes()?)?;
        write(&case_dir.join("spline.json"), o.restoration.curve.to_json()?.as_bytes())?;
        write(&case_dir.join("trace.csv"), o.restoration.trace_csv()?.as_bytes())?;
    }
    Ok(())
}
