//! The swept-disc stroke model.
//!
//! Pixel `(p, q)` (column `p`, row `q`) has its centre at integer
//! coordinates, and belongs to the disc `(x, y, r)` iff
//! `(p - x)^2 + (q - y)^2 <= r^2`. A stroke is the union of the discs
//! centred on the skeleton with the curve's radius.

use crate::error::{Error, Result};
use crate::image_io::{BinaryMask, GrayImage};
use crate::spline::SplineCurve;

/// Discs with a smaller radius cover nothing and carry no gray mass.
pub const R_FLOOR: f64 = 0.25;

/// Default sampling density for [`render_stroke`].
pub const RENDER_SAMPLES_PER_INTERVAL: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

impl Disc {
    pub fn new(x: f64, y: f64, r: f64) -> Self {
        Self { x, y, r }
    }

    pub fn contains(&self, p: i64, q: i64) -> bool {
        let dx = p as f64 - self.x;
        let dy = q as f64 - self.y;
        dx * dx + dy * dy <= self.r * self.r
    }

    fn row_range(&self) -> Option<(i64, i64)> {
        if !(self.r >= 0.0) || !self.x.is_finite() || !self.y.is_finite() {
            return None;
        }
        let top = (self.y - self.r).ceil() as i64;
        let bottom = (self.y + self.r).floor() as i64;
        (top <= bottom).then_some((top, bottom))
    }

    /// Inclusive column span of row `q`, decided by the exact membership
    /// test rather than the rounded square root alone.
    fn span(&self, q: i64) -> Option<(i64, i64)> {
        let dy = q as f64 - self.y;
        let rem = self.r * self.r - dy * dy;
        if rem < 0.0 {
            return None;
        }
        let half = rem.sqrt();
        let mut lo = (self.x - half).ceil() as i64;
        let mut hi = (self.x + half).floor() as i64;
        while self.contains(lo - 1, q) {
            lo -= 1;
        }
        while lo <= hi && !self.contains(lo, q) {
            lo += 1;
        }
        while self.contains(hi + 1, q) {
            hi += 1;
        }
        while hi >= lo && !self.contains(hi, q) {
            hi -= 1;
        }
        (lo <= hi).then_some((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiscPixel {
    pub x: i64,
    pub y: i64,
    pub in_bounds: bool,
}

/// Iterator over the pixel centres of a disc, row by row.
#[derive(Debug, Clone)]
pub struct DiscPixels {
    disc: Disc,
    width: i64,
    height: i64,
    row: i64,
    last_row: i64,
    col: i64,
    col_end: i64,
}

impl Iterator for DiscPixels {
    type Item = DiscPixel;

    fn next(&mut self) -> Option<DiscPixel> {
        while self.col > self.col_end {
            if self.row >= self.last_row {
                return None;
            }
            self.row += 1;
            if let Some((lo, hi)) = self.disc.span(self.row) {
                self.col = lo;
                self.col_end = hi;
            }
        }
        let (x, y) = (self.col, self.row);
        self.col += 1;
        Some(DiscPixel {
            x,
            y,
            in_bounds: (0..self.width).contains(&x) && (0..self.height).contains(&y),
        })
    }
}

/// All integer pixel centres inside `disc`, tagged against a
/// `width x height` image.
pub fn disc_pixels(disc: Disc, width: usize, height: usize) -> DiscPixels {
    let (row, last_row) = disc.row_range().unwrap_or((0, -1));
    DiscPixels {
        disc,
        width: width as i64,
        height: height as i64,
        // start one row early with an empty span so `next` advances into `row`
        row: row - 1,
        last_row,
        col: 0,
        col_end: -1,
    }
}

/// `G_I`: sum of gray values over the disc. Pixels outside the image count
/// as background (1).
pub fn gray_mass(img: &GrayImage, disc: Disc) -> f64 {
    if !(disc.r >= R_FLOOR) {
        return 0.0;
    }
    let Some((top, bottom)) = disc.row_range() else {
        return 0.0;
    };
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut total = 0.0;
    for q in top..=bottom {
        let Some((lo, hi)) = disc.span(q) else {
            continue;
        };
        let count = (hi - lo + 1) as f64;
        if q < 0 || q >= h || hi < 0 || lo >= w {
            total += count;
            continue;
        }
        let (a, b) = (lo.max(0), hi.min(w - 1));
        let inside = (b - a + 1) as f64;
        total += img.row_sum(q as usize, a as usize, b as usize) + (count - inside);
    }
    total
}

/// Sets every in-bounds pixel of `disc` in `mask`.
pub fn stamp_disc(mask: &mut BinaryMask, disc: Disc) {
    if !(disc.r >= R_FLOOR) {
        return;
    }
    let Some((top, bottom)) = disc.row_range() else {
        return;
    };
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    for q in top.max(0)..=bottom.min(h - 1) {
        if let Some((lo, hi)) = disc.span(q) {
            if hi >= 0 && lo < w {
                mask.fill_row(q as usize, lo.max(0) as usize, hi.min(w - 1) as usize);
            }
        }
    }
}

/// Evenly spaced parameters `k / samples_per_interval` covering `[0, n]`.
pub fn sample_parameters(last_node: usize, samples_per_interval: usize) -> impl Iterator<Item = f64> {
    let total = last_node * samples_per_interval;
    (0..=total).map(move |k| {
        if k == total {
            last_node as f64
        } else {
            k as f64 / samples_per_interval as f64
        }
    })
}

/// Pixels whose distance to the sampled sweep is within this of zero are
/// settled against the curve itself.
const BOUNDARY_BAND: f64 = 0.25;

/// Gaps up to this count as touching, absorbing the search's rounding.
const TOUCH_TOLERANCE: f64 = 1e-9;

/// Signed gap `min_s |p - c(s)| - r(s)` from pixel centre `(px, py)` to the
/// linear blend of two discs.
fn sweep_gap(a: Disc, b: Disc, px: f64, py: f64) -> f64 {
    let disc_gap = |d: Disc| (px - d.x).hypot(py - d.y) - d.r;
    let ends = disc_gap(a).min(disc_gap(b));
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len = dx.hypot(dy);
    let slope = (b.r - a.r) / len;
    // zero length or one disc inside the other: the ends are the whole sweep
    if !(len > 1e-9) || slope.abs() >= 1.0 {
        return ends;
    }
    let (ux, uy) = (dx / len, dy / len);
    let (qx, qy) = (px - a.x, py - a.y);
    let along = qx * ux + qy * uy;
    let across = (qx * uy - qy * ux).abs();
    // the gap is convex in s; this is its stationary point
    let s = (along + slope * across / (1.0 - slope * slope).sqrt()).clamp(0.0, len);
    let gap = (qx - s * ux).hypot(qy - s * uy) - (a.r + slope * s);
    gap.min(ends)
}

/// `min_t |p - γ(t)| - r(t)` over `[lo, hi]` by golden-section search,
/// never worse than the window ends.
fn curve_gap(curve: &SplineCurve, lo: f64, hi: f64, px: f64, py: f64) -> Result<f64> {
    let gap = |t: f64| -> Result<f64> {
        let [x, y, r] = curve.eval(t)?;
        Ok((px - x).hypot(py - y) - r)
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (gap(c)?, gap(d)?);
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = gap(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = gap(d)?;
        }
    }
    Ok(fc.min(fd).min(gap(lo)?).min(gap(hi)?))
}

/// The stroke swept along `curve`, sampled `samples_per_interval` times per
/// node interval.
///
/// Between consecutive samples the centre and radius are blended linearly;
/// pixels that this leaves within a quarter pixel of the boundary are
/// decided on the curve itself, so the mask stops changing once samples are
/// dense.
pub fn render_stroke(
    curve: &SplineCurve,
    samples_per_interval: usize,
    width: usize,
    height: usize,
) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(width, height);
    render_stroke_into(&mut mask, curve, samples_per_interval)?;
    Ok(mask)
}

/// [`render_stroke`] adding to an existing mask.
pub fn render_stroke_into(
    mask: &mut BinaryMask,
    curve: &SplineCurve,
    samples_per_interval: usize,
) -> Result<()> {
    let (width, height) = (mask.width(), mask.height());
    if samples_per_interval == 0 {
        return Err(Error::InvalidParams(
            "samples_per_interval must be at least 1".into(),
        ));
    }
    let params: Vec<f64> = sample_parameters(curve.last_node(), samples_per_interval).collect();
    let discs = params
        .iter()
        .map(|&t| curve.eval(t).map(|[x, y, r]| Disc::new(x, y, r)))
        .collect::<Result<Vec<_>>>()?;

    // smallest gap seen per pixel and the segment it came from
    let mut best = vec![(f64::INFINITY, usize::MAX); width * height];
    let (w, h) = (width as i64, height as i64);
    for (k, pair) in discs.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if !(a.r >= R_FLOOR && b.r >= R_FLOOR) {
            stamp_disc(mask, a);
            stamp_disc(mask, b);
            continue;
        }
        let reach = a.r.max(b.r) + BOUNDARY_BAND;
        let top = ((a.y.min(b.y) - reach).floor() as i64).max(0);
        let bottom = ((a.y.max(b.y) + reach).ceil() as i64).min(h - 1);
        let left = ((a.x.min(b.x) - reach).floor() as i64).max(0);
        let right = ((a.x.max(b.x) + reach).ceil() as i64).min(w - 1);
        for q in top..=bottom {
            for p in left..=right {
                let g = sweep_gap(a, b, p as f64, q as f64);
                let slot = &mut best[q as usize * width + p as usize];
                if g < slot.0 {
                    *slot = (g, k);
                }
            }
        }
    }
    if discs.len() == 1 {
        stamp_disc(mask, discs[0]);
    }

    let step = 1.0 / samples_per_interval as f64;
    let end = curve.last_node() as f64;
    for (i, &(g, k)) in best.iter().enumerate() {
        let inside = if g <= -BOUNDARY_BAND {
            true
        } else if g < BOUNDARY_BAND {
            let (px, py) = ((i % width) as f64, (i / width) as f64);
            let lo = (params[k] - step).max(0.0);
            let hi = (params[k + 1] + step).min(end);
            curve_gap(curve, lo, hi, px, py)? <= TOUCH_TOLERANCE
        } else {
            false
        };
        if inside {
            mask.set(i % width, i / width, true);
        }
    }
    Ok(())
}
