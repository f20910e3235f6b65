//! Grayscale rasters (0 = ink, 1 = background), histogram stretching and
//! binary stroke masks.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, Luma};

use crate::error::{Error, Result};

/// Row-major grayscale raster with values in `[0, 1]`.
///
/// Row prefix sums are kept alongside the pixels so that horizontal span
/// sums (the inner loop of disc integration) cost O(1).
#[derive(Debug, Clone)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    row_prefix: Vec<f64>,
}

impl PartialEq for GrayImage {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.pixels == other.pixels
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || width * height != pixels.len() {
            return Err(Error::ImageShape {
                width,
                height,
                len: pixels.len(),
            });
        }
        if let Some(&bad) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::PixelRange(bad));
        }
        let mut row_prefix = Vec::with_capacity(height * (width + 1));
        for row in pixels.chunks_exact(width) {
            let mut acc = 0.0;
            row_prefix.push(0.0);
            for &v in row {
                acc += v;
                row_prefix.push(acc);
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
            row_prefix,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from `f(x, y)`; values are clamped into `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        (x < self.width && y < self.height).then(|| self.pixels[y * self.width + x])
    }

    /// Sum of row `y` over columns `x0..=x1`, both in bounds.
    pub(crate) fn row_sum(&self, y: usize, x0: usize, x1: usize) -> f64 {
        let base = y * (self.width + 1);
        self.row_prefix[base + x1 + 1] - self.row_prefix[base + x0]
    }

    pub fn inverted(&self) -> GrayImage {
        Self::new(
            self.width,
            self.height,
            self.pixels.iter().map(|v| 1.0 - v).collect(),
        )
        .expect("complement stays in range")
    }

    /// Linear stretch sending the `lo` percentile to 0 and the `hi`
    /// percentile to 1, clamped. A flat histogram maps everything to 0.5.
    pub fn histogram_stretch(&self, range: StretchRange) -> GrayImage {
        let mut sorted = self.pixels.clone();
        sorted.sort_by(f64::total_cmp);
        let lo = percentile(&sorted, range.lo);
        let hi = percentile(&sorted, range.hi);
        let pixels = if hi <= lo {
            vec![0.5; self.pixels.len()]
        } else {
            let scale = 1.0 / (hi - lo);
            self.pixels
                .iter()
                .map(|v| ((v - lo) * scale).clamp(0.0, 1.0))
                .collect()
        };
        Self::new(self.width, self.height, pixels).expect("stretch stays in range")
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let buf = image::GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let v = self.pixels[y as usize * self.width + x as usize];
            Luma([(v * 255.0).round() as u8])
        });
        encode_png(DynamicImage::ImageLuma8(buf))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_png_bytes()?).map_err(|e| Error::io(path, e))
    }
}

/// Percentile pair for [`GrayImage::histogram_stretch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchRange {
    lo: f64,
    hi: f64,
}

impl StretchRange {
    pub const FULL: StretchRange = StretchRange { lo: 0.0, hi: 100.0 };

    /// Requires `0 <= lo < hi <= 100`.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo >= hi {
            return Err(Error::InvalidParams(format!(
                "stretch percentiles must satisfy 0 <= lo < hi <= 100, got {lo},{hi}"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl Default for StretchRange {
    fn default() -> Self {
        StretchRange { lo: 1.0, hi: 99.0 }
    }
}

/// Linear interpolation between order statistics of a sorted slice.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let pos = pct / 100.0 * (sorted.len() - 1) as f64;
    let below = pos.floor() as usize;
    let above = (below + 1).min(sorted.len() - 1);
    let frac = pos - below as f64;
    sorted[below] + (sorted[above] - sorted[below]) * frac
}

fn encode_png(img: DynamicImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::CorruptImage(e.to_string()))?;
    Ok(out.into_inner())
}

/// Decodes an 8-bit grayscale PNG or binary PGM (P5).
pub fn decode_gray(bytes: &[u8], invert: bool) -> Result<GrayImage> {
    let format = image::guess_format(bytes)
        .map_err(|_| Error::UnsupportedFormat("unrecognised signature".into()))?;
    match format {
        ImageFormat::Png => {}
        ImageFormat::Pnm if bytes.starts_with(b"P5") => {}
        ImageFormat::Pnm => {
            return Err(Error::UnsupportedFormat(
                "only binary PGM (P5) is accepted".into(),
            ))
        }
        other => return Err(Error::UnsupportedFormat(format!("{other:?}"))),
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::CorruptImage(e.to_string()))?;
    let DynamicImage::ImageLuma8(buf) = decoded else {
        return Err(Error::NotGrayscale(format!("{:?}", decoded.color())));
    };
    let (w, h) = (buf.width() as usize, buf.height() as usize);
    let pixels = buf
        .into_raw()
        .into_iter()
        .map(|b| {
            let v = f64::from(b) / 255.0;
            if invert {
                1.0 - v
            } else {
                v
            }
        })
        .collect();
    GrayImage::new(w, h, pixels)
}

pub fn load_gray(path: impl AsRef<Path>, invert: bool) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_gray(&bytes, invert)
}

/// Row-major stroke mask, `true` = stroke foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width * height != bits.len() {
            return Err(Error::ImageShape {
                width,
                height,
                len: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Sets columns `x0..=x1` of row `y`.
    pub(crate) fn fill_row(&mut self, y: usize, x0: usize, x1: usize) {
        let base = y * self.width;
        self.bits[base + x0..=base + x1].fill(true);
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    fn check_same_size(&self, other: &BinaryMask) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(Error::MaskSizeMismatch(
                self.dimensions(),
                other.dimensions(),
            ));
        }
        Ok(())
    }

    /// Pixelwise OR into `self`.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        self.check_same_size(other)?;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    pub fn intersection_count(&self, other: &BinaryMask) -> Result<usize> {
        self.check_same_size(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| **a && **b)
            .count())
    }

    /// Gray rendering: foreground 0 (black), background 1 (white).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::new(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect(),
        )
        .expect("mask dimensions are consistent")
    }

    /// Black-on-white 8-bit PNG.
    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let buf = image::GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([if self.get(x as usize, y as usize) { 0 } else { 255 }])
        });
        encode_png(DynamicImage::ImageLuma8(buf))
    }

    /// Reads a mask written by [`save_mask`]; dark pixels are foreground.
    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let gray = decode_gray(bytes, false)?;
        let (w, h) = gray.dimensions();
        Ok(Self {
            width: w,
            height: h,
            bits: gray.pixels().iter().map(|&v| v < 0.5).collect(),
        })
    }
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mask.to_png_bytes()?).map_err(|e| Error::io(path, e))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    BinaryMask::from_png_bytes(&bytes)
}
