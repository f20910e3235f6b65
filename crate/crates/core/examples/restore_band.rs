//! End to end: degrade a synthetic S-curve, restore it from five points, score the result, save everything.
//!
//! `cargo run --release --example restore_band -- [out_dir]`

use std::path::PathBuf;

use strokeforge::bench::{degrade, generate, score, Degradation, RadiusProfile, Shape, ShapeSpec};
use strokeforge::image_io::{save_mask, StretchRange};
use strokeforge::pipeline::{restore_with, RestoreConfig};

fn main() -> strokeforge::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strokeforge-restore"));
    std::fs::create_dir_all(&dir).map_err(|e| strokeforge::Error::Io { path: dir.clone(), source: e })?;

    let truth = generate(ShapeSpec { shape: Shape::SCurve, span: 200.0 }, RadiusProfile::Constant { r: 7.0 }, 256, 256)?;
    let degradation = Degradation { erase_frac: 0.2, noise_sigma: 0.05, blotches: 2 };
    let degraded = degrade(&truth, &degradation, 7)?;
    let input = degraded.histogram_stretch(StretchRange::default());
    let points = truth.samples(&[0.0, 0.2, 0.4, 0.6, 0.8, 1.0])?;

    let result = restore_with(&input, &points, &RestoreConfig::default(), |state, e| {
        println!("iteration {:>2}: F = {:.2}", state.iteration, e.f_total);
    })?;
    let s = score(&result.mask, &truth.mask)?;
    println!("IoU {:.3}, skeleton Hausdorff {:.2} px", s.iou, s.hausdorff);

    degraded.save_png(dir.join("input.png"))?;
    save_mask(&result.mask, dir.join("mask.png"))?;
    let write = |name: &str, text: String| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| strokeforge::Error::Io { path, source: e })
    };
    write("points.json", points.to_json()?)?;
    write("spline.json", result.curve.to_json()?)?;
    write("trace.csv", result.trace_csv()?)?;
    println!("wrote input.png, points.json, mask.png, spline.json, trace.csv to {}", dir.display());
    Ok(())
}
