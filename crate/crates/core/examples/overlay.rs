//! Restore two crossing strokes separately and overlay their masks.
//!
//! `cargo run --release --example overlay -- [out.png]`

use std::path::PathBuf;

use strokeforge::image_io::{save_mask, GrayImage, StretchRange};
use strokeforge::pipeline::{overlay_strokes, restore, RestoreConfig, SamplePoint, SamplePointSet};

fn main() -> strokeforge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strokeforge-cross.png"));
    // A plus sign: a horizontal bar of half-width 6 and a vertical one of half-width 4.
    let img = GrayImage::from_fn(128, 128, |x, y| {
        let (x, y) = (x as f64 - 63.5, y as f64 - 63.5);
        let horizontal = y.abs() < 6.0 && x.abs() < 50.0;
        let vertical = x.abs() < 4.0 && y.abs() < 50.0;
        if horizontal || vertical { 0.0 } else { 1.0 }
    })?
    .histogram_stretch(StretchRange::default());

    let stroke = |pts: [(f64, f64); 2]| SamplePointSet::new(pts.iter().map(|&(x, y)| SamplePoint::new(x, y)).collect());
    let config = RestoreConfig::default();
    let results = [
        restore(&img, &stroke([(20.0, 63.5), (107.0, 63.5)]), &config)?,
        restore(&img, &stroke([(63.5, 20.0), (63.5, 107.0)]), &config)?,
    ];
    for (name, r) in ["horizontal", "vertical"].iter().zip(&results) {
        println!("{name}: {} pixels, mid radius {:.2}", r.mask.count(), r.curve.eval(r.curve.last_node() as f64 / 2.0)?[2]);
    }
    let union = overlay_strokes(&results)?;
    println!("overlay: {} pixels", union.count());
    save_mask(&union, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
