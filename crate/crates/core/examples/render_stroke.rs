//! Rasterise a tapered stroke and save it as a PNG mask.
//!
//! `cargo run --example render_stroke -- [out.png]`

use std::path::PathBuf;

use strokeforge::bench::{generate, RadiusProfile, Shape, ShapeSpec};
use strokeforge::image_io::save_mask;
use strokeforge::stroke::render_stroke;

fn main() -> strokeforge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("strokeforge-render.png"));
    let truth = generate(
        ShapeSpec { shape: Shape::Arc, span: 180.0 },
        RadiusProfile::Taper { start: 14.0, end: 3.0 },
        256,
        256,
    )?;
    for samples in [1, 2, 4, 16] {
        let mask = render_stroke(&truth.curve, samples, 256, 256)?;
        println!("{samples:>2} samples per interval: {} pixels", mask.count());
    }
    let mask = render_stroke(&truth.curve, 16, 256, 256)?;
    save_mask(&mask, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
