//! The three energy terms for a straight band, as the pen radius sweeps past the true half-width.
//!
//! `cargo run --example energy_terms`

use strokeforge::energy::{energy_total, EnergyParams};
use strokeforge::image_io::GrayImage;
use strokeforge::spline::{ChannelMask, Constraint, ConstraintSet, SplineCurve};

fn main() -> strokeforge::Result<()> {
    let half_width = 8.0;
    let img = GrayImage::from_fn(128, 128, |_, y| if (y as f64 - 64.5).abs() < half_width { 0.0 } else { 1.0 })?;
    let params = EnergyParams::default();
    println!("band half-width {half_width}\n{:>5} {:>10} {:>10} {:>10} {:>10}", "r", "total", "image", "radius", "curvature");
    for r in [3.0, 5.0, 7.0, 8.0, 9.0, 11.0, 14.0, 20.0] {
        let mut curve = SplineCurve::constant(6, [0.0, 64.5, r])?;
        for (j, c) in curve.control_points_mut().iter_mut().enumerate() {
            c[0] = 14.0 + 20.0 * (j as f64 - 1.0);
        }
        let pins = [0, 5]
            .map(|node| Constraint {
                node,
                target: curve.node_value(node).unwrap(),
                mask: ChannelMask::XY,
            })
            .to_vec();
        let constraints = ConstraintSet::new(pins, curve.node_count())?;
        let e = energy_total(&img, &curve, &constraints, &params)?;
        println!(
            "{r:>5.1} {:>10.2} {:>10.2} {:>10.2} {:>10.2}",
            e.f_total, e.f_fidelity_s, e.f_fidelity_r, e.f_curvature
        );
    }
    Ok(())
}
