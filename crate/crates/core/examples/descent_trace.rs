//! Watch the descent fit a thin initial stroke to a wide band, one line per iteration.
//!
//! `cargo run --example descent_trace -- [sign|gradient]`

use strokeforge::energy::EnergyParams;
use strokeforge::image_io::GrayImage;
use strokeforge::optimizer::{run_descent_with, DescentConfig, StepRule};
use strokeforge::pipeline::{initial_spline, RadiusProbe, SamplePoint, SamplePointSet};

fn main() -> strokeforge::Result<()> {
    let step_rule = match std::env::args().nth(1).as_deref() {
        Some("gradient") => StepRule::Gradient,
        _ => StepRule::Sign,
    };
    let img = GrayImage::from_fn(128, 128, |_, y| if (y as f64 - 64.5).abs() < 8.0 { 0.0 } else { 1.0 })?;
    let points = SamplePointSet::new([24.0, 64.0, 104.0].iter().map(|&x| SamplePoint::new(x, 64.5)).collect());
    let config = DescentConfig { step_rule, ..DescentConfig::default() };
    let (mut curve, constraints) = initial_spline(&img, &points, &config, &RadiusProbe::default())?;
    for c in curve.control_points_mut() {
        c[2] = config.r_min;
    }

    println!("{step_rule:?} rule\n{:>4} {:>10} {:>10} {:>10} {:>8} {:>8}", "iter", "total", "image", "radius", "mean r", "mean step");
    run_descent_with(&img, curve, &constraints, &EnergyParams::default(), &config, |state, e| {
        let cps = state.curve.control_points();
        let mean_r = cps.iter().map(|c| c[2]).sum::<f64>() / cps.len() as f64;
        let mean_step = state.step_sizes.iter().sum::<f64>() / state.step_sizes.len() as f64;
        println!(
            "{:>4} {:>10.2} {:>10.2} {:>10.2} {mean_r:>8.3} {mean_step:>8.4}",
            state.iteration, e.f_total, e.f_fidelity_s, e.f_fidelity_r
        );
    })?;
    Ok(())
}
