//! Build a curve through node targets, evaluate it, and round-trip it through JSON.
//!
//! `cargo run --example spline_basics`

use strokeforge::pipeline::interpolate_nodes;
use strokeforge::spline::SplineCurve;

fn main() -> strokeforge::Result<()> {
    // Eight nodes on a circle of radius 40 with the pen radius growing from 3 to 10.
    let n = 8;
    let targets: Vec<[f64; 3]> = (0..=n)
        .map(|i| {
            let a = std::f64::consts::PI * i as f64 / n as f64;
            [100.0 + 40.0 * a.cos(), 100.0 + 40.0 * a.sin(), 3.0 + 7.0 * i as f64 / n as f64]
        })
        .collect();
    let channels: Vec<Vec<f64>> = (0..3)
        .map(|ch| interpolate_nodes(&targets.iter().map(|t| t[ch]).collect::<Vec<_>>()))
        .collect::<Result<_, _>>()?;
    let curve = SplineCurve::new(
        (0..n + 3)
            .map(|j| [channels[0][j], channels[1][j], channels[2][j]])
            .collect(),
    )?;
    println!("{} nodes, {} control points", curve.node_count(), curve.control_points().len());

    println!("{:>5} {:>9} {:>9} {:>6} {:>10}", "t", "x", "y", "r", "curvature");
    for k in 0..=4 * n {
        let t = k as f64 / 4.0;
        let [x, y, r] = curve.eval(t)?;
        println!("{t:>5.2} {x:>9.3} {y:>9.3} {r:>6.3} {:>10.5}", curve.curvature(t)?);
    }

    let worst = (0..=n)
        .map(|i| {
            let v = curve.node_value(i).unwrap();
            (0..3).map(|ch| (v[ch] - targets[i][ch]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    println!("largest node residual {worst:.2e}");

    let json = curve.to_json()?;
    assert_eq!(SplineCurve::from_json(&json)?, curve);
    println!("JSON round trip ok ({} bytes)", json.len());
    Ok(())
}
