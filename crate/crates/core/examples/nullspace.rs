//! Constrain two nodes of a curve and move along the directions that keep them fixed.
//!
//! `cargo run --example nullspace`

use strokeforge::spline::{constraint_nullspace, Channel, ChannelMask, Constraint, ConstraintSet, SplineCurve};

fn main() -> strokeforge::Result<()> {
    let mut curve = SplineCurve::constant(7, [0.0, 0.0, 5.0])?;
    for (j, c) in curve.control_points_mut().iter_mut().enumerate() {
        c[0] = 10.0 * j as f64;
        c[1] = (j as f64).sin() * 8.0;
    }
    let pin = |node| Constraint {
        node,
        target: curve.node_value(node).unwrap(),
        mask: ChannelMask::XY,
    };
    let constraints = ConstraintSet::new(vec![pin(1), pin(4)], curve.node_count())?;
    let space = constraint_nullspace(&constraints, curve.node_count())?;
    println!(
        "{} coefficients per channel, null space: x {}, y {}, r {}",
        space.coefficient_count(),
        space.channel(Channel::X).len(),
        space.channel(Channel::Y).len(),
        space.channel(Channel::R).len()
    );
    for v in space.channel(Channel::X) {
        println!("  x direction {:?}", v.entries);
    }

    // Push the curve a long way along every direction at once.
    let mut flat = curve.to_flat();
    for (k, v) in space.flattened().iter().enumerate() {
        v.axpy(3.0 * ((k % 5) as f64 - 2.0), &mut flat);
    }
    let moved = SplineCurve::from_flat(curve.node_count(), &flat)?;
    println!("residual before {:.2e}, after {:.2e}", constraints.max_residual(&curve), constraints.max_residual(&moved));
    for node in [1, 2, 4] {
        println!("node {node}: {:?} -> {:?}", curve.node_value(node).unwrap(), moved.node_value(node).unwrap());
    }
    Ok(())
}
