//! Energy of a straight band as a function of the pen radius, with its minimiser and sign changes.
//!
//! `cargo run --example band_profile`

use strokeforge::profile::BandModel;

fn main() -> strokeforge::Result<()> {
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let model = BandModel::new(10.0, 510.0, 2000.0, alpha)?;
        let best = model.grid_minimizer();
        println!(
            "alpha {alpha:>3}: minimiser r = {best:>7.3} (R = 10), F = {:.2}, dF/dr = {:.1e}",
            model.energy_profile(best),
            model.profile_derivative(best)
        );
    }

    // With unit weights the minimiser has a closed form: r = 400 / sqrt(1599).
    let unit = BandModel::new(10.0, 1.0, 1.0, 1.0)?;
    println!("unit weights: grid {:.9}, closed form {:.9}", unit.grid_minimizer(), 400.0 / 1599f64.sqrt());

    print!("{}", unit.csv(5.0, 15.0, 11)?);
    Ok(())
}
