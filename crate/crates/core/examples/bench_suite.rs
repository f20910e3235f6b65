//! Score the restoration on a synthetic suite.
//!
//! `cargo run --release --example bench_suite -- [default|recovery] [out_dir]`

use std::path::PathBuf;

use strokeforge::bench::{run_suite, suite_by_name, write_artifacts};
use strokeforge::pipeline::RestoreConfig;

fn main() -> strokeforge::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "recovery".into());
    let cases = suite_by_name(&name)
        .ok_or_else(|| strokeforge::Error::InvalidParams(format!("unknown suite {name}")))?;
    let outcomes = run_suite(&cases, &RestoreConfig::default())?;
    println!("{:<48} {:>6} {:>9} {:>8}", "case", "IoU", "Hausdorff", "seconds");
    for o in &outcomes {
        println!("{:<48} {:>6.3} {:>9.2} {:>8.2}", o.case.name, o.score.iou, o.score.hausdorff, o.runtime_s);
    }
    if let Some(dir) = args.next() {
        write_artifacts(&outcomes, &PathBuf::from(&dir))?;
        println!("artifacts in {dir}");
    }
    Ok(())
}
