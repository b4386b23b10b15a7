//! A small size/power study comparing the three methods over a beta grid,
//! written as CSV to stdout.
//!
//! cargo run --release --example size_power

use gini_ksample::experiments::{size_power_study, write_power_csv, StudyConfig};
use gini_ksample::hypothesis::Method;
use gini_ksample::simgen::{Example, ScenarioSpec};

fn main() -> gini_ksample::Result<()> {
    let spec = ScenarioSpec::new(Example::Two, 200, vec![50, 40, 30], 0.0, 42)?;
    let cfg = StudyConfig::new(spec, 200, Method::ALL.to_vec())?.with_permutations(199)?;
    let rows = size_power_study(&cfg, &[0.0, 0.4, 0.8])?;
    write_power_csv(&rows, std::io::stdout().lock(), false)?;
    for row in &rows {
        eprintln!("{:>12} beta={:.1}: {} / {} rejections", row.method.as_str(), row.beta, row.rejections, row.replicates);
    }
    Ok(())
}
