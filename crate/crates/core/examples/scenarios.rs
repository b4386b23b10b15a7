//! Draws one dataset from each simulation design and prints per-class
//! summaries of the first coordinate.
//!
//! cargo run --example scenarios

use gini_ksample::group_index;
use gini_ksample::simgen::{sample_dataset, Example, ScenarioSpec};

fn main() -> gini_ksample::Result<()> {
    let designs = [
        ScenarioSpec::example1(50, 1)?,
        ScenarioSpec::new(Example::Two, 50, vec![400, 400, 400], 1.0, 1)?,
        ScenarioSpec::new(Example::Three, 50, vec![400, 400, 400], 1.0, 1)?,
    ];
    for spec in &designs {
        let ds = sample_dataset(spec, &[0])?;
        let gi = group_index(&ds);
        println!("example {} (n = {}, p = {}, affected = {})", spec.example, ds.n(), ds.p(), spec.affected());
        for (class, idx) in gi.classes().iter().zip(gi.indices()) {
            let xs: Vec<f64> = idx.iter().map(|&i| ds.row(i)[0]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            println!("  class {class}: n = {:3}, mean {mean:+.3}, var {var:.3}", xs.len());
        }
    }
    Ok(())
}
