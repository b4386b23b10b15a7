//! Round trip through CSV, then a test on the file as the CLI would run it.
//!
//! cargo run --example csv_io

use gini_ksample::hypothesis::gini_normal_test;
use gini_ksample::simgen::{sample_dataset, Example, ScenarioSpec};
use gini_ksample::{load_csv, write_csv, LabelColumn};

fn main() -> gini_ksample::Result<()> {
    let spec = ScenarioSpec::new(Example::Two, 20, vec![15, 15, 15], 0.5, 3)?;
    let ds = sample_dataset(&spec, &[0])?;

    let path = std::env::temp_dir().join("gini_ksample_example.csv");
    write_csv(&ds, &path, true)?;
    let back = load_csv(&path, &"label".parse::<LabelColumn>().expect("infallible"), true)?;
    assert_eq!(back, ds, "values survive the round trip bit for bit");

    let res = gini_normal_test(&back, 0.05)?;
    println!("{}", serde_json::to_string(&res).expect("serializable"));
    println!("try: gini-ksample test --input {} --label-col label", path.display());
    Ok(())
}
