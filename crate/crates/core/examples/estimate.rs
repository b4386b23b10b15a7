//! Sample Gini quantities for a small two-class dataset.
//!
//! cargo run --example estimate

use gini_ksample::{group_index, pairwise_distances, u_center, GiniEstimates, LabeledDataset};
use ndarray::array;

fn main() -> gini_ksample::Result<()> {
    let x = array![[0.0, 1.0], [0.5, 1.5], [1.0, 0.8], [3.0, 2.0], [3.5, 2.5], [2.8, 3.1]];
    let labels = ["ctrl", "ctrl", "ctrl", "trt", "trt", "trt"].map(String::from).to_vec();
    let ds = LabeledDataset::new(x, labels)?;

    let dm = pairwise_distances(&ds);
    let gi = group_index(&ds);
    let est = GiniEstimates::compute(&dm, &gi)?;

    println!("classes        {:?} with counts {:?}", gi.classes(), est.counts);
    println!("pooled GMD     {:.6}", est.delta_hat);
    println!("class GMDs     {:?}", est.delta_k_hat);
    println!("gCov           {:.6}", est.gcov);
    match est.gcor {
        Some(r) => println!("gCor           {r:.6}"),
        None => println!("gCor           undefined (all points coincide)"),
    }
    println!("V^2_n          {:.6}", est.v2n);
    println!("sigma0^2       {:.6e}", est.sigma0_sq);
    if let Some(z) = est.z() {
        println!("z              {z:.4}");
    }

    // The U-centered matrix behind V^2_n has vanishing off-diagonal row sums.
    let a = u_center(&dm)?;
    let row0: f64 = (1..a.n()).map(|l| a.get(0, l)).sum();
    println!("row 0 sum of A {row0:.2e}");
    Ok(())
}
