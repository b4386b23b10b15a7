//! Monte Carlo moment checks for the simulation designs.

use gini_ksample::rng::stream;
use gini_ksample::simgen::{ar1_covariance, ar1_gaussian, example2_sample, example3_sample, sample_dataset, Example, ScenarioSpec};
use ndarray::{Array1, Array2, Axis};

fn col_means(x: &Array2<f64>) -> Array1<f64> {
    x.mean_axis(Axis(0)).unwrap()
}

fn sample_cov(x: &Array2<f64>) -> Array2<f64> {
    let m = x.nrows() as f64;
    let centered = x - &col_means(x);
    centered.t().dot(&centered) / (m - 1.0)
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn independent_columns_when_rho_is_zero() {
    let x = ar1_gaussian(20_000, 3, 0.0, &mut stream(1, &[1])).unwrap();
    let c = sample_cov(&x);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert!(c[[i, j]].abs() < 0.03, "cov[{i},{j}] = {}", c[[i, j]]);
            }
        }
    }
}

#[test]
fn lag_two_covariance_is_rho_squared() {
    let x = ar1_gaussian(20_000, 3, 0.7, &mut stream(2, &[1])).unwrap();
    let c = sample_cov(&x);
    assert!((c[[0, 2]] - 0.49).abs() < 0.03, "cov(1,3) = {}", c[[0, 2]]);
}

#[test]
fn ar1_covariance_recovered_up_to_dimension_five() {
    for p in 1..=5 {
        for (i, &rho) in [0.0, 0.3, 0.7, -0.5].iter().enumerate() {
            let x = ar1_gaussian(50_000, p, rho, &mut stream(3, &[p as u64, i as u64])).unwrap();
            let gap = max_abs_diff(&sample_cov(&x), &ar1_covariance(p, rho));
            assert!(gap <= 0.04, "p={p} rho={rho} gap={gap}");
        }
    }
}

#[test]
fn generators_are_deterministic() {
    let a = ar1_gaussian(50, 7, 0.7, &mut stream(9, &[4])).unwrap();
    let b = ar1_gaussian(50, 7, 0.7, &mut stream(9, &[4])).unwrap();
    assert_eq!(a, b);
    let spec = ScenarioSpec::new(Example::Three, 20, vec![5, 6, 7], 0.5, 3).unwrap();
    assert_eq!(sample_dataset(&spec, &[1, 2]).unwrap(), sample_dataset(&spec, &[1, 2]).unwrap());
    assert_ne!(sample_dataset(&spec, &[1, 2]).unwrap(), sample_dataset(&spec, &[1, 3]).unwrap());
}

#[test]
fn example2_third_class_moments() {
    let spec = ScenarioSpec::new(Example::Two, 2, vec![2, 2, 20_000], 1.0, 0).unwrap();
    let x = example2_sample(&spec, 3, &mut stream(4, &[1])).unwrap();
    let mu = col_means(&x);
    assert!((mu[0] - 0.2).abs() < 0.03 && (mu[1] - 0.2).abs() < 0.03, "mean {mu}");
    let c = sample_cov(&x);
    assert!((c[[0, 0]] - 1.44).abs() < 0.05, "var {}", c[[0, 0]]);
    assert!((c[[0, 1]] - 1.44 * 0.7).abs() < 0.05, "cov {}", c[[0, 1]]);
}

#[test]
fn example2_first_class_is_plain_ar1() {
    let spec = ScenarioSpec::new(Example::Two, 12, vec![30, 2, 2], 0.7, 0).unwrap();
    let a = example2_sample(&spec, 1, &mut stream(5, &[1])).unwrap();
    let b = ar1_gaussian(30, 12, 0.7, &mut stream(5, &[1])).unwrap();
    assert_eq!(a, b);
}

#[test]
fn example2_partial_beta_touches_leading_coordinates() {
    // p = 10, beta = 0.3 -> 3 affected coordinates.
    let spec = ScenarioSpec::new(Example::Two, 10, vec![2, 40_000, 2], 0.3, 0).unwrap();
    let x = example2_sample(&spec, 2, &mut stream(6, &[1])).unwrap();
    let mu = col_means(&x);
    let c = sample_cov(&x);
    for j in 0..10 {
        let (m, v) = if j < 3 { (0.1, 1.21) } else { (0.0, 1.0) };
        assert!((mu[j] - m).abs() < 0.03, "mean[{j}] = {}", mu[j]);
        assert!((c[[j, j]] - v).abs() < 0.05, "var[{j}] = {}", c[[j, j]]);
    }
}

#[test]
fn example3_moments() {
    let spec = ScenarioSpec::new(Example::Three, 2, vec![20_000, 20_000, 20_000], 1.0, 0).unwrap();
    for k in 1..=3 {
        let x = example3_sample(&spec, k, &mut stream(7, &[k as u64])).unwrap();
        let mu = col_means(&x);
        assert!(mu.iter().all(|m| m.abs() < 0.03), "class {k} mean {mu}");
    }
    let x = example3_sample(&spec, 1, &mut stream(8, &[1])).unwrap();
    let target = ar1_covariance(2, 0.7);
    let gap = max_abs_diff(&sample_cov(&x), &target);
    assert!(gap < 0.04, "class 1 cov gap {gap}");
}

#[test]
fn example3_is_right_skewed() {
    let spec = ScenarioSpec::new(Example::Three, 1, vec![20_000, 2, 2], 0.0, 0).unwrap();
    let x = example3_sample(&spec, 1, &mut stream(9, &[1])).unwrap();
    let col = x.column(0);
    let m = col.len() as f64;
    let mean = col.sum() / m;
    let m2 = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    let m3 = col.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / m;
    let skew = m3 / m2.powf(1.5);
    assert!((skew - 2.0).abs() < 0.15, "skewness {skew}");
}

#[test]
fn null_designs_have_exchangeable_classes() {
    // beta = 0: every class of either design shares one distribution.
    for example in [Example::Two, Example::Three] {
        let spec = ScenarioSpec::new(example, 3, vec![20_000, 20_000, 20_000], 0.0, 0).unwrap();
        let ds = sample_dataset(&spec, &[0]).unwrap();
        let covs: Vec<Array2<f64>> = (0..3)
            .map(|k| sample_cov(&ds.data().slice(ndarray::s![k * 20_000..(k + 1) * 20_000, ..]).to_owned()))
            .collect();
        assert!(max_abs_diff(&covs[0], &covs[1]) < 0.08);
        assert!(max_abs_diff(&covs[0], &covs[2]) < 0.08);
    }
}
