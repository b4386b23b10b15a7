//! Acceptance suite. Runs every criterion in sequence (so the runtime
//! checks are not disturbed by parallel tests), prints one `[PASS]` or
//! `[FAIL]` line per criterion and exits non-zero if any fails.
//!
//! `cargo test --test acceptance` runs it alone.

use std::fmt::Write as _;
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use gini_ksample::data::{group_index, LabeledDataset};
use gini_ksample::distmat::{group_gmd_inputs, pairwise_distances, u_center};
use gini_ksample::estimators::{gmd, GiniEstimates};
use gini_ksample::experiments::{normality_study, size_power_study, StudyConfig};
use gini_ksample::hypothesis::Method;
use gini_ksample::rng;
use gini_ksample::simgen::{sample_dataset, Example, ScenarioSpec};
use ndarray::{array, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Exact oracle on the 4-point dataset (0,2 | 1,3). Reference values are
/// exact rationals from an independent direct evaluation of the formulas.
fn ac1() -> Check {
    let run = || {
        let ds = LabeledDataset::new(array![[0.0], [2.0], [1.0], [3.0]], ["a", "a", "b", "b"].map(String::from).to_vec())
            .unwrap();
        GiniEstimates::compute(&pairwise_distances(&ds), &group_index(&ds)).unwrap()
    };
    run(); // thread-pool start-up is not part of the computation
    let mut times: Vec<Duration> = (0..9)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(run());
            t.elapsed()
        })
        .collect();
    times.sort();
    let median = times[times.len() / 2];
    let est = run();
    let gcor = est.gcor.unwrap_or(f64::NAN);
    let ok = close(est.gcov, -1.0 / 3.0, 1e-12)
        && close(gcor, -0.2, 1e-12)
        && close(est.v2n, 2.0 / 3.0, 1e-12)
        && close(est.sigma0_sq, 2.0 / 9.0, 1e-12)
        && median < Duration::from_millis(1);
    verdict(
        ok,
        format!(
            "gCov={:.16} gCor={:.16} V2n={:.16} sigma0^2={:.16} median runtime {:?}",
            est.gcov, gcor, est.v2n, est.sigma0_sq, median
        ),
    )
}

/// Algebraic invariants over 200 random datasets.
fn ac2() -> Check {
    let start = Instant::now();
    let mut worst_margin = 0.0f64;
    let mut worst_recon = 0.0f64;
    let mut metric_ok = true;
    for r in 0..200u64 {
        let mut g = rng::stream(2024, &[r]);
        let n = g.random_range(4..=40usize);
        let p = g.random_range(1..=20usize);
        let k = g.random_range(2..=(n / 2).min(4));
        let x = Array2::from_shape_fn((n, p), |_| g.random_range(-10.0..10.0));
        let labels = (0..n)
            .map(|i| if i < 2 * k { i % k } else { g.random_range(0..k) })
            .map(|c| format!("c{c}"))
            .collect();
        let ds = LabeledDataset::new(x, labels).unwrap();
        let dm = pairwise_distances(&ds);
        let gi = group_index(&ds);

        for i in 0..n {
            metric_ok &= dm.get(i, i) == 0.0;
            for j in 0..n {
                metric_ok &= dm.get(i, j) == dm.get(j, i);
                for l in 0..n {
                    metric_ok &= dm.get(i, l) <= dm.get(i, j) + dm.get(j, l) + 1e-12 * (1.0 + dm.get(i, l));
                }
            }
        }

        let a = u_center(&dm).unwrap();
        let scale: f64 = a.as_slice().iter().map(|v| v.abs()).sum();
        for i in 0..n {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j)).sum();
            let col: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(j, i)).sum();
            worst_margin = worst_margin.max(row.abs() / scale).max(col.abs() / scale);
        }

        let est = GiniEstimates::compute(&dm, &gi).unwrap();
        let sums = group_gmd_inputs(&dm, &gi).unwrap();
        let mut recon = gmd(sums.total, n).unwrap();
        for (c, &s) in sums.per_class.iter().enumerate() {
            recon -= gi.proportions()[c] * gmd(s, gi.counts()[c]).unwrap();
        }
        worst_recon = worst_recon.max((est.gcov - recon).abs() / est.delta_hat);
    }
    let elapsed = start.elapsed();
    verdict(
        metric_ok && worst_margin <= 1e-9 && worst_recon <= 1e-12 && elapsed < Duration::from_secs(5),
        format!(
            "metric axioms {}, max U-centered margin {worst_margin:.2e}, max reconstruction error {worst_recon:.2e}, {elapsed:?}",
            if metric_ok { "hold" } else { "VIOLATED" }
        ),
    )
}

/// Mean GMD of standard normal samples against 2/sqrt(pi).
fn ac3() -> Check {
    let start = Instant::now();
    let n = 2000;
    let labels: Vec<String> = (0..n).map(|i| (i % 2).to_string()).collect();
    let total: f64 = (0..200u64)
        .map(|r| {
            let mut g = rng::stream(3, &[r]);
            let x = Array2::from_shape_fn((n, 1), |_| g.sample::<f64, _>(StandardNormal));
            let ds = LabeledDataset::new(x, labels.clone()).unwrap();
            let gi = group_index(&ds);
            gmd(group_gmd_inputs(&pairwise_distances(&ds), &gi).unwrap().total, n).unwrap()
        })
        .sum();
    let mean = total / 200.0;
    let target = 2.0 / std::f64::consts::PI.sqrt();
    let elapsed = start.elapsed();
    verdict(
        (mean - target).abs() <= 0.01 && elapsed < Duration::from_secs(30),
        format!("mean GMD {mean:.6} vs {target:.6}, {elapsed:?}"),
    )
}

fn power(example: Example, p: usize, sizes: &[usize], beta: f64, methods: Vec<Method>, seed: u64) -> Vec<f64> {
    let spec = ScenarioSpec::new(example, p, sizes.to_vec(), beta, seed).unwrap();
    let cfg = StudyConfig::new(spec, 1000, methods).unwrap();
    size_power_study(&cfg, &[beta]).unwrap().iter().map(|r| r.rejection_rate).collect()
}

fn ac4() -> Check {
    let start = Instant::now();
    let size = power(Example::Two, 200, &[40, 40, 40], 0.0, vec![Method::GiniNormal], 4)[0];
    let elapsed = start.elapsed();
    verdict(
        (0.035..=0.07).contains(&size) && elapsed < Duration::from_secs(600),
        format!("empirical size {size:.3} (target [0.035, 0.07]), {elapsed:?}"),
    )
}

fn ac5() -> Check {
    let moderate = power(Example::Two, 500, &[50, 40, 30], 0.4, vec![Method::GiniNormal], 5)[0];
    let strong = power(Example::Two, 500, &[40, 40, 40], 1.0, vec![Method::GiniNormal], 5)[0];
    verdict(
        (0.74..=0.86).contains(&moderate) && strong >= 0.99,
        format!("power {moderate:.3} at beta=0.4 (target [0.74, 0.86]); {strong:.3} at beta=1 (target >= 0.99)"),
    )
}

fn ac6() -> Check {
    let rates = power(Example::Two, 500, &[72, 36, 12], 0.4, vec![Method::GiniNormal, Method::DcovPerm], 6);
    verdict(
        rates[0] >= rates[1] - 0.03,
        format!("gini-normal {:.3} vs dcov-perm {:.3} (B=999)", rates[0], rates[1]),
    )
}

fn ac7() -> Check {
    let gap = |p: usize| {
        let cfg = StudyConfig::new(ScenarioSpec::example1(p, 7).unwrap(), 2000, vec![Method::GiniNormal]).unwrap();
        normality_study(&cfg).unwrap().max_density_gap
    };
    let (low, high) = (gap(5), gap(500));
    verdict(low > high && high <= 0.05, format!("gap(p=5) = {low:.4}, gap(p=500) = {high:.4}"))
}

fn ac8() -> Check {
    let spec = ScenarioSpec::new(Example::Two, 200, vec![100, 100, 100], 0.0, 8).unwrap();
    let draws: Vec<(f64, f64)> = (0..500u64)
        .into_par_iter()
        .map(|r| {
            let ds = sample_dataset(&spec, &[r]).unwrap();
            let est = GiniEstimates::compute(&pairwise_distances(&ds), &group_index(&ds)).unwrap();
            (est.gcov, est.sigma0_sq)
        })
        .collect();
    let m = draws.len() as f64;
    let mean = draws.iter().map(|d| d.0).sum::<f64>() / m;
    let var = draws.iter().map(|d| (d.0 - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let mean_sigma = draws.iter().map(|d| d.1).sum::<f64>() / m;
    let ratio = var / mean_sigma;
    verdict((0.8..=1.2).contains(&ratio), format!("var(gCov)/mean(sigma0^2) = {ratio:.3}"))
}

fn ac9() -> Check {
    let rates: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&f| power(Example::Two, 200, &[40 * f, 40 * f, 40 * f], 0.6, vec![Method::GiniNormal], 9)[0])
        .collect();
    let increasing = rates.windows(2).all(|w| w[1] > w[0] - 0.03);
    verdict(
        increasing && rates[2] >= 0.95,
        format!("power at x1, x2, x3 = {:.3}, {:.3}, {:.3}", rates[0], rates[1], rates[2]),
    )
}

/// Repeated CLI runs with identical flags, across thread counts.
fn ac10() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    let spec = ScenarioSpec::new(Example::Three, 30, vec![15, 10, 5], 0.5, 10).unwrap();
    gini_ksample::data::write_csv(&sample_dataset(&spec, &[0]).unwrap(), &input, true).unwrap();
    let input = input.to_str().unwrap().to_string();

    let runs: Vec<Vec<&str>> = vec![
        vec!["test", "--input", &input, "--method", "gini-normal"],
        vec!["test", "--input", &input, "--method", "gini-perm", "--seed", "5"],
        vec!["test", "--input", &input, "--method", "dcov-perm", "--permutations", "499"],
        vec!["simulate", "--example", "2", "--p", "50", "--sizes", "10,10,10", "--reps", "40", "--method", "gini-normal,gini-perm,dcov-perm", "--permutations", "99"],
        vec!["simulate", "--example", "3", "--p", "20", "--sizes", "8,6,4", "--beta", "0.5", "--reps", "50"],
        vec!["normality", "--p", "10", "--reps", "80", "--seed", "3"],
    ];
    let mut report = String::new();
    let mut ok = true;
    for args in &runs {
        let outputs: Vec<Output> = ["1", "1", "2", "0"]
            .iter()
            .map(|t| {
                Command::new(env!("CARGO_BIN_EXE_gini-ksample")).args(args).args(["--threads", t]).output().unwrap()
            })
            .collect();
        let same = outputs.windows(2).all(|w| w[0].stdout == w[1].stdout && w[0].stderr == w[1].stderr)
            && outputs[0].status.success()
            && !outputs[0].stdout.is_empty();
        ok &= same;
        if !same {
            let _ = write!(report, " differs: {}", args.join(" "));
        }
    }
    verdict(ok, format!("{} commands x 4 runs (threads 1,1,2,auto) byte-identical{report}", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1 exact four-point oracle", ac1),
        ("AC2 algebraic invariants", ac2),
        ("AC3 GMD calibration", ac3),
        ("AC4 size control", ac4),
        ("AC5 power reproduction", ac5),
        ("AC6 unbalanced advantage", ac6),
        ("AC7 normality trend", ac7),
        ("AC8 null variance estimator", ac8),
        ("AC9 consistency under alternatives", ac9),
        ("AC10 CLI determinism", ac10),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
