//! K-sample tests: the studentized normal-limit Gini test and a permutation
//! engine calibrating either the Gini or the distance-covariance statistic.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{group_index, validate_for_testing, GroupIndex, LabeledDataset};
use crate::distmat::{self, pairwise_distances, DistanceMatrix, PairSums};
use crate::error::{Error, Result};
use crate::estimators::{dcov_from_sums, gini_cov_from_sums, GiniEstimates};
use crate::normal::{normal_quantile, normal_sf};
use crate::rng;

pub const DEFAULT_PERMUTATIONS: usize = 999;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GiniNormal,
    GiniPerm,
    DcovPerm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::GiniNormal, Method::GiniPerm, Method::DcovPerm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::GiniNormal => "gini-normal",
            Method::GiniPerm => "gini-perm",
            Method::DcovPerm => "dcov-perm",
        }
    }

    pub fn is_permutation(self) -> bool {
        !matches!(self, Method::GiniNormal)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Which statistic the permutation engine recomputes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Gini,
    Dcov,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    /// Standardized statistic; normal method only.
    pub z: Option<f64>,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub permutations: Option<usize>,
    pub seed: Option<u64>,
    /// Set when every point coincides and the test cannot be studentized.
    pub degenerate: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// One-sided normal-limit test on a precomputed distance matrix.
///
/// `z = gCov_n / sigma0`, `p = 1 - Phi(z)`, reject when `z > z_alpha`.
/// A zero variance estimate yields `p = 1` and the degenerate flag.
pub fn gini_normal_test_dm(dm: &DistanceMatrix, gi: &GroupIndex, alpha: f64) -> Result<TestResult> {
    check_alpha(alpha)?;
    let est = GiniEstimates::compute(dm, gi)?;
    let base = TestResult {
        method: Method::GiniNormal,
        statistic: est.gcov,
        z: None,
        p_value: 1.0,
        alpha,
        reject: false,
        permutations: None,
        seed: None,
        degenerate: true,
    };
    match est.z() {
        None => Ok(base),
        Some(z) => {
            let critical = normal_quantile(1.0 - alpha)?;
            Ok(TestResult {
                z: Some(z),
                p_value: normal_sf(z),
                reject: z > critical,
                degenerate: false,
                ..base
            })
        }
    }
}

pub fn gini_normal_test(ds: &LabeledDataset, alpha: f64) -> Result<TestResult> {
    let gi = group_index(ds);
    validate_for_testing(&gi)?;
    gini_normal_test_dm(&pairwise_distances(ds), &gi, alpha)
}

/// Statistic evaluator with the label-independent pieces cached.
struct PermutationKernel<'a> {
    dm: &'a DistanceMatrix,
    statistic: Statistic,
    total: f64,
    row_sums: Vec<f64>,
}

impl<'a> PermutationKernel<'a> {
    fn new(dm: &'a DistanceMatrix, gi: &GroupIndex, statistic: Statistic) -> Result<Self> {
        let total = distmat::group_gmd_inputs(dm, gi)?.total;
        let row_sums = match statistic {
            Statistic::Dcov => dm.row_sums(),
            Statistic::Gini => Vec::new(),
        };
        Ok(Self { dm, statistic, total, row_sums })
    }

    fn eval(&self, gi: &GroupIndex) -> Result<f64> {
        let per_class = gi.indices().iter().map(|idx| distmat::within_sum(self.dm, idx)).collect();
        let sums = PairSums { total: self.total, per_class };
        match self.statistic {
            Statistic::Gini => gini_cov_from_sums(&sums, gi),
            Statistic::Dcov => dcov_from_sums(&sums, &self.row_sums, gi),
        }
    }
}

/// Permutation test on a precomputed distance matrix.
///
/// Replicate `b` shuffles the class assignment with Fisher-Yates driven by
/// the stream `(seed, PERMUTATION, b)`, so the result is identical for any
/// thread count. The p-value is `(1 + #{T_b >= T_0}) / (B + 1)`.
pub fn permutation_test_dm(
    dm: &DistanceMatrix,
    gi: &GroupIndex,
    statistic: Statistic,
    permutations: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    if permutations < 1 {
        return Err(Error::InvalidB);
    }
    validate_for_testing(gi)?;
    if dm.n() != gi.n() {
        return Err(Error::InvalidShape("distance matrix and labels differ in size".into()));
    }

    let kernel = PermutationKernel::new(dm, gi, statistic)?;
    let observed = kernel.eval(gi)?;
    let exceed = (0..permutations)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, &[rng::tag::PERMUTATION, b as u64]);
            let mut assignment = gi.assignment().to_vec();
            assignment.shuffle(&mut rng);
            kernel.eval(&gi.reassigned(&assignment)).map(|t| usize::from(t >= observed))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let p_value = (1 + exceed) as f64 / (permutations + 1) as f64;
    let method = match statistic {
        Statistic::Gini => Method::GiniPerm,
        Statistic::Dcov => Method::DcovPerm,
    };
    Ok(TestResult {
        method,
        statistic: observed,
        z: None,
        p_value,
        alpha,
        reject: p_value <= alpha,
        permutations: Some(permutations),
        seed: Some(seed),
        degenerate: dm.as_slice().iter().all(|&d| d == 0.0),
    })
}

pub fn permutation_test(
    ds: &LabeledDataset,
    statistic: Statistic,
    permutations: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    let gi = group_index(ds);
    validate_for_testing(&gi)?;
    permutation_test_dm(&pairwise_distances(ds), &gi, statistic, permutations, alpha, seed)
}

/// Runs `method` on a prepared distance matrix. `permutations` and `seed` are
/// ignored by the normal method.
pub fn run_method(
    method: Method,
    dm: &DistanceMatrix,
    gi: &GroupIndex,
    alpha: f64,
    permutations: usize,
    seed: u64,
) -> Result<TestResult> {
    match method {
        Method::GiniNormal => gini_normal_test_dm(dm, gi, alpha),
        Method::GiniPerm => permutation_test_dm(dm, gi, Statistic::Gini, permutations, alpha, seed),
        Method::DcovPerm => permutation_test_dm(dm, gi, Statistic::Dcov, permutations, alpha, seed),
    }
}
