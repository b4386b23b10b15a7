//! Sample Gini quantities: GMD U-statistics, Gini covariance and correlation,
//! the bias-corrected distance variance, the null variance estimate of the
//! Gini covariance, and the distance-covariance comparator statistic.
//!
//! All estimators take a precomputed [`DistanceMatrix`]; distances are never
//! recomputed.

use crate::data::{validate_for_testing, GroupIndex};
use crate::distmat::{self, group_gmd_inputs, DistanceMatrix, PairSums, UCenteredMatrix};
use crate::error::{Error, Result};

/// `C(m, 2)` as a float.
#[inline]
pub fn pairs(m: usize) -> f64 {
    let m = m as f64;
    m * (m - 1.0) / 2.0
}

/// Gini mean difference U-statistic: `pair_sum / C(m, 2)`.
pub fn gmd(pair_sum: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::TinyClass { label: "sample".into(), count: m });
    }
    Ok(pair_sum / pairs(m))
}

/// `U_n - sum_k p_k U_{n_k}` from precomputed pair sums.
pub fn gini_cov_from_sums(sums: &PairSums, gi: &GroupIndex) -> Result<f64> {
    let pooled = gmd(sums.total, gi.n())?;
    let mut within = 0.0;
    for ((&s, &m), &p) in sums.per_class.iter().zip(gi.counts()).zip(gi.proportions()) {
        within += p * gmd(s, m)?;
    }
    Ok(pooled - within)
}

/// Sample Gini covariance.
pub fn gini_cov(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<f64> {
    validate_for_testing(gi)?;
    gini_cov_from_sums(&group_gmd_inputs(dm, gi)?, gi)
}

/// Sample Gini correlation `gCov_n / U_n`; `None` when every point coincides.
///
/// Not truncated to `[0, 1]`: the U-statistic estimate can be negative.
pub fn gini_cor(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<Option<f64>> {
    validate_for_testing(gi)?;
    let sums = group_gmd_inputs(dm, gi)?;
    let pooled = gmd(sums.total, gi.n())?;
    if pooled > 0.0 {
        Ok(Some(gini_cov_from_sums(&sums, gi)? / pooled))
    } else {
        Ok(None)
    }
}

/// Bias-corrected squared distance variance `sum_{k != l} a[k][l]^2 / (n (n - 3))`.
pub fn dist_variance(a: &UCenteredMatrix) -> f64 {
    let n = a.n();
    let nf = n as f64;
    let row_sq: Vec<f64> = (0..n).map(|k| a.row(k).iter().map(|v| v * v).sum()).collect();
    // diagonal entries are zero, so including them is harmless
    distmat::pairwise_sum(&row_sq) / (nf * (nf - 3.0))
}

/// `sum_k p_k^2 / C(n_k, 2) - 1 / C(n, 2)`.
///
/// Per-class terms are summed in class order before the pooled term is
/// subtracted.
pub fn sigma0_bracket(gi: &GroupIndex) -> Result<f64> {
    validate_for_testing(gi)?;
    let mut per_class = 0.0;
    for (&m, &p) in gi.counts().iter().zip(gi.proportions()) {
        per_class += p * p / pairs(m);
    }
    let bracket = per_class - 1.0 / pairs(gi.n());
    assert!(bracket > 0.0, "variance bracket must be positive for K >= 2, got {bracket}");
    Ok(bracket)
}

/// Null variance estimate of the Gini covariance: `bracket * v2n`.
pub fn sigma0_sq(gi: &GroupIndex, v2n: f64) -> Result<f64> {
    if !(v2n >= 0.0) {
        return Err(Error::Domain(format!("distance variance must be >= 0, got {v2n}")));
    }
    Ok(sigma0_bracket(gi)? * v2n)
}

/// Unbiased squared distance covariance between `X` and the class label
/// under the discrete metric `b(y, y') = 1{y != y'}`, from precomputed pieces.
///
/// The U-centered inner product of the two distance matrices reduces to
/// within-class sums of the U-centered `A`, since its off-diagonal rows sum
/// to zero: `sum_{k != l} A_kl b_kl = -sum_k sum_{i != j in class k} A_ij`.
/// `row_sums[i] = sum_j d[i][j]` over the full range.
pub fn dcov_from_sums(sums: &PairSums, row_sums: &[f64], gi: &GroupIndex) -> Result<f64> {
    let n = gi.n();
    if n < 4 {
        return Err(Error::TooSmall { n, min: 4 });
    }
    let nf = n as f64;
    let full = 2.0 * sums.total;
    let mut within = 0.0;
    for ((idx, &s), &m) in gi.indices().iter().zip(&sums.per_class).zip(gi.counts()) {
        let mf = m as f64;
        let cross: Vec<f64> = idx.iter().map(|&i| row_sums[i]).collect();
        let r = distmat::pairwise_sum(&cross);
        within += 2.0 * s - 2.0 * (mf - 1.0) * r / (nf - 2.0) + mf * (mf - 1.0) * full / ((nf - 1.0) * (nf - 2.0));
    }
    Ok(-within / (nf * (nf - 3.0)))
}

/// Unbiased (U-centered) squared distance covariance between the features
/// and the class label. This is the statistic of the `dcov-perm` method.
pub fn dcov_stat(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<f64> {
    validate_for_testing(gi)?;
    dcov_from_sums(&group_gmd_inputs(dm, gi)?, &dm.row_sums(), gi)
}

/// Plug-in distance-covariance form `sum_k p_k^2 (2 M_k - D_k - D)`, where
/// `M_k` is the mean distance from class-`k` points to all points (self pairs
/// included at distance 0), `D_k` the class GMD and `D` the pooled GMD.
///
/// Same population target as [`dcov_stat`] but a different finite-sample
/// ordering of relabelings: in small unbalanced classes it is noticeably
/// more powerful than the unbiased form under permutation calibration.
pub fn dcov_plugin_stat(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<f64> {
    validate_for_testing(gi)?;
    let sums = group_gmd_inputs(dm, gi)?;
    let row_sums = dm.row_sums();
    let n = gi.n();
    let pooled = gmd(sums.total, n)?;
    let mut stat = 0.0;
    for (((idx, &s), &m), &p) in gi
        .indices()
        .iter()
        .zip(&sums.per_class)
        .zip(gi.counts())
        .zip(gi.proportions())
    {
        let cross: Vec<f64> = idx.iter().map(|&i| row_sums[i]).collect();
        let cross_mean = distmat::pairwise_sum(&cross) / (m as f64 * n as f64);
        stat += p * p * (2.0 * cross_mean - gmd(s, m)? - pooled);
    }
    Ok(stat)
}

/// Gini covariance evaluated through doubly centered distances
/// `d[i][j] - h_i - h_j + h`, with `h_i` the mean distance from point `i` to
/// the pooled sample and `h` the grand mean. The first-order terms cancel
/// exactly between the pooled and per-class U-statistics, so this equals
/// [`gini_cov`] up to rounding for any input; it exists as an algebraic
/// cross-check.
pub fn gini_cov_centered_form(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<f64> {
    validate_for_testing(gi)?;
    let n = dm.n();
    let nf = n as f64;
    let h: Vec<f64> = dm.row_sums().into_iter().map(|s| s / nf).collect();
    let grand = distmat::pairwise_sum(&h) / nf;
    let centered = |i: usize, j: usize| dm.get(i, j) - h[i] - h[j] + grand;

    let mut pooled = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            pooled += centered(i, j);
        }
    }
    let mut stat = pooled / pairs(n);
    for (idx, &p) in gi.indices().iter().zip(gi.proportions()) {
        let mut within = 0.0;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                within += centered(i, j);
            }
        }
        stat -= p * within / pairs(idx.len());
    }
    Ok(stat)
}

/// Every sample quantity of the Gini analysis of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GiniEstimates {
    pub n: usize,
    pub k: usize,
    pub counts: Vec<usize>,
    /// Pooled GMD.
    pub delta_hat: f64,
    /// Per-class GMDs, in class order.
    pub delta_k_hat: Vec<f64>,
    pub gcov: f64,
    /// `None` when `delta_hat == 0`.
    pub gcor: Option<f64>,
    pub v2n: f64,
    pub sigma0_sq: f64,
}

impl GiniEstimates {
    pub fn compute(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<Self> {
        validate_for_testing(gi)?;
        let sums = group_gmd_inputs(dm, gi)?;
        let delta_hat = gmd(sums.total, gi.n())?;
        let delta_k_hat = sums
            .per_class
            .iter()
            .zip(gi.counts())
            .map(|(&s, &m)| gmd(s, m))
            .collect::<Result<Vec<_>>>()?;
        let gcov = gini_cov_from_sums(&sums, gi)?;
        let gcor = (delta_hat > 0.0).then(|| gcov / delta_hat);
        let v2n = dist_variance(&distmat::u_center(dm)?);
        let sigma0_sq = sigma0_sq(gi, v2n)?;
        Ok(Self {
            n: gi.n(),
            k: gi.k(),
            counts: gi.counts().to_vec(),
            delta_hat,
            delta_k_hat,
            gcov,
            gcor,
            v2n,
            sigma0_sq,
        })
    }

    /// `gcov / sigma0`, or `None` when the variance estimate is zero.
    pub fn z(&self) -> Option<f64> {
        (self.sigma0_sq > 0.0).then(|| self.gcov / self.sigma0_sq.sqrt())
    }
}
