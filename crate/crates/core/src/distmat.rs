//! Pairwise Euclidean distances and the bias-corrected U-centering transform.

use rayon::prelude::*;

use crate::data::{GroupIndex, LabeledDataset};
use crate::error::{Error, Result};

/// Above this many coordinates, squared distances are accumulated by
/// recursive halving instead of a single running sum.
const PAIRWISE_CUTOFF: usize = 1024;

/// Symmetric `n x n` matrix of Euclidean distances with an exact zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a row-major `n x n` buffer. Checks shape, symmetry, zero diagonal
    /// and non-negativity.
    pub fn from_row_major(n: usize, d: Vec<f64>) -> Result<Self> {
        if d.len() != n * n {
            return Err(Error::InvalidShape(format!("{} entries for a {n}x{n} matrix", d.len())));
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return Err(Error::InvalidShape(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let v = d[i * n + j];
                if v != d[j * n + i] || !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidShape(format!("bad entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.d[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    /// Full row sums `sum_j d[i][j]`.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| pairwise_sum(self.row(i))).collect()
    }

    /// Rows and columns reordered so that new index `i` is old index `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                d[i * n + j] = self.get(pi, pj);
            }
        }
        Self { n, d }
    }
}

/// Bias-corrected double centering of a distance matrix.
///
/// Off-diagonal row and column sums of `a` vanish, and the diagonal is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UCenteredMatrix {
    n: usize,
    a: Vec<f64>,
}

impl UCenteredMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.a[k * self.n + l]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.a[k * self.n..(k + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }
}

/// Sum of squared differences, four lanes wide.
#[inline]
fn block_sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for lane in 0..4 {
            let t = x[lane] - y[lane];
            acc[lane] += t * t;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let t = x - y;
        tail += t * t;
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    if a.len() <= PAIRWISE_CUTOFF {
        block_sq_dist(a, b)
    } else {
        let mid = a.len() / 2;
        sq_dist(&a[..mid], &b[..mid]) + sq_dist(&a[mid..], &b[mid..])
    }
}

/// Euclidean distance between two equal-length vectors.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sq_dist(a, b).sqrt()
}

/// Pairwise (tree) summation; error grows with `log n` rather than `n`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// All pairwise Euclidean distances between the rows of `ds`.
///
/// Each unordered pair is computed once and mirrored, so the result is
/// exactly symmetric. Rows are distributed over the rayon pool; every entry is
/// computed independently, so the output does not depend on thread count.
pub fn pairwise_distances(ds: &LabeledDataset) -> DistanceMatrix {
    let n = ds.n();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = ds.row(i);
            ((i + 1)..n).map(|j| euclidean(xi, ds.row(j))).collect()
        })
        .collect();
    let mut d = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DistanceMatrix { n, d }
}

/// U-centers `dm`:
///
/// `a[k][l] = d[k][l] - colsum_l/(n-2) - rowsum_k/(n-2) + total/((n-1)(n-2))`
/// for `k != l`, with sums over the full index range, and `a[k][k] = 0`.
pub fn u_center(dm: &DistanceMatrix) -> Result<UCenteredMatrix> {
    let n = dm.n();
    if n < 4 {
        return Err(Error::TooSmall { n, min: 4 });
    }
    let row_sums = dm.row_sums();
    // d is symmetric, so column sums equal row sums; computed separately so
    // that the formula holds as written for any square input.
    let col_sums: Vec<f64> = (0..n)
        .map(|l| {
            let col: Vec<f64> = (0..n).map(|i| dm.get(i, l)).collect();
            pairwise_sum(&col)
        })
        .collect();
    let total = pairwise_sum(&row_sums);
    let nf = n as f64;
    let inv_n2 = 1.0 / (nf - 2.0);
    let grand = total / ((nf - 1.0) * (nf - 2.0));

    let mut a = vec![0.0; n * n];
    for k in 0..n {
        let rk = row_sums[k] * inv_n2;
        for l in 0..n {
            if k != l {
                a[k * n + l] = dm.get(k, l) - col_sums[l] * inv_n2 - rk + grand;
            }
        }
    }
    Ok(UCenteredMatrix { n, a })
}

/// Upper-triangle distance sums feeding the GMD U-statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSums {
    /// `sum_{i<j} d[i][j]` over all rows.
    pub total: f64,
    /// `sum_{i<j} d[i][j]` over pairs inside each class, in class order.
    pub per_class: Vec<f64>,
}

/// Sum of `d[i][j]` over unordered pairs drawn from `idx`.
pub(crate) fn within_sum(dm: &DistanceMatrix, idx: &[usize]) -> f64 {
    let partials: Vec<f64> = idx
        .iter()
        .enumerate()
        .map(|(a, &i)| {
            let row = dm.row(i);
            idx[a + 1..].iter().map(|&j| row[j]).sum::<f64>()
        })
        .collect();
    pairwise_sum(&partials)
}

pub fn group_gmd_inputs(dm: &DistanceMatrix, gi: &GroupIndex) -> Result<PairSums> {
    if dm.n() != gi.n() {
        return Err(Error::InvalidShape(format!(
            "distance matrix has {} rows but the partition has {}",
            dm.n(),
            gi.n()
        )));
    }
    let partials: Vec<f64> = (0..dm.n())
        .map(|i| dm.row(i)[i + 1..].iter().sum::<f64>())
        .collect();
    let total = pairwise_sum(&partials);
    let per_class = gi.indices().iter().map(|idx| within_sum(dm, idx)).collect();
    Ok(PairSums { total, per_class })
}
