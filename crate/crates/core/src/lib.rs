//! K-sample hypothesis testing with the categorical Gini covariance.
//!
//! The Gini covariance between a numeric vector `X` and a class label `Y` is
//! the pooled Gini mean difference minus the class-weighted within-class Gini
//! mean differences. It is zero exactly when the class-conditional
//! distributions coincide. This crate provides:
//!
//! * [`data`]: labeled samples, class partitions and CSV I/O;
//! * [`distmat`]: pairwise Euclidean distances and U-centering;
//! * [`estimators`]: unbiased U-statistic estimates of the Gini mean
//!   differences, Gini covariance and correlation, and the null variance;
//! * [`hypothesis`]: the studentized normal-limit test and permutation tests
//!   for the Gini and distance-covariance statistics;
//! * [`simgen`] and [`experiments`]: seeded simulation designs and the
//!   Monte Carlo size/power and normality studies;
//! * [`cli`]: the `gini-ksample` command-line tool.
//!
//! ```
//! use gini_ksample::{data::LabeledDataset, hypothesis::gini_normal_test};
//! use ndarray::array;
//!
//! let x = array![[0.0], [2.0], [1.0], [3.0]];
//! let labels = ["a", "a", "b", "b"].map(String::from).to_vec();
//! let ds = LabeledDataset::new(x, labels).unwrap();
//! let result = gini_normal_test(&ds, 0.05).unwrap();
//! assert!((result.statistic + 1.0 / 3.0).abs() < 1e-12);
//! ```

pub mod cli;
pub mod data;
pub mod distmat;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod hypothesis;
pub mod normal;
pub mod rng;
pub mod simgen;

pub use data::{group_index, load_csv, validate_for_testing, write_csv, GroupIndex, LabelColumn, LabeledDataset};
pub use distmat::{pairwise_distances, u_center, DistanceMatrix, UCenteredMatrix};
pub use error::{Error, Result};
pub use estimators::GiniEstimates;
pub use hypothesis::{gini_normal_test, permutation_test, Method, Statistic, TestResult};
