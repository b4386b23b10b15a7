//! Seeded generators for the three simulation designs.
//!
//! * Example 1: every class is `N_p(0, Sigma)` with `Sigma_ij = rho^|i-j|`.
//! * Example 2: class 1 is `N_p(0, Sigma)`; classes 2 and 3 scale the first
//!   `m = round(beta p)` coordinates by 1.1 / 1.2 and shift them by 0.1 / 0.2.
//! * Example 3: centered Exp(1) noise pushed through the Cholesky factor of
//!   the class covariance, with the same scalings as Example 2 and no shift.

use std::fmt;

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_RHO: f64 = 0.7;

/// Class sizes of the normality design.
pub const EXAMPLE1_SIZES: [usize; 5] = [30, 40, 50, 60, 70];

/// Diagonal scale and mean shift of the affected coordinates, per class.
const CLASS_SCALE: [f64; 3] = [1.0, 1.1, 1.2];
const CLASS_SHIFT: [f64; 3] = [0.0, 0.1, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "u8")]
pub enum Example {
    One,
    Two,
    Three,
}

impl From<Example> for u8 {
    fn from(e: Example) -> u8 {
        match e {
            Example::One => 1,
            Example::Two => 2,
            Example::Three => 3,
        }
    }
}

impl TryFrom<u8> for Example {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Example::One),
            2 => Ok(Example::Two),
            3 => Ok(Example::Three),
            _ => Err(Error::InvalidConfig(format!("example must be 1, 2 or 3, got {v}"))),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub example: Example,
    pub p: usize,
    pub sizes: Vec<usize>,
    /// Proportion of affected coordinates (Examples 2 and 3).
    pub beta: f64,
    pub rho: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(example: Example, p: usize, sizes: Vec<usize>, beta: f64, seed: u64) -> Result<Self> {
        let spec = Self { example, p, sizes, beta, rho: DEFAULT_RHO, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn example1(p: usize, seed: u64) -> Result<Self> {
        Self::new(Example::One, p, EXAMPLE1_SIZES.to_vec(), 0.0, seed)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let spec = Self { beta, ..self.clone() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidConfig("dimension p must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&s| s < 2) {
            return Err(Error::InvalidConfig("every class size must be at least 2".into()));
        }
        if self.example != Example::One && self.sizes.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "example {} has exactly 3 classes, got {} sizes",
                self.example,
                self.sizes.len()
            )));
        }
        Ok(())
    }

    /// Number of affected coordinates, `round(beta p)`.
    pub fn affected(&self) -> usize {
        ((self.beta * self.p as f64).round() as usize).min(self.p)
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("|rho| must be < 1, got {rho}")))
    }
}

/// In-place stationary AR(1) filter: `x_0 = e_0`, `x_j = rho x_{j-1} + sqrt(1 - rho^2) e_j`.
/// This is multiplication by the Cholesky factor of `Sigma_ij = rho^|i-j|`.
fn ar1_filter(row: &mut [f64], rho: f64) {
    let innov = (1.0 - rho * rho).sqrt();
    for j in 1..row.len() {
        row[j] = rho * row[j - 1] + innov * row[j];
    }
}

/// `m` independent rows from `N_p(0, Sigma)` with `Sigma_ij = rho^|i-j|`.
pub fn ar1_gaussian<R: Rng + ?Sized>(m: usize, p: usize, rho: f64, rng: &mut R) -> Result<Array2<f64>> {
    check_rho(rho)?;
    let mut x = Array2::<f64>::zeros((m, p));
    for mut row in x.rows_mut() {
        let row = row.as_slice_mut().expect("standard layout");
        for v in row.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        ar1_filter(row, rho);
    }
    Ok(x)
}

/// Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(sigma: &Array2<f64>) -> Result<Array2<f64>> {
    let p = sigma.nrows();
    if sigma.ncols() != p {
        return Err(Error::InvalidShape("cholesky needs a square matrix".into()));
    }
    let mut l = Array2::<f64>::zeros((p, p));
    for i in 0..p {
        for j in 0..=i {
            let mut s = sigma[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Domain("matrix is not positive definite".into()));
                }
                l[[i, i]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

pub fn ar1_covariance(p: usize, rho: f64) -> Array2<f64> {
    Array2::from_shape_fn((p, p), |(i, j)| rho.powi(i.abs_diff(j) as i32))
}

/// Lower-triangular `L` with `L L^T = Sigma`, `Sigma_ij = rho^|i-j|`.
pub fn chol_ar1(p: usize, rho: f64) -> Result<Array2<f64>> {
    check_rho(rho)?;
    cholesky(&ar1_covariance(p, rho))
}

fn class_position(spec: &ScenarioSpec, class_k: usize) -> Result<usize> {
    if class_k == 0 || class_k > spec.sizes.len() {
        return Err(Error::InvalidConfig(format!(
            "class {class_k} out of range 1..={}",
            spec.sizes.len()
        )));
    }
    Ok(class_k - 1)
}

fn scale_and_shift(x: &mut Array2<f64>, affected: usize, scale: f64, shift: f64) {
    if scale == 1.0 && shift == 0.0 {
        return;
    }
    for mut row in x.rows_mut() {
        for v in row.iter_mut().take(affected) {
            *v = scale * *v + shift;
        }
    }
}

/// Class `class_k` (1-based) of the Gaussian shift/scale design: `D Z + mu`.
pub fn example2_sample<R: Rng + ?Sized>(spec: &ScenarioSpec, class_k: usize, rng: &mut R) -> Result<Array2<f64>> {
    let k = class_position(spec, class_k)?;
    let mut x = ar1_gaussian(spec.sizes[k], spec.p, spec.rho, rng)?;
    scale_and_shift(&mut x, spec.affected(), CLASS_SCALE[k.min(2)], CLASS_SHIFT[k.min(2)]);
    Ok(x)
}

/// Class `class_k` (1-based) of the skewed design: rows `L_k z` with
/// `z_j = Exp(1) - 1` and `L_k` the Cholesky factor of `D_k Sigma D_k`.
///
/// `L_k = D_k L`, and multiplying by `L` is the AR(1) filter, so no dense
/// factor is formed.
pub fn example3_sample<R: Rng + ?Sized>(spec: &ScenarioSpec, class_k: usize, rng: &mut R) -> Result<Array2<f64>> {
    let k = class_position(spec, class_k)?;
    check_rho(spec.rho)?;
    let mut x = Array2::<f64>::zeros((spec.sizes[k], spec.p));
    for mut row in x.rows_mut() {
        let row = row.as_slice_mut().expect("standard layout");
        for v in row.iter_mut() {
            let e: f64 = rng.sample(Exp1);
            *v = e - 1.0;
        }
        ar1_filter(row, spec.rho);
    }
    scale_and_shift(&mut x, spec.affected(), CLASS_SCALE[k.min(2)], 0.0);
    Ok(x)
}

/// Draws class `class_k` (1-based) of whichever design `spec` names.
pub fn sample_class<R: Rng + ?Sized>(spec: &ScenarioSpec, class_k: usize, rng: &mut R) -> Result<Array2<f64>> {
    match spec.example {
        Example::One => {
            let k = class_position(spec, class_k)?;
            ar1_gaussian(spec.sizes[k], spec.p, spec.rho, rng)
        }
        Example::Two => example2_sample(spec, class_k, rng),
        Example::Three => example3_sample(spec, class_k, rng),
    }
}

/// A full labeled dataset. Class `k` draws from the stream
/// `(spec.seed, DATA, path..., k)` and is labeled `"k"`.
pub fn sample_dataset(spec: &ScenarioSpec, path: &[u64]) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut key = Vec::with_capacity(path.len() + 2);
    key.push(rng::tag::DATA);
    key.extend_from_slice(path);
    key.push(0);
    let last = key.len() - 1;
    let mut blocks = Vec::with_capacity(spec.sizes.len());
    for class_k in 1..=spec.sizes.len() {
        key[last] = class_k as u64;
        let mut stream = rng::stream(spec.seed, &key);
        blocks.push(sample_class(spec, class_k, &mut stream)?);
    }
    let names: Vec<String> = (1..=spec.sizes.len()).map(|k| k.to_string()).collect();
    LabeledDataset::from_blocks(&blocks, &names)
}
