//! Monte Carlo drivers: the normality study of the standardized Gini
//! covariance and the size/power study of the K-sample tests.
//!
//! Every replicate derives its own random streams from the study seed (see
//! [`crate::rng`]), so any subset of a study can be recomputed in isolation
//! and results do not depend on scheduling. Aggregates are integer counts or
//! ordered collections.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::data::group_index;
use crate::distmat::pairwise_distances;
use crate::error::{Error, Result};
use crate::estimators::GiniEstimates;
use crate::hypothesis::{run_method, Method, DEFAULT_ALPHA, DEFAULT_PERMUTATIONS};
use crate::normal::normal_pdf;
use crate::rng;
use crate::simgen::{sample_dataset, Example, ScenarioSpec};

pub const POWER_CSV_HEADER: &str =
    "example,p,sizes,beta,method,alpha,replicates,rejection_rate,elapsed_ms";

/// Evaluation grid `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Grid {
    /// The grid used for density comparisons: `[-4, 4]` in steps of 0.01.
    pub const STANDARD: Grid = Grid { lo: -4.0, hi: 4.0, step: 0.01 };

    pub fn points(&self) -> Vec<f64> {
        let count = ((self.hi - self.lo) / self.step).round() as usize + 1;
        (0..count).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule of thumb.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeEstimate {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `0.9 min(sd, IQR / 1.34) m^(-1/5)`. When one of the two spreads is zero the
/// other is used; when both are, the sample is degenerate.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::TooSmall { n: m, min: 2 });
    }
    let mean = samples.iter().sum::<f64>() / m as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1) as f64;
    let sd = var.sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        (false, false) => return Err(Error::DegenerateSample),
    };
    Ok(0.9 * spread * (m as f64).powf(-0.2))
}

/// Gaussian-kernel density estimate `(1/(m h)) sum_i phi((x - z_i) / h)` on a grid.
pub fn kde_gaussian(samples: &[f64], bandwidth: Bandwidth, grid: Grid) -> Result<KdeEstimate> {
    if samples.len() < 2 {
        return Err(Error::TooSmall { n: samples.len(), min: 2 });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("kde samples must be finite".into()));
    }
    let h = match bandwidth {
        Bandwidth::Auto => silverman_bandwidth(samples)?,
        Bandwidth::Fixed(h) => h,
    };
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("bandwidth must be positive, got {h}")));
    }
    if !(grid.step > 0.0 && grid.hi >= grid.lo) {
        return Err(Error::Domain("grid needs lo <= hi and a positive step".into()));
    }
    let xs = grid.points();
    let norm = 1.0 / (samples.len() as f64 * h);
    let density = xs
        .par_iter()
        .map(|&x| norm * samples.iter().map(|&z| normal_pdf((x - z) / h)).sum::<f64>())
        .collect();
    Ok(KdeEstimate { bandwidth: h, grid: xs, density })
}

/// Sup-norm distance on the standard grid between the Silverman KDE of
/// `samples` and the standard normal density. Returns `(gap, bandwidth)`.
pub fn normal_density_gap(samples: &[f64]) -> Result<(f64, f64)> {
    let kde = kde_gaussian(samples, Bandwidth::Auto, Grid::STANDARD)?;
    let gap = kde
        .grid
        .iter()
        .zip(&kde.density)
        .map(|(&x, &f)| (f - normal_pdf(x)).abs())
        .fold(0.0, f64::max);
    Ok((gap, kde.bandwidth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub scenario: ScenarioSpec,
    pub replicates: usize,
    pub methods: Vec<Method>,
    pub alpha: f64,
    pub permutations: usize,
}

impl StudyConfig {
    pub fn new(scenario: ScenarioSpec, replicates: usize, methods: Vec<Method>) -> Result<Self> {
        let cfg = Self {
            scenario,
            replicates,
            methods,
            alpha: DEFAULT_ALPHA,
            permutations: DEFAULT_PERMUTATIONS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_permutations(mut self, permutations: usize) -> Result<Self> {
        self.permutations = permutations;
        self.validate()?;
        Ok(self)
    }

    /// Master seed; every stream of the study is derived from it.
    pub fn seed(&self) -> u64 {
        self.scenario.seed
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if self.replicates < 1 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.permutations < 1 && self.methods.iter().any(|m| m.is_permutation()) {
            return Err(Error::InvalidB);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityRow {
    pub p: usize,
    pub sizes: Vec<usize>,
    pub replicates: usize,
    pub bandwidth: f64,
    pub max_density_gap: f64,
    #[serde(skip)]
    pub z_samples: Vec<f64>,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Draws `replicates` null datasets of the Example 1 design, standardizes
/// each Gini covariance by its estimated null standard deviation, and
/// compares the KDE of those values with the standard normal density.
pub fn normality_study(cfg: &StudyConfig) -> Result<NormalityRow> {
    cfg.validate()?;
    let spec = &cfg.scenario;
    if spec.example != Example::One {
        return Err(Error::InvalidConfig("the normality study uses example 1".into()));
    }
    let start = Instant::now();
    let z_samples = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let ds = sample_dataset(spec, &[0, r as u64])?;
            let est = GiniEstimates::compute(&pairwise_distances(&ds), &group_index(&ds))?;
            est.z().ok_or(Error::DegenerateSample)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (max_density_gap, bandwidth) = normal_density_gap(&z_samples)?;
    Ok(NormalityRow {
        p: spec.p,
        sizes: spec.sizes.clone(),
        replicates: cfg.replicates,
        bandwidth,
        max_density_gap,
        z_samples,
        elapsed: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub example: Example,
    pub p: usize,
    pub sizes: Vec<usize>,
    pub beta: f64,
    pub method: Method,
    pub alpha: f64,
    pub replicates: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// Compute time spent on this row, summed over replicates (data
    /// generation is charged to every method that used the data).
    #[serde(skip)]
    pub elapsed: Duration,
}

struct ReplicateOutcome {
    rejected: Vec<bool>,
    timings: Vec<Duration>,
}

/// For each `beta` and method, the fraction of `replicates` datasets on which
/// the method rejects at `cfg.alpha`. All methods of a replicate see the same
/// dataset, drawn from `(seed, DATA, beta_index, replicate, class)`; the
/// permutation seed is `(seed, PERM_SEED, beta_index, replicate)`.
///
/// Rows come out in `(beta, method)` order.
pub fn size_power_study(cfg: &StudyConfig, beta_grid: &[f64]) -> Result<Vec<PowerRow>> {
    cfg.validate()?;
    if cfg.scenario.example == Example::One {
        return Err(Error::InvalidConfig("size/power studies use example 2 or 3".into()));
    }
    if cfg.methods.is_empty() {
        return Err(Error::InvalidConfig("at least one method is required".into()));
    }
    if beta_grid.is_empty() {
        return Err(Error::InvalidConfig("beta grid is empty".into()));
    }
    let seed = cfg.seed();
    let mut rows = Vec::with_capacity(beta_grid.len() * cfg.methods.len());
    for (bi, &beta) in beta_grid.iter().enumerate() {
        let spec = cfg.scenario.with_beta(beta)?;
        let outcomes = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let t0 = Instant::now();
                let ds = sample_dataset(&spec, &[bi as u64, r as u64])?;
                let dm = pairwise_distances(&ds);
                let gi = group_index(&ds);
                let prep = t0.elapsed();
                let perm_seed = rng::derive_key(seed, &[rng::tag::PERM_SEED, bi as u64, r as u64]);
                let mut rejected = Vec::with_capacity(cfg.methods.len());
                let mut timings = Vec::with_capacity(cfg.methods.len());
                for &m in &cfg.methods {
                    let t = Instant::now();
                    let res = run_method(m, &dm, &gi, cfg.alpha, cfg.permutations, perm_seed)?;
                    rejected.push(res.reject);
                    timings.push(prep + t.elapsed());
                }
                Ok(ReplicateOutcome { rejected, timings })
            })
            .collect::<Result<Vec<_>>>()?;

        for (mi, &method) in cfg.methods.iter().enumerate() {
            let rejections = outcomes.iter().filter(|o| o.rejected[mi]).count();
            let elapsed = outcomes.iter().map(|o| o.timings[mi]).sum();
            rows.push(PowerRow {
                example: spec.example,
                p: spec.p,
                sizes: spec.sizes.clone(),
                beta,
                method,
                alpha: cfg.alpha,
                replicates: cfg.replicates,
                rejections,
                rejection_rate: rejections as f64 / cfg.replicates as f64,
                elapsed,
            });
        }
    }
    Ok(rows)
}

pub fn format_sizes(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Writes power rows as CSV. Without `timing`, `elapsed_ms` is left empty so
/// that output is a pure function of the configuration.
pub fn write_power_csv<W: Write>(rows: &[PowerRow], w: W, timing: bool) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(POWER_CSV_HEADER.split(','))?;
    for row in rows {
        let elapsed = if timing { format!("{:.3}", row.elapsed.as_secs_f64() * 1e3) } else { String::new() };
        writer.write_record([
            row.example.to_string(),
            row.p.to_string(),
            format_sizes(&row.sizes),
            row.beta.to_string(),
            row.method.to_string(),
            row.alpha.to_string(),
            row.replicates.to_string(),
            row.rejection_rate.to_string(),
            elapsed,
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// JSON mirror of [`write_power_csv`].
pub fn power_rows_json(rows: &[PowerRow], timing: bool) -> serde_json::Value {
    let values = rows
        .iter()
        .map(|row| {
            let mut v = serde_json::to_value(row).expect("power rows serialize");
            if timing {
                v["elapsed_ms"] = serde_json::json!(row.elapsed.as_secs_f64() * 1e3);
            }
            v
        })
        .collect();
    serde_json::Value::Array(values)
}

/// Summary block followed by one standardized statistic per line:
///
/// ```text
/// p,sizes,replicates,bandwidth,max_density_gap,elapsed_ms
/// 5,"30,40,50,60,70",100,0.29,0.08,
/// z
/// 0.1234
/// ...
/// ```
pub fn write_normality_csv<W: Write>(row: &NormalityRow, mut w: W, timing: bool) -> Result<()> {
    {
        let mut writer = csv::Writer::from_writer(&mut w);
        writer.write_record(["p", "sizes", "replicates", "bandwidth", "max_density_gap", "elapsed_ms"])?;
        let elapsed = if timing { format!("{:.3}", row.elapsed.as_secs_f64() * 1e3) } else { String::new() };
        writer.write_record([
            row.p.to_string(),
            format_sizes(&row.sizes),
            row.replicates.to_string(),
            row.bandwidth.to_string(),
            row.max_density_gap.to_string(),
            elapsed,
        ])?;
        writer.flush()?;
    }
    writeln!(w, "z")?;
    for z in &row.z_samples {
        writeln!(w, "{z}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn grid_points() {
        let pts = Grid::STANDARD.points();
        assert_eq!(pts.len(), 801);
        assert_eq!(pts[0], -4.0);
        assert!((pts[800] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kde_degenerate_sample() {
        assert!(matches!(
            kde_gaussian(&[1.5; 10], Bandwidth::Auto, Grid::STANDARD),
            Err(Error::DegenerateSample)
        ));
        assert!(kde_gaussian(&[1.0], Bandwidth::Fixed(0.5), Grid::STANDARD).is_err());
        assert!(kde_gaussian(&[1.0, 2.0], Bandwidth::Fixed(0.0), Grid::STANDARD).is_err());
    }

    #[test]
    fn kde_integrates_to_one() {
        let samples = [-1.0, -0.2, 0.0, 0.3, 0.9, 2.0, 2.5];
        let grid = Grid { lo: -15.0, hi: 15.0, step: 0.01 };
        let kde = kde_gaussian(&samples, Bandwidth::Auto, grid).unwrap();
        let f = &kde.density;
        let integral: f64 =
            f.windows(2).map(|w| 0.5 * (w[0] + w[1]) * grid.step).sum();
        assert!((integral - 1.0).abs() < 1e-3, "{integral}");
    }

    #[test]
    fn kde_symmetric_samples() {
        let kde = kde_gaussian(&[-1.3, 1.3], Bandwidth::Auto, Grid::STANDARD).unwrap();
        let n = kde.density.len();
        for i in 0..n {
            assert!((kde.density[i] - kde.density[n - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn silverman_rule() {
        // sd = sqrt(2.5) = 1.58, IQR = 2 -> IQR / 1.34 = 1.4925 is smaller
        let h = silverman_bandwidth(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let expect = 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2);
        assert!((h - expect).abs() < 1e-14);
        // IQR zero falls back on sd
        let h = silverman_bandwidth(&[0.0, 0.0, 0.0, 0.0, 10.0]).unwrap();
        assert!(h > 0.0);
    }

    #[test]
    fn exact_normal_draws_are_close() {
        let mut r = rng::stream(2024, &[]);
        let draws: Vec<f64> = (0..5000).map(|_| r.sample(StandardNormal)).collect();
        let (gap, _) = normal_density_gap(&draws).unwrap();
        assert!(gap <= 0.03, "{gap}");
    }

    #[test]
    fn study_config_validation() {
        let spec = ScenarioSpec::new(Example::Two, 5, vec![5, 5, 5], 0.0, 1).unwrap();
        assert!(StudyConfig::new(spec.clone(), 0, vec![Method::GiniNormal]).is_err());
        let cfg = StudyConfig::new(spec.clone(), 3, vec![Method::GiniNormal]).unwrap();
        assert!(cfg.clone().with_alpha(0.0).is_err());
        assert!(StudyConfig::new(spec, 3, vec![Method::GiniPerm]).unwrap().with_permutations(0).is_err());
        assert!(normality_study(&cfg).is_err());
    }

    #[test]
    fn power_rows_order_and_csv() {
        let spec = ScenarioSpec::new(Example::Two, 6, vec![6, 5, 4], 0.0, 3).unwrap();
        let cfg = StudyConfig::new(spec, 20, vec![Method::GiniNormal, Method::DcovPerm])
            .unwrap()
            .with_permutations(19)
            .unwrap();
        let rows = size_power_study(&cfg, &[0.0, 1.0]).unwrap();
        let keys: Vec<(f64, Method)> = rows.iter().map(|r| (r.beta, r.method)).collect();
        assert_eq!(
            keys,
            vec![
                (0.0, Method::GiniNormal),
                (0.0, Method::DcovPerm),
                (1.0, Method::GiniNormal),
                (1.0, Method::DcovPerm)
            ]
        );
        for r in &rows {
            assert_eq!(r.rejection_rate * r.replicates as f64, r.rejections as f64);
        }
        let mut buf = Vec::new();
        write_power_csv(&rows, &mut buf, false).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), POWER_CSV_HEADER);
        assert!(lines.next().unwrap().starts_with("2,6,\"6,5,4\",0,gini-normal,0.05,20,"));
        assert_eq!(text.lines().count(), 5);

        let json = power_rows_json(&rows, false);
        assert_eq!(json.as_array().unwrap().len(), 4);
        assert_eq!(json[1]["method"], "dcov-perm");
        assert_eq!(json[0]["example"], 2);
    }

    #[test]
    fn power_study_reproducible() {
        let spec = ScenarioSpec::new(Example::Three, 8, vec![5, 5, 5], 0.5, 77).unwrap();
        let cfg = StudyConfig::new(spec, 15, vec![Method::GiniNormal, Method::GiniPerm])
            .unwrap()
            .with_permutations(29)
            .unwrap();
        let a = size_power_study(&cfg, &[0.5]).unwrap();
        let b = size_power_study(&cfg, &[0.5]).unwrap();
        let strip = |rows: Vec<PowerRow>| rows.into_iter().map(|r| (r.method, r.rejections)).collect::<Vec<_>>();
        assert_eq!(strip(a), strip(b));
    }
}
