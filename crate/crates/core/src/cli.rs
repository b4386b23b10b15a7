//! Command-line front end.
//!
//! `test` runs one test on a CSV file and prints a single JSON line;
//! `simulate` runs a size/power study; `normality` runs the normality study.
//! Exit status reports operational success only: 0 on success, 1 on data
//! errors, 2 on usage errors. Results go to stdout (or `--out`), diagnostics
//! and provenance to stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::data::{group_index, load_csv, validate_for_testing, LabelColumn};
use crate::distmat::pairwise_distances;
use crate::error::Error;
use crate::experiments::{
    normality_study, power_rows_json, size_power_study, write_normality_csv, write_power_csv,
    StudyConfig,
};
use crate::hypothesis::{run_method, Method, DEFAULT_ALPHA, DEFAULT_PERMUTATIONS};
use crate::simgen::{Example, ScenarioSpec, DEFAULT_RHO, EXAMPLE1_SIZES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const TABLE_BETA_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Parser)]
#[command(name = "gini-ksample", version, about = "K-sample tests based on the categorical Gini covariance")]
pub struct Cli {
    /// Worker threads; 0 uses all cores. Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test equality of the class-conditional distributions in a CSV file.
    Test(TestArgs),
    /// Monte Carlo size/power study (examples 2 and 3).
    Simulate(SimulateArgs),
    /// Normality study of the standardized statistic (example 1).
    Normality(NormalityArgs),
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Label column: header name, or 0-based index.
    #[arg(long = "label-col", default_value = "0")]
    pub label_col: String,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, default_value = "gini-normal")]
    pub method: Method,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 2)]
    pub example: u8,
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    #[arg(long, value_delimiter = ',', default_value = "40,40,40")]
    pub sizes: Vec<usize>,
    /// Single beta value.
    #[arg(long, conflicts_with = "beta_grid")]
    pub beta: Option<f64>,
    /// Comma-separated beta values; defaults to 0,0.2,...,1.
    #[arg(long = "beta-grid", value_delimiter = ',')]
    pub beta_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Comma-separated methods.
    #[arg(long = "method", alias = "methods", value_delimiter = ',', default_value = "gini-normal")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    pub permutations: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the rows as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Fill the elapsed_ms column (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct NormalityArgs {
    #[arg(long, default_value_t = 1)]
    pub example: u8,
    #[arg(long)]
    pub p: usize,
    #[arg(long, value_delimiter = ',', default_value = "30,40,50,60,70")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

/// Failure of a subcommand, carrying its exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Data(_) => EXIT_DATA,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn data(e: Error) -> Failure {
    match e {
        Error::InvalidConfig(_) | Error::InvalidB | Error::Domain(_) => Failure::Usage(e.to_string()),
        other => Failure::Data(other.to_string()),
    }
}

/// Class label to count, serialized as an object in class order.
struct ClassCounts<'a>(&'a [String], &'a [usize]);

impl Serialize for ClassCounts<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (label, count) in self.0.iter().zip(self.1) {
            map.serialize_entry(label, count)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct TestOutput<'a> {
    method: Method,
    statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
    p_value: f64,
    alpha: f64,
    reject: bool,
    n: usize,
    p: usize,
    #[serde(rename = "K")]
    k: usize,
    class_counts: ClassCounts<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    permutations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    degenerate: bool,
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn cmd_test(args: &TestArgs, stdout: &mut (dyn Write + Send)) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    if args.method.is_permutation() && args.permutations < 1 {
        return Err(usage("--permutations must be at least 1"));
    }
    let label: LabelColumn = args.label_col.parse().expect("infallible");
    let ds = load_csv(&args.input, &label, !args.no_header).map_err(data)?;
    let gi = group_index(&ds);
    validate_for_testing(&gi).map_err(data)?;
    let dm = pairwise_distances(&ds);
    let res = run_method(args.method, &dm, &gi, args.alpha, args.permutations, args.seed).map_err(data)?;
    let out = TestOutput {
        method: res.method,
        statistic: res.statistic,
        z: res.z,
        p_value: res.p_value,
        alpha: res.alpha,
        reject: res.reject,
        n: ds.n(),
        p: ds.p(),
        k: gi.k(),
        class_counts: ClassCounts(gi.classes(), gi.counts()),
        permutations: res.permutations,
        seed: res.seed,
        degenerate: res.degenerate,
    };
    let line = serde_json::to_string(&out).map_err(|e| Failure::Data(e.to_string()))?;
    writeln!(stdout, "{line}").map_err(|e| Failure::Data(e.to_string()))?;
    Ok(())
}

fn open_output<'a>(path: Option<&Path>, stdout: &'a mut (dyn Write + Send)) -> Result<Box<dyn Write + Send + 'a>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(stdout)),
    }
}

#[derive(Serialize)]
struct SimulateProvenance<'a> {
    command: &'static str,
    scenario: &'a ScenarioSpec,
    beta_grid: &'a [f64],
    replicates: usize,
    methods: &'a [Method],
    alpha: f64,
    permutations: usize,
    seed: u64,
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), Failure> {
    let example = Example::try_from(args.example).map_err(usage)?;
    if example == Example::One {
        return Err(usage("simulate supports --example 2 or 3; use `normality` for example 1"));
    }
    check_alpha(args.alpha)?;
    let beta_grid: Vec<f64> = match (&args.beta, &args.beta_grid) {
        (Some(b), _) => vec![*b],
        (None, Some(grid)) => grid.clone(),
        (None, None) => TABLE_BETA_GRID.to_vec(),
    };
    if beta_grid.is_empty() {
        return Err(usage("--beta-grid is empty"));
    }
    if args.reps < 1 {
        return Err(usage("--reps must be at least 1"));
    }
    for &b in &beta_grid {
        if !(0.0..=1.0).contains(&b) {
            return Err(usage(format!("beta must lie in [0, 1], got {b}")));
        }
    }
    let scenario = ScenarioSpec::new(example, args.p, args.sizes.clone(), beta_grid[0], args.seed)
        .and_then(|s| s.with_rho(args.rho))
        .map_err(usage)?;
    let cfg = StudyConfig::new(scenario, args.reps, args.methods.clone())
        .and_then(|c| c.with_alpha(args.alpha))
        .and_then(|c| c.with_permutations(args.permutations))
        .map_err(usage)?;

    let provenance = SimulateProvenance {
        command: "simulate",
        scenario: &cfg.scenario,
        beta_grid: &beta_grid,
        replicates: cfg.replicates,
        methods: &cfg.methods,
        alpha: cfg.alpha,
        permutations: cfg.permutations,
        seed: cfg.seed(),
    };
    let _ = writeln!(stderr, "{}", serde_json::to_string(&provenance).unwrap_or_default());

    let rows = size_power_study(&cfg, &beta_grid).map_err(data)?;
    let mut out = open_output(args.out.as_deref(), stdout)?;
    write_power_csv(&rows, &mut out, args.timing).map_err(data)?;
    out.flush().map_err(|e| Failure::Data(e.to_string()))?;
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&power_rows_json(&rows, args.timing))
            .map_err(|e| Failure::Data(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct NormalityProvenance<'a> {
    command: &'static str,
    scenario: &'a ScenarioSpec,
    replicates: usize,
    seed: u64,
}

fn cmd_normality(args: &NormalityArgs, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> Result<(), Failure> {
    if args.example != 1 {
        return Err(usage("normality supports --example 1 only"));
    }
    if args.reps < 2 {
        return Err(usage("--reps must be at least 2"));
    }
    let sizes = if args.sizes.is_empty() { EXAMPLE1_SIZES.to_vec() } else { args.sizes.clone() };
    let scenario = ScenarioSpec::new(Example::One, args.p, sizes, 0.0, args.seed)
        .and_then(|s| s.with_rho(args.rho))
        .map_err(usage)?;
    if scenario.sizes.len() < 2 {
        return Err(usage("at least two classes are required"));
    }
    let cfg = StudyConfig::new(scenario, args.reps, Vec::new()).map_err(usage)?;
    let provenance = NormalityProvenance {
        command: "normality",
        scenario: &cfg.scenario,
        replicates: cfg.replicates,
        seed: cfg.seed(),
    };
    let _ = writeln!(stderr, "{}", serde_json::to_string(&provenance).unwrap_or_default());

    let row = normality_study(&cfg).map_err(data)?;
    let mut out = open_output(args.out.as_deref(), stdout)?;
    write_normality_csv(&row, &mut out, args.timing).map_err(data)?;
    Ok(())
}

/// Parses `args` (program name first) and runs the selected subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let is_info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let target: &mut (dyn Write + Send) = if is_info { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return if is_info { EXIT_OK } else { EXIT_USAGE };
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };

    let outcome = pool.install(|| match &cli.command {
        Command::Test(a) => cmd_test(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout, stderr),
        Command::Normality(a) => cmd_normality(a, stdout, stderr),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}
