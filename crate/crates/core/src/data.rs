//! Labeled multivariate samples: the data model, class partitioning, and CSV I/O.
//!
//! A [`LabeledDataset`] pairs an `n x p` feature matrix with one opaque class
//! label per row. [`GroupIndex`] is the partition of the rows induced by the
//! labels, with classes ordered by first appearance.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// An `n x p` matrix of finite reals with one class label per row.
///
/// Immutable after construction. Rows are stored contiguously so that distance
/// kernels can work on plain slices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    data: Array2<f64>,
    labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(data: Array2<f64>, labels: Vec<String>) -> Result<Self> {
        let (n, p) = data.dim();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if n < 2 {
            return Err(Error::TooSmall { n, min: 2 });
        }
        if p == 0 {
            return Err(Error::InvalidShape("at least one feature column is required".into()));
        }
        if labels.len() != n {
            return Err(Error::InvalidShape(format!(
                "{} labels for {} rows",
                labels.len(),
                n
            )));
        }
        if let Some(((row, column), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, column });
        }
        // Re-layout if the caller handed us a transposed or strided view.
        let data = if data.is_standard_layout() {
            data
        } else {
            data.as_standard_layout().into_owned()
        };
        Ok(Self { data, labels })
    }

    /// Stacks per-class blocks into one dataset; block `k` gets label `names[k]`.
    pub fn from_blocks<S: AsRef<str>>(blocks: &[Array2<f64>], names: &[S]) -> Result<Self> {
        if blocks.len() != names.len() {
            return Err(Error::InvalidShape("one name per block is required".into()));
        }
        let p = blocks.first().map(|b| b.ncols()).unwrap_or(0);
        if blocks.iter().any(|b| b.ncols() != p) {
            return Err(Error::InvalidShape("blocks differ in column count".into()));
        }
        let n: usize = blocks.iter().map(|b| b.nrows()).sum();
        let mut flat = Vec::with_capacity(n * p);
        let mut labels = Vec::with_capacity(n);
        for (block, name) in blocks.iter().zip(names) {
            flat.extend(block.iter().copied());
            labels.extend(std::iter::repeat_n(name.as_ref().to_string(), block.nrows()));
        }
        let data = Array2::from_shape_vec((n, p), flat)
            .map_err(|e| Error::InvalidShape(e.to_string()))?;
        Self::new(data, labels)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.p();
        // standard layout is enforced in `new`
        &self.data.as_slice().expect("standard layout")[i * p..(i + 1) * p]
    }

    pub fn row_view(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    /// Multiplies every feature by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(&self.data * c, self.labels.clone())
    }
}

/// Partition of the rows of a dataset by class label.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupIndex {
    classes: Vec<String>,
    assignment: Vec<usize>,
    indices: Vec<Vec<usize>>,
    counts: Vec<usize>,
    proportions: Vec<f64>,
}

impl GroupIndex {
    /// Builds the partition from a per-row class id. `assignment[i]` indexes
    /// into `classes`; every class must be non-empty.
    pub fn from_assignment(classes: Vec<String>, assignment: Vec<usize>) -> Result<Self> {
        let k = classes.len();
        let mut indices = vec![Vec::new(); k];
        for (row, &c) in assignment.iter().enumerate() {
            if c >= k {
                return Err(Error::InvalidShape(format!("row {row} has class id {c} >= {k}")));
            }
            indices[c].push(row);
        }
        if let Some(empty) = indices.iter().position(Vec::is_empty) {
            return Err(Error::InvalidShape(format!("class {:?} is empty", classes[empty])));
        }
        let n = assignment.len() as f64;
        let counts: Vec<usize> = indices.iter().map(Vec::len).collect();
        let proportions = counts.iter().map(|&c| c as f64 / n).collect();
        Ok(Self { classes, assignment, indices, counts, proportions })
    }

    /// Same partition structure with a new class id per row. Used by the
    /// permutation engine, where only the assignment changes.
    pub(crate) fn reassigned(&self, assignment: &[usize]) -> Self {
        let mut indices: Vec<Vec<usize>> =
            self.counts.iter().map(|&c| Vec::with_capacity(c)).collect();
        for (row, &c) in assignment.iter().enumerate() {
            indices[c].push(row);
        }
        Self {
            classes: self.classes.clone(),
            assignment: assignment.to_vec(),
            indices,
            counts: self.counts.clone(),
            proportions: self.proportions.clone(),
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Class id of every row.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }
}

/// Partitions the rows of `ds` by label. Classes are ordered by first
/// appearance; `K = 1` is allowed here.
pub fn group_index(ds: &LabeledDataset) -> GroupIndex {
    let mut classes: Vec<String> = Vec::new();
    let mut assignment = Vec::with_capacity(ds.n());
    for label in ds.labels() {
        let id = match classes.iter().position(|c| c == label) {
            Some(id) => id,
            None => {
                classes.push(label.clone());
                classes.len() - 1
            }
        };
        assignment.push(id);
    }
    GroupIndex::from_assignment(classes, assignment).expect("labels induce non-empty classes")
}

/// Checks that the U-statistics are defined: `K >= 2` and every `n_k >= 2`.
pub fn validate_for_testing(gi: &GroupIndex) -> Result<()> {
    if gi.k() < 2 {
        return Err(Error::TooFewClasses(gi.k()));
    }
    for (label, &count) in gi.classes().iter().zip(gi.counts()) {
        if count < 2 {
            return Err(Error::TinyClass { label: label.clone(), count });
        }
    }
    Ok(())
}

/// Which CSV column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// A bare non-negative integer selects by 0-based index; anything else by name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(name) => write!(f, "{name:?}"),
            LabelColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// Reads a comma-separated file. All columns other than the label column must
/// parse as finite reals; they become the features in file order.
pub fn load_csv(path: &Path, label_column: &LabelColumn, has_header: bool) -> Result<LabeledDataset> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let mut records = reader.records();
    let mut line = 0usize;
    let mut width: Option<usize> = None;

    let label_idx = if has_header {
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(Error::EmptyDataset),
        };
        line += 1;
        width = Some(header.len());
        match label_column {
            LabelColumn::Name(name) => header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?,
            LabelColumn::Index(i) if *i < header.len() => *i,
            LabelColumn::Index(_) => return Err(Error::MissingLabelColumn(label_column.to_string())),
        }
    } else {
        match label_column {
            LabelColumn::Index(i) => *i,
            LabelColumn::Name(_) => {
                return Err(Error::MissingLabelColumn(format!(
                    "{label_column} (selecting by name requires a header row)"
                )))
            }
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for rec in records {
        let rec = rec?;
        line += 1;
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(Error::RaggedRows { line, expected, found: rec.len() });
        }
        if label_idx >= rec.len() {
            return Err(Error::MissingLabelColumn(label_column.to_string()));
        }
        for (col, field) in rec.iter().enumerate() {
            if col == label_idx {
                labels.push(field.to_string());
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line, column: col + 1, value: field.to_string() });
            }
            values.push(v);
        }
    }

    let n = labels.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let p = values.len() / n;
    let data =
        Array2::from_shape_vec((n, p), values).map_err(|e| Error::InvalidShape(e.to_string()))?;
    LabeledDataset::new(data, labels)
}

/// Writes `label,x1,..,xp` rows with 17 significant digits, so that
/// [`load_csv`] with label column 0 reads back identical bits.
pub fn write_csv(ds: &LabeledDataset, path: &Path, header: bool) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_csv_to(ds, &mut w, header)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(ds: &LabeledDataset, w: W, header: bool) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    if header {
        let mut names = vec!["label".to_string()];
        names.extend((1..=ds.p()).map(|j| format!("x{j}")));
        writer.write_record(&names)?;
    }
    let mut record = Vec::with_capacity(ds.p() + 1);
    for i in 0..ds.n() {
        record.clear();
        record.push(ds.labels()[i].clone());
        record.extend(ds.row(i).iter().map(|v| format!("{v:.16e}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
