//! Regression datasets and the train/test index machinery.
//!
//! A [`Dataset`] is a fixed table of fitness cases loaded from CSV (comma
//! separated, `.` decimal point, one header row, target in the last column).
//! Runs never move the rows themselves; they work with index sets produced by
//! [`outer_split`] (70/30 train/test) and [`inner_split`] (90/10 fit/validation
//! inside the training set, used by the adaptive local-search gate).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::rng::{stream_rng, STREAM_INNER_SPLIT, STREAM_OUTER_SPLIT};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("dataset contains no data rows")]
    EmptyDataset,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset too small to split: {0} case(s)")]
    DatasetTooSmall(usize),
    #[error("train set too small to split: {0} index(es)")]
    SplitTooSmall(usize),
    #[error("inner split of {0} train indices would leave an empty validation set")]
    X2Empty(usize),
    #[error("cannot write {path}: {source}")]
    FileUnwritable {
        path: String,
        source: std::io::Error,
    },
}

/// An immutable table of fitness cases: one input vector and one target per
/// case, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    num_vars: usize,
    inputs: Vec<f64>, // row-major, len = cases * num_vars
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        num_vars: usize,
        inputs: Vec<f64>,
        targets: Vec<f64>,
    ) -> Result<Self, DatasetError> {
        if num_vars == 0 {
            return Err(DatasetError::InvalidDataset(
                "num_vars must be positive".into(),
            ));
        }
        if targets.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        if inputs.len() != targets.len() * num_vars {
            return Err(DatasetError::InvalidDataset(format!(
                "expected {} input values for {} cases of {} variables, got {}",
                targets.len() * num_vars,
                targets.len(),
                num_vars,
                inputs.len()
            )));
        }
        if inputs.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(DatasetError::InvalidDataset(
                "all values must be finite".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            num_vars,
            inputs,
            targets,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Number of cases.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, case: usize) -> &[f64] {
        &self.inputs[case * self.num_vars..(case + 1) * self.num_vars]
    }

    pub fn target(&self, case: usize) -> f64 {
        self.targets[case]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Same inputs, different targets. Used by the leakage tests to corrupt
    /// test-set targets without touching anything else.
    pub fn with_targets(&self, targets: Vec<f64>) -> Result<Self, DatasetError> {
        Self::new(self.name.clone(), self.num_vars, self.inputs.clone(), targets)
    }

    /// Writes the dataset back out in the loader's CSV schema with enough
    /// digits that a reload reproduces every value bit for bit.
    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let mut out = String::new();
        for v in 0..self.num_vars {
            let _ = write!(out, "x{v},");
        }
        out.push_str("y\n");
        for case in 0..self.len() {
            for value in self.input(case) {
                let _ = write!(out, "{},", fmt_f64(*value));
            }
            let _ = writeln!(out, "{}", fmt_f64(self.target(case)));
        }
        fs::write(path, out).map_err(|source| DatasetError::FileUnwritable {
            path: path.display().to_string(),
            source,
        })
    }
}

/// 17 significant digits: enough for an exact `f64` round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Loads a CSV dataset: one header row, every data row `num_vars` numeric
/// fields plus the target in the last field. The dataset name is the file
/// stem. Rows with missing or non-numeric fields are rejected.
pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let file = fs::File::open(path).map_err(|source| DatasetError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let header_len = reader
        .headers()
        .map_err(|e| DatasetError::MalformedRow {
            row: 1,
            reason: e.to_string(),
        })?
        .len();
    if header_len < 2 {
        return Err(DatasetError::InvalidDataset(format!(
            "header has {header_len} field(s); need at least one input and one target"
        )));
    }
    let num_vars = header_len - 1;

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based file line, after the header
        let record = record.map_err(|e| DatasetError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if record.len() != header_len {
            return Err(DatasetError::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", header_len, record.len()),
            });
        }
        let mut values = Vec::with_capacity(header_len);
        for field in record.iter() {
            let trimmed = field.trim();
            if trimmed.is_empty() {
                return Err(DatasetError::MalformedRow {
                    row,
                    reason: "missing value".into(),
                });
            }
            let value: f64 = trimmed.parse().map_err(|_| DatasetError::MalformedRow {
                row,
                reason: format!("cannot parse {trimmed:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(DatasetError::MalformedRow {
                    row,
                    reason: format!("non-finite value {trimmed:?}"),
                });
            }
            values.push(value);
        }
        targets.push(values.pop().expect("header_len >= 2"));
        inputs.extend(values);
    }
    if targets.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    Dataset::new(name, num_vars, inputs, targets)
}

/// The outer train/test partition: disjoint, covering, sorted index sets with
/// `|train| = floor(0.7 n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Uniformly random 70/30 partition of `0..n`, reproducible from `seed`.
pub fn outer_split(n: usize, seed: u64) -> Result<IndexSplit, DatasetError> {
    if n < 2 {
        return Err(DatasetError::DatasetTooSmall(n));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut stream_rng(seed, STREAM_OUTER_SPLIT));
    let train_len = n * 7 / 10;
    let mut train = indices[..train_len].to_vec();
    let mut test = indices[train_len..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(IndexSplit { train, test })
}

/// The inner fit/validation partition of a training index set, with
/// `|x1| = ceil(0.9 |train|)` and `|x2| = floor(0.1 |train|)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerSplit {
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
}

/// Uniformly random 90/10 partition of `train`, reproducible from `seed`.
/// Draws from its own stream so enabling the adaptive gate does not perturb
/// any other randomness derived from the same seed.
pub fn inner_split(train: &[usize], seed: u64) -> Result<InnerSplit, DatasetError> {
    if train.len() < 2 {
        return Err(DatasetError::SplitTooSmall(train.len()));
    }
    let x2_len = train.len() / 10;
    if x2_len == 0 {
        return Err(DatasetError::X2Empty(train.len()));
    }
    let mut indices = train.to_vec();
    indices.shuffle(&mut stream_rng(seed, STREAM_INNER_SPLIT));
    let x1_len = train.len() - x2_len;
    let mut x1 = indices[..x1_len].to_vec();
    let mut x2 = indices[x1_len..].to_vec();
    x1.sort_unstable();
    x2.sort_unstable();
    Ok(InnerSplit { x1, x2 })
}
