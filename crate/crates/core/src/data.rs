//! Labelled datasets, CSV ingestion, train/validation/test splits and
//! pre-drawn bootstrap pools.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Binary label, always `-1` or `+1`.
pub type Label = i8;

/// Feature matrix (rows are samples) with labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<Label>,
    feature_names: Vec<String>,
    positive_label: String,
    negative_label: String,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<Label>, feature_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Dimension {
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::Dimension {
                expected: features.ncols(),
                got: feature_names.len(),
            });
        }
        if let Some(pos) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::Label(format!(
                "label {} at row {} is not -1 or +1",
                labels[pos], pos
            )));
        }
        if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Parse {
                row,
                column: feature_names[col].clone(),
                message: "non-finite value".into(),
            });
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            positive_label: "+1".into(),
            negative_label: "-1".into(),
        })
    }

    /// Builds a dataset from row vectors, naming features `x0, x1, ...`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let n_features = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::Dimension {
                expected: n_features,
                got: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let features = Array2::from_shape_vec((rows.len(), n_features), flat)
            .map_err(|e| Error::Schema(e.to_string()))?;
        let names = (0..n_features).map(|j| format!("x{j}")).collect();
        Self::new(features, labels, names)
    }

    pub fn with_label_names(mut self, positive: impl Into<String>, negative: impl Into<String>) -> Self {
        self.positive_label = positive.into();
        self.negative_label = negative.into();
        self
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn column(&self, feature: usize) -> ArrayView1<'_, f64> {
        self.features.column(feature)
    }

    pub fn row(&self, sample: usize) -> ArrayView1<'_, f64> {
        self.features.row(sample)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Original label value that was mapped to +1.
    pub fn positive_label(&self) -> &str {
        &self.positive_label
    }

    pub fn negative_label(&self) -> &str {
        &self.negative_label
    }

    pub fn label_name(&self, y: Label) -> &str {
        if y > 0 {
            &self.positive_label
        } else {
            &self.negative_label
        }
    }

    /// (positives, negatives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0).count();
        (pos, self.labels.len() - pos)
    }

    /// Checks the requirements for a set used in training: at least two rows
    /// and both classes present.
    pub fn check_trainable(&self) -> Result<()> {
        let (pos, neg) = self.class_counts();
        if self.n_samples() < 2 || pos == 0 || neg == 0 {
            return Err(Error::Schema(format!(
                "training set needs >= 2 rows with both classes, got {pos} positive / {neg} negative"
            )));
        }
        Ok(())
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            positive_label: self.positive_label.clone(),
            negative_label: self.negative_label.clone(),
        }
    }

    /// Stacks the rows of `other` under `self`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.n_features() != other.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: other.n_features(),
            });
        }
        let features = ndarray::concatenate(Axis(0), &[self.features.view(), other.features.view()])
            .map_err(|e| Error::Schema(e.to_string()))?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Ok(Dataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
            positive_label: self.positive_label.clone(),
            negative_label: self.negative_label.clone(),
        })
    }

    /// Writes the dataset as CSV with the label column first, using the
    /// original label names.
    pub fn write_csv<W: std::io::Write>(&self, writer: W, label_column: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![label_column.to_string()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (s, &y) in self.labels.iter().enumerate() {
            let mut rec = vec![self.label_name(y).to_string()];
            rec.extend(self.features.row(s).iter().map(|v| format!("{v:?}")));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(format!("{other:?}")),
    }
}

/// Maps the two original label values onto {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelMap {
    positive: String,
    negative: String,
}

impl LabelMap {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Result<Self> {
        let (positive, negative) = (positive.into(), negative.into());
        if positive == negative {
            return Err(Error::Label(format!("`{positive}` mapped to both classes")));
        }
        Ok(Self { positive, negative })
    }

    /// Parses `original=+1` pairs, e.g. `["M=+1", "B=-1"]`.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self> {
        let mut positive = None;
        let mut negative = None;
        for pair in pairs {
            let pair = pair.as_ref();
            let (name, value) = pair
                .rsplit_once('=')
                .ok_or_else(|| Error::Label(format!("expected `original=+1` or `original=-1`, got `{pair}`")))?;
            let slot = match value.trim() {
                "+1" | "1" => &mut positive,
                "-1" => &mut negative,
                v => return Err(Error::Label(format!("label target `{v}` is not +1 or -1"))),
            };
            if slot.replace(name.trim().to_string()).is_some() {
                return Err(Error::Label(format!("more than one label mapped to {value}")));
            }
        }
        match (positive, negative) {
            (Some(p), Some(n)) => Self::new(p, n),
            _ => Err(Error::Label("label map must name one +1 and one -1 value".into())),
        }
    }

    pub fn positive(&self) -> &str {
        &self.positive
    }

    pub fn negative(&self) -> &str {
        &self.negative
    }

    pub fn map(&self, raw: &str) -> Option<Label> {
        if raw == self.positive {
            Some(1)
        } else if raw == self.negative {
            Some(-1)
        } else {
            None
        }
    }
}

impl TryFrom<Vec<String>> for LabelMap {
    type Error = Error;

    fn try_from(pairs: Vec<String>) -> Result<Self> {
        Self::from_pairs(&pairs)
    }
}

impl From<LabelMap> for Vec<String> {
    fn from(m: LabelMap) -> Self {
        vec![format!("{}=+1", m.positive), format!("{}=-1", m.negative)]
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str, label_map: &LabelMap) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, label_column, label_map)
}

/// Reads a headed, comma-separated table. Every column other than
/// `label_column` must parse as a finite real.
pub fn read_csv<R: Read>(reader: R, label_column: &str, label_map: &LabelMap) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Schema(format!("label column `{label_column}` not in header")))?;
    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_idx).collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&c| header[c].to_string()).collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // header is line 1
        let row = i + 2;
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: "*".into(),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let raw = record[label_idx].trim();
        let y = label_map
            .map(raw)
            .ok_or_else(|| Error::Label(format!("row {row}: label `{raw}` not in label map")))?;
        labels.push(y);
        for &c in &feature_cols {
            let cell = record[c].trim();
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: header[c].to_string(),
                message: format!("`{cell}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: header[c].to_string(),
                    message: format!("`{cell}` is not finite"),
                });
            }
            values.push(v);
        }
    }
    let features = Array2::from_shape_vec((labels.len(), feature_cols.len()), values)
        .map_err(|e| Error::Schema(e.to_string()))?;
    Ok(Dataset::new(features, labels, feature_names)?
        .with_label_names(label_map.positive(), label_map.negative()))
}

/// Fractions for a three-way split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub val_fraction: f64,
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.6,
            val_fraction: 0.2,
            test_fraction: 0.2,
            stratified: true,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_fraction, self.val_fraction, self.test_fraction];
        if fracs.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
            return Err(Error::Split(format!("fractions must lie in (0, 1), got {fracs:?}")));
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("fractions sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Row indices of the three parts, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

pub fn split_indices(ds: &Dataset, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let (pos, neg): (Vec<usize>, Vec<usize>) = (0..ds.n_samples()).partition(|&i| ds.labels[i] > 0);
        vec![pos, neg]
    } else {
        vec![(0..ds.n_samples()).collect()]
    };

    let mut out = SplitIndices {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for mut group in groups {
        group.shuffle(&mut rng);
        let n = group.len();
        let n_train = ((n as f64) * spec.train_fraction).round() as usize;
        let n_train = n_train.min(n);
        let n_val = (((n as f64) * spec.val_fraction).round() as usize).min(n - n_train);
        out.train.extend_from_slice(&group[..n_train]);
        out.val.extend_from_slice(&group[n_train..n_train + n_val]);
        out.test.extend_from_slice(&group[n_train + n_val..]);
    }
    for (name, part) in [("train", &mut out.train), ("validation", &mut out.val), ("test", &mut out.test)] {
        if part.is_empty() {
            return Err(Error::Split(format!("{name} part is empty")));
        }
        part.sort_unstable();
    }
    Ok(out)
}

/// Splits into (train, validation, test).
pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let idx = split_indices(ds, spec)?;
    Ok((ds.select(&idx.train), ds.select(&idx.val), ds.select(&idx.test)))
}

/// One pre-drawn (train, validation) pair of disjoint row sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapDraw {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapPool {
    pub seed: u64,
    pub draws: Vec<BootstrapDraw>,
}

impl BootstrapPool {
    pub fn k(&self) -> usize {
        self.draws.len()
    }
}

/// Draws `k` (train, validation) pairs; rows are sampled without replacement
/// within each pair.
pub fn draw_bootstrap_pool(
    ds: &Dataset,
    k: usize,
    train_size: usize,
    val_size: usize,
    seed: u64,
) -> Result<BootstrapPool> {
    let n = ds.n_samples();
    if train_size + val_size > n {
        return Err(Error::Size(format!(
            "train_size + val_size = {} exceeds {n} rows",
            train_size + val_size
        )));
    }
    if k == 0 || train_size == 0 || val_size == 0 {
        return Err(Error::Argument("bootstrap needs k, train_size and val_size >= 1".into()));
    }
    let mut rng = rng::seeded(seed);
    let draws = (0..k)
        .map(|_| {
            let picked = rand::seq::index::sample(&mut rng, n, train_size + val_size).into_vec();
            let mut train = picked[..train_size].to_vec();
            let mut val = picked[train_size..].to_vec();
            train.sort_unstable();
            val.sort_unstable();
            BootstrapDraw { train, val }
        })
        .collect();
    Ok(BootstrapPool { seed, draws })
}

/// Class counts keyed by label, for diagnostics.
pub fn label_histogram(labels: &[Label]) -> BTreeMap<Label, usize> {
    let mut h = BTreeMap::new();
    for &y in labels {
        *h.entry(y).or_insert(0) += 1;
    }
    h
}
