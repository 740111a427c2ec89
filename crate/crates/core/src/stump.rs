//! Weighted decision stumps and candidate-pool generation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Errors closer than this are treated as ties during split search.
const TIE_EPS: f64 = 1e-12;

/// Single-feature threshold classifier: predicts `polarity` when the feature
/// exceeds `threshold` and `-polarity` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionStump {
    pub feature_index: usize,
    pub feature_name: String,
    pub threshold: f64,
    pub polarity: Label,
}

impl DecisionStump {
    pub fn new(feature_index: usize, feature_name: impl Into<String>, threshold: f64, polarity: Label) -> Self {
        Self {
            feature_index,
            feature_name: feature_name.into(),
            threshold,
            polarity: if polarity >= 0 { 1 } else { -1 },
        }
    }

    #[inline]
    pub fn predict_value(&self, x: f64) -> Label {
        if x > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<Label> {
        row.get(self.feature_index)
            .map(|&x| self.predict_value(x))
            .ok_or_else(|| self.schema_error(row.len()))
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<Label>> {
        if self.feature_index >= ds.n_features() {
            return Err(self.schema_error(ds.n_features()));
        }
        Ok(ds.column(self.feature_index).iter().map(|&x| self.predict_value(x)).collect())
    }

    /// Same feature, threshold and polarity.
    pub fn same_split(&self, other: &DecisionStump) -> bool {
        self.feature_index == other.feature_index
            && self.threshold == other.threshold
            && self.polarity == other.polarity
    }

    fn schema_error(&self, n_features: usize) -> Error {
        Error::Schema(format!(
            "stump uses feature {} but rows have {n_features} features",
            self.feature_index
        ))
    }
}

/// Per-sample boosting weights, a probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleWeights(Vec<f64>);

impl SampleWeights {
    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Argument("sample weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!("sample weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Normalizes non-negative weights; `None` when they sum to zero.
    pub fn normalized(mut weights: Vec<f64>) -> Option<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return None;
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Some(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// A stump with its weighted 0-1 error on the data it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredStump {
    pub stump: DecisionStump,
    pub weighted_error: f64,
}

pub fn weighted_error(stump: &DecisionStump, ds: &Dataset, d: &SampleWeights) -> Result<f64> {
    let preds = stump.predict(ds)?;
    Ok(preds
        .iter()
        .zip(ds.labels())
        .zip(d.as_slice())
        .filter(|((p, y), _)| p != y)
        .map(|(_, w)| w)
        .sum())
}

/// Finds the stump with the smallest `d`-weighted 0-1 error over every
/// feature in `candidate_features`, every midpoint between consecutive
/// distinct values, and both polarities.
///
/// Ties go to the lowest feature index, then the smallest threshold, then
/// polarity +1.
pub fn train_stump(train: &Dataset, d: &SampleWeights, candidate_features: &[usize]) -> Result<ScoredStump> {
    if d.len() != train.n_samples() {
        return Err(Error::Dimension {
            expected: train.n_samples(),
            got: d.len(),
        });
    }
    if candidate_features.is_empty() {
        return Err(Error::Argument("no candidate features".into()));
    }
    if train.n_samples() < 2 {
        return Err(Error::DegenerateFeature);
    }
    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();
    if let Some(&f) = features.iter().find(|&&f| f >= train.n_features()) {
        return Err(Error::Schema(format!("candidate feature {f} out of range")));
    }

    let w = d.as_slice();
    let y = train.labels();
    let total: f64 = w.iter().sum();
    let neg_weight: f64 = w.iter().zip(y).filter(|(_, &l)| l < 0).map(|(w, _)| w).sum();

    // (error, feature, threshold, polarity)
    let mut best: Option<(f64, usize, f64, Label)> = None;
    let mut order: Vec<usize> = (0..train.n_samples()).collect();
    for &f in &features {
        let col = train.column(f);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        // error of polarity +1 with every row on the "<= threshold" side
        // removed so far; starts with all rows above the threshold.
        let mut err_pos = neg_weight;
        for k in 0..order.len() - 1 {
            let s = order[k];
            if y[s] > 0 {
                err_pos += w[s];
            } else {
                err_pos -= w[s];
            }
            let (lo, hi) = (col[s], col[order[k + 1]]);
            if lo == hi {
                continue;
            }
            let threshold = lo + (hi - lo) / 2.0;
            for (err, pol) in [(err_pos, 1), (total - err_pos, -1)] {
                let better = match best {
                    None => true,
                    Some((e, ..)) => err < e - TIE_EPS,
                };
                if better {
                    best = Some((err, f, threshold, pol));
                }
            }
        }
    }

    let (_, f, threshold, polarity) = best.ok_or(Error::DegenerateFeature)?;
    let stump = DecisionStump::new(f, train.feature_names()[f].clone(), threshold, polarity);
    let weighted_error = weighted_error(&stump, train, d)?;
    Ok(ScoredStump { stump, weighted_error })
}

/// Candidate pool sizing and feature subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoolConfig {
    /// Desired ensemble size the pool is sized against.
    pub target_size: usize,
    /// Pool size as a multiple of `target_size`, in [1.5, 3.0].
    pub pool_multiplier: f64,
    /// Explicit pool size; overrides the multiplier.
    pub pool_size: Option<usize>,
    /// Features considered per stump; defaults to floor(sqrt(F)) - 1, at least 1.
    pub max_features: Option<usize>,
}

impl Default for PoolConfig {
    fn default() -> Self {
        Self {
            target_size: 15,
            pool_multiplier: 2.0,
            pool_size: None,
            max_features: None,
        }
    }
}

impl PoolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_size == 0 {
            return Err(Error::Config("pool.target_size must be >= 1".into()));
        }
        if !(1.5..=3.0).contains(&self.pool_multiplier) {
            return Err(Error::Config(format!(
                "pool.pool_multiplier must lie in [1.5, 3.0], got {}",
                self.pool_multiplier
            )));
        }
        if self.pool_size() < self.target_size {
            return Err(Error::Config("pool.pool_size must be >= pool.target_size".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::Config("pool.max_features must be >= 1".into()));
        }
        Ok(())
    }

    pub fn pool_size(&self) -> usize {
        self.pool_size
            .unwrap_or_else(|| (self.pool_multiplier * self.target_size as f64).ceil() as usize)
    }

    pub fn max_features_for(&self, n_features: usize) -> usize {
        let m = self
            .max_features
            .unwrap_or_else(|| ((n_features as f64).sqrt().floor() as usize).saturating_sub(1));
        m.clamp(1, n_features.max(1))
    }
}

/// Trains `how_many` stumps, each on an independently drawn subset of
/// features, sorted ascending by weighted error (stable). Identical splits
/// may appear more than once.
pub fn propose_candidates(
    train: &Dataset,
    d: &SampleWeights,
    how_many: usize,
    cfg: &PoolConfig,
    rng: &mut Rng,
) -> Result<Vec<ScoredStump>> {
    if how_many == 0 {
        return Err(Error::Argument("how_many must be >= 1".into()));
    }
    let n_features = train.n_features();
    if n_features == 0 {
        return Err(Error::DegenerateFeature);
    }
    let m = cfg.max_features_for(n_features);
    let max_attempts = 4 * how_many;
    let mut out = Vec::with_capacity(how_many);
    let mut attempts = 0;
    while out.len() < how_many && attempts < max_attempts {
        attempts += 1;
        let subset = rand::seq::index::sample(rng, n_features, m).into_vec();
        match train_stump(train, d, &subset) {
            Ok(s) => out.push(s),
            Err(Error::DegenerateFeature) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::DegenerateFeature);
    }
    out.sort_by(|a, b| a.weighted_error.partial_cmp(&b.weighted_error).unwrap_or(Ordering::Equal));
    Ok(out)
}
