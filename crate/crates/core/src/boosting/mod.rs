//! Outer boosting loops and the strong classifier they produce.

mod adaboost;
mod qboost;

pub use adaboost::{adaboost_vote_weight, train_adaboost, AdaBoostConfig};
pub use qboost::{train_alpha_qboost, train_qboost_lambda, train_qboost_select};

use serde::{Deserialize, Serialize};

use crate::alpha::OptConfig;
use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::qubo::EncodingSpec;
use crate::solve::SolverConfig;
use crate::stump::{DecisionStump, PoolConfig, SampleWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    QboostLambda,
    QboostSelect,
    AlphaQboost,
    Adaboost,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::QboostLambda => "qboost_lambda",
            Mode::QboostSelect => "qboost_select",
            Mode::AlphaQboost => "alpha_qboost",
            Mode::Adaboost => "adaboost",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub stump: DecisionStump,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub seed: u64,
    pub alpha_or_lambda: Option<f64>,
    pub val_error: Option<f64>,
    pub n_features: usize,
}

/// Weighted vote `sign(sum_i weight_i h_i(x))` with `sign(0) = +1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongClassifier {
    pub mode: Mode,
    pub members: Vec<Member>,
    pub metadata: ModelMetadata,
}

impl StrongClassifier {
    /// Keeps the members with positive weight.
    pub fn new(mode: Mode, members: impl IntoIterator<Item = Member>, n_features: usize) -> Self {
        Self {
            mode,
            members: members.into_iter().filter(|m| m.weight > 0.0).collect(),
            metadata: ModelMetadata {
                n_features,
                ..ModelMetadata::default()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn stumps(&self) -> impl Iterator<Item = &DecisionStump> {
        self.members.iter().map(|m| &m.stump)
    }

    pub fn decision_values(&self, ds: &Dataset) -> Result<Vec<f64>> {
        self.check_features(ds.n_features())?;
        let mut f = vec![0.0; ds.n_samples()];
        for m in &self.members {
            for (acc, h) in f.iter_mut().zip(m.stump.predict(ds)?) {
                *acc += m.weight * f64::from(h);
            }
        }
        Ok(f)
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<Label>> {
        Ok(self.decision_values(ds)?.into_iter().map(sign).collect())
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<Label> {
        self.check_features(row.len())?;
        let mut f = 0.0;
        for m in &self.members {
            f += m.weight * f64::from(m.stump.predict_row(row)?);
        }
        Ok(sign(f))
    }

    fn check_features(&self, n: usize) -> Result<()> {
        if self.metadata.n_features != n {
            return Err(Error::Schema(format!(
                "classifier expects {} features, got {n}",
                self.metadata.n_features
            )));
        }
        Ok(())
    }
}

fn sign(v: f64) -> Label {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// Result of the multiplicative sample-weight update.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightUpdate {
    Updated(SampleWeights),
    /// Every sample was classified correctly, so every weight became zero.
    Converged,
}

/// `d_s <- d_s (y_s H(x_s) - 1)^2`, then renormalized. Correct samples get
/// factor 0, misclassified ones factor 4.
pub fn update_weights_d(d: &SampleWeights, y: &[Label], predictions: &[Label]) -> Result<WeightUpdate> {
    if y.len() != d.len() || predictions.len() != d.len() {
        return Err(Error::Dimension {
            expected: d.len(),
            got: if y.len() != d.len() { y.len() } else { predictions.len() },
        });
    }
    let raw: Vec<f64> = d
        .as_slice()
        .iter()
        .zip(y.iter().zip(predictions))
        .map(|(&w, (&y, &h))| {
            let m = f64::from(y * h) - 1.0;
            w * m * m
        })
        .collect();
    Ok(match SampleWeights::normalized(raw) {
        Some(d) => WeightUpdate::Updated(d),
        None => WeightUpdate::Converged,
    })
}

/// `lambda_min : lambda_step : lambda_max`, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 0.05,
            step: 0.005,
        }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + self.step * k as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min >= 0.0 && self.min <= self.max && self.step > 0.0) {
            return Err(Error::Config(format!(
                "lambda grid needs 0 <= min <= max and step > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Resample the (train, validation) rows each outer iteration from `k`
/// pre-drawn pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSpec {
    pub k: usize,
    pub train_size: usize,
    pub val_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostConfig {
    pub mode: Mode,
    pub pool: PoolConfig,
    pub solver: SolverConfig,
    pub max_outer_iters: usize,
    /// Consecutive non-improving outer iterations tolerated before stopping.
    pub patience: usize,
    pub metric: Metric,
    pub lambda_grid: LambdaGrid,
    /// Weight encoding for `qboost_lambda`; its `lambda` is swept by the grid.
    pub encoding: EncodingSpec,
    pub desired_count: Option<usize>,
    pub bisect_max_iters: usize,
    pub opt: OptConfig,
    pub bootstrap: Option<BootstrapSpec>,
    pub adaboost: AdaBoostConfig,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            mode: Mode::AlphaQboost,
            pool: PoolConfig::default(),
            solver: SolverConfig::default(),
            max_outer_iters: 20,
            patience: 1,
            metric: Metric::ErrorRate,
            lambda_grid: LambdaGrid::default(),
            encoding: EncodingSpec::default(),
            desired_count: None,
            bisect_max_iters: 30,
            opt: OptConfig::default(),
            bootstrap: None,
            adaboost: AdaBoostConfig::default(),
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        self.pool.validate()?;
        self.solver.validate()?;
        if self.patience == 0 {
            return Err(Error::Config("patience must be >= 1".into()));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::Config("max_outer_iters must be >= 1".into()));
        }
        match self.mode {
            Mode::QboostLambda => {
                self.lambda_grid.validate()?;
                EncodingSpec {
                    lambda: self.lambda_grid.max,
                    ..self.encoding
                }
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            }
            Mode::QboostSelect => match self.desired_count {
                Some(0) | None => {
                    return Err(Error::Argument("qboost_select needs desired_count >= 1".into()))
                }
                Some(c) if c > self.pool.pool_size() => {
                    return Err(Error::Argument(format!(
                        "desired_count {c} exceeds pool size {}",
                        self.pool.pool_size()
                    )))
                }
                _ => {}
            },
            Mode::AlphaQboost => self.opt.validate()?,
            Mode::Adaboost => self.adaboost.validate()?,
        }
        Ok(())
    }
}

/// Inner-step candidate scored on the validation rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEvaluation {
    pub param: f64,
    /// `None` for an empty selection, which is never accepted.
    pub val_error: Option<f64>,
    pub count: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Best validation error so far.
    pub val_error: f64,
    /// Training error of the best classifier so far on this iteration's rows.
    pub train_error: f64,
    pub ensemble_size: usize,
    /// The accepted alpha or lambda, if any candidate was accepted.
    pub param: Option<f64>,
    pub accepted: bool,
    pub evaluations: Vec<ParamEvaluation>,
    /// AdaBoost rounds only.
    pub weighted_error: Option<f64>,
    pub vote_weight: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub entries: Vec<TraceEntry>,
    /// The loop ended because the sample weights collapsed to zero.
    pub converged: bool,
}

impl TrainTrace {
    /// Copy with wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> TrainTrace {
        let mut t = self.clone();
        t.entries.iter_mut().for_each(|e| e.wall_seconds = 0.0);
        t
    }
}

/// Trains with the configured mode.
pub fn train(cfg: &BoostConfig, train: &Dataset, val: &Dataset) -> Result<(StrongClassifier, TrainTrace)> {
    match cfg.mode {
        Mode::QboostLambda => train_qboost_lambda(cfg, train, val),
        Mode::QboostSelect => train_qboost_select(cfg, train, val),
        Mode::AlphaQboost => train_alpha_qboost(cfg, train, val),
        Mode::Adaboost => {
            let (mut model, trace) = train_adaboost(train, &cfg.adaboost, cfg.seed)?;
            model.metadata.val_error = Some(cfg.metric.error(val.labels(), &model.predict(val)?)?);
            Ok((model, trace))
        }
    }
}

pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    pub(crate) fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}
