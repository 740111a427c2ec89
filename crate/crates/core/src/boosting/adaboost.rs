//! Discrete AdaBoost over the same stump trainer, used as the baseline.

use serde::{Deserialize, Serialize};

use super::{Member, Mode, Stopwatch, StrongClassifier, TraceEntry, TrainTrace};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::metrics::accuracy;
use crate::rng;
use crate::stump::{train_stump, SampleWeights};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdaBoostConfig {
    pub n_rounds: usize,
    /// Features searched per round; all of them when unset.
    pub max_features: Option<usize>,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        Self {
            n_rounds: 30,
            max_features: None,
        }
    }
}

impl AdaBoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::Config("adaboost.n_rounds must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::Config("adaboost.max_features must be >= 1".into()));
        }
        Ok(())
    }
}

/// `0.5 ln((1 - eps) / eps)`; a perfect stump is scored as if its error
/// were `eps_min`.
pub fn adaboost_vote_weight(eps: f64, eps_min: f64) -> f64 {
    let e = if eps <= 0.0 { eps_min } else { eps };
    0.5 * ((1.0 - e) / e).ln()
}

pub fn train_adaboost(train: &Dataset, cfg: &AdaBoostConfig, seed: u64) -> Result<(StrongClassifier, TrainTrace)> {
    cfg.validate()?;
    train.check_trainable()?;
    let n = train.n_samples();
    let n_features = train.n_features();
    let eps_min = 1.0 / (2.0 * n as f64);
    let all_features: Vec<usize> = (0..n_features).collect();
    let mut subset_rng = rng::seeded(seed);

    let mut d = SampleWeights::uniform(n);
    let mut members = Vec::new();
    let mut scores = vec![0.0; n];
    let mut trace = TrainTrace::default();

    for round in 0..cfg.n_rounds {
        let clock = Stopwatch::start();
        let features = match cfg.max_features {
            Some(m) if m < n_features => rand::seq::index::sample(&mut subset_rng, n_features, m).into_vec(),
            _ => all_features.clone(),
        };
        let scored = train_stump(train, &d, &features).map_err(|e| match e {
            Error::DegenerateFeature => Error::Pool("every feature is constant".into()),
            other => other,
        })?;
        let eps = scored.weighted_error;
        if eps >= 0.5 {
            trace.entries.push(TraceEntry {
                iteration: round,
                train_error: 1.0 - accuracy(train.labels(), &sign_all(&scores))?,
                ensemble_size: members.len(),
                weighted_error: Some(eps),
                vote_weight: Some(0.0),
                wall_seconds: clock.seconds(),
                ..TraceEntry::default()
            });
            break;
        }
        let beta = adaboost_vote_weight(eps, eps_min);
        let h = scored.stump.predict(train)?;
        let reweighted: Vec<f64> = d
            .as_slice()
            .iter()
            .zip(train.labels().iter().zip(&h))
            .map(|(&w, (&y, &p))| w * (-beta * f64::from(y * p)).exp())
            .collect();
        d = SampleWeights::normalized(reweighted).expect("exponential weights stay positive");
        for (acc, &p) in scores.iter_mut().zip(&h) {
            *acc += beta * f64::from(p);
        }
        members.push(Member {
            stump: scored.stump,
            weight: beta,
        });
        trace.entries.push(TraceEntry {
            iteration: round,
            train_error: 1.0 - accuracy(train.labels(), &sign_all(&scores))?,
            ensemble_size: members.len(),
            accepted: true,
            weighted_error: Some(eps),
            vote_weight: Some(beta),
            wall_seconds: clock.seconds(),
            ..TraceEntry::default()
        });
        if eps <= 0.0 {
            trace.converged = true;
            break;
        }
    }

    if members.is_empty() {
        return Err(Error::Pool("no stump did better than chance".into()));
    }
    let mut model = StrongClassifier::new(Mode::Adaboost, members, n_features);
    model.metadata.seed = seed;
    Ok((model, trace))
}

fn sign_all(scores: &[f64]) -> Vec<i8> {
    scores.iter().map(|&v| if v >= 0.0 { 1 } else { -1 }).collect()
}
