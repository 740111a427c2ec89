//! Repeated train/test evaluation of several trainers on identical splits.

use serde::{Deserialize, Serialize};

use crate::boosting::{train, Mode, Stopwatch};
use crate::config::RunConfig;
use crate::data::{split, Dataset};
use crate::error::Result;
use crate::metrics::{accuracy, f1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub mode: Mode,
    pub repeat: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub f1: f64,
    pub ensemble_size: usize,
    pub train_accuracy: f64,
    pub val_error: Option<f64>,
    pub train_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single repeat.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Stat { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mode: Mode,
    pub repeats: usize,
    pub accuracy: Stat,
    pub f1: Stat,
    pub ensemble_size: Stat,
    pub train_accuracy: Stat,
    pub train_seconds: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub version: String,
    pub config: RunConfig,
    pub rows: Vec<BenchmarkRow>,
    pub aggregates: Vec<Aggregate>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> BenchmarkReport {
        let mut r = self.clone();
        r.rows.iter_mut().for_each(|row| row.train_seconds = 0.0);
        r.aggregates.iter_mut().for_each(|a| a.train_seconds = Stat { mean: 0.0, std: 0.0 });
        r
    }

    pub fn aggregate(&self, mode: Mode) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.mode == mode)
    }

    pub fn rows_for(&self, mode: Mode) -> impl Iterator<Item = &BenchmarkRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    /// Summary with one row per (metric, model), as percentages except the
    /// member count: `metric,model,mean,std`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,model,mean,std\n");
        let metrics: [(&str, fn(&Aggregate) -> Stat, f64); 3] = [
            ("Accuracy", |a| a.accuracy, 100.0),
            ("f1 Score", |a| a.f1, 100.0),
            ("Number of Classifiers", |a| a.ensemble_size, 1.0),
        ];
        for (name, get, scale) in metrics {
            for a in &self.aggregates {
                let s = get(a);
                out.push_str(&format!("{name},{},{:.2},{:.2}\n", a.mode, s.mean * scale, s.std * scale));
            }
        }
        out
    }
}

pub fn aggregate(mode: Mode, rows: &[BenchmarkRow]) -> Aggregate {
    let rows: Vec<&BenchmarkRow> = rows.iter().filter(|r| r.mode == mode).collect();
    let col = |f: fn(&BenchmarkRow) -> f64| Stat::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
    Aggregate {
        mode,
        repeats: rows.len(),
        accuracy: col(|r| r.accuracy),
        f1: col(|r| r.f1),
        ensemble_size: col(|r| r.ensemble_size as f64),
        train_accuracy: col(|r| r.train_accuracy),
        train_seconds: col(|r| r.train_seconds),
    }
}

/// Trains every configured mode on the split for each repeat (seed
/// `base_seed + r`) and scores it on the held-out test rows.
pub fn run_benchmark(cfg: &RunConfig, data: &Dataset) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let mut rows = Vec::with_capacity(cfg.repeats * cfg.modes.len());
    for repeat in 0..cfg.repeats {
        let seed = cfg.base_seed + repeat as u64;
        let (tr, val, test) = split(data, &cfg.split_for(seed))?;
        for &mode in &cfg.modes {
            let clock = Stopwatch::start();
            let (model, _) = train(&cfg.boost_for(mode, seed), &tr, &val)?;
            let train_seconds = clock.seconds();
            let pred = model.predict(&test)?;
            rows.push(BenchmarkRow {
                mode,
                repeat,
                seed,
                accuracy: accuracy(test.labels(), &pred)?,
                f1: f1(test.labels(), &pred)?,
                ensemble_size: model.len(),
                train_accuracy: accuracy(tr.labels(), &model.predict(&tr)?)?,
                val_error: model.metadata.val_error,
                train_seconds,
            });
        }
    }
    let aggregates = cfg.modes.iter().map(|&m| aggregate(m, &rows)).collect();
    Ok(BenchmarkReport {
        version: crate::VERSION.to_string(),
        config: cfg.resolved(),
        rows,
        aggregates,
    })
}
