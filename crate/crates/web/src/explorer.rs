//! Demo state and operations, independent of the JS bindings.

use aqboost::alpha::vote;
use aqboost::boosting::{train, BoostConfig, Mode};
use aqboost::data::{split, Dataset, Label, SplitSpec};
use aqboost::metrics::accuracy;
use aqboost::qubo::{build_alpha_qubo, predictions, PredictionMatrix, QuboProblem};
use aqboost::rng;
use aqboost::solve::{solve_anneal, solve_exhaustive, AnnealConfig, SolverConfig};
use aqboost::stump::{propose_candidates, DecisionStump, PoolConfig, SampleWeights};
use aqboost::Result;
use rand::Rng;
use serde::Serialize;

/// Side length of the square the points live in, centred on the origin.
pub const EXTENT: f64 = 2.0;

#[derive(Debug, Clone, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub label: Label,
    /// "train", "val" or "test"
    pub part: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub count: usize,
    pub val_error: Option<f64>,
    pub test_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Selection {
    pub alpha: f64,
    pub count: usize,
    pub val_error: Option<f64>,
    pub test_error: Option<f64>,
    pub stumps: Vec<DecisionStump>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainedModel {
    pub mode: Mode,
    pub members: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub iterations: usize,
    /// Row-major predictions over a `resolution`² grid, top row first.
    pub grid: Vec<Label>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverComparison {
    pub n_vars: usize,
    pub exhaustive_energy: f64,
    pub anneal_energy: f64,
    pub exhaustive_assignment: Vec<u8>,
    pub anneal_assignment: Vec<u8>,
    pub matched: bool,
}

pub struct Explorer {
    points: Vec<Point>,
    train: Dataset,
    val: Dataset,
    test: Dataset,
    pool: Vec<DecisionStump>,
    pm_train: PredictionMatrix,
    pm_val: PredictionMatrix,
    pm_test: PredictionMatrix,
    selected: Vec<bool>,
    seed: u64,
}

/// Points in the square labelled by a wavy boundary, with a fraction
/// `noise` of labels flipped.
pub fn wavy_dataset(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    let mut r = rng::seeded(seed);
    let half = EXTENT / 2.0;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = r.gen_range(-half..half);
        let y: f64 = r.gen_range(-half..half);
        let mut label: Label = if y > 0.5 * (2.5 * x).sin() - 0.2 * x { 1 } else { -1 };
        if r.gen_bool(noise.clamp(0.0, 1.0)) {
            label = -label;
        }
        rows.push(vec![x, y]);
        labels.push(label);
    }
    let ds = Dataset::from_rows(&rows, labels)?;
    let names = vec!["x".to_string(), "y".to_string()];
    Dataset::new(ds.features().to_owned(), ds.labels().to_vec(), names)
}

fn error_of(pm: &PredictionMatrix, selected: &[bool]) -> Result<Option<f64>> {
    if !selected.iter().any(|&s| s) {
        return Ok(None);
    }
    Ok(Some(1.0 - accuracy(pm.labels(), &vote(pm, selected))?))
}

impl Explorer {
    /// `pool_size` stumps trained on the training part with uniform weights.
    pub fn new(n: usize, noise: f64, pool_size: usize, seed: u64) -> Result<Self> {
        let ds = wavy_dataset(n, noise, seed)?;
        let spec = SplitSpec { seed, ..SplitSpec::default() };
        let parts = aqboost::data::split_indices(&ds, &spec)?;
        let mut points: Vec<Point> = Vec::with_capacity(n);
        for (part, idx) in [("train", &parts.train), ("val", &parts.val), ("test", &parts.test)] {
            for &i in idx {
                let row = ds.row(i);
                points.push(Point {
                    x: row[0],
                    y: row[1],
                    label: ds.labels()[i],
                    part,
                });
            }
        }
        let (train, val, test) = split(&ds, &spec)?;
        let cfg = PoolConfig {
            max_features: Some(1),
            ..PoolConfig::default()
        };
        let mut r = rng::stream(seed, 1);
        let pool: Vec<DecisionStump> =
            propose_candidates(&train, &SampleWeights::uniform(train.n_samples()), pool_size, &cfg, &mut r)?
                .into_iter()
                .map(|s| s.stump)
                .collect();
        let pm_train = predictions(&pool, &train)?;
        let pm_val = predictions(&pool, &val)?;
        let pm_test = predictions(&pool, &test)?;
        Ok(Self {
            points,
            selected: vec![false; pool.len()],
            train,
            val,
            test,
            pool,
            pm_train,
            pm_val,
            pm_test,
            seed,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn pool(&self) -> &[DecisionStump] {
        &self.pool
    }

    /// Selection count and errors at `steps + 1` evenly spaced alphas.
    pub fn alpha_curve(&self, steps: usize) -> Result<Vec<CurvePoint>> {
        let steps = steps.max(1);
        (0..=steps)
            .map(|k| {
                let alpha = k as f64 / steps as f64;
                let w = solve_exhaustive(&build_alpha_qubo(&self.pm_train, alpha)?)?.assignment;
                Ok(CurvePoint {
                    alpha,
                    count: w.iter().filter(|&&b| b).count(),
                    val_error: error_of(&self.pm_val, &w)?,
                    test_error: error_of(&self.pm_test, &w)?,
                })
            })
            .collect()
    }

    /// Solves the selection problem at `alpha` and keeps the result.
    pub fn select(&mut self, alpha: f64) -> Result<Selection> {
        let alpha = alpha.clamp(0.0, 1.0);
        self.selected = solve_exhaustive(&build_alpha_qubo(&self.pm_train, alpha)?)?.assignment;
        Ok(Selection {
            alpha,
            count: self.selected.iter().filter(|&&b| b).count(),
            val_error: error_of(&self.pm_val, &self.selected)?,
            test_error: error_of(&self.pm_test, &self.selected)?,
            stumps: self
                .pool
                .iter()
                .zip(&self.selected)
                .filter(|(_, &s)| s)
                .map(|(st, _)| st.clone())
                .collect(),
        })
    }

    /// Vote of the current selection over a grid covering the square.
    pub fn selection_grid(&self, resolution: usize) -> Result<Vec<Label>> {
        let grid = grid_dataset(resolution)?;
        let pm = predictions(&self.pool, &grid)?;
        Ok(vote(&pm, &self.selected))
    }

    /// Trains the full boosting loop in `mode` on this dataset.
    pub fn train_mode(&self, mode: Mode, target_size: usize, resolution: usize) -> Result<TrainedModel> {
        let cfg = BoostConfig {
            mode,
            pool: PoolConfig {
                target_size: target_size.max(1),
                max_features: Some(1),
                ..PoolConfig::default()
            },
            solver: SolverConfig::default(),
            seed: self.seed,
            ..BoostConfig::default()
        };
        let (model, trace) = train(&cfg, &self.train, &self.val)?;
        Ok(TrainedModel {
            mode,
            members: model.len(),
            train_accuracy: accuracy(self.train.labels(), &model.predict(&self.train)?)?,
            test_accuracy: accuracy(self.test.labels(), &model.predict(&self.test)?)?,
            iterations: trace.entries.len(),
            grid: model.predict(&grid_dataset(resolution)?)?,
        })
    }
}

/// Cell centres of a `resolution`² grid over the square, top row first.
pub fn grid_dataset(resolution: usize) -> Result<Dataset> {
    let res = resolution.max(1);
    let half = EXTENT / 2.0;
    let cell = EXTENT / res as f64;
    let mut rows = Vec::with_capacity(res * res);
    for r in 0..res {
        for c in 0..res {
            rows.push(vec![-half + (c as f64 + 0.5) * cell, half - (r as f64 + 0.5) * cell]);
        }
    }
    let labels = (0..rows.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    Dataset::from_rows(&rows, labels)
}

/// Random dense QUBO with coefficients in [-1, 1].
pub fn random_qubo(n_vars: usize, seed: u64) -> QuboProblem {
    let mut r = rng::seeded(seed);
    let mut q = QuboProblem::new(n_vars);
    for i in 0..n_vars {
        for j in i..n_vars {
            q.add(i, j, r.gen_range(-1.0..1.0));
        }
    }
    q
}

pub fn compare_solvers(n_vars: usize, seed: u64, num_reads: usize, sweeps: usize) -> Result<SolverComparison> {
    let q = random_qubo(n_vars, seed);
    let exact = solve_exhaustive(&q)?;
    let annealed = solve_anneal(
        &q,
        &AnnealConfig {
            num_reads: num_reads.max(1),
            sweeps,
            seed,
            ..AnnealConfig::default()
        },
    )?;
    let bits = |a: &[bool]| a.iter().map(|&b| u8::from(b)).collect();
    Ok(SolverComparison {
        n_vars,
        exhaustive_energy: exact.energy,
        anneal_energy: annealed.energy,
        exhaustive_assignment: bits(&exact.assignment),
        anneal_assignment: bits(&annealed.assignment),
        matched: (annealed.energy - exact.energy).abs() <= 1e-9 * exact.energy.abs().max(1.0),
    })
}
