//! The QBoost family: a shared outer loop that grows a candidate pool from
//! sample-weighted stumps, picks a subset by solving a QUBO, keeps the
//! selection only when validation error strictly improves, and reweights the
//! training samples by the current best classifier.

use rand::Rng as _;

use super::{
    BoostConfig, Member, Mode, ParamEvaluation, Stopwatch, StrongClassifier, TraceEntry, TrainTrace,
    WeightUpdate, update_weights_d,
};
use crate::alpha::{optimize_alpha_matrix, select_by_count_matrix};
use crate::data::{draw_bootstrap_pool, BootstrapPool, Dataset};
use crate::error::{Error, Result};
use crate::metrics::accuracy;
use crate::qubo::{build_lambda_qubo, predictions, EncodingSpec, PredictionMatrix};
use crate::rng;
use crate::solve::{QuboSolver, SolverConfig};
use crate::stump::{propose_candidates, DecisionStump, SampleWeights};

const POOL_SALT: u64 = 0x706f_6f6c;
const SOLVER_SALT: u64 = 0x736f_6c76;
const BOOT_SALT: u64 = 0x626f_6f74;

/// One selection proposed by the inner step: a weight per pool member.
struct Candidate {
    weights: Vec<f64>,
    param: f64,
}

struct InnerInput<'a> {
    pool: &'a [DecisionStump],
    train: &'a PredictionMatrix,
    val: &'a PredictionMatrix,
    solver: &'a SolverConfig,
}

/// Rows and sample weights used by one outer iteration.
enum Rows<'a> {
    Fixed {
        train: &'a Dataset,
        val: &'a Dataset,
        d: SampleWeights,
    },
    Bootstrap {
        all: Dataset,
        pool: BootstrapPool,
        /// over all rows of `all`
        d: Vec<f64>,
    },
}

fn iteration_solver(cfg: &BoostConfig, iteration: usize) -> SolverConfig {
    match &cfg.solver {
        SolverConfig::Anneal(a) => cfg
            .solver
            .with_seed(rng::mix(a.seed ^ cfg.seed ^ SOLVER_SALT, iteration as u64)),
        other => other.clone(),
    }
}

fn outer_loop(
    cfg: &BoostConfig,
    mode: Mode,
    train: &Dataset,
    val: &Dataset,
    inner: &mut dyn FnMut(&InnerInput<'_>) -> Result<Vec<Candidate>>,
) -> Result<(StrongClassifier, TrainTrace)> {
    cfg.validate()?;
    train.check_trainable()?;
    if val.n_samples() == 0 {
        return Err(Error::Argument("validation set is empty".into()));
    }
    if train.n_features() != val.n_features() {
        return Err(Error::Dimension {
            expected: train.n_features(),
            got: val.n_features(),
        });
    }

    let mut rows = match cfg.bootstrap {
        None => Rows::Fixed {
            train,
            val,
            d: SampleWeights::uniform(train.n_samples()),
        },
        Some(b) => {
            let all = train.concat(val)?;
            let pool = draw_bootstrap_pool(&all, b.k, b.train_size, b.val_size, rng::mix(cfg.seed, BOOT_SALT))?;
            let n = all.n_samples();
            Rows::Bootstrap {
                all,
                pool,
                d: vec![1.0 / n as f64; n],
            }
        }
    };

    let pool_size = cfg.pool.pool_size();
    let mut best: Option<(StrongClassifier, f64, f64)> = None;
    let mut retained: Vec<DecisionStump> = Vec::new();
    let mut trace = TrainTrace::default();
    let mut stale = 0;

    for iteration in 0..cfg.max_outer_iters {
        let clock = Stopwatch::start();

        let (it_train, it_val, d, draw_rows) = match &rows {
            Rows::Fixed { train, val, d } => ((*train).clone(), (*val).clone(), d.clone(), None),
            Rows::Bootstrap { all, pool, d } => {
                let pick = rng::stream(rng::mix(cfg.seed, BOOT_SALT), iteration as u64).gen_range(0..pool.k());
                let draw = &pool.draws[pick];
                let local: Vec<f64> = draw.train.iter().map(|&i| d[i]).collect();
                let local = SampleWeights::normalized(local)
                    .unwrap_or_else(|| SampleWeights::uniform(draw.train.len()));
                (all.select(&draw.train), all.select(&draw.val), local, Some(draw.train.clone()))
            }
        };

        let mut pool = retained.clone();
        let how_many = pool_size.saturating_sub(pool.len());
        if how_many > 0 {
            let mut pool_rng = rng::stream(rng::mix(cfg.seed, POOL_SALT), iteration as u64);
            let fresh = propose_candidates(&it_train, &d, how_many, &cfg.pool, &mut pool_rng)
                .map_err(|e| match e {
                    Error::DegenerateFeature => Error::Pool("every candidate feature subset is constant".into()),
                    other => other,
                })?;
            pool.extend(fresh.into_iter().map(|s| s.stump));
        }
        if pool.is_empty() {
            return Err(Error::Pool("empty candidate pool".into()));
        }

        let pm_train = predictions(&pool, &it_train)?;
        let pm_val = predictions(&pool, &it_val)?;
        let solver = iteration_solver(cfg, iteration);
        let candidates = inner(&InnerInput {
            pool: &pool,
            train: &pm_train,
            val: &pm_val,
            solver: &solver,
        })?;

        let mut accepted = false;
        let mut evaluations = Vec::with_capacity(candidates.len());
        for cand in candidates {
            let members = pool
                .iter()
                .zip(&cand.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(s, &w)| Member {
                    stump: s.clone(),
                    weight: w,
                });
            let mut temp = StrongClassifier::new(mode, members, train.n_features());
            if temp.is_empty() {
                evaluations.push(ParamEvaluation {
                    param: cand.param,
                    val_error: None,
                    count: 0,
                    accepted: false,
                });
                continue;
            }
            let err = cfg.metric.error(it_val.labels(), &temp.predict(&it_val)?)?;
            let improves = best.as_ref().map_or(true, |(_, e, _)| err < *e);
            evaluations.push(ParamEvaluation {
                param: cand.param,
                val_error: Some(err),
                count: temp.len(),
                accepted: improves,
            });
            if improves {
                temp.metadata.seed = cfg.seed;
                temp.metadata.alpha_or_lambda = Some(cand.param);
                temp.metadata.val_error = Some(err);
                best = Some((temp, err, cand.param));
                accepted = true;
            }
        }

        let mut converged = false;
        let (train_error, val_error, size, param) = match &best {
            Some((model, err, param)) => {
                let preds = model.predict(&it_train)?;
                let train_error = 1.0 - accuracy(it_train.labels(), &preds)?;
                match update_weights_d(&d, it_train.labels(), &preds)? {
                    WeightUpdate::Updated(next) => match (&mut rows, &draw_rows) {
                        (Rows::Fixed { d, .. }, _) => *d = next,
                        (Rows::Bootstrap { d: full, .. }, Some(idx)) => {
                            let before: f64 = idx.iter().map(|&i| full[i]).sum();
                            for (&i, &w) in idx.iter().zip(next.as_slice()) {
                                full[i] = w * before;
                            }
                            let total: f64 = full.iter().sum();
                            if total > 0.0 {
                                full.iter_mut().for_each(|w| *w /= total);
                            } else {
                                converged = true;
                            }
                        }
                        (Rows::Bootstrap { .. }, None) => unreachable!(),
                    },
                    WeightUpdate::Converged => converged = true,
                }
                retained = model.stumps().cloned().collect();
                (train_error, *err, model.len(), accepted.then_some(*param))
            }
            None => (1.0, f64::INFINITY, 0, None),
        };

        trace.entries.push(TraceEntry {
            iteration,
            val_error,
            train_error,
            ensemble_size: size,
            param,
            accepted,
            evaluations,
            weighted_error: None,
            vote_weight: None,
            wall_seconds: clock.seconds(),
        });

        if converged {
            trace.converged = true;
            break;
        }
        stale = if accepted { 0 } else { stale + 1 };
        if stale >= cfg.patience {
            break;
        }
    }

    let (model, _, _) = best.ok_or(Error::DegenerateSelection)?;
    Ok((model, trace))
}

/// Regularized QBoost: for each lambda on the grid, solve the encoded
/// squared-loss QUBO and keep the best validation result.
pub fn train_qboost_lambda(cfg: &BoostConfig, train: &Dataset, val: &Dataset) -> Result<(StrongClassifier, TrainTrace)> {
    if cfg.mode != Mode::QboostLambda {
        return Err(Error::Argument(format!("expected mode qboost_lambda, got {}", cfg.mode)));
    }
    let lambdas = cfg.lambda_grid.values();
    let enc = cfg.encoding;
    outer_loop(cfg, Mode::QboostLambda, train, val, &mut |input| {
        lambdas
            .iter()
            .map(|&lambda| {
                let spec = EncodingSpec { lambda, ..enc };
                let q = build_lambda_qubo(input.train, &spec)?;
                let sol = input.solver.solve(&q)?;
                Ok(Candidate {
                    weights: spec.decode(input.pool.len(), &sol.assignment),
                    param: lambda,
                })
            })
            .collect()
    })
}

/// QBoost with classifier selection: bisection on alpha to a fixed
/// ensemble size replaces the lambda grid.
pub fn train_qboost_select(cfg: &BoostConfig, train: &Dataset, val: &Dataset) -> Result<(StrongClassifier, TrainTrace)> {
    if cfg.mode != Mode::QboostSelect {
        return Err(Error::Argument(format!("expected mode qboost_select, got {}", cfg.mode)));
    }
    let desired = cfg
        .desired_count
        .ok_or_else(|| Error::Argument("qboost_select needs desired_count".into()))?;
    outer_loop(cfg, Mode::QboostSelect, train, val, &mut |input| {
        let sel = select_by_count_matrix(input.train, desired.min(input.pool.len()), input.solver, cfg.bisect_max_iters)?;
        Ok(vec![Candidate {
            weights: sel.weights.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            param: sel.alpha,
        }])
    })
}

/// Alpha-weighted QBoost: each outer iteration minimizes validation error
/// over alpha with a gradient-free search.
pub fn train_alpha_qboost(cfg: &BoostConfig, train: &Dataset, val: &Dataset) -> Result<(StrongClassifier, TrainTrace)> {
    if cfg.mode != Mode::AlphaQboost {
        return Err(Error::Argument(format!("expected mode alpha_qboost, got {}", cfg.mode)));
    }
    outer_loop(cfg, Mode::AlphaQboost, train, val, &mut |input| {
        match optimize_alpha_matrix(input.train, input.val, &cfg.opt, input.solver, cfg.metric) {
            Ok(opt) => Ok(vec![Candidate {
                weights: opt.weights.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
                param: opt.alpha,
            }]),
            // no alpha selected anything this round: nothing to accept
            Err(Error::DegenerateSelection) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    })
}
