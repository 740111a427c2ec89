//! Choosing `alpha` for the correlation-balanced selection QUBO.
//!
//! Two searches are provided: bisection toward a requested number of
//! selected learners, and a gradient-free minimization of validation error
//! over `alpha` in [0, 1].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::qubo::{build_alpha_qubo, predictions, PredictionMatrix};
use crate::solve::QuboSolver;
use crate::stump::DecisionStump;

/// Bisection bracket after the last update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearchState {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    pub count: usize,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountProbe {
    pub alpha: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSelection {
    pub weights: Vec<bool>,
    pub alpha: f64,
    pub count: usize,
    /// False when the requested count was never hit and the nearest one was
    /// returned instead.
    pub exact: bool,
    pub state: AlphaSearchState,
    pub probes: Vec<CountProbe>,
}

/// Bisection on `alpha` until the selection has `desired_count` members.
///
/// Starts at `alpha = 0.5` on [0, 1]; a selection that is too large moves
/// the upper end down, otherwise the lower end moves up. After `max_iters`
/// updates without a hit, returns the probed `alpha` whose count is nearest
/// to the target (ties go to the smaller count, then the earlier probe).
pub fn select_by_count_matrix(
    pm: &PredictionMatrix,
    desired_count: usize,
    solver: &dyn QuboSolver,
    max_iters: usize,
) -> Result<CountSelection> {
    let n = pm.n_learners();
    if desired_count == 0 || desired_count > n {
        return Err(Error::Argument(format!(
            "desired_count {desired_count} outside 1..={n}"
        )));
    }
    if max_iters == 0 {
        return Err(Error::Argument("max_iters must be >= 1".into()));
    }
    let solve_at = |alpha: f64| -> Result<Vec<bool>> { Ok(solver.solve(&build_alpha_qubo(pm, alpha)?)?.assignment) };

    let mut state = AlphaSearchState {
        a: 0.0,
        b: 1.0,
        alpha: 0.5,
        count: 0,
        iterations: 0,
    };
    let mut weights = solve_at(state.alpha)?;
    state.count = count(&weights);
    let mut probes = vec![CountProbe {
        alpha: state.alpha,
        count: state.count,
    }];
    let mut nearest = (state.alpha, weights.clone());

    while state.count != desired_count && state.iterations < max_iters {
        if state.count > desired_count {
            state.b = state.alpha;
        } else {
            state.a = state.alpha;
        }
        state.alpha = (state.a + state.b) / 2.0;
        weights = solve_at(state.alpha)?;
        state.count = count(&weights);
        state.iterations += 1;
        probes.push(CountProbe {
            alpha: state.alpha,
            count: state.count,
        });
        let key = |c: usize| (c.abs_diff(desired_count), c);
        if key(state.count) < key(count(&nearest.1)) {
            nearest = (state.alpha, weights.clone());
        }
    }

    let exact = state.count == desired_count;
    let (alpha, weights) = if exact { (state.alpha, weights) } else { nearest };
    Ok(CountSelection {
        count: count(&weights),
        weights,
        alpha,
        exact,
        state,
        probes,
    })
}

pub fn select_by_count(
    stumps: &[DecisionStump],
    train: &Dataset,
    desired_count: usize,
    solver: &dyn QuboSolver,
    max_iters: usize,
) -> Result<CountSelection> {
    let pm = predictions(stumps, train)?;
    select_by_count_matrix(&pm, desired_count, solver, max_iters)
}

fn count(weights: &[bool]) -> usize {
    weights.iter().filter(|&&w| w).count()
}

/// Unweighted vote of the selected learners; a tied vote predicts +1.
pub fn vote(pm: &PredictionMatrix, selected: &[bool]) -> Vec<Label> {
    let mut sums = vec![0i32; pm.n_samples()];
    for (i, _) in selected.iter().enumerate().filter(|(_, &s)| s) {
        for (acc, &h) in sums.iter_mut().zip(pm.learner(i)) {
            *acc += i32::from(h);
        }
    }
    sums.into_iter().map(|v| if v >= 0 { 1 } else { -1 }).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptStrategy {
    /// Uniform grid on [0, 1], then repeated finer grids around the best point.
    #[default]
    GridRefine,
    /// Nelder-Mead on the interval, clamped to [0, 1].
    NelderMead1d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptConfig {
    pub strategy: OptStrategy,
    pub grid_points: usize,
    pub refine_rounds: usize,
    pub max_evals: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            strategy: OptStrategy::GridRefine,
            grid_points: 11,
            refine_rounds: 2,
            max_evals: 33,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(Error::Config("opt.grid_points must be >= 3".into()));
        }
        if self.max_evals < self.grid_points {
            return Err(Error::Config("opt.max_evals must be >= opt.grid_points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaEvaluation {
    pub alpha: f64,
    /// `None` when the selection at this alpha was empty.
    pub val_error: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaOptimum {
    pub weights: Vec<bool>,
    pub alpha: f64,
    pub val_error: f64,
    pub evaluations: Vec<AlphaEvaluation>,
}

/// Memoized objective `alpha -> validation error of the selected vote`.
struct Objective<'a> {
    train: &'a PredictionMatrix,
    val: &'a PredictionMatrix,
    solver: &'a dyn QuboSolver,
    metric: Metric,
    max_evals: usize,
    cache: BTreeMap<u64, (AlphaEvaluation, Vec<bool>)>,
    order: Vec<u64>,
}

impl Objective<'_> {
    fn exhausted(&self) -> bool {
        self.order.len() >= self.max_evals
    }

    /// Objective value, `+inf` for an empty selection; `None` once the
    /// evaluation budget is spent.
    fn eval(&mut self, alpha: f64) -> Result<Option<f64>> {
        let alpha = alpha.clamp(0.0, 1.0);
        let key = alpha.to_bits();
        if let Some((e, _)) = self.cache.get(&key) {
            return Ok(Some(e.val_error.unwrap_or(f64::INFINITY)));
        }
        if self.exhausted() {
            return Ok(None);
        }
        let weights = self.solver.solve(&build_alpha_qubo(self.train, alpha)?)?.assignment;
        let n = count(&weights);
        let val_error = if n == 0 {
            None
        } else {
            Some(self.metric.error(self.val.labels(), &vote(self.val, &weights))?)
        };
        self.cache.insert(
            key,
            (
                AlphaEvaluation {
                    alpha,
                    val_error,
                    count: n,
                },
                weights,
            ),
        );
        self.order.push(key);
        Ok(Some(val_error.unwrap_or(f64::INFINITY)))
    }

    /// Lowest error; ties go to the smallest alpha.
    fn best(&self) -> Option<(f64, f64)> {
        self.cache
            .values()
            .filter_map(|(e, _)| e.val_error.map(|v| (v, e.alpha)))
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
    }

    fn into_optimum(self) -> Result<AlphaOptimum> {
        let (val_error, alpha) = self.best().ok_or(Error::DegenerateSelection)?;
        let evaluations = self.order.iter().map(|k| self.cache[k].0).collect();
        let weights = self.cache[&alpha.to_bits()].1.clone();
        Ok(AlphaOptimum {
            weights,
            alpha,
            val_error,
            evaluations,
        })
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(move |k| if k + 1 == points { hi } else { lo + step * k as f64 })
}

fn grid_refine(obj: &mut Objective<'_>, cfg: &OptConfig) -> Result<()> {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..=cfg.refine_rounds {
        for alpha in grid(lo, hi, cfg.grid_points) {
            if obj.eval(alpha)?.is_none() {
                return Ok(());
            }
        }
        let Some((_, best)) = obj.best() else {
            return Ok(());
        };
        let step = (hi - lo) / (cfg.grid_points - 1) as f64;
        lo = (best - step).max(0.0);
        hi = (best + step).min(1.0);
    }
    Ok(())
}

fn nelder_mead(obj: &mut Objective<'_>) -> Result<()> {
    const TOL: f64 = 1e-6;
    let mut simplex = [0.5, 0.75];
    let mut values = [0.0; 2];
    for (v, &x) in values.iter_mut().zip(&simplex) {
        match obj.eval(x)? {
            Some(f) => *v = f,
            None => return Ok(()),
        }
    }
    loop {
        // order: simplex[0] best
        if values[1] < values[0] || (values[1] == values[0] && simplex[1] < simplex[0]) {
            simplex.swap(0, 1);
            values.swap(0, 1);
        }
        if (simplex[1] - simplex[0]).abs() < TOL || obj.exhausted() {
            return Ok(());
        }
        let (best, worst) = (simplex[0], simplex[1]);
        let reflected = (2.0 * best - worst).clamp(0.0, 1.0);
        let Some(fr) = obj.eval(reflected)? else { return Ok(()) };
        if fr < values[0] {
            let expanded = (3.0 * best - 2.0 * worst).clamp(0.0, 1.0);
            let Some(fe) = obj.eval(expanded)? else { return Ok(()) };
            (simplex[1], values[1]) = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < values[1] {
            (simplex[1], values[1]) = (reflected, fr);
        } else {
            let contracted = (best + worst) / 2.0;
            let Some(fc) = obj.eval(contracted)? else { return Ok(()) };
            (simplex[1], values[1]) = (contracted, fc);
        }
    }
}

/// Minimizes validation error of the selected-learner vote over `alpha`.
///
/// Empty selections never win. Ties go to the smallest `alpha`. At most
/// `cfg.max_evals` distinct values of `alpha` are solved.
pub fn optimize_alpha_matrix(
    train: &PredictionMatrix,
    val: &PredictionMatrix,
    cfg: &OptConfig,
    solver: &dyn QuboSolver,
    metric: Metric,
) -> Result<AlphaOptimum> {
    cfg.validate()?;
    if train.n_learners() != val.n_learners() {
        return Err(Error::Dimension {
            expected: train.n_learners(),
            got: val.n_learners(),
        });
    }
    let mut obj = Objective {
        train,
        val,
        solver,
        metric,
        max_evals: cfg.max_evals,
        cache: BTreeMap::new(),
        order: Vec::new(),
    };
    match cfg.strategy {
        OptStrategy::GridRefine => grid_refine(&mut obj, cfg)?,
        OptStrategy::NelderMead1d => nelder_mead(&mut obj)?,
    }
    obj.into_optimum()
}

pub fn optimize_alpha(
    stumps: &[DecisionStump],
    train: &Dataset,
    val: &Dataset,
    cfg: &OptConfig,
    solver: &dyn QuboSolver,
    metric: Metric,
) -> Result<AlphaOptimum> {
    if val.n_samples() == 0 {
        return Err(Error::Argument("validation set is empty".into()));
    }
    optimize_alpha_matrix(&predictions(stumps, train)?, &predictions(stumps, val)?, cfg, solver, metric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::{solve_exhaustive, Exhaustive};

    fn pool_from_matrix(h: &[Vec<Label>], y: &[Label]) -> (Dataset, Vec<DecisionStump>) {
        let rows: Vec<Vec<f64>> = (0..y.len())
            .map(|s| h.iter().map(|row| f64::from(row[s])).collect())
            .collect();
        let ds = Dataset::from_rows(&rows, y.to_vec()).unwrap();
        let stumps = (0..h.len()).map(|i| DecisionStump::new(i, format!("x{i}"), 0.0, 1)).collect();
        (ds, stumps)
    }

    #[test]
    fn bracket_halves_each_update() {
        // one perfect learner plus noise learners; ask for a count that
        // bisection chases for a while
        let y: Vec<Label> = (0..16).map(|s| if s % 2 == 0 { 1 } else { -1 }).collect();
        let h: Vec<Vec<Label>> = (0..6)
            .map(|i| (0..16).map(|s| if (s >> (i % 4)) & 1 == 0 { y[s] } else { -y[s] }).collect())
            .collect();
        let (ds, stumps) = pool_from_matrix(&h, &y);
        let r = select_by_count(&stumps, &ds, 6, &Exhaustive, 5).unwrap();
        let width = r.state.b - r.state.a;
        assert!((width - 0.5f64.powi(r.state.iterations as i32)).abs() < 1e-15);
        assert!(r.probes.iter().all(|p| (0.0..=1.0).contains(&p.alpha)));
    }

    #[test]
    fn stops_at_first_probe_when_it_matches() {
        let y: Vec<Label> = vec![1, -1, 1, -1];
        let h = vec![y.clone()];
        let (ds, stumps) = pool_from_matrix(&h, &y);
        let r = select_by_count(&stumps, &ds, 1, &Exhaustive, 30).unwrap();
        assert_eq!(r.state.iterations, 0);
        assert!(r.exact);
        assert_eq!(r.weights, vec![true]);
    }

    #[test]
    fn count_argument_checks() {
        let y: Vec<Label> = vec![1, -1];
        let (ds, stumps) = pool_from_matrix(&[y.clone()], &y);
        assert!(matches!(select_by_count(&stumps, &ds, 0, &Exhaustive, 3), Err(Error::Argument(_))));
        assert!(matches!(select_by_count(&stumps, &ds, 2, &Exhaustive, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn unattainable_count_returns_nearest_smaller() {
        // two strongly anti-correlated pairs: selections come in pairs, so
        // the count jumps 2 -> 4 and never equals 3
        let h: Vec<Vec<Label>> = vec![
            vec![1, 1, -1, 1, -1, -1, -1, -1, 1, 1, 1, -1, -1, -1, -1, 1, 1, -1, 1, -1],
            vec![1, -1, 1, -1, 1, 1, 1, -1, 1, -1, -1, 1, 1, 1, 1, -1, -1, 1, 1, -1],
            vec![1, -1, -1, 1, 1, 1, 1, 1, 1, 1, -1, -1, 1, -1, 1, -1, -1, 1, -1, -1],
            vec![-1, 1, 1, -1, -1, -1, 1, -1, -1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1],
        ];
        let y: Vec<Label> = (0..20).map(|s| if s % 2 == 0 { 1 } else { -1 }).collect();
        let pm = PredictionMatrix::new(h, y).unwrap();
        for k in 1..2000 {
            let alpha = k as f64 / 2000.0;
            let c = solve_exhaustive(&build_alpha_qubo(&pm, alpha).unwrap()).unwrap().count_selected();
            assert_ne!(c, 3, "alpha {alpha}");
        }
        let r = select_by_count_matrix(&pm, 3, &Exhaustive, 30).unwrap();
        assert!(!r.exact);
        assert_eq!(r.count, 2);
        assert_eq!(r.state.iterations, 30);
    }

    #[test]
    fn perfect_stump_is_found() {
        let y: Vec<Label> = vec![1, -1, 1, -1, 1, 1];
        let (ds, stumps) = pool_from_matrix(&[y.clone()], &y);
        let r = optimize_alpha(&stumps, &ds, &ds, &OptConfig::default(), &Exhaustive, Metric::ErrorRate).unwrap();
        assert_eq!(r.weights, vec![true]);
        assert_eq!(r.val_error, 0.0);
        assert!(r.alpha > 0.0);
        assert!(r.evaluations.len() <= OptConfig::default().max_evals);
    }

    #[test]
    fn never_selects_anti_correlated_learner() {
        let y: Vec<Label> = vec![1, -1, 1, -1, 1, 1, -1, -1];
        let anti: Vec<Label> = y.iter().map(|v| -v).collect();
        let h = vec![y.clone(), y.clone(), anti];
        let (ds, stumps) = pool_from_matrix(&h, &y);
        let pm = predictions(&stumps, &ds).unwrap();
        for k in 0..=20 {
            let w = solve_exhaustive(&build_alpha_qubo(&pm, k as f64 / 20.0).unwrap()).unwrap().assignment;
            assert!(!w[2]);
        }
        for strategy in [OptStrategy::GridRefine, OptStrategy::NelderMead1d] {
            let cfg = OptConfig {
                strategy,
                ..OptConfig::default()
            };
            let r = optimize_alpha(&stumps, &ds, &ds, &cfg, &Exhaustive, Metric::ErrorRate).unwrap();
            assert!(!r.weights[2]);
            assert_eq!(r.val_error, 0.0);
        }
    }

    #[test]
    fn flat_objective_returns_smallest_alpha() {
        let y: Vec<Label> = vec![1, -1, 1, -1];
        let (ds, stumps) = pool_from_matrix(&[y.clone()], &y);
        let r = optimize_alpha(&stumps, &ds, &ds, &OptConfig::default(), &Exhaustive, Metric::ErrorRate).unwrap();
        let smallest = r
            .evaluations
            .iter()
            .filter(|e| e.val_error.is_some())
            .map(|e| e.alpha)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(r.alpha, smallest);
    }

    #[test]
    fn empty_selection_everywhere_is_degenerate() {
        // a learner that is always wrong is never selected
        let y: Vec<Label> = vec![1, -1, 1, -1];
        let anti: Vec<Label> = y.iter().map(|v| -v).collect();
        let (ds, stumps) = pool_from_matrix(&[anti], &y);
        assert!(matches!(
            optimize_alpha(&stumps, &ds, &ds, &OptConfig::default(), &Exhaustive, Metric::ErrorRate),
            Err(Error::DegenerateSelection)
        ));
    }

    #[test]
    fn reported_error_is_recomputable() {
        let y: Vec<Label> = (0..12).map(|s| if s % 3 == 0 { -1 } else { 1 }).collect();
        let h: Vec<Vec<Label>> = (0..5)
            .map(|i| (0..12).map(|s| if (s + i) % 4 == 0 { -y[s] } else { y[s] }).collect())
            .collect();
        let (ds, stumps) = pool_from_matrix(&h, &y);
        let r = optimize_alpha(&stumps, &ds, &ds, &OptConfig::default(), &Exhaustive, Metric::ErrorRate).unwrap();
        let pm = predictions(&stumps, &ds).unwrap();
        let again = Metric::ErrorRate.error(ds.labels(), &vote(&pm, &r.weights)).unwrap();
        assert_eq!(again, r.val_error);
    }

    #[test]
    fn opt_config_validation() {
        assert!(OptConfig { grid_points: 2, ..OptConfig::default() }.validate().is_err());
        assert!(OptConfig { max_evals: 5, ..OptConfig::default() }.validate().is_err());
    }
}
