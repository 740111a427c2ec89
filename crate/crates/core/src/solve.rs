//! QUBO minimization: exact enumeration for small problems and a seeded
//! single-flip Metropolis annealer.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{energy, QuboProblem};
use crate::rng;

/// Largest problem [`solve_exhaustive`] accepts.
pub const MAX_EXHAUSTIVE_VARS: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub assignment: Vec<bool>,
    pub energy: f64,
    pub reads_used: usize,
    pub seed: u64,
}

impl SolverResult {
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count_selected(&self) -> usize {
        self.assignment.iter().filter(|&&b| b).count()
    }
}

/// Anything that can minimize a [`QuboProblem`].
pub trait QuboSolver {
    fn solve(&self, q: &QuboProblem) -> Result<SolverResult>;
}

/// Tracks the lowest energy seen; within `tol` the lexicographically
/// smaller assignment wins.
fn lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    diff != 0 && a & (diff & diff.wrapping_neg()) == 0
}

/// Global minimum by Gray-code enumeration of all 2^n assignments. Ties are
/// broken toward the lexicographically smallest assignment (variable 0 is
/// the most significant position).
pub fn solve_exhaustive(q: &QuboProblem) -> Result<SolverResult> {
    let n = q.n_vars();
    if n > MAX_EXHAUSTIVE_VARS {
        return Err(Error::Size(format!(
            "exhaustive solver supports at most {MAX_EXHAUSTIVE_VARS} variables, got {n}"
        )));
    }
    let (linear, coupling) = q.dense();
    let scale = 1.0 + linear.iter().map(|c| c.abs()).sum::<f64>()
        + coupling.iter().flatten().map(|c| c.abs()).sum::<f64>() / 2.0;
    let tol = 1e-11 * scale;

    // field[k]: energy change from switching bit k on, given the others
    let mut field = linear.clone();
    let mut mask: u32 = 0;
    let mut e = 0.0;
    let (mut best_mask, mut best_e) = (0u32, 0.0);
    for step in 1u64..(1u64 << n) {
        let k = step.trailing_zeros() as usize;
        let on = mask >> k & 1 == 0;
        let sign = if on { 1.0 } else { -1.0 };
        e += sign * field[k];
        mask ^= 1 << k;
        for (j, f) in field.iter_mut().enumerate() {
            if j != k {
                *f += sign * coupling[j][k];
            }
        }
        if e < best_e - tol || (e <= best_e + tol && lex_less(mask, best_mask)) {
            best_mask = mask;
            best_e = e;
        }
    }
    let assignment: Vec<bool> = (0..n).map(|i| best_mask >> i & 1 == 1).collect();
    let energy = energy(q, &assignment)?;
    Ok(SolverResult {
        assignment,
        energy,
        reads_used: 1,
        seed: 0,
    })
}

/// Simulated annealing schedule and restarts. Inverse temperatures follow a
/// geometric ladder from `beta_start` to `beta_end` across the sweeps; when
/// unset they are derived from the coefficient magnitudes of each problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealConfig {
    pub num_reads: usize,
    pub sweeps: usize,
    pub beta_start: Option<f64>,
    pub beta_end: Option<f64>,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            num_reads: 32,
            sweeps: 256,
            beta_start: None,
            beta_end: None,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 {
            return Err(Error::Argument("num_reads must be >= 1".into()));
        }
        for b in [self.beta_start, self.beta_end].into_iter().flatten() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Argument(format!("inverse temperature {b} must be positive")));
            }
        }
        if let (Some(a), Some(b)) = (self.beta_start, self.beta_end) {
            if b <= a {
                return Err(Error::Argument("beta_end must exceed beta_start".into()));
            }
        }
        Ok(())
    }

    /// (beta_start, beta_end) for `q`: 1/max|c| and 100/min|c|, the latter
    /// clamped to [10, 1e5] times the former.
    pub fn betas_for(&self, q: &QuboProblem) -> (f64, f64) {
        let max_c = q.max_abs_coeff();
        let start = self
            .beta_start
            .unwrap_or(if max_c > 0.0 { 1.0 / max_c } else { 1.0 });
        let end = self.beta_end.unwrap_or_else(|| {
            let raw = q.min_abs_nonzero_coeff().map_or(10.0 * start, |m| 100.0 / m);
            raw.clamp(10.0 * start, 1e5 * start)
        });
        (start, end.max(start))
    }
}

pub fn solve_anneal(q: &QuboProblem, cfg: &AnnealConfig) -> Result<SolverResult> {
    cfg.validate()?;
    let n = q.n_vars();
    let (linear, coupling) = q.dense();
    let (beta_start, beta_end) = cfg.betas_for(q);
    let betas: Vec<f64> = (0..cfg.sweeps)
        .map(|s| {
            if cfg.sweeps == 1 {
                beta_end
            } else {
                beta_start * (beta_end / beta_start).powf(s as f64 / (cfg.sweeps - 1) as f64)
            }
        })
        .collect();

    let mut best: Option<(f64, Vec<bool>)> = None;
    for read in 0..cfg.num_reads {
        let mut r = rng::stream(cfg.seed, read as u64);
        let mut state: Vec<bool> = (0..n).map(|_| r.gen::<bool>()).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|k| {
                linear[k]
                    + (0..n)
                        .filter(|&j| j != k && state[j])
                        .map(|j| coupling[k][j])
                        .sum::<f64>()
            })
            .collect();
        let mut e = energy(q, &state)?;
        let mut read_best = (e, state.clone());
        for &beta in &betas {
            for k in 0..n {
                let delta = if state[k] { -field[k] } else { field[k] };
                if delta <= 0.0 || r.gen::<f64>() < (-beta * delta).exp() {
                    let sign = if state[k] { -1.0 } else { 1.0 };
                    state[k] = !state[k];
                    e += delta;
                    for (j, f) in field.iter_mut().enumerate() {
                        if j != k {
                            *f += sign * coupling[j][k];
                        }
                    }
                    if e < read_best.0 {
                        read_best = (e, state.clone());
                    }
                }
            }
        }
        let exact = energy(q, &read_best.1)?;
        if best.as_ref().map_or(true, |(b, _)| exact < *b) {
            best = Some((exact, read_best.1));
        }
    }
    let (energy, assignment) = best.expect("num_reads >= 1");
    Ok(SolverResult {
        assignment,
        energy,
        reads_used: cfg.num_reads,
        seed: cfg.seed,
    })
}

/// Backend selection, serializable for configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverConfig {
    Exhaustive,
    Anneal(AnnealConfig),
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::Anneal(AnnealConfig::default())
    }
}

impl SolverConfig {
    pub fn with_seed(&self, seed: u64) -> SolverConfig {
        match self {
            SolverConfig::Exhaustive => SolverConfig::Exhaustive,
            SolverConfig::Anneal(cfg) => SolverConfig::Anneal(AnnealConfig { seed, ..cfg.clone() }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SolverConfig::Exhaustive => Ok(()),
            SolverConfig::Anneal(cfg) => cfg.validate(),
        }
    }
}

impl QuboSolver for SolverConfig {
    fn solve(&self, q: &QuboProblem) -> Result<SolverResult> {
        match self {
            SolverConfig::Exhaustive => solve_exhaustive(q),
            SolverConfig::Anneal(cfg) => solve_anneal(q, cfg),
        }
    }
}

impl QuboSolver for AnnealConfig {
    fn solve(&self, q: &QuboProblem) -> Result<SolverResult> {
        solve_anneal(q, self)
    }
}

/// Exhaustive backend as a solver object.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl QuboSolver for Exhaustive {
    fn solve(&self, q: &QuboProblem) -> Result<SolverResult> {
        solve_exhaustive(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::{build_alpha_qubo, PredictionMatrix};
    use proptest::prelude::*;

    fn random_qubo(seed: u64, n: usize) -> QuboProblem {
        let mut r = rng::seeded(seed);
        let mut q = QuboProblem::new(n);
        for i in 0..n {
            for j in i..n {
                q.add(i, j, r.gen_range(-1.0..1.0));
            }
        }
        q
    }

    /// Plain enumeration with full energy evaluation per assignment.
    fn brute_min(q: &QuboProblem) -> (f64, Vec<bool>) {
        let n = q.n_vars();
        let mut best = (f64::INFINITY, vec![]);
        for mask in 0u32..(1 << n) {
            let a: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let e = energy(q, &a).unwrap();
            if e < best.0 - 1e-12 || ((e - best.0).abs() <= 1e-12 && a < best.1) {
                best = (e, a);
            }
        }
        best
    }

    #[test]
    fn exhaustive_small_examples() {
        let m = PredictionMatrix::new(vec![vec![1, -1], vec![-1, 1]], vec![1, -1]).unwrap();
        let r = solve_exhaustive(&build_alpha_qubo(&m, 0.5).unwrap()).unwrap();
        assert_eq!(r.assignment, vec![true, false]);
        assert!((r.energy + 0.375).abs() < 1e-15);

        let mut q = QuboProblem::new(1);
        q.set_offset(2.0);
        q.add(0, 0, -1.0);
        let r = solve_exhaustive(&q).unwrap();
        assert_eq!((r.assignment, r.energy), (vec![true], 1.0));

        let mut zero = QuboProblem::new(5);
        zero.set_offset(0.25);
        let r = solve_exhaustive(&zero).unwrap();
        assert_eq!(r.assignment, vec![false; 5]);
        assert_eq!(r.energy, 0.25);

        let r = solve_exhaustive(&QuboProblem::new(0)).unwrap();
        assert!(r.assignment.is_empty());
    }

    #[test]
    fn exhaustive_size_guard() {
        assert!(matches!(solve_exhaustive(&QuboProblem::new(25)), Err(Error::Size(_))));
    }

    #[test]
    fn exhaustive_lexicographic_ties() {
        // b0 and b1 each lower the energy by 1, but not together
        let mut q = QuboProblem::new(2);
        q.add(0, 0, -1.0);
        q.add(1, 1, -1.0);
        q.add(0, 1, 2.0);
        // [false, true] < [true, false]
        assert_eq!(solve_exhaustive(&q).unwrap().assignment, vec![false, true]);
    }

    #[test]
    fn anneal_without_sweeps_returns_initial_state() {
        let q = random_qubo(4, 8);
        let cfg = AnnealConfig {
            num_reads: 1,
            sweeps: 0,
            seed: 17,
            ..AnnealConfig::default()
        };
        let r = solve_anneal(&q, &cfg).unwrap();
        let mut g = rng::stream(17, 0);
        let init: Vec<bool> = (0..8).map(|_| g.gen::<bool>()).collect();
        assert_eq!(r.assignment, init);
        assert_eq!(r.energy, energy(&q, &init).unwrap());
    }

    #[test]
    fn anneal_is_deterministic() {
        let q = random_qubo(5, 14);
        let cfg = AnnealConfig {
            seed: 99,
            ..AnnealConfig::default()
        };
        assert_eq!(solve_anneal(&q, &cfg).unwrap(), solve_anneal(&q, &cfg).unwrap());
    }

    #[test]
    fn anneal_config_validation() {
        let bad = AnnealConfig {
            beta_start: Some(2.0),
            beta_end: Some(1.0),
            ..AnnealConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealConfig {
            num_reads: 0,
            ..AnnealConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn solver_config_json() {
        let s: SolverConfig = serde_json::from_str(r#"{"backend":"anneal","num_reads":4}"#).unwrap();
        assert_eq!(
            s,
            SolverConfig::Anneal(AnnealConfig {
                num_reads: 4,
                ..AnnealConfig::default()
            })
        );
        let e: SolverConfig = serde_json::from_str(r#"{"backend":"exhaustive"}"#).unwrap();
        assert_eq!(e, SolverConfig::Exhaustive);
        assert!(serde_json::from_str::<SolverConfig>(r#"{"backend":"anneal","reads":4}"#).is_err());
    }

    proptest! {
        #[test]
        fn gray_code_matches_brute_force(seed in any::<u64>(), n in 1usize..11) {
            let q = random_qubo(seed, n);
            let r = solve_exhaustive(&q).unwrap();
            let (e, a) = brute_min(&q);
            prop_assert!((r.energy - e).abs() < 1e-12);
            prop_assert_eq!(r.assignment, a);
        }

        #[test]
        fn anneal_energy_is_rederivable(seed in any::<u64>(), n in 1usize..20) {
            let q = random_qubo(seed, n);
            let cfg = AnnealConfig { num_reads: 3, sweeps: 20, seed, ..AnnealConfig::default() };
            let r = solve_anneal(&q, &cfg).unwrap();
            prop_assert_eq!(r.assignment.len(), n);
            prop_assert!((r.energy - energy(&q, &r.assignment).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn more_reads_never_worse(seed in any::<u64>(), reads in 1usize..8) {
            let q = random_qubo(seed, 12);
            let base = AnnealConfig { num_reads: reads, sweeps: 16, seed, ..AnnealConfig::default() };
            let more = AnnealConfig { num_reads: reads + 1, ..base.clone() };
            prop_assert!(solve_anneal(&q, &more).unwrap().energy <= solve_anneal(&q, &base).unwrap().energy);
        }
    }
}
