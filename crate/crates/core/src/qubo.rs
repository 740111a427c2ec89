//! QUBO construction for learner selection.
//!
//! Both objectives are expansions of the mean squared residual of the
//! ensemble output `(1/N) sum_i w_i h_i(x)` against the labels:
//!
//! * the correlation objective weighs the learner/label term `cor1` by
//!   `alpha` and the learner/learner term `cor2` by `1 - alpha`, with one
//!   binary selection variable per learner;
//! * the regularized objective keeps the full squared loss, encodes each
//!   weight with `K` bits and adds a sparsity penalty, optionally through
//!   auxiliary indicator variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};
use crate::stump::DecisionStump;

/// Predictions of `N` learners on `S` samples plus the labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    h: Vec<Vec<Label>>,
    y: Vec<Label>,
}

impl PredictionMatrix {
    pub fn new(h: Vec<Vec<Label>>, y: Vec<Label>) -> Result<Self> {
        if h.is_empty() || y.is_empty() {
            return Err(Error::Argument("prediction matrix needs N >= 1 and S >= 1".into()));
        }
        for row in &h {
            if row.len() != y.len() {
                return Err(Error::Dimension {
                    expected: y.len(),
                    got: row.len(),
                });
            }
        }
        if h.iter().flatten().chain(&y).any(|&v| v != 1 && v != -1) {
            return Err(Error::Argument("prediction matrix entries must be -1 or +1".into()));
        }
        Ok(Self { h, y })
    }

    pub fn n_learners(&self) -> usize {
        self.h.len()
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn learner(&self, i: usize) -> &[Label] {
        &self.h[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.y
    }

    /// (1/S) sum_s h_i(x_s) y_s
    pub fn label_correlation(&self, i: usize) -> f64 {
        dot(&self.h[i], &self.y) as f64 / self.n_samples() as f64
    }

    /// (1/S) sum_s h_i(x_s) h_j(x_s)
    pub fn learner_correlation(&self, i: usize, j: usize) -> f64 {
        dot(&self.h[i], &self.h[j]) as f64 / self.n_samples() as f64
    }
}

fn dot(a: &[Label], b: &[Label]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| i64::from(x * y)).sum()
}

/// Evaluates every stump on every row of `ds`.
pub fn predictions(stumps: &[DecisionStump], ds: &Dataset) -> Result<PredictionMatrix> {
    if stumps.is_empty() {
        return Err(Error::Argument("no stumps".into()));
    }
    let h = stumps.iter().map(|s| s.predict(ds)).collect::<Result<Vec<_>>>()?;
    PredictionMatrix::new(h, ds.labels().to_vec())
}

/// Which learner and encoding bit a QUBO variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarMeta {
    pub learner: usize,
    /// 0-based; bit `k` carries weight 2^-(k+1).
    pub bit: usize,
    pub is_aux: bool,
}

/// Upper-triangular QUBO: `offset + sum_{i <= j} c_ij b_i b_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    n_vars: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
    var_meta: Vec<VarMeta>,
    offset: f64,
}

impl QuboProblem {
    /// Empty problem whose variables each stand for one learner.
    pub fn new(n_vars: usize) -> Self {
        Self::with_meta(
            (0..n_vars)
                .map(|learner| VarMeta {
                    learner,
                    bit: 0,
                    is_aux: false,
                })
                .collect(),
        )
    }

    pub fn with_meta(var_meta: Vec<VarMeta>) -> Self {
        Self {
            n_vars: var_meta.len(),
            coeffs: BTreeMap::new(),
            var_meta,
            offset: 0.0,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn var_meta(&self) -> &[VarMeta] {
        &self.var_meta
    }

    /// Adds `value` to the coefficient of `b_i b_j`; (i, j) and (j, i) fold
    /// into the same upper-triangular entry.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.n_vars && j < self.n_vars, "variable index out of range");
        if value != 0.0 {
            *self.coeffs.entry((i.min(j), i.max(j))).or_insert(0.0) += value;
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn min_abs_nonzero_coeff(&self) -> Option<f64> {
        self.coeffs
            .values()
            .map(|c| c.abs())
            .filter(|&c| c > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Linear terms and a dense symmetric coupling matrix (`coupling[i][j]`
    /// holds the full upper-triangular coefficient for i != j).
    pub fn dense(&self) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.n_vars;
        let mut linear = vec![0.0; n];
        let mut coupling = vec![vec![0.0; n]; n];
        for (&(i, j), &c) in &self.coeffs {
            if i == j {
                linear[i] += c;
            } else {
                coupling[i][j] += c;
                coupling[j][i] += c;
            }
        }
        (linear, coupling)
    }

    pub fn to_json(&self) -> QuboJson {
        QuboJson {
            n_vars: self.n_vars,
            offset: self.offset,
            entries: self.entries().map(|(i, j, c)| (i, j, c)).collect(),
        }
    }

    pub fn from_json(json: &QuboJson) -> Result<Self> {
        let mut q = QuboProblem::new(json.n_vars);
        q.offset = json.offset;
        for &(i, j, c) in &json.entries {
            if i >= json.n_vars || j >= json.n_vars {
                return Err(Error::Schema(format!(
                    "entry ({i}, {j}) out of range for {} variables",
                    json.n_vars
                )));
            }
            if !c.is_finite() {
                return Err(Error::Schema(format!("entry ({i}, {j}) is not finite")));
            }
            q.add(i, j, c);
        }
        Ok(q)
    }
}

/// Debug interchange format: `{n_vars, offset, entries: [[i, j, coeff]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuboJson {
    pub n_vars: usize,
    #[serde(default)]
    pub offset: f64,
    pub entries: Vec<(usize, usize, f64)>,
}

pub fn energy(q: &QuboProblem, assignment: &[bool]) -> Result<f64> {
    if assignment.len() != q.n_vars {
        return Err(Error::Dimension {
            expected: q.n_vars,
            got: assignment.len(),
        });
    }
    Ok(q.offset
        + q.coeffs
            .iter()
            .filter(|(&(i, j), _)| assignment[i] && assignment[j])
            .map(|(_, c)| c)
            .sum::<f64>())
}

/// `alpha * cor1(w) + (1 - alpha) * cor2(w)` over one selection bit per
/// learner, where
///
/// ```text
/// cor1(w) = -(2/N) sum_i w_i (1/S) sum_s h_i(x_s) y_s
/// cor2(w) = (1/N^2) sum_i sum_j w_i w_j (1/S) sum_s h_i(x_s) h_j(x_s)
/// ```
pub fn build_alpha_qubo(pm: &PredictionMatrix, alpha: f64) -> Result<QuboProblem> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Argument(format!("alpha = {alpha} outside [0, 1]")));
    }
    let n = pm.n_learners();
    let nf = n as f64;
    let mut q = QuboProblem::new(n);
    for i in 0..n {
        let linear = -alpha * 2.0 / nf * pm.label_correlation(i) + (1.0 - alpha) / (nf * nf);
        q.add(i, i, linear);
        for j in i + 1..n {
            q.add(i, j, (1.0 - alpha) * 2.0 / (nf * nf) * pm.learner_correlation(i, j));
        }
    }
    Ok(q)
}

/// Weight encoding and sparsity penalty for the regularized objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodingSpec {
    /// Bits per weight: `w_i = c_K sum_{k=1..K} 2^-k w_ik` with
    /// `c_K = 1 / (1 - 2^-K)`, so all bits on gives exactly 1 and a single
    /// bit is a plain selection.
    pub bits: usize,
    /// Count non-zero weights through auxiliary indicator variables.
    pub use_aux_reg: bool,
    /// Consistency penalty; defaults to `10 * max(1, lambda)`.
    pub kappa: Option<f64>,
    pub lambda: f64,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        Self {
            bits: 1,
            use_aux_reg: false,
            kappa: None,
            lambda: 0.0,
        }
    }
}

impl EncodingSpec {
    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(10.0 * self.lambda.max(1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits == 0 {
            return Err(Error::Argument("encoding needs at least one bit".into()));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::Argument("lambda must be >= 0".into()));
        }
        if self.bits == 1 && self.use_aux_reg {
            return Err(Error::Argument("auxiliary regularizer is redundant with 1-bit weights".into()));
        }
        if self.use_aux_reg && !(self.kappa() > self.lambda) {
            return Err(Error::Argument("kappa must exceed lambda".into()));
        }
        Ok(())
    }

    pub fn n_vars(&self, n_learners: usize) -> usize {
        n_learners * self.bits + if self.use_aux_reg { n_learners } else { 0 }
    }

    pub fn bit_var(&self, learner: usize, bit: usize) -> usize {
        learner * self.bits + bit
    }

    pub fn aux_var(&self, n_learners: usize, learner: usize) -> usize {
        n_learners * self.bits + learner
    }

    /// Decoded real weights, one per learner.
    pub fn decode(&self, n_learners: usize, assignment: &[bool]) -> Vec<f64> {
        (0..n_learners)
            .map(|i| {
                (0..self.bits)
                    .filter(|&k| assignment[self.bit_var(i, k)])
                    .map(|k| bit_weight(k, self.bits))
                    .sum()
            })
            .collect()
    }
}

/// Weight of 0-based bit `k` out of `bits`.
fn bit_weight(k: usize, bits: usize) -> f64 {
    0.5f64.powi(k as i32 + 1) / (1.0 - 0.5f64.powi(bits as i32))
}

/// `(1/S) sum_s |(1/N) sum_i w_i h_i(x_s) - y_s|^2 + R(w)` with binary-encoded
/// weights. The constant `(1/S) sum_s y_s^2 = 1` is kept as the offset.
///
/// `R(w) = sum_i kappa w_i (1 - r_i) + lambda r_i` with auxiliary indicators
/// `r_i`, or `lambda sum_i w_i` without them.
pub fn build_lambda_qubo(pm: &PredictionMatrix, enc: &EncodingSpec) -> Result<QuboProblem> {
    enc.validate()?;
    let n = pm.n_learners();
    let nf = n as f64;
    let mut meta = Vec::with_capacity(enc.n_vars(n));
    for learner in 0..n {
        for bit in 0..enc.bits {
            meta.push(VarMeta {
                learner,
                bit,
                is_aux: false,
            });
        }
    }
    if enc.use_aux_reg {
        meta.extend((0..n).map(|learner| VarMeta {
            learner,
            bit: 0,
            is_aux: true,
        }));
    }
    let mut q = QuboProblem::with_meta(meta);
    q.set_offset(1.0);

    let corr: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| pm.learner_correlation(i, j)).collect())
        .collect();
    for i in 0..n {
        let label_corr = pm.label_correlation(i);
        for k in 0..enc.bits {
            let a = enc.bit_var(i, k);
            let wk = bit_weight(k, enc.bits);
            q.add(a, a, -2.0 / nf * wk * label_corr);
            // ordered pairs (i,k),(j,l); the diagonal pair uses b^2 = b
            for j in 0..n {
                for l in 0..enc.bits {
                    let b = enc.bit_var(j, l);
                    q.add(a, b, wk * bit_weight(l, enc.bits) * corr[i][j] / (nf * nf));
                }
            }
            if enc.use_aux_reg {
                let kappa = enc.kappa();
                q.add(a, a, kappa * wk);
                q.add(a, enc.aux_var(n, i), -kappa * wk);
            } else {
                q.add(a, a, enc.lambda * wk);
            }
        }
        if enc.use_aux_reg {
            let r = enc.aux_var(n, i);
            q.add(r, r, enc.lambda);
        }
    }
    Ok(q)
}
