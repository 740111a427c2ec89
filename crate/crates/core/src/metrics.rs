//! Binary classification metrics. The positive class is +1.

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn from_labels(y_true: &[Label], y_pred: &[Label]) -> Result<Self> {
        check_lengths(y_true, y_pred)?;
        let mut c = Confusion::default();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            match (t > 0, p > 0) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        (self.tp + self.tn) as f64 / self.total() as f64
    }

    /// 2tp / (2tp + fp + fn), zero when the denominator is zero.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

fn check_lengths(y_true: &[Label], y_pred: &[Label]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Dimension {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::Argument("metrics need at least one row".into()));
    }
    Ok(())
}

pub fn accuracy(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    Ok(Confusion::from_labels(y_true, y_pred)?.accuracy())
}

pub fn f1(y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
    Ok(Confusion::from_labels(y_true, y_pred)?.f1())
}

/// The test metric minimized on the validation set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// 1 - accuracy
    #[default]
    ErrorRate,
    /// 1 - F1
    OneMinusF1,
}

impl Metric {
    pub fn error(&self, y_true: &[Label], y_pred: &[Label]) -> Result<f64> {
        let c = Confusion::from_labels(y_true, y_pred)?;
        Ok(match self {
            Metric::ErrorRate => 1.0 - c.accuracy(),
            Metric::OneMinusF1 => 1.0 - c.f1(),
        })
    }
}
