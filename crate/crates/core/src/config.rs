//! Run configuration: a single JSON document covering the dataset, the split,
//! the trainers to run and their settings.
//!
//! Every field has a default, and unknown keys are rejected. Defaults:
//!
//! | key | default |
//! |---|---|
//! | `dataset.path` | none, must be given |
//! | `dataset.label_column` | `"label"` |
//! | `dataset.label_map` | `["1=+1", "0=-1"]` |
//! | `split` | 0.6 / 0.2 / 0.2, stratified |
//! | `modes` | `["alpha_qboost", "adaboost"]` |
//! | `boost` | see [`BoostConfig::default`] |
//! | `repeats` | 5 |
//! | `base_seed` | 0 |
//! | `out_dir` | `"out"` |
//!
//! `split.seed` and `boost.seed` are derived from `base_seed` (plus the
//! repeat index in benchmarks) and `boost.mode` from each entry of `modes`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boosting::{BoostConfig, Mode};
use crate::data::{load_csv, Dataset, LabelMap, SplitSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub path: Option<PathBuf>,
    pub label_column: String,
    pub label_map: LabelMap,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            path: None,
            label_column: "label".into(),
            label_map: LabelMap::new("1", "0").expect("distinct labels"),
        }
    }
}

impl DatasetConfig {
    pub fn load(&self) -> Result<Dataset> {
        let path = self
            .path
            .as_ref()
            .ok_or_else(|| Error::Config("dataset.path is required".into()))?;
        load_csv(path, &self.label_column, &self.label_map).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("cannot read dataset `{}`: {io}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub split: SplitSpec,
    pub modes: Vec<Mode>,
    pub boost: BoostConfig,
    pub repeats: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            split: SplitSpec::default(),
            modes: vec![Mode::AlphaQboost, Mode::Adaboost],
            boost: BoostConfig::default(),
            repeats: 5,
            base_seed: 0,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.path.is_none() {
            return Err(Error::Config("dataset.path is required".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("modes must list at least one trainer".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be >= 1".into()));
        }
        self.split.validate().map_err(|e| Error::Config(e.to_string()))?;
        for &mode in &self.modes {
            self.boost_for(mode, self.base_seed)
                .validate()
                .map_err(|e| Error::Config(format!("{mode}: {e}")))?;
        }
        Ok(())
    }

    /// Trainer settings for one mode and seed.
    pub fn boost_for(&self, mode: Mode, seed: u64) -> BoostConfig {
        BoostConfig {
            mode,
            seed,
            ..self.boost.clone()
        }
    }

    pub fn split_for(&self, seed: u64) -> SplitSpec {
        SplitSpec { seed, ..self.split }
    }

    /// Copy with the derived seeds filled in, as echoed into outputs.
    pub fn resolved(&self) -> RunConfig {
        let mut r = self.clone();
        r.split.seed = self.base_seed;
        r.boost.seed = self.base_seed;
        if let Some(&first) = self.modes.first() {
            r.boost.mode = first;
        }
        r
    }
}
