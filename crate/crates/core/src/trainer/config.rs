use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skip-gram hyperparameters. Defaults are the word2vec settings used for
/// bilingual training: 300 dimensions, window 48, 25 negatives, subsampling
/// at 1e-4, 15 epochs, initial learning rate 0.025.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub dim: usize,
    /// Maximum window; each pivot draws its window uniformly from `1..=window`.
    pub window: usize,
    pub negatives: usize,
    /// Subsampling threshold `t`; 0 disables subsampling.
    pub subsample: f64,
    pub epochs: usize,
    pub lr0: f64,
    /// Learning-rate floor. `None` means `1e-4 * lr0`.
    pub lr_min: Option<f64>,
    pub unigram_power: f64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 300,
            window: 48,
            negatives: 25,
            subsample: 1e-4,
            epochs: 15,
            lr0: 0.025,
            lr_min: None,
            unigram_power: 0.75,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainingConfig {
    pub fn lr_min(&self) -> f64 {
        self.lr_min.unwrap_or(1e-4 * self.lr0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.dim == 0 {
            return fail("dim must be at least 1".into());
        }
        if self.window == 0 {
            return fail("window must be at least 1".into());
        }
        if !(self.subsample >= 0.0 && self.subsample.is_finite()) {
            return fail(format!("subsample must be >= 0, got {}", self.subsample));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail(format!("lr must be positive, got {}", self.lr0));
        }
        let lr_min = self.lr_min();
        if !(lr_min > 0.0 && lr_min < self.lr0) {
            return fail(format!("lr_min must lie in (0, lr), got {lr_min}"));
        }
        if !self.unigram_power.is_finite() {
            return fail("unigram_power must be finite".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        Ok(())
    }
}
