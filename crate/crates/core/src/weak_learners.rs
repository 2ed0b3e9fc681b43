//! Gaussian log-ratio weak classifiers with exponential-forgetting updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SIGMA_FLOOR: f64 = 1e-3;
pub const LOG_ODDS_LIMIT: f64 = 5.0;

/// Class-conditional Gaussians `N(mu1, sigma1)` for positives and
/// `N(mu0, sigma0)` for negatives over one Haar feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakClassifier {
    pub feature_id: usize,
    pub mu1: f64,
    pub sigma1: f64,
    pub mu0: f64,
    pub sigma0: f64,
    pub pos_initialized: bool,
    pub neg_initialized: bool,
}

impl WeakClassifier {
    pub fn new(feature_id: usize) -> Self {
        Self {
            feature_id,
            mu1: 0.0,
            sigma1: 1.0,
            mu0: 0.0,
            sigma0: 1.0,
            pos_initialized: false,
            neg_initialized: false,
        }
    }

    pub fn is_initialized(&self) -> bool {
        self.pos_initialized && self.neg_initialized
    }

    /// Clamped log-ratio of the two class densities at `fval`; zero until both
    /// classes have seen data.
    #[inline]
    pub fn log_odds(&self, fval: f64) -> f64 {
        if !self.is_initialized() {
            return 0.0;
        }
        let z1 = (fval - self.mu1) / self.sigma1;
        let z0 = (fval - self.mu0) / self.sigma0;
        let ratio = (self.sigma0 / self.sigma1).ln() - 0.5 * z1 * z1 + 0.5 * z0 * z0;
        ratio.clamp(-LOG_ODDS_LIMIT, LOG_ODDS_LIMIT)
    }

    /// One online update from this frame's feature values.
    pub fn update(&mut self, positives: &[f64], negatives: &[f64], learning_rate: f64) {
        if let Some((mean, std)) = batch_stats(positives) {
            blend(
                &mut self.mu1,
                &mut self.sigma1,
                &mut self.pos_initialized,
                mean,
                std,
                learning_rate,
            );
        }
        if let Some((mean, std)) = batch_stats(negatives) {
            blend(
                &mut self.mu0,
                &mut self.sigma0,
                &mut self.neg_initialized,
                mean,
                std,
                learning_rate,
            );
        }
    }
}

fn blend(mu: &mut f64, sigma: &mut f64, initialized: &mut bool, mean: f64, std: f64, rate: f64) {
    if *initialized {
        *mu = rate * *mu + (1.0 - rate) * mean;
        *sigma = rate * *sigma + (1.0 - rate) * std;
    } else {
        *mu = mean;
        *sigma = std;
        *initialized = true;
    }
    *sigma = sigma.max(SIGMA_FLOOR);
}

/// Mean and population standard deviation.
fn batch_stats(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// One classifier per pool feature, sharing a learning rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakPool {
    pub classifiers: Vec<WeakClassifier>,
    pub learning_rate: f64,
}

impl WeakPool {
    pub fn new(size: usize, learning_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&learning_rate) {
            return Err(Error::Config(format!("learning rate {learning_rate} outside [0, 1]")));
        }
        Ok(Self {
            classifiers: (0..size).map(WeakClassifier::new).collect(),
            learning_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    /// Updates every classifier from the column of its feature.
    ///
    /// `features[i]` is instance `i`'s full feature vector, `labels[i]` its
    /// class.
    pub fn update<F: AsRef<[f64]>>(&mut self, features: &[F], labels: &[bool]) -> Result<()> {
        if features.len() != labels.len() {
            return Err(Error::Mismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        let m = self.classifiers.len();
        if let Some(bad) = features.iter().find(|row| row.as_ref().len() != m) {
            return Err(Error::Mismatch {
                expected: m,
                found: bad.as_ref().len(),
            });
        }
        if features.is_empty() {
            return Ok(());
        }
        let mut pos = Vec::with_capacity(features.len());
        let mut neg = Vec::with_capacity(features.len());
        for (k, clf) in self.classifiers.iter_mut().enumerate() {
            pos.clear();
            neg.clear();
            for (row, &label) in features.iter().zip(labels) {
                let v = row.as_ref()[k];
                if label {
                    pos.push(v);
                } else {
                    neg.push(v);
                }
            }
            clf.update(&pos, &neg, self.learning_rate);
        }
        Ok(())
    }
}
