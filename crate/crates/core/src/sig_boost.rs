//! Significance-weighted Noisy-OR and the refined strong classifier.
//!
//! Instance `j` of bag `i` enters the bag probability as if repeated
//! `alpha * r_ij / r_i` times, and each bag's log-likelihood term is weighted
//! by its own significance `r_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mil_core::{
    bag_term, greedy_select, log_one_minus_prob, strong_scores, Bag, BagLikelihood, StrongClassifier,
};
use crate::weak_learners::WeakPool;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaConfig {
    /// Maximal repetition count for instances of positive bags.
    pub alpha_pos: f64,
    /// Negative bags keep the plain Noisy-OR.
    pub alpha_neg: f64,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        Self {
            alpha_pos: 3.0,
            alpha_neg: 1.0,
        }
    }
}

impl AlphaConfig {
    pub fn new(alpha_pos: f64) -> Result<Self> {
        let cfg = Self {
            alpha_pos,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_pos >= 1.0 && self.alpha_pos.is_finite()) {
            return Err(Error::Config(format!("alpha_pos {} must be >= 1", self.alpha_pos)));
        }
        if self.alpha_neg != 1.0 {
            return Err(Error::Config(format!("alpha_neg {} must be 1", self.alpha_neg)));
        }
        Ok(())
    }
}

/// `1 - prod_j (1 - p_j)^(alpha r_j / r_bag)`.
pub fn extended_noisy_or(probs: &[f64], r: &[f64], r_bag: f64, alpha: f64) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Empty("instance probabilities"));
    }
    if probs.len() != r.len() {
        return Err(Error::Mismatch {
            expected: probs.len(),
            found: r.len(),
        });
    }
    if r_bag <= 0.0 {
        return Err(Error::ZeroBagSignificance(r_bag));
    }
    Ok(-weighted_log_miss(probs.iter().copied(), r, r_bag, alpha).exp_m1())
}

#[inline]
fn weighted_log_miss(probs: impl Iterator<Item = f64>, r: &[f64], r_bag: f64, alpha: f64) -> f64 {
    probs.zip(r).map(|(p, &rj)| alpha * rj / r_bag * (-p).ln_1p()).sum()
}

/// Significance-weighted bag log-likelihood. Positive bags must carry a
/// [`SignificanceEstimate`](crate::significance::SignificanceEstimate);
/// negative bags are treated as `r = 1` with `alpha_neg`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtendedLikelihood {
    pub alpha: AlphaConfig,
}

impl BagLikelihood for ExtendedLikelihood {
    fn evaluate(&self, bags: &[Bag], scores: &[Vec<f64>]) -> Result<f64> {
        let mut total = 0.0;
        for (i, (bag, s)) in bags.iter().zip(scores).enumerate() {
            let misses = s.iter().map(|&v| log_one_minus_prob(v));
            if bag.label {
                let est = bag.significance.as_ref().ok_or(Error::MissingSignificance(i))?;
                if est.instance.len() != bag.len() {
                    return Err(Error::Mismatch {
                        expected: bag.len(),
                        found: est.instance.len(),
                    });
                }
                if est.bag <= 0.0 {
                    // a bag with zero significance carries no weight
                    if est.bag == 0.0 {
                        continue;
                    }
                    return Err(Error::ZeroBagSignificance(est.bag));
                }
                let log_miss: f64 = misses
                    .zip(&est.instance)
                    .map(|(m, &rj)| self.alpha.alpha_pos * rj / est.bag * m)
                    .sum();
                total += est.bag * bag_term(true, log_miss);
            } else {
                let log_miss: f64 = misses.map(|m| self.alpha.alpha_neg * m).sum();
                total += bag_term(false, log_miss);
            }
        }
        Ok(total)
    }
}

pub fn extended_log_likelihood(bags: &[Bag], sc: &StrongClassifier, pool: &WeakPool, cfg: &AlphaConfig) -> Result<f64> {
    if bags.is_empty() {
        return Err(Error::Empty("bags"));
    }
    ExtendedLikelihood { alpha: *cfg }.evaluate(bags, &strong_scores(bags, sc, pool))
}

/// Greedy selection of the refined classifier under the extended likelihood.
pub fn select_refined(pool: &WeakPool, bags: &[Bag], k: usize, cfg: &AlphaConfig) -> Result<StrongClassifier> {
    cfg.validate()?;
    greedy_select(pool, bags, k, &ExtendedLikelihood { alpha: *cfg })
}
