//! Randomized MILBoost ensemble and the Bayesian significance-coefficients it
//! yields for positive-bag instances.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mil_core::{greedy_select, Bag, StandardLikelihood, StrongClassifier, PROB_EPS};
use crate::sampling::subsample;
use crate::weak_learners::WeakPool;

/// `N` standard MILBoost learners, each trained against its own draw of
/// negatives. All share one [`WeakPool`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ensemble {
    pub learners: Vec<StrongClassifier>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.learners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.learners.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceEstimate {
    /// Per-instance coefficients `r_ij`.
    pub instance: Vec<f64>,
    /// Bag coefficient `r_i = max_j r_ij`.
    pub bag: f64,
}

impl SignificanceEstimate {
    /// All-ones estimate, used for negative bags.
    pub fn uniform(len: usize) -> Self {
        Self {
            instance: vec![1.0; len],
            bag: 1.0,
        }
    }

    pub fn from_instances(instance: Vec<f64>) -> Result<Self> {
        let bag = instance
            .iter()
            .copied()
            .reduce(f64::max)
            .ok_or(Error::Empty("significance coefficients"))?;
        Ok(Self { instance, bag })
    }
}

/// Trains `n` learners by greedy selection under the plain bag likelihood,
/// each on `positive` plus `per_learner` uniformly drawn negatives.
#[allow(clippy::too_many_arguments)]
pub fn train_ensemble<R: Rng + ?Sized>(
    pool: &WeakPool,
    positive: &Bag,
    negatives: &[Bag],
    n: usize,
    per_learner: usize,
    k: usize,
    rng: &mut R,
) -> Result<Ensemble> {
    if n == 0 {
        return Err(Error::Config("ensemble needs at least one learner".into()));
    }
    if per_learner > negatives.len() {
        return Err(Error::InsufficientSamples {
            requested: per_learner,
            available: negatives.len(),
        });
    }
    // Draw every subsample up front so the rng schedule does not depend on
    // how training is scheduled.
    let training_sets: Vec<Vec<Bag>> = (0..n)
        .map(|_| {
            let mut bags = Vec::with_capacity(per_learner + 1);
            bags.push(positive.clone());
            bags.extend(subsample(negatives, per_learner, rng)?.into_iter().cloned());
            Ok(bags)
        })
        .collect::<Result<_>>()?;
    let learners = training_sets
        .par_iter()
        .map(|bags| greedy_select(pool, bags, k, &StandardLikelihood))
        .collect::<Result<_>>()?;
    Ok(Ensemble { learners })
}

/// Two-hypothesis posterior `p(y = 1 | H_1..H_N)` for conditionally
/// independent learners with predictions `preds` and class prior `prior`:
///
/// `prior^(1-N) prod p_k / (prior^(1-N) prod p_k + (1-prior)^(1-N) prod (1-p_k))`
///
/// evaluated as `sigmoid(sum_k logit(p_k) - (N-1) logit(prior))`.
pub fn instance_significance(preds: &[f64], prior: f64) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Empty("learner predictions"));
    }
    if !(prior > 0.0 && prior < 1.0) {
        return Err(Error::Config(format!("prior {prior} outside (0, 1)")));
    }
    let evidence: f64 = preds.iter().map(|&p| logit(p.clamp(PROB_EPS, 1.0 - PROB_EPS))).sum();
    let log_odds = evidence - (preds.len() - 1) as f64 * logit(prior);
    Ok(1.0 / (1.0 + (-log_odds).exp()))
}

/// Log-odds with `logit(p) == -logit(1 - p)` exactly whenever `1 - p` is
/// itself a rounded complement, so symmetric predictions cancel to zero.
fn logit(p: f64) -> f64 {
    // For p >= 1/2 the complement 1 - p is exact.
    fn upper(u: f64) -> f64 {
        u.ln() - (1.0 - u).ln()
    }
    if p >= 0.5 {
        upper(p)
    } else if p >= 1e-3 {
        -upper(1.0 - p)
    } else {
        // rounding 1 - p would cost too much relative precision here
        p.ln() - (-p).ln_1p()
    }
}

/// Per-instance and bag significance. Negative bags are fixed at 1.
pub fn estimate_bag(ensemble: &Ensemble, pool: &WeakPool, bag: &Bag, prior: f64) -> Result<SignificanceEstimate> {
    if !bag.label {
        return Ok(SignificanceEstimate::uniform(bag.len()));
    }
    let mut preds = Vec::with_capacity(ensemble.len());
    let instance = bag
        .instances
        .iter()
        .map(|inst| {
            preds.clear();
            preds.extend(ensemble.learners.iter().map(|h| h.predict(pool, inst)));
            instance_significance(&preds, prior)
        })
        .collect::<Result<Vec<_>>>()?;
    SignificanceEstimate::from_instances(instance)
}
