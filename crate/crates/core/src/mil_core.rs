//! Online MILBoost: Noisy-OR bag probabilities, the bag log-likelihood and
//! greedy weak-classifier selection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BoundingBox;
use crate::significance::SignificanceEstimate;
use crate::weak_learners::WeakPool;

/// Reported instance probabilities are kept inside `[PROB_EPS, 1 - PROB_EPS]`.
/// The likelihoods work from scores directly so that confident instances do
/// not all collapse onto the same clamped value.
pub const PROB_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub location: BoundingBox,
    /// Values of every pool feature at `location`.
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bag {
    pub label: bool,
    pub instances: Vec<Instance>,
    pub significance: Option<SignificanceEstimate>,
}

impl Bag {
    pub fn positive(instances: Vec<Instance>) -> Result<Self> {
        Self::with_label(true, instances)
    }

    pub fn negative(instances: Vec<Instance>) -> Result<Self> {
        Self::with_label(false, instances)
    }

    fn with_label(label: bool, instances: Vec<Instance>) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::Empty("bag"));
        }
        Ok(Self {
            label,
            instances,
            significance: None,
        })
    }

    /// One singleton negative bag per instance.
    pub fn singleton_negatives(instances: impl IntoIterator<Item = Instance>) -> Vec<Bag> {
        instances
            .into_iter()
            .map(|inst| Bag {
                label: false,
                instances: vec![inst],
                significance: None,
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Ordered indices into the shared [`WeakPool`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongClassifier {
    pub selected: Vec<usize>,
}

impl StrongClassifier {
    pub fn new(selected: Vec<usize>) -> Self {
        Self { selected }
    }

    /// Sum of the selected classifiers' log-odds, with feature values supplied
    /// by `feature`.
    #[inline]
    pub fn score_with(&self, pool: &WeakPool, mut feature: impl FnMut(usize) -> f64) -> f64 {
        self.selected.iter().fold(0.0, |acc, &k| {
            let clf = &pool.classifiers[k];
            acc + clf.log_odds(feature(clf.feature_id))
        })
    }

    pub fn score(&self, pool: &WeakPool, inst: &Instance) -> f64 {
        self.score_with(pool, |id| inst.features[id])
    }

    pub fn predict(&self, pool: &WeakPool, inst: &Instance) -> f64 {
        instance_prob(self.score(pool, inst))
    }
}

#[inline]
pub fn instance_prob(score: f64) -> f64 {
    (1.0 / (1.0 + (-score).exp())).clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `1 - prod(1 - p_j)`.
pub fn noisy_or(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Empty("instance probabilities"));
    }
    Ok(-log_miss(probs.iter().copied()).exp_m1())
}

/// `sum_j ln(1 - p_j)`: log-probability that no instance fires.
#[inline]
pub(crate) fn log_miss(probs: impl Iterator<Item = f64>) -> f64 {
    probs.map(|p| (-p).ln_1p()).sum()
}

/// Largest score magnitude used by the likelihoods; keeps `ln(1 - p)` away
/// from underflow so positive-bag terms stay finite.
pub const SCORE_LIMIT: f64 = 700.0;

/// `ln(1 - sigmoid(score))`, computed without rounding `p` first.
#[inline]
pub fn log_one_minus_prob(score: f64) -> f64 {
    let s = score.clamp(-SCORE_LIMIT, SCORE_LIMIT);
    -(s.max(0.0) + (-s.abs()).exp().ln_1p())
}

/// `y log p + (1 - y) log(1 - p)` for a bag with `ln(1 - p) = log_miss`.
#[inline]
pub(crate) fn bag_term(label: bool, log_miss: f64) -> f64 {
    if label {
        (-log_miss.exp_m1()).ln()
    } else {
        log_miss
    }
}

/// Objective maximized by [`greedy_select`].
pub trait BagLikelihood {
    /// `scores[b][j]` is the strong-classifier score of instance `j` of
    /// `bags[b]`.
    fn evaluate(&self, bags: &[Bag], scores: &[Vec<f64>]) -> Result<f64>;
}

/// The plain Noisy-OR bag log-likelihood.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardLikelihood;

impl BagLikelihood for StandardLikelihood {
    fn evaluate(&self, bags: &[Bag], scores: &[Vec<f64>]) -> Result<f64> {
        Ok(bags
            .iter()
            .zip(scores)
            .map(|(bag, s)| bag_term(bag.label, s.iter().map(|&v| log_one_minus_prob(v)).sum()))
            .sum())
    }
}

/// Plain bag log-likelihood of `sc` over `bags`.
pub fn bag_log_likelihood(bags: &[Bag], sc: &StrongClassifier, pool: &WeakPool) -> Result<f64> {
    if bags.is_empty() {
        return Err(Error::Empty("bags"));
    }
    StandardLikelihood.evaluate(bags, &strong_scores(bags, sc, pool))
}

pub(crate) fn strong_scores(bags: &[Bag], sc: &StrongClassifier, pool: &WeakPool) -> Vec<Vec<f64>> {
    bags.iter()
        .map(|b| b.instances.iter().map(|i| sc.score(pool, i)).collect())
        .collect()
}

/// Picks `k` distinct weak classifiers one at a time, each maximizing
/// `likelihood` of the running strong classifier plus the candidate.
/// Ties go to the lowest index.
pub fn greedy_select<L>(pool: &WeakPool, bags: &[Bag], k: usize, likelihood: &L) -> Result<StrongClassifier>
where
    L: BagLikelihood + Sync,
{
    let m = pool.len();
    if k > m {
        return Err(Error::Config(format!(
            "cannot select {k} weak classifiers from a pool of {m}"
        )));
    }
    if k == 0 {
        return Ok(StrongClassifier::default());
    }
    if bags.is_empty() {
        return Err(Error::Empty("bags"));
    }
    for bag in bags {
        if let Some(inst) = bag.instances.iter().find(|i| i.features.len() != m) {
            return Err(Error::Mismatch {
                expected: m,
                found: inst.features.len(),
            });
        }
    }

    // responses[c][b][j]: log-odds of classifier c on instance j of bag b.
    let responses: Vec<Vec<Vec<f64>>> = pool
        .classifiers
        .iter()
        .map(|clf| {
            bags.iter()
                .map(|b| {
                    b.instances
                        .iter()
                        .map(|i| clf.log_odds(i.features[clf.feature_id]))
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut scores: Vec<Vec<f64>> = bags.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut taken = vec![false; m];
    let mut selected = Vec::with_capacity(k);

    for _ in 0..k {
        let values: Vec<Option<f64>> = (0..m)
            .into_par_iter()
            .map(|c| {
                if taken[c] {
                    return Ok(None);
                }
                let trial: Vec<Vec<f64>> = scores
                    .iter()
                    .zip(&responses[c])
                    .map(|(s, r)| s.iter().zip(r).map(|(a, b)| a + b).collect())
                    .collect();
                likelihood.evaluate(bags, &trial).map(Some)
            })
            .collect::<Result<_>>()?;

        let mut best: Option<(usize, f64)> = None;
        for (c, v) in values.into_iter().enumerate() {
            if let Some(v) = v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((c, v));
                }
            }
        }
        let (chosen, _) = best.expect("k <= m leaves a candidate every round");
        taken[chosen] = true;
        selected.push(chosen);
        for (s, r) in scores.iter_mut().zip(&responses[chosen]) {
            for (a, b) in s.iter_mut().zip(r) {
                *a += b;
            }
        }
    }
    Ok(StrongClassifier { selected })
}
