//! Tracking by detection with the significance-guided appearance model.
//!
//! Every frame: scan the search disc with `H_e`, move to the best-scoring box,
//! then retrain at the new location (update the shared weak pool, retrain the
//! randomized ensemble, estimate significance, reselect `H_e`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeaturePool;
use crate::imaging::{BoundingBox, GrayFrame, IntegralImage};
use crate::mil_core::{Bag, Instance, StrongClassifier};
use crate::rng::{stream_rng, Stream, StreamRng};
use crate::sampling::{negative_locations, positive_locations, search_locations, subsample, SampleConfig};
use crate::sig_boost::{select_refined, AlphaConfig};
use crate::significance::{estimate_bag, train_ensemble, Ensemble, SignificanceEstimate};
use crate::weak_learners::WeakPool;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Size `M` of the Haar feature / weak classifier pool.
    pub num_weak: usize,
    /// Classifiers `K` chosen per strong classifier.
    pub num_select: usize,
    /// Randomized learners `N` in the ensemble.
    pub ensemble_size: usize,
    pub learning_rate: f64,
    pub alpha: AlphaConfig,
    pub sampling: SampleConfig,
    /// Prior probability that an instance is positive.
    pub prior: f64,
    pub seed: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            num_weak: 150,
            num_select: 15,
            ensemble_size: 3,
            learning_rate: 0.85,
            alpha: AlphaConfig::default(),
            sampling: SampleConfig::default(),
            prior: 0.5,
            seed: 0,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_weak == 0 {
            return Err(Error::Config("num_weak must be at least 1".into()));
        }
        if self.num_select > self.num_weak {
            return Err(Error::Config(format!(
                "num_select ({}) exceeds num_weak ({})",
                self.num_select, self.num_weak
            )));
        }
        if self.ensemble_size == 0 {
            return Err(Error::Config("ensemble_size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::Config(format!(
                "learning rate {} outside [0, 1]",
                self.learning_rate
            )));
        }
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::Config(format!("prior {} outside (0, 1)", self.prior)));
        }
        self.alpha.validate()?;
        self.sampling.validate()
    }
}

/// Steps of one training pass, in the order they ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingStage {
    PoolUpdate,
    EnsembleTraining,
    SignificanceEstimation,
    RefinedSelection,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    features: FeaturePool,
    weak: WeakPool,
    ensemble: Ensemble,
    refined: StrongClassifier,
    location: BoundingBox,
    frame_w: u32,
    frame_h: u32,
    frame_index: usize,
    sample_rng: StreamRng,
    subsample_rng: StreamRng,
    significance: Option<SignificanceEstimate>,
    stages: Vec<TrainingStage>,
    pool_updates: usize,
}

impl Tracker {
    /// Builds the feature pool and trains on the first frame at `gt`.
    pub fn init(first: &GrayFrame, gt: BoundingBox, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        if !gt.fits_in(first.width(), first.height()) {
            return Err(gt.out_of_bounds("initial box", first.width(), first.height()));
        }
        let features = FeaturePool::generate(
            config.num_weak,
            gt.w,
            gt.h,
            &mut stream_rng(config.seed, Stream::FeaturePool),
        )?;
        let mut tracker = Self {
            weak: WeakPool::new(config.num_weak, config.learning_rate)?,
            features,
            ensemble: Ensemble::default(),
            refined: StrongClassifier::default(),
            location: gt,
            frame_w: first.width(),
            frame_h: first.height(),
            frame_index: 0,
            sample_rng: stream_rng(config.seed, Stream::NegativeSampling),
            subsample_rng: stream_rng(config.seed, Stream::Subsampling),
            significance: None,
            stages: Vec::new(),
            pool_updates: 0,
            config,
        };
        tracker.train(&IntegralImage::new(first))?;
        Ok(tracker)
    }

    /// Locates the object in `frame` and adapts the model to it.
    pub fn step(&mut self, frame: &GrayFrame) -> Result<BoundingBox> {
        if frame.width() != self.frame_w || frame.height() != self.frame_h {
            return Err(Error::FrameSize {
                expected_w: self.frame_w,
                expected_h: self.frame_h,
                found_w: frame.width(),
                found_h: frame.height(),
            });
        }
        let ii = IntegralImage::new(frame);
        self.location = self.detect(&ii);
        self.frame_index += 1;
        self.train(&ii)?;
        Ok(self.location)
    }

    /// Highest-scoring search location around the current box; ties go to the
    /// first candidate in lattice order.
    pub fn detect(&self, ii: &IntegralImage) -> BoundingBox {
        let candidates = search_locations(&self.location, self.frame_w, self.frame_h, &self.config.sampling);
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|b| {
                let (x, y) = (b.x as u32, b.y as u32);
                self.refined
                    .score_with(&self.weak, |id| self.features.features[id].evaluate_unchecked(ii, x, y))
            })
            .collect();
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        // the current location is always a candidate, so the list is never empty
        candidates.get(best).copied().unwrap_or(self.location)
    }

    /// Detection scores of every search location, in lattice order.
    pub fn search_scores(&self, frame: &GrayFrame) -> Vec<(BoundingBox, f64)> {
        let ii = IntegralImage::new(frame);
        search_locations(&self.location, self.frame_w, self.frame_h, &self.config.sampling)
            .into_iter()
            .map(|b| {
                let (x, y) = (b.x as u32, b.y as u32);
                let s = self.refined.score_with(&self.weak, |id| {
                    self.features.features[id].evaluate_unchecked(&ii, x, y)
                });
                (b, s)
            })
            .collect()
    }

    fn instances(&self, ii: &IntegralImage, locations: Vec<BoundingBox>) -> Result<Vec<Instance>> {
        locations
            .into_par_iter()
            .map(|location| {
                Ok(Instance {
                    features: self.features.evaluate_all(ii, &location)?,
                    location,
                })
            })
            .collect()
    }

    fn train(&mut self, ii: &IntegralImage) -> Result<()> {
        let cfg = &self.config;
        let positives = positive_locations(&self.location, self.frame_w, self.frame_h, &cfg.sampling)?;
        let negatives = negative_locations(
            &self.location,
            self.frame_w,
            self.frame_h,
            &cfg.sampling,
            &mut self.sample_rng,
        )?;
        let mut positive = Bag::positive(self.instances(ii, positives)?)?;
        let negative_bags = Bag::singleton_negatives(self.instances(ii, negatives)?);
        let shared: Vec<Bag> = subsample(&negative_bags, cfg.sampling.neg_train_count, &mut self.subsample_rng)?
            .into_iter()
            .cloned()
            .collect();

        self.stages.clear();

        let rows: Vec<&[f64]> = positive
            .instances
            .iter()
            .chain(shared.iter().map(|b| &b.instances[0]))
            .map(|i| i.features.as_slice())
            .collect();
        let labels: Vec<bool> = (0..rows.len()).map(|i| i < positive.len()).collect();
        self.weak.update(&rows, &labels)?;
        self.pool_updates += 1;
        self.stages.push(TrainingStage::PoolUpdate);

        self.ensemble = train_ensemble(
            &self.weak,
            &positive,
            &negative_bags,
            cfg.ensemble_size,
            cfg.sampling.neg_train_count,
            cfg.num_select,
            &mut self.subsample_rng,
        )?;
        self.stages.push(TrainingStage::EnsembleTraining);

        let estimate = estimate_bag(&self.ensemble, &self.weak, &positive, cfg.prior)?;
        positive.significance = Some(estimate.clone());
        self.significance = Some(estimate);
        self.stages.push(TrainingStage::SignificanceEstimation);

        let mut bags = Vec::with_capacity(shared.len() + 1);
        bags.push(positive);
        bags.extend(shared);
        self.refined = select_refined(&self.weak, &bags, cfg.num_select, &cfg.alpha)?;
        self.stages.push(TrainingStage::RefinedSelection);
        Ok(())
    }

    pub fn location(&self) -> BoundingBox {
        self.location
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn feature_pool(&self) -> &FeaturePool {
        &self.features
    }

    pub fn weak_pool(&self) -> &WeakPool {
        &self.weak
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    /// The refined classifier `H_e` used for detection.
    pub fn refined(&self) -> &StrongClassifier {
        &self.refined
    }

    /// Significance of the most recent positive bag.
    pub fn significance(&self) -> Option<&SignificanceEstimate> {
        self.significance.as_ref()
    }

    /// Stages of the most recent training pass.
    pub fn stages(&self) -> &[TrainingStage] {
        &self.stages
    }

    /// Weak-pool updates performed since init (one per frame).
    pub fn pool_updates(&self) -> usize {
        self.pool_updates
    }
}

/// Tracks through `frames`; the first box is `gt_first`.
pub fn run<I>(frames: I, gt_first: BoundingBox, config: TrackerConfig) -> Result<Vec<BoundingBox>>
where
    I: IntoIterator<Item = Result<GrayFrame>>,
{
    let at = |index: usize| {
        move |e: Error| Error::AtFrame {
            index,
            source: Box::new(e),
        }
    };
    let mut frames = frames.into_iter();
    let first = frames.next().ok_or(Error::Empty("frame sequence"))?.map_err(at(0))?;
    let mut tracker = Tracker::init(&first, gt_first, config).map_err(at(0))?;
    let mut boxes = vec![gt_first];
    for (i, frame) in frames.enumerate() {
        let frame = frame.map_err(at(i + 1))?;
        boxes.push(tracker.step(&frame).map_err(at(i + 1))?);
    }
    Ok(boxes)
}
