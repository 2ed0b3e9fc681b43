//! Training and search locations on the integer lattice around the object.
//!
//! Distances are measured between top-left corners. Boxes that would leave
//! the frame are dropped.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    /// Positives satisfy `d < pos_radius`.
    pub pos_radius: f64,
    /// Negatives satisfy `neg_inner < d < neg_outer`.
    pub neg_inner: f64,
    pub neg_outer: f64,
    /// Negatives drawn per frame.
    pub neg_count: usize,
    /// Negatives each learner trains on.
    pub neg_train_count: usize,
    /// Detection candidates satisfy `d < search_radius`.
    pub search_radius: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            pos_radius: 4.0,
            neg_inner: 4.0,
            neg_outer: 50.0,
            neg_count: 200,
            neg_train_count: 50,
            search_radius: 25.0,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pos_radius > 0.0 && self.pos_radius <= self.neg_inner && self.neg_inner < self.neg_outer) {
            return Err(Error::Config(format!(
                "radii must satisfy 0 < pos_radius ({}) <= neg_inner ({}) < neg_outer ({})",
                self.pos_radius, self.neg_inner, self.neg_outer
            )));
        }
        if self.search_radius <= 0.0 {
            return Err(Error::Config(format!(
                "search radius {} must be positive",
                self.search_radius
            )));
        }
        if self.neg_train_count == 0 || self.neg_train_count > self.neg_count {
            return Err(Error::Config(format!(
                "training negatives ({}) must be in 1..={} (negatives per frame)",
                self.neg_train_count, self.neg_count
            )));
        }
        Ok(())
    }
}

/// Row-major offsets with `inner < d < outer` (the inner bound is dropped when
/// `inner` is `None`).
fn lattice(center: &BoundingBox, width: u32, height: u32, inner: Option<f64>, outer: f64) -> Vec<BoundingBox> {
    let reach = outer.ceil() as i32;
    let outer2 = outer * outer;
    let mut out = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let d2 = f64::from(dx * dx + dy * dy);
            if d2 >= outer2 || inner.is_some_and(|r| d2 <= r * r) {
                continue;
            }
            let b = center.translated(dx, dy);
            if b.fits_in(width, height) {
                out.push(b);
            }
        }
    }
    out
}

/// All in-frame boxes strictly within `pos_radius` of `center`.
pub fn positive_locations(
    center: &BoundingBox,
    width: u32,
    height: u32,
    cfg: &SampleConfig,
) -> Result<Vec<BoundingBox>> {
    let out = lattice(center, width, height, None, cfg.pos_radius);
    if out.is_empty() {
        return Err(center.out_of_bounds("positive sampling center", width, height));
    }
    Ok(out)
}

/// `neg_count` distinct annulus locations drawn uniformly, in lattice order.
pub fn negative_locations<R: Rng + ?Sized>(
    center: &BoundingBox,
    width: u32,
    height: u32,
    cfg: &SampleConfig,
    rng: &mut R,
) -> Result<Vec<BoundingBox>> {
    let ring = lattice(center, width, height, Some(cfg.neg_inner), cfg.neg_outer);
    Ok(subsample(&ring, cfg.neg_count, rng)?.into_iter().copied().collect())
}

/// Detection candidates: in-frame boxes strictly within `search_radius`.
pub fn search_locations(center: &BoundingBox, width: u32, height: u32, cfg: &SampleConfig) -> Vec<BoundingBox> {
    lattice(center, width, height, None, cfg.search_radius)
}

/// Uniform draw of `count` distinct items, returned in their original order.
pub fn subsample<'a, T, R: Rng + ?Sized>(items: &'a [T], count: usize, rng: &mut R) -> Result<Vec<&'a T>> {
    if count > items.len() {
        return Err(Error::InsufficientSamples {
            requested: count,
            available: items.len(),
        });
    }
    let mut picked = index::sample(rng, items.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| &items[i]).collect())
}

/// The per-learner negative subsample (`neg_train_count` of the frame's negatives).
pub fn training_negative_subsample<'a, T, R: Rng + ?Sized>(
    negatives: &'a [T],
    cfg: &SampleConfig,
    rng: &mut R,
) -> Result<Vec<&'a T>> {
    subsample(negatives, cfg.neg_train_count, rng)
}
