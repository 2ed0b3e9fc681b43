//! Random Haar-like features over a fixed-size patch.
//!
//! Each feature is 2 to 4 weighted rectangles placed relative to the patch
//! origin. Weights are divided by `parts * area` so that a feature's value is a
//! weighted average intensity whose magnitude does not depend on rectangle size.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, IntegralImage, Rect};

pub const MIN_PATCH_SIDE: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarPart {
    pub rect: Rect,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarFeature {
    pub id: usize,
    pub parts: Vec<HaarPart>,
}

impl HaarFeature {
    /// Feature value of the patch whose top-left corner is at `at`.
    pub fn evaluate(&self, ii: &IntegralImage, at: &BoundingBox) -> Result<f64> {
        if !at.fits_in(ii.width(), ii.height()) {
            return Err(at.out_of_bounds("patch", ii.width(), ii.height()));
        }
        if self
            .parts
            .iter()
            .any(|p| p.rect.x + p.rect.w > at.w || p.rect.y + p.rect.h > at.h)
        {
            return Err(at.out_of_bounds("feature rectangle", ii.width(), ii.height()));
        }
        Ok(self.evaluate_unchecked(ii, at.x as u32, at.y as u32))
    }

    #[inline]
    pub(crate) fn evaluate_unchecked(&self, ii: &IntegralImage, x: u32, y: u32) -> f64 {
        self.parts
            .iter()
            .map(|p| p.weight * ii.rect_sum_unchecked(x + p.rect.x, y + p.rect.y, p.rect.w, p.rect.h))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePool {
    pub patch_w: u32,
    pub patch_h: u32,
    pub features: Vec<HaarFeature>,
}

impl FeaturePool {
    pub fn generate<R: Rng + ?Sized>(count: usize, patch_w: u32, patch_h: u32, rng: &mut R) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("feature pool size must be at least 1".into()));
        }
        if patch_w < MIN_PATCH_SIDE || patch_h < MIN_PATCH_SIDE {
            return Err(Error::Config(format!(
                "patch {patch_w}x{patch_h} is smaller than {MIN_PATCH_SIDE}x{MIN_PATCH_SIDE}"
            )));
        }
        let features = (0..count)
            .map(|id| {
                let n_parts = rng.random_range(2..=4usize);
                let parts = (0..n_parts)
                    .map(|_| {
                        let x = rng.random_range(0..patch_w - 1);
                        let y = rng.random_range(0..patch_h - 1);
                        let w = rng.random_range(1..=patch_w - x);
                        let h = rng.random_range(1..=patch_h - y);
                        let rect = Rect::new(x, y, w, h);
                        let raw = loop {
                            let v: f64 = rng.random_range(-1.0..=1.0);
                            if v != 0.0 {
                                break v;
                            }
                        };
                        HaarPart {
                            rect,
                            weight: raw / (n_parts as f64 * f64::from(rect.area())),
                        }
                    })
                    .collect();
                HaarFeature { id, parts }
            })
            .collect();
        Ok(Self {
            patch_w,
            patch_h,
            features,
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Evaluates every feature of the pool at `at`.
    pub fn evaluate_all(&self, ii: &IntegralImage, at: &BoundingBox) -> Result<Vec<f64>> {
        self.check_placement(ii, at)?;
        Ok(self
            .features
            .iter()
            .map(|f| f.evaluate_unchecked(ii, at.x as u32, at.y as u32))
            .collect())
    }

    /// Evaluates a single feature by id, checking only the patch placement.
    pub fn evaluate_one(&self, id: usize, ii: &IntegralImage, at: &BoundingBox) -> Result<f64> {
        self.check_placement(ii, at)?;
        let feature = self.features.get(id).ok_or(Error::Mismatch {
            expected: self.features.len(),
            found: id,
        })?;
        Ok(feature.evaluate_unchecked(ii, at.x as u32, at.y as u32))
    }

    fn check_placement(&self, ii: &IntegralImage, at: &BoundingBox) -> Result<()> {
        if at.w != self.patch_w || at.h != self.patch_h {
            return Err(Error::Config(format!(
                "box {}x{} does not match the {}x{} feature patch",
                at.w, at.h, self.patch_w, self.patch_h
            )));
        }
        if !at.fits_in(ii.width(), ii.height()) {
            return Err(at.out_of_bounds("patch", ii.width(), ii.height()));
        }
        Ok(())
    }
}
