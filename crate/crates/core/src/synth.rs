//! Seeded synthetic sequences: a checkerboard square wandering over a
//! mid-gray background, with additive Gaussian pixel noise.

use image::{GrayImage, Luma};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, GrayFrame};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub frames: usize,
    pub width: u32,
    pub height: u32,
    /// Side of the square target.
    pub target: u32,
    /// Side of one checkerboard cell.
    pub cell: u32,
    /// Largest per-frame displacement (Euclidean, pixels).
    pub walk_step: f64,
    /// Noise standard deviation on the `[0, 1]` intensity scale.
    pub noise_sigma: f64,
    /// Closest the target may come to the frame border.
    pub margin: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            frames: 200,
            width: 320,
            height: 240,
            target: 32,
            cell: 8,
            walk_step: 5.0,
            noise_sigma: 5.0 / 255.0,
            margin: 8,
            seed: 0,
        }
    }
}

pub const BACKGROUND: f64 = 0.5;
pub const DARK: f64 = 0.15;
pub const LIGHT: f64 = 0.85;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSequence {
    pub frames: Vec<GrayImage>,
    pub ground_truth: Vec<BoundingBox>,
}

impl SyntheticSequence {
    pub fn gray_frames(&self) -> impl Iterator<Item = Result<GrayFrame>> + '_ {
        self.frames.iter().map(GrayFrame::from_luma8)
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticSequence> {
    if cfg.frames == 0 {
        return Err(Error::Config("synthetic sequence needs at least one frame".into()));
    }
    if cfg.cell == 0 || cfg.target == 0 {
        return Err(Error::Config("target and cell sizes must be positive".into()));
    }
    let span = cfg.target + 2 * cfg.margin;
    if span > cfg.width || span > cfg.height {
        return Err(Error::Config(format!(
            "a {}px target with {}px margin does not fit a {}x{} frame",
            cfg.target, cfg.margin, cfg.width, cfg.height
        )));
    }
    if !(cfg.walk_step >= 0.0 && cfg.noise_sigma >= 0.0) {
        return Err(Error::Config("walk step and noise must be non-negative".into()));
    }
    let noise = Normal::new(0.0, cfg.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = stream_rng(cfg.seed, Stream::Synthetic);

    let (lo_x, hi_x) = (cfg.margin as i32, (cfg.width - cfg.target - cfg.margin) as i32);
    let (lo_y, hi_y) = (cfg.margin as i32, (cfg.height - cfg.target - cfg.margin) as i32);
    let reach = cfg.walk_step.floor() as i32;
    let mut pos = BoundingBox::new(
        (cfg.width - cfg.target) as i32 / 2,
        (cfg.height - cfg.target) as i32 / 2,
        cfg.target,
        cfg.target,
    );

    let mut frames = Vec::with_capacity(cfg.frames);
    let mut ground_truth = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        if t > 0 && reach > 0 {
            pos = loop {
                let dx = rng.random_range(-reach..=reach);
                let dy = rng.random_range(-reach..=reach);
                if f64::from(dx * dx + dy * dy) > cfg.walk_step * cfg.walk_step {
                    continue;
                }
                let next = pos.translated(dx, dy);
                if (lo_x..=hi_x).contains(&next.x) && (lo_y..=hi_y).contains(&next.y) {
                    break next;
                }
            };
        }
        frames.push(render(cfg, &pos, &noise, &mut rng));
        ground_truth.push(pos);
    }
    Ok(SyntheticSequence { frames, ground_truth })
}

fn render<R: Rng + ?Sized>(cfg: &SynthConfig, pos: &BoundingBox, noise: &Normal<f64>, rng: &mut R) -> GrayImage {
    GrayImage::from_fn(cfg.width, cfg.height, |x, y| {
        let (lx, ly) = (x as i32 - pos.x, y as i32 - pos.y);
        let base = if lx >= 0 && ly >= 0 && (lx as u32) < cfg.target && (ly as u32) < cfg.target {
            if ((lx as u32 / cfg.cell) + (ly as u32 / cfg.cell)).is_multiple_of(2) {
                LIGHT
            } else {
                DARK
            }
        } else {
            BACKGROUND
        };
        let v = if cfg.noise_sigma > 0.0 {
            base + noise.sample(rng)
        } else {
            base
        };
        Luma([(v.clamp(0.0, 1.0) * 255.0).round() as u8])
    })
}
