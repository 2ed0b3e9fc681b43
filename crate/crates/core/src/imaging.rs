//! Grayscale frames, integral images and constant-time rectangle sums.

use std::path::Path;

use image::{DynamicImage, GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Row-major intensities normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayFrame {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayFrame {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimension { width, height });
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(Error::Mismatch {
                expected,
                found: data.len(),
            });
        }
        if let Some(&bad) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Config(format!("pixel intensity {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, data })
    }

    /// A frame where every pixel holds `value`.
    pub fn filled(width: u32, height: u32, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width as usize * height as usize])
    }

    pub fn from_luma8(img: &GrayImage) -> Result<Self> {
        let (width, height) = img.dimensions();
        let data = img.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect();
        Self::new(width, height, data)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Copies out the sub-frame starting at `(x, y)`.
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<Self> {
        if w == 0 || h == 0 || x + w > self.width || y + h > self.height {
            return Err(Error::OutOfBounds {
                what: "crop",
                x: x.into(),
                y: y.into(),
                w,
                h,
                bound_w: self.width,
                bound_h: self.height,
            });
        }
        let mut data = Vec::with_capacity(w as usize * h as usize);
        for row in y..y + h {
            let start = row as usize * self.width as usize + x as usize;
            data.extend_from_slice(&self.data[start..start + w as usize]);
        }
        Self::new(w, h, data)
    }

    /// Multiplies every pixel by `factor`, which must keep values in `[0, 1]`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.width, self.height, self.data.iter().map(|v| v * factor).collect())
    }
}

/// ITU-R 601 luma of an 8-bit RGB image, normalized to `[0, 1]`.
pub fn to_gray(rgb: &RgbImage) -> Result<GrayFrame> {
    let (width, height) = rgb.dimensions();
    if width == 0 || height == 0 {
        return Err(Error::Dimension { width, height });
    }
    let data = rgb
        .pixels()
        .map(|p| {
            let [r, g, b] = p.0;
            // Guard against the weights summing to a hair above 1.
            ((LUMA_R * f64::from(r) + LUMA_G * f64::from(g) + LUMA_B * f64::from(b)) / 255.0).min(1.0)
        })
        .collect();
    GrayFrame::new(width, height, data)
}

/// Converts any decoded image: 8-bit gray is used as is, everything else goes
/// through RGB luma.
pub fn from_dynamic(img: &DynamicImage) -> Result<GrayFrame> {
    match img {
        DynamicImage::ImageLuma8(gray) => GrayFrame::from_luma8(gray),
        other => to_gray(&other.to_rgb8()),
    }
}

pub fn load_frame(path: impl AsRef<Path>) -> Result<GrayFrame> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|source| Error::Decode {
        path: path.display().to_string(),
        source,
    })?;
    from_dynamic(&img)
}

/// Axis-aligned rectangle; placement semantics depend on the owner
/// (patch-relative for Haar parts, frame-absolute for [`IntegralImage::rect_sum`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> u32 {
        self.w * self.h
    }
}

/// Object box in frame coordinates; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
}

impl BoundingBox {
    pub fn new(x: i32, y: i32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    pub fn center(&self) -> (f64, f64) {
        (
            f64::from(self.x) + f64::from(self.w) / 2.0,
            f64::from(self.y) + f64::from(self.h) / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        f64::from(self.w) * f64::from(self.h)
    }

    pub fn translated(&self, dx: i32, dy: i32) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    pub fn fits_in(&self, width: u32, height: u32) -> bool {
        self.w >= 1
            && self.h >= 1
            && self.x >= 0
            && self.y >= 0
            && i64::from(self.x) + i64::from(self.w) <= i64::from(width)
            && i64::from(self.y) + i64::from(self.h) <= i64::from(height)
    }

    pub(crate) fn out_of_bounds(&self, what: &'static str, width: u32, height: u32) -> Error {
        Error::OutOfBounds {
            what,
            x: self.x.into(),
            y: self.y.into(),
            w: self.w,
            h: self.h,
            bound_w: width,
            bound_h: height,
        }
    }
}

/// Summed-area table with a zero border: `S(x, y)` is the sum of all pixels
/// with column `< x` and row `< y`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralImage {
    width: u32,
    height: u32,
    sums: Vec<f64>,
}

impl IntegralImage {
    pub fn new(frame: &GrayFrame) -> Self {
        let (w, h) = (frame.width as usize, frame.height as usize);
        let stride = w + 1;
        let mut sums = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0.0;
            for x in 0..w {
                row_sum += frame.data[y * w + x];
                sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row_sum;
            }
        }
        Self {
            width: frame.width,
            height: frame.height,
            sums,
        }
    }

    /// Width of the source frame.
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Height of the source frame.
    pub fn height(&self) -> u32 {
        self.height
    }

    /// Cumulative sum `S(x, y)`, for `x <= width`, `y <= height`.
    pub fn at(&self, x: u32, y: u32) -> f64 {
        self.sums[y as usize * (self.width as usize + 1) + x as usize]
    }

    pub fn rect_sum(&self, r: Rect) -> Result<f64> {
        if r.w == 0
            || r.h == 0
            || u64::from(r.x) + u64::from(r.w) > u64::from(self.width)
            || u64::from(r.y) + u64::from(r.h) > u64::from(self.height)
        {
            return Err(Error::OutOfBounds {
                what: "rectangle",
                x: r.x.into(),
                y: r.y.into(),
                w: r.w,
                h: r.h,
                bound_w: self.width,
                bound_h: self.height,
            });
        }
        Ok(self.rect_sum_unchecked(r.x, r.y, r.w, r.h))
    }

    /// Caller guarantees the rectangle is in bounds.
    #[inline]
    pub(crate) fn rect_sum_unchecked(&self, x: u32, y: u32, w: u32, h: u32) -> f64 {
        let stride = self.width as usize + 1;
        let (x0, y0) = (x as usize, y as usize);
        let (x1, y1) = (x0 + w as usize, y0 + h as usize);
        self.sums[y1 * stride + x1] - self.sums[y0 * stride + x1] - self.sums[y1 * stride + x0]
            + self.sums[y0 * stride + x0]
    }
}

/// Convenience alias for `IntegralImage::new`.
pub fn build_integral(frame: &GrayFrame) -> IntegralImage {
    IntegralImage::new(frame)
}
