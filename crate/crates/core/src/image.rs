//! Scalar CT slices in Hounsfield units and the region statistics computed on them.
//!
//! Pixels are held as `f64` in memory. The on-disk container stores binary32, so
//! anything loaded from disk is exactly representable and survives a save/load
//! cycle bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower edge of the intensity window used for normalized quantities, in HU.
pub const WINDOW_MIN_HU: f64 = -1024.0;
/// Width of the intensity window, in HU. `[-1024, 3072]` maps onto `[0, 1]`.
pub const WINDOW_WIDTH_HU: f64 = 4096.0;

/// Maps HU onto the `[0, 1]` window `[-1024, 3072]`.
#[inline]
pub fn normalize_hu(hu: f64) -> f64 {
    (hu - WINDOW_MIN_HU) / WINDOW_WIDTH_HU
}

/// Inverse of [`normalize_hu`].
#[inline]
pub fn denormalize_hu(u: f64) -> f64 {
    u * WINDOW_WIDTH_HU + WINDOW_MIN_HU
}

/// Acquisition metadata carried alongside the pixels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    /// Tube current time product in mAs.
    pub mas: Option<f64>,
    pub slice_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    meta: Meta,
}

impl Image {
    /// Builds an image from row-major pixels, rejecting empty extents,
    /// length mismatches and non-finite values.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "extent {width}x{height} must be at least 1x1"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        if let Some(i) = pixels.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinitePixel(i));
        }
        Ok(Self {
            width,
            height,
            pixels,
            meta: Meta::default(),
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Evaluates `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Filter outputs go through here; finite inputs keep every filter finite.
    pub(crate) fn from_filtered(src: &Image, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), src.pixels.len());
        debug_assert!(pixels.iter().all(|v| v.is_finite()));
        Self {
            width: src.width,
            height: src.height,
            pixels,
            meta: src.meta.clone(),
        }
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut Meta {
        &mut self.meta
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with replicate-edge extension.
    #[inline]
    pub(crate) fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[yc * self.width + xc]
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    fn check_dims(&self, other: &Image) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Image> {
        let pixels = self.pixels.iter().map(|&v| f(v)).collect();
        Ok(Image::new(self.width, self.height, pixels)?.with_meta(self.meta.clone()))
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().sum()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Pixelwise `a - b`; metadata is taken from `a`.
pub fn subtract(a: &Image, b: &Image) -> Result<Image> {
    a.check_dims(b)?;
    let pixels = a.pixels.iter().zip(&b.pixels).map(|(x, y)| x - y).collect();
    Ok(Image::new(a.width, a.height, pixels)?.with_meta(a.meta.clone()))
}

/// Pixelwise `a + b`; metadata is taken from `a`.
pub fn add(a: &Image, b: &Image) -> Result<Image> {
    a.check_dims(b)?;
    let pixels = a.pixels.iter().zip(&b.pixels).map(|(x, y)| x + y).collect();
    Ok(Image::new(a.width, a.height, pixels)?.with_meta(a.meta.clone()))
}

/// Axis-aligned rectangle, top-left corner plus extent, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Roi {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    /// A `w`x`h` rectangle centered in a `width`x`height` image.
    pub fn centered(width: usize, height: usize, w: usize, h: usize) -> Self {
        Self {
            x: width.saturating_sub(w) / 2,
            y: height.saturating_sub(h) / 2,
            w: w.min(width),
            h: h.min(height),
        }
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x
            .checked_add(self.w)
            .is_some_and(|right| right <= width)
            && self.y
                .checked_add(self.h)
                .is_some_and(|bottom| bottom <= height)
    }

    /// At least two pixels and fully inside a `width`x`height` image.
    pub fn validate(&self, width: usize, height: usize) -> Result<()> {
        if self.area() < 2 || !self.fits(width, height) {
            return Err(Error::RoiOutOfBounds {
                x: self.x,
                y: self.y,
                w: self.w,
                h: self.h,
                width,
                height,
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    /// Row-major iterator over the ROI pixels of `img`.
    pub fn values<'a>(&self, img: &'a Image) -> impl Iterator<Item = f64> + 'a {
        let Roi { x, y, w, h } = *self;
        (y..y + h).flat_map(move |row| img.pixels[row * img.width + x..row * img.width + x + w].iter().copied())
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

impl std::fmt::Display for Roi {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{},{}", self.x, self.y, self.w, self.h)
    }
}

impl std::str::FromStr for Roi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::InvalidParams(format!("ROI `{s}` is not x,y,w,h")))?;
        match parts[..] {
            [x, y, w, h] => Ok(Roi { x, y, w, h }),
            _ => Err(Error::InvalidParams(format!("ROI `{s}` is not x,y,w,h"))),
        }
    }
}

/// Unbiased (N-1) sample variance of the ROI pixels, two-pass.
pub fn roi_variance(img: &Image, roi: &Roi) -> Result<f64> {
    roi.validate(img.width, img.height)?;
    let n = roi.area() as f64;
    let mean = roi.values(img).sum::<f64>() / n;
    let ss: f64 = roi.values(img).map(|v| (v - mean) * (v - mean)).sum();
    Ok(ss / (n - 1.0))
}

pub fn roi_mean(img: &Image, roi: &Roi) -> Result<f64> {
    roi.validate(img.width, img.height)?;
    Ok(roi.values(img).sum::<f64>() / roi.area() as f64)
}
