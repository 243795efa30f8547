//! Synthetic high/low technique pairs with known noise.
//!
//! Both images share one noiseless signal and carry independent Gaussian
//! noise, variance `σ_h²` for the high image and `R·σ_h²` for the low one.
//! All values are snapped to a 2⁻²⁰ HU lattice, which makes
//! `high = clean + noise_high` and `high - clean = noise_high` exact in
//! binary64.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{subtract, Image, Meta, Roi};
use crate::metrics::ScanPair;
use crate::rng::{Gaussian, GOLDEN_GAMMA};

/// Soft-tissue level used for uniform regions, HU.
pub const TISSUE_HU: f64 = 40.0;
const AIR_HU: f64 = -1000.0;
const BODY_HU: f64 = 50.0;
const LUNG_HU: f64 = -800.0;
/// Side of the uniform analysis patch in the chest phantom.
const PATCH_SIDE: usize = 200;
const DEFAULT_ROI_SIDE: usize = 128;
/// mAs assigned to the low-technique image; the high image gets `R` times this.
pub const LOW_MAS: f64 = 5.0;

const LATTICE: f64 = (1u64 << 20) as f64;

#[inline]
fn snap(v: f64) -> f64 {
    (v * LATTICE).round() / LATTICE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Signal {
    /// Constant soft-tissue level.
    Uniform,
    /// Horizontal linear ramp rising by `amplitude` HU across the ROI,
    /// continued over the whole image.
    Ramp { amplitude: f64 },
    /// Air background, body and lung ellipses, and a uniform patch hosting
    /// the ROI; `ramp` HU of horizontal ramp across the patch.
    Chest { ramp: f64 },
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Uniform => f.write_str("uniform"),
            Signal::Ramp { amplitude } => write!(f, "ramp:{}", crate::format::param(*amplitude)),
            Signal::Chest { ramp } if *ramp == 0.0 => f.write_str("chest"),
            Signal::Chest { ramp } => write!(f, "chest:{}", crate::format::param(*ramp)),
        }
    }
}

impl FromStr for Signal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        let amount = |default: Option<f64>| -> Result<f64> {
            match (arg, default) {
                ("", Some(d)) => Ok(d),
                _ => arg
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::InvalidParams(format!("bad signal amplitude in `{s}`"))),
            }
        };
        match name {
            "uniform" if arg.is_empty() => Ok(Signal::Uniform),
            "ramp" => Ok(Signal::Ramp { amplitude: amount(None)? }),
            "chest" => Ok(Signal::Chest { ramp: amount(Some(0.0))? }),
            _ => Err(Error::InvalidParams(format!("unknown signal `{s}`"))),
        }
    }
}

impl TryFrom<String> for Signal {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Signal> for String {
    fn from(s: Signal) -> String {
        s.to_string()
    }
}

/// Noise texture: optional smoothing that correlates neighbouring noise samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Texture {
    /// 3x3 binomial kernel `[1 2 1]ᵀ[1 2 1] / 16`.
    #[serde(rename = "k3")]
    K3,
}

impl Texture {
    fn kernel(self) -> [[f64; 3]; 3] {
        match self {
            Texture::K3 => {
                let k = [0.25, 0.5, 0.25];
                let mut out = [[0.0; 3]; 3];
                for (i, row) in out.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = k[i] * k[j];
                    }
                }
                out
            }
        }
    }
}

impl FromStr for Texture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k3" => Ok(Texture::K3),
            _ => Err(Error::InvalidParams(format!("unknown texture `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomParams {
    pub width: usize,
    pub height: usize,
    /// Noise standard deviation of the high-technique image, HU.
    pub sigma_high: f64,
    /// Target variance ratio `σ_l² / σ_h²`.
    pub ratio: f64,
    /// Analysis region; defaults to a 128x128 square centred in the signal region.
    #[serde(default)]
    pub roi: Option<Roi>,
    pub signal: Signal,
    #[serde(default)]
    pub texture: Option<Texture>,
    pub seed: u64,
}

impl PhantomParams {
    /// Uniform signal, white noise, default ROI.
    pub fn uniform(width: usize, height: usize, sigma_high: f64, ratio: f64, seed: u64) -> Self {
        Self {
            width,
            height,
            sigma_high,
            ratio,
            roi: None,
            signal: Signal::Uniform,
            texture: None,
            seed,
        }
    }

    /// Region the ROI must fall inside.
    pub fn signal_region(&self) -> Roi {
        match self.signal {
            Signal::Chest { .. } => {
                let side = PATCH_SIDE.min(self.width / 2).min(self.height / 2).max(2);
                let cx = self.width / 2 + self.width / 10;
                let cy = self.height / 2 + self.height / 20;
                Roi::new(
                    cx.saturating_sub(side / 2).min(self.width - side),
                    cy.saturating_sub(side / 2).min(self.height - side),
                    side,
                    side,
                )
            }
            _ => Roi::new(0, 0, self.width, self.height),
        }
    }

    pub fn effective_roi(&self) -> Roi {
        self.roi.unwrap_or_else(|| {
            let region = self.signal_region();
            let side = DEFAULT_ROI_SIDE.min(region.w).min(region.h);
            let inner = Roi::centered(region.w, region.h, side, side);
            Roi::new(region.x + inner.x, region.y + inner.y, side, side)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.width < 2 || self.height < 2 {
            return bad(format!("phantom extent {}x{} too small", self.width, self.height));
        }
        if !(self.sigma_high.is_finite() && self.sigma_high > 0.0) {
            return bad(format!("sigma_high must be finite and > 0, got {}", self.sigma_high));
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return bad(format!("ratio must be finite and > 0, got {}", self.ratio));
        }
        let roi = self.effective_roi();
        roi.validate(self.width, self.height)?;
        let region = self.signal_region();
        let inside = roi.x >= region.x
            && roi.y >= region.y
            && roi.x + roi.w <= region.x + region.w
            && roi.y + roi.h <= region.y + region.h;
        if !inside {
            return bad(format!("ROI {roi} leaves the uniform signal region {region}"));
        }
        Ok(())
    }

    fn clean_value(&self, x: usize, y: usize, roi: &Roi) -> f64 {
        let (fx, fy) = (x as f64, y as f64);
        match self.signal {
            Signal::Uniform => TISSUE_HU,
            Signal::Ramp { amplitude } => {
                let span = (roi.w.max(2) - 1) as f64;
                TISSUE_HU + amplitude * (fx - roi.x as f64) / span
            }
            Signal::Chest { ramp } => {
                let patch = self.signal_region();
                if patch.contains(x, y) {
                    let span = (patch.w.max(2) - 1) as f64;
                    return TISSUE_HU + ramp * (fx - patch.x as f64) / span;
                }
                let (w, h) = (self.width as f64, self.height as f64);
                let in_ellipse = |cx: f64, cy: f64, ax: f64, ay: f64| {
                    let (dx, dy) = ((fx - cx) / ax, (fy - cy) / ay);
                    dx * dx + dy * dy <= 1.0
                };
                if in_ellipse(0.28 * w, 0.40 * h, 0.12 * w, 0.18 * h) {
                    LUNG_HU
                } else if in_ellipse(0.5 * w, 0.5 * h, 0.46 * w, 0.38 * h) {
                    BODY_HU
                } else {
                    AIR_HU
                }
            }
        }
    }

    fn noise_field(&self, seed: u64, sigma: f64) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        let mut g = Gaussian::new(seed);
        let white: Vec<f64> = (0..w * h).map(|_| g.next()).collect();
        let unit = match self.texture {
            None => white,
            Some(t) => {
                let k = t.kernel();
                // white noise through the kernel has variance Σk²
                let gain = 1.0 / k.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                let mut out = vec![0.0; w * h];
                for y in 0..h {
                    for x in 0..w {
                        let mut acc = 0.0;
                        for (dy, row) in k.iter().enumerate() {
                            let yy = (y as isize + dy as isize - 1).clamp(0, h as isize - 1) as usize;
                            for (dx, kv) in row.iter().enumerate() {
                                let xx = (x as isize + dx as isize - 1).clamp(0, w as isize - 1) as usize;
                                acc += kv * white[yy * w + xx];
                            }
                        }
                        out[y * w + x] = acc * gain;
                    }
                }
                out
            }
        };
        unit.into_iter().map(|z| snap(sigma * z)).collect()
    }
}

/// The noiseless signal and the exact noise that went into a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub clean: Image,
    pub noise_high: Image,
    pub noise_low: Image,
    pub true_ratio: f64,
}

pub fn generate_pair(p: &PhantomParams) -> Result<(ScanPair, GroundTruth)> {
    p.validate()?;
    let roi = p.effective_roi();
    let (w, h) = (p.width, p.height);
    let clean = Image::from_fn(w, h, |x, y| snap(p.clean_value(x, y, &roi)))?;
    let noise_high = Image::new(w, h, p.noise_field(p.seed, p.sigma_high))?;
    let noise_low = Image::new(w, h, p.noise_field(p.seed ^ GOLDEN_GAMMA, p.sigma_high * p.ratio.sqrt()))?;

    let tag = |which: &str| format!("phantom-{}-{which}", p.seed);
    let high = crate::image::add(&clean, &noise_high)?.with_meta(Meta {
        mas: Some(LOW_MAS * p.ratio),
        slice_id: Some(tag("high")),
    });
    let low = crate::image::add(&clean, &noise_low)?.with_meta(Meta {
        mas: Some(LOW_MAS),
        slice_id: Some(tag("low")),
    });
    let pair = ScanPair::new(format!("phantom-{}", p.seed), high, low, roi, None)?;
    Ok((
        pair,
        GroundTruth {
            clean,
            noise_high,
            noise_low,
            true_ratio: p.ratio,
        },
    ))
}

/// Residuals of an ideal filter that recovers the clean signal exactly.
pub fn oracle_residual(pair: &ScanPair, gt: &GroundTruth) -> Result<(Image, Image)> {
    if !pair.high.same_dims(&gt.clean) || !pair.low.same_dims(&gt.clean) {
        return Err(Error::Mismatch);
    }
    let high = subtract(&pair.high, &gt.clean)?;
    let low = subtract(&pair.low, &gt.clean)?;
    if high.pixels() != gt.noise_high.pixels() || low.pixels() != gt.noise_low.pixels() {
        return Err(Error::Mismatch);
    }
    Ok((high, low))
}

/// Binary mask of the ROI (1 inside, 0 outside).
pub fn roi_mask(width: usize, height: usize, roi: &Roi) -> Result<Image> {
    Image::from_fn(width, height, |x, y| if roi.contains(x, y) { 1.0 } else { 0.0 })
}
