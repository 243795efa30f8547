//! Blind noise estimation metrics.
//!
//! A filter splits each image of a high/low technique pair into a signal
//! estimate and a residual. The residual ROI variances give the blind noise
//! ratio `R_blind = σ_l² / σ_h²`, which should match the dose ratio
//! `R_the = mAs_high / mAs_low`. The cost
//!
//! ```text
//! θ = (1 - R_blind / R_the)² + β·M
//! M = ½ (MAE(I_o,1, I_f,1) + MAE(I_o,2, I_f,2))
//! ```
//!
//! trades ratio accuracy against the bias `M` the filter introduces, with `M`
//! measured on window-normalized intensities over the whole image.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::FilterSpec;
use crate::image::{normalize_hu, roi_variance, subtract, Image, Roi};

/// Residual variances at or below this are treated as zero.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

/// β values swept by default.
pub const DEFAULT_BETAS: [f64; 6] = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];

/// Registered high- and low-technique acquisitions of the same slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPair {
    pub id: String,
    /// Index 1 of the bias term.
    pub high: Image,
    /// Index 2 of the bias term.
    pub low: Image,
    pub roi: Roi,
    pub rthe_override: Option<f64>,
}

impl ScanPair {
    pub fn new(id: impl Into<String>, high: Image, low: Image, roi: Roi, rthe_override: Option<f64>) -> Result<Self> {
        if !high.same_dims(&low) {
            return Err(Error::DimensionMismatch(high.width(), high.height(), low.width(), low.height()));
        }
        roi.validate(high.width(), high.height())?;
        if let Some(r) = rthe_override {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParams(format!("R_the override must be > 0, got {r}")));
            }
        }
        Ok(Self {
            id: id.into(),
            high,
            low,
            roi,
            rthe_override,
        })
    }
}

/// Theoretical variance ratio: the override if present, else `mAs_high / mAs_low`.
pub fn compute_r_the(pair: &ScanPair) -> Result<f64> {
    if let Some(r) = pair.rthe_override {
        return Ok(r);
    }
    match (pair.high.meta().mas, pair.low.meta().mas) {
        (Some(h), Some(l)) if h > 0.0 && l > 0.0 && h.is_finite() && l.is_finite() => Ok(h / l),
        _ => Err(Error::MissingDose),
    }
}

/// `σ_l² / σ_h²`.
pub fn r_blind(sigma2_low: f64, sigma2_high: f64) -> Result<f64> {
    if !(sigma2_high > DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateHighVariance(sigma2_high));
    }
    Ok(sigma2_low / sigma2_high)
}

fn mae_normalized(original: &Image, filtered: &Image) -> Result<f64> {
    if !original.same_dims(filtered) {
        return Err(Error::DimensionMismatch(
            original.width(),
            original.height(),
            filtered.width(),
            filtered.height(),
        ));
    }
    let mut sum = 0.0;
    for (&o, &f) in original.pixels().iter().zip(filtered.pixels()) {
        sum += (normalize_hu(o) - normalize_hu(f)).abs();
    }
    Ok(sum / original.len() as f64)
}

/// Mean absolute error between originals and filtered images, averaged over
/// the pair. Each term is a row-major sequential sum of
/// `|norm(I_o) - norm(I_f)|` divided by the pixel count.
pub fn mean_abs_error(pair: &ScanPair, filtered_high: &Image, filtered_low: &Image) -> Result<f64> {
    let high = mae_normalized(&pair.high, filtered_high)?;
    let low = mae_normalized(&pair.low, filtered_low)?;
    Ok(0.5 * (high + low))
}

/// `(1 - ratio_of_ratios)² + β·m`.
#[inline]
pub fn theta(ratio_of_ratios: f64, m: f64, beta: f64) -> f64 {
    let e = 1.0 - ratio_of_ratios;
    e * e + beta * m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaTheta {
    pub beta: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseEstimate {
    pub sigma2_high: f64,
    pub sigma2_low: f64,
    pub r_blind: f64,
    pub r_the: f64,
    pub ratio_of_ratios: f64,
    pub m: f64,
    pub theta_by_beta: Vec<BetaTheta>,
}

impl NoiseEstimate {
    pub fn theta_at(&self, beta: f64) -> f64 {
        theta(self.ratio_of_ratios, self.m, beta)
    }
}

/// Everything that can be measured before forming the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub sigma2_high: f64,
    pub sigma2_low: f64,
    pub r_the: f64,
    pub m: f64,
}

impl ResidualStats {
    /// Forms the ratios and θ values; fails when the high residual is degenerate.
    pub fn finish(&self, betas: &[f64]) -> Result<NoiseEstimate> {
        let rb = r_blind(self.sigma2_low, self.sigma2_high)?;
        let ratio = rb / self.r_the;
        Ok(NoiseEstimate {
            sigma2_high: self.sigma2_high,
            sigma2_low: self.sigma2_low,
            r_blind: rb,
            r_the: self.r_the,
            ratio_of_ratios: ratio,
            m: self.m,
            theta_by_beta: betas
                .iter()
                .map(|&beta| BetaTheta {
                    beta,
                    theta: theta(ratio, self.m, beta),
                })
                .collect(),
        })
    }
}

/// Filters both images with `spec` and measures residual ROI variances and
/// the bias term. `FilterSpec::None` gives the pre-filter baseline.
pub fn residual_stats(pair: &ScanPair, spec: &FilterSpec) -> Result<ResidualStats> {
    let r_the = compute_r_the(pair)?;
    if let FilterSpec::None = spec {
        return Ok(ResidualStats {
            sigma2_high: roi_variance(&pair.high, &pair.roi)?,
            sigma2_low: roi_variance(&pair.low, &pair.roi)?,
            r_the,
            m: 0.0,
        });
    }
    let filtered_high = spec.apply(&pair.high)?;
    let filtered_low = spec.apply(&pair.low)?;
    let residual_high = subtract(&pair.high, &filtered_high)?;
    let residual_low = subtract(&pair.low, &filtered_low)?;
    Ok(ResidualStats {
        sigma2_high: roi_variance(&residual_high, &pair.roi)?,
        sigma2_low: roi_variance(&residual_low, &pair.roi)?,
        r_the,
        m: mean_abs_error(pair, &filtered_high, &filtered_low)?,
    })
}

pub fn estimate(pair: &ScanPair, spec: &FilterSpec, betas: &[f64]) -> Result<NoiseEstimate> {
    residual_stats(pair, spec)?.finish(betas)
}

/// Pre-filter estimate: variances of the original ROI pixels and `M = 0`.
pub fn baseline_estimate(pair: &ScanPair, betas: &[f64]) -> Result<NoiseEstimate> {
    estimate(pair, &FilterSpec::None, betas)
}
