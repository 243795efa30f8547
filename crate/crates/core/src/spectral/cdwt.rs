use std::fmt;
use std::str::FromStr;

use super::dtcwt::{dtcwt_forward, dtcwt_inverse, LEVELS};
use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdMode {
    /// Zero coefficients whose magnitude is below the threshold.
    #[default]
    Hard,
    /// Shrink magnitudes by the threshold, zeroing those below it.
    Soft,
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::Hard => "hard",
            ThresholdMode::Soft => "soft",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hard" => Ok(ThresholdMode::Hard),
            "soft" => Ok(ThresholdMode::Soft),
            _ => Err(Error::InvalidParams(format!("unknown threshold mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdwtParams {
    /// Coefficient magnitude threshold, HU.
    pub threshold: f64,
    /// Always [`LEVELS`].
    pub levels: usize,
    pub mode: ThresholdMode,
}

impl Default for CdwtParams {
    fn default() -> Self {
        Self {
            threshold: 150.0,
            levels: LEVELS,
            mode: ThresholdMode::Hard,
        }
    }
}

impl CdwtParams {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "cdwt: threshold must be finite and >= 0, got {}",
                self.threshold
            )));
        }
        if self.levels != LEVELS {
            return Err(Error::InvalidParams(format!(
                "cdwt: levels is fixed at {LEVELS}, got {}",
                self.levels
            )));
        }
        Ok(())
    }
}

/// Wavelet shrinkage: threshold every detail coefficient by complex
/// magnitude, leave the lowpass untouched, and resynthesize.
pub fn cdwt_denoise(img: &Image, p: &CdwtParams) -> Image {
    debug_assert!(p.validate().is_ok());
    let mut pyr = dtcwt_forward(img);
    let t = p.threshold;
    for band in pyr.detail_bands_mut() {
        for c in band.data.iter_mut() {
            let mag = c.norm();
            if mag < t {
                *c = Default::default();
            } else if p.mode == ThresholdMode::Soft && mag > 0.0 {
                *c *= (mag - t) / mag;
            }
        }
    }
    let out = dtcwt_inverse(&pyr).expect("pyramid produced by dtcwt_forward is well formed");
    out.with_meta(img.meta().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(CdwtParams::default().validate().is_ok());
        assert!(CdwtParams::with_threshold(-1.0).validate().is_err());
        assert!(CdwtParams::with_threshold(f64::NAN).validate().is_err());
        assert!(CdwtParams { levels: 4, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn constant_survives_any_threshold() {
        let img = Image::filled(24, 16, 40.0).unwrap();
        for t in [0.0, 1.0, 150.0, 1e9] {
            let out = cdwt_denoise(&img, &CdwtParams::with_threshold(t));
            assert!(out.pixels().iter().all(|&v| (v - 40.0).abs() <= 1e-8 * 40.0));
        }
    }

    #[test]
    fn soft_mode_shrinks_more_than_hard() {
        let img = Image::from_fn(32, 32, |x, y| (((x * 7919 + y * 104729) % 97) as f64) - 48.0).unwrap();
        let hard = cdwt_denoise(&img, &CdwtParams::with_threshold(5.0));
        let soft = cdwt_denoise(
            &img,
            &CdwtParams {
                mode: ThresholdMode::Soft,
                ..CdwtParams::with_threshold(5.0)
            },
        );
        let dist = |a: &Image| -> f64 {
            a.pixels().iter().zip(img.pixels()).map(|(p, q)| (p - q).powi(2)).sum()
        };
        assert!(dist(&soft) > dist(&hard));
    }
}
