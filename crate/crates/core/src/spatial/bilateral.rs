use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralParams {
    /// Window side is `2 * half_width + 1`.
    pub half_width: usize,
    /// Horizontal spatial standard deviation, pixels.
    pub sigma_sx: f64,
    /// Vertical spatial standard deviation, pixels.
    pub sigma_sy: f64,
    /// Range (intensity) standard deviation, HU.
    pub sigma_r: f64,
}

impl Default for BilateralParams {
    fn default() -> Self {
        Self {
            half_width: 2,
            sigma_sx: 0.3,
            sigma_sy: 0.3,
            sigma_r: 50.0,
        }
    }
}

impl BilateralParams {
    pub fn validate(&self) -> Result<()> {
        if self.half_width < 1 {
            return Err(Error::InvalidParams("bf: half_width must be >= 1".into()));
        }
        for (name, v) in [
            ("sigma_sx", self.sigma_sx),
            ("sigma_sy", self.sigma_sy),
            ("sigma_r", self.sigma_r),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "bf: {name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Edge-preserving smoothing: each neighbour in the window is weighted by
/// `exp(-dx²/2σx² - dy²/2σy²) · exp(-(I(q)-I(p))²/2σr²)`.
pub fn bilateral(img: &Image, p: &BilateralParams) -> Image {
    debug_assert!(p.validate().is_ok());
    let r = p.half_width as isize;
    let side = 2 * p.half_width + 1;
    // spatial exponents, row-major over (dy, dx)
    let mut spatial = Vec::with_capacity(side * side);
    for dy in -r..=r {
        for dx in -r..=r {
            let (fx, fy) = (dx as f64, dy as f64);
            spatial.push(fx * fx / (2.0 * p.sigma_sx * p.sigma_sx) + fy * fy / (2.0 * p.sigma_sy * p.sigma_sy));
        }
    }
    let range_scale = 1.0 / (2.0 * p.sigma_r * p.sigma_r);
    let (w, h) = (img.width(), img.height());
    let mut out = vec![0.0; w * h];

    for y in 0..h {
        for x in 0..w {
            let c = img.get(x, y);
            let mut wsum = 0.0;
            let mut acc = 0.0;
            let mut k = 0;
            for dy in -r..=r {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                let row = &img.pixels()[yy * w..(yy + 1) * w];
                for dx in -r..=r {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    let d = row[xx] - c;
                    let wt = (-(spatial[k] + d * d * range_scale)).exp();
                    wsum += wt;
                    acc += wt * d;
                    k += 1;
                }
            }
            // wsum >= 1 because the centre tap has weight exp(0)
            out[y * w + x] = c + acc / wsum;
        }
    }
    Image::from_filtered(img, out)
}
