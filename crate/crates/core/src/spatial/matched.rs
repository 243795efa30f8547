use crate::error::{Error, Result};
use crate::image::Image;

/// Gaussian template correlated against the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedFilterParams {
    /// Template side is `2 * half_width + 1`.
    pub half_width: usize,
    /// Template standard deviation in pixels.
    pub sigma_t: f64,
}

impl Default for MatchedFilterParams {
    fn default() -> Self {
        Self {
            half_width: 2,
            sigma_t: 1.0,
        }
    }
}

impl MatchedFilterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_t.is_finite() && self.sigma_t > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mf: sigma_t must be finite and > 0, got {}",
                self.sigma_t
            )));
        }
        Ok(())
    }
}

/// Unit-sum 1-D Gaussian taps for offsets `-half_width..=half_width`.
pub fn gaussian_taps(half_width: usize, sigma: f64) -> Vec<f64> {
    let r = half_width as isize;
    let mut taps: Vec<f64> = (-r..=r)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

/// Correlates `img` with a unit-sum Gaussian template. The template is
/// separable, so this runs as a horizontal then a vertical pass.
pub fn matched_filter(img: &Image, p: &MatchedFilterParams) -> Image {
    debug_assert!(p.validate().is_ok());
    if p.half_width == 0 {
        return img.clone();
    }
    let taps = gaussian_taps(p.half_width, p.sigma_t);
    let r = p.half_width as isize;
    let (w, h) = (img.width(), img.height());

    // Each pass accumulates weighted differences from the centre pixel, which
    // keeps constant regions exactly constant.
    let mut rows = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let c = img.get(x, y);
            let mut acc = 0.0;
            for (k, t) in (-r..=r).zip(&taps) {
                acc += t * (img.get_clamped(x as isize + k, y as isize) - c);
            }
            rows[y * w + x] = c + acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let c = rows[y * w + x];
            let mut acc = 0.0;
            for (k, t) in (-r..=r).zip(&taps) {
                let yy = (y as isize + k).clamp(0, h as isize - 1) as usize;
                acc += t * (rows[yy * w + x] - c);
            }
            out[y * w + x] = c + acc;
        }
    }
    Image::from_filtered(img, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taps_sum_to_one() {
        for (hw, s) in [(1, 0.5), (2, 1.0), (3, 2.0), (7, 0.3)] {
            let t = gaussian_taps(hw, s);
            assert_eq!(t.len(), 2 * hw + 1);
            assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // 2-D kernel is the outer product
            let total: f64 = t.iter().flat_map(|a| t.iter().map(move |b| a * b)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_half_width_is_identity() {
        let img = Image::from_fn(5, 4, |x, y| (x * 7 + y * 3) as f64).unwrap();
        let p = MatchedFilterParams {
            half_width: 0,
            sigma_t: 1.0,
        };
        assert_eq!(matched_filter(&img, &p), img);
    }

    #[test]
    fn constant_stays_constant() {
        let img = Image::filled(9, 7, -812.375).unwrap();
        let out = matched_filter(&img, &MatchedFilterParams { half_width: 3, sigma_t: 2.0 });
        assert!(out.pixels().iter().all(|&v| (v - -812.375).abs() <= 1e-12 * 812.375));
    }

    #[test]
    fn impulse_response_is_normalized_gaussian() {
        // independent 2-D evaluation of exp(-(dx^2+dy^2)/2) on the 5x5 grid
        let mut grid = [[0.0f64; 5]; 5];
        let mut z = 0.0;
        for (i, row) in grid.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (dx, dy) = (j as f64 - 2.0, i as f64 - 2.0);
                *v = (-(dx * dx + dy * dy) / 2.0).exp();
                z += *v;
            }
        }
        let img = Image::from_fn(9, 9, |x, y| if x == 4 && y == 4 { 1.0 } else { 0.0 }).unwrap();
        let out = matched_filter(&img, &MatchedFilterParams { half_width: 2, sigma_t: 1.0 });
        for dx in -2..=2isize {
            let got = out.get((4 + dx) as usize, 4);
            let want = grid[2][(dx + 2) as usize] / z;
            assert!((got - want).abs() < 1e-15, "dx={dx}: {got} vs {want}");
        }
        assert_eq!(out.get(0, 4), 0.0);
        assert_eq!(out.get(4, 8), 0.0);
    }

    #[test]
    fn rejects_bad_sigma() {
        for s in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(MatchedFilterParams { half_width: 1, sigma_t: s }.validate().is_err());
        }
    }
}
