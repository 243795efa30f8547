use crate::error::{Error, Result};
use crate::image::Image;

/// Fixed settings of the parameter-free non-local means filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlmConstants {
    /// Patch side is `2 * patch_half + 1`.
    pub patch_half: usize,
    /// Search window side is `2 * search_half + 1`.
    pub search_half: usize,
    /// Filtering strength as a multiple of the estimated noise sigma.
    pub h_factor: f64,
}

pub const NLM: NlmConstants = NlmConstants {
    patch_half: 3,
    search_half: 10,
    h_factor: 0.4,
};

/// Immerkær's fast noise sigma estimate: mean absolute response of the 3x3
/// operator `[1 -2 1; -2 4 -2; 1 -2 1]` over interior pixels, scaled by
/// `sqrt(π/2) / 6`.
pub fn immerkaer_sigma(img: &Image) -> f64 {
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return 0.0;
    }
    let mut total = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = img.get(x - 1, y - 1) + img.get(x + 1, y - 1) + img.get(x - 1, y + 1)
                + img.get(x + 1, y + 1)
                - 2.0 * (img.get(x, y - 1) + img.get(x - 1, y) + img.get(x + 1, y) + img.get(x, y + 1))
                + 4.0 * img.get(x, y);
            total += v.abs();
        }
    }
    (std::f64::consts::FRAC_PI_2).sqrt() * total / (6.0 * ((w - 2) * (h - 2)) as f64)
}

/// Patch-wise non-local means with the fixed [`NLM`] constants.
///
/// For every offset in the search window the squared-difference image is box
/// filtered over the patch, giving the mean squared patch distance `d²` for all
/// pixels at once. Weights are `exp(-max(d² - 2σ̂², 0) / (h·σ̂)²)`; the centre
/// pixel receives the largest weight seen among its neighbours.
pub fn pwnlm(img: &Image) -> Result<Image> {
    let c = NLM;
    let min = 2 * c.patch_half + 1;
    let (w, h) = (img.width(), img.height());
    if w < min || h < min {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min,
        });
    }
    let sigma = immerkaer_sigma(img);
    if sigma <= 0.0 {
        // nothing measurable to remove; any weighting of a noise-free
        // neighbourhood reproduces the input
        return Ok(img.clone());
    }
    let two_var = 2.0 * sigma * sigma;
    let inv_h2 = 1.0 / (c.h_factor * sigma).powi(2);

    let ph = c.patch_half as isize;
    let sh = c.search_half as isize;
    let pad = ph + sh;
    let pw = w + 2 * pad as usize;
    let padded: Vec<f64> = (0..h as isize + 2 * pad)
        .flat_map(|y| (0..pw as isize).map(move |x| (x, y)))
        .map(|(x, y)| img.get_clamped(x - pad, y - pad))
        .collect();

    // squared differences live on the patch-centre grid extended by the patch
    // radius: region rows/cols [sh, sh + h + 2ph)
    let rw = w + 2 * ph as usize;
    let rh = h + 2 * ph as usize;
    let patch_len = (2 * ph + 1) as usize;
    let patch_area = (patch_len * patch_len) as f64;

    let mut diff = vec![0.0; rw * rh];
    let mut colsum = vec![0.0; rw * h];
    let mut wsum = vec![0.0; w * h];
    let mut wmax = vec![0.0f64; w * h];
    let mut acc = vec![0.0; w * h];

    for dy in -sh..=sh {
        for dx in -sh..=sh {
            if dx == 0 && dy == 0 {
                continue;
            }
            for r in 0..rh {
                let a = (sh as usize + r) * pw + sh as usize;
                let b = ((sh + dy) as usize + r) * pw + (sh + dx) as usize;
                for col in 0..rw {
                    let d = padded[a + col] - padded[b + col];
                    diff[r * rw + col] = d * d;
                }
            }
            for y in 0..h {
                for col in 0..rw {
                    let mut s = 0.0;
                    for k in 0..patch_len {
                        s += diff[(y + k) * rw + col];
                    }
                    colsum[y * rw + col] = s;
                }
            }
            for y in 0..h {
                let src = ((pad + y as isize) as usize) * pw;
                let nb = ((pad + y as isize + dy) as usize) * pw;
                for x in 0..w {
                    let mut s = 0.0;
                    for k in 0..patch_len {
                        s += colsum[y * rw + x + k];
                    }
                    let d2 = s / patch_area;
                    let wt = (-((d2 - two_var).max(0.0) * inv_h2)).exp();
                    let i = y * w + x;
                    let centre = padded[src + pad as usize + x];
                    let neighbour = padded[nb + (pad + dx) as usize + x];
                    wsum[i] += wt;
                    acc[i] += wt * (neighbour - centre);
                    if wt > wmax[i] {
                        wmax[i] = wt;
                    }
                }
            }
        }
    }

    let out = img
        .pixels()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let total = wsum[i] + wmax[i];
            if total > 0.0 {
                v + acc[i] / total
            } else {
                v
            }
        })
        .collect();
    Ok(Image::from_filtered(img, out))
}
