use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::image::{denormalize_hu, normalize_hu, Image};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdeParams {
    /// Noise variance in normalized-intensity units (`[-1024, 3072]` HU → `[0, 1]`).
    pub noise_variance: f64,
}

impl Default for FdeParams {
    fn default() -> Self {
        Self {
            noise_variance: 1e-9,
        }
    }
}

impl FdeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "fde: noise_variance must be finite and >= 0, got {}",
                self.noise_variance
            )));
        }
        Ok(())
    }
}

struct Fft2 {
    rows: usize,
    cols: usize,
    row_fft: Arc<dyn Fft<f64>>,
    col_fft: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(rows: usize, cols: usize, inverse: bool) -> Self {
        let mut planner = FftPlanner::new();
        let (row_fft, col_fft) = if inverse {
            (planner.plan_fft_inverse(cols), planner.plan_fft_inverse(rows))
        } else {
            (planner.plan_fft_forward(cols), planner.plan_fft_forward(rows))
        };
        Self {
            rows,
            cols,
            row_fft,
            col_fft,
        }
    }

    fn process(&self, data: &mut [Complex64]) {
        self.row_fft.process(data);
        let mut t = transpose(data, self.rows, self.cols);
        self.col_fft.process(&mut t);
        data.copy_from_slice(&transpose(&t, self.cols, self.rows));
    }
}

fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Blind Wiener filter on the mirror-extended, normalized image.
///
/// The periodogram noise floor is `σ_n² · N` for `N` padded pixels. Signal
/// power is the periodogram minus that floor (clipped at zero) and each
/// frequency is scaled by `P_s / (P_s + σ_n² N)`. The gain is real and even,
/// so the filter is zero-phase.
pub fn fde_wiener(img: &Image, p: &FdeParams) -> Image {
    debug_assert!(p.validate().is_ok());
    let (w, h) = (img.width(), img.height());
    let (pw, ph) = (2 * w, 2 * h);
    let mut data = Vec::with_capacity(pw * ph);
    for r in 0..ph {
        let sr = if r < h { r } else { ph - 1 - r };
        for c in 0..pw {
            let sc = if c < w { c } else { pw - 1 - c };
            data.push(Complex64::new(normalize_hu(img.get(sc, sr)), 0.0));
        }
    }

    Fft2::new(ph, pw, false).process(&mut data);
    let floor = p.noise_variance * (pw * ph) as f64;
    if floor > 0.0 {
        for u in data.iter_mut() {
            let power = u.norm_sqr();
            let signal = (power - floor).max(0.0);
            *u *= signal / (signal + floor);
        }
    }
    Fft2::new(ph, pw, true).process(&mut data);

    let scale = 1.0 / (pw * ph) as f64;
    let mut out = Vec::with_capacity(w * h);
    for r in 0..h {
        out.extend(data[r * pw..r * pw + w].iter().map(|u| denormalize_hu(u.re * scale)));
    }
    Image::from_filtered(img, out)
}
