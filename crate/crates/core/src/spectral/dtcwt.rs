//! Three-level 2-D dual-tree complex wavelet transform.
//!
//! Level 1 uses the near-symmetric (13,19) biorthogonal pair, levels 2 and 3
//! the 14-tap Q-shift pair. Each level yields six complex directional
//! subbands at half the resolution of the level input.
//!
//! The image mean is taken out before analysis and folded back into the
//! lowpass through the exact DC gain of the lowpass chain. The Q-shift
//! highpass table leaks about 1e-6 of DC, and keeping the mean out of the
//! filter bank makes constant images produce exactly zero detail
//! coefficients. The transform stays linear in the mean-free part and exactly
//! invertible.

use rustfft::num_complex::Complex64;

use super::coeffs::{G0A, G0B, G0O, G1A, G1B, G1O, H0A, H0B, H0O, H1A, H1B, H1O};
use crate::error::{Error, Result};
use crate::image::Image;

/// Number of decomposition stages.
pub const LEVELS: usize = 3;

/// Input extents are padded up to a multiple of this.
const BLOCK: usize = 1 << LEVELS;

/// Dense row-major real plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn transpose(&self) -> Plane {
        let mut out = Plane::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    fn add(mut self, other: &Plane) -> Plane {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        self
    }
}

/// One complex directional subband.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexBand {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexBand {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Output of [`dtcwt_forward`].
///
/// `levels[0]` is the finest level. Subband order within a level follows the
/// usual orientation layout (≈15°, 45°, 75°, 105°, 135°, 165°). `lowpass`
/// holds the four real tree lowpass images interleaved as 2x2 quads, i.e. the
/// real and imaginary parts of the two complex lowpass images.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPyramid {
    pub levels: Vec<[ComplexBand; 6]>,
    pub lowpass: Plane,
    /// Mean removed before analysis; restored on synthesis.
    pub dc_offset: f64,
    /// Extent of the analysed image before padding.
    pub width: usize,
    pub height: usize,
}

impl CoefficientPyramid {
    pub fn detail_bands(&self) -> impl Iterator<Item = &ComplexBand> {
        self.levels.iter().flat_map(|l| l.iter())
    }

    pub fn detail_bands_mut(&mut self) -> impl Iterator<Item = &mut ComplexBand> {
        self.levels.iter_mut().flat_map(|l| l.iter_mut())
    }

    fn validate(&self) -> Result<(usize, usize)> {
        let bad = |msg: String| Err(Error::MalformedPyramid(msg));
        if self.levels.len() != LEVELS {
            return bad(format!("{} levels, expected {LEVELS}", self.levels.len()));
        }
        let first = &self.levels[0][0];
        let (ph, pw) = (first.rows * 2, first.cols * 2);
        if ph == 0 || pw == 0 || ph % BLOCK != 0 || pw % BLOCK != 0 {
            return bad(format!("level-1 subband {}x{} not a padded extent", first.cols, first.rows));
        }
        for (l, bands) in self.levels.iter().enumerate() {
            let (rows, cols) = (ph >> (l + 1), pw >> (l + 1));
            for (d, b) in bands.iter().enumerate() {
                if b.rows != rows || b.cols != cols || b.data.len() != rows * cols {
                    return bad(format!(
                        "level {} band {d} is {}x{} ({} values), expected {cols}x{rows}",
                        l + 1,
                        b.cols,
                        b.rows,
                        b.data.len()
                    ));
                }
            }
        }
        let (lr, lc) = (ph >> (LEVELS - 1), pw >> (LEVELS - 1));
        let lp = &self.lowpass;
        if lp.rows != lr || lp.cols != lc || lp.data.len() != lr * lc {
            return bad(format!("lowpass is {}x{}, expected {lc}x{lr}", lp.cols, lp.rows));
        }
        if self.width == 0 || self.height == 0 || self.width > pw || self.height > ph {
            return bad(format!(
                "original extent {}x{} incompatible with padded {pw}x{ph}",
                self.width, self.height
            ));
        }
        if !self.dc_offset.is_finite() {
            return bad("non-finite DC offset".into());
        }
        Ok((ph, pw))
    }
}

/// Symmetric extension with repeated end samples, period `2n`.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = i.rem_euclid(2 * n);
    (if j >= n { 2 * n - 1 - j } else { j }) as usize
}

/// "Valid" convolution down the rows listed in `src`:
/// `y[i] = Σ_k h[k] · x[src[i + m - 1 - k]]`.
fn convolve_rows(x: &Plane, src: &[usize], h: &[f64]) -> Plane {
    let m = h.len();
    let n = src.len() + 1 - m;
    let mut out = Plane::zeros(n, x.cols);
    for i in 0..n {
        let dst = &mut out.data[i * x.cols..(i + 1) * x.cols];
        for (k, &hk) in h.iter().enumerate() {
            let row = x.row(src[i + m - 1 - k]);
            for (d, &v) in dst.iter_mut().zip(row) {
                *d += v * hk;
            }
        }
    }
    out
}

/// Filters columns with an odd-length filter, no decimation.
fn colfilter(x: &Plane, h: &[f64]) -> Plane {
    let m2 = (h.len() / 2) as isize;
    let src: Vec<usize> = (-m2..x.rows as isize + m2).map(|i| reflect(i, x.rows)).collect();
    convolve_rows(x, &src, h)
}

fn even_odd(h: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let odd = h.iter().step_by(2).copied().collect();
    let even = h.iter().skip(1).step_by(2).copied().collect();
    (odd, even)
}

fn interleave(a: &Plane, b: &Plane, a_first: bool) -> Plane {
    let mut out = Plane::zeros(a.rows + b.rows, a.cols);
    let (first, second) = if a_first { (a, b) } else { (b, a) };
    for r in 0..first.rows {
        out.data[(2 * r) * a.cols..(2 * r + 1) * a.cols].copy_from_slice(first.row(r));
        out.data[(2 * r + 1) * a.cols..(2 * r + 2) * a.cols].copy_from_slice(second.row(r));
    }
    out
}

/// Decimating Q-shift column filter; `ha` acts on odd, `hb` on even samples.
fn coldfilt(x: &Plane, ha: &[f64], hb: &[f64]) -> Plane {
    let r = x.rows;
    let m = ha.len();
    debug_assert!(r % 4 == 0 && m % 2 == 0 && hb.len() == m);
    let xe: Vec<usize> = (-(m as isize)..(r + m) as isize).map(|i| reflect(i, r)).collect();
    let (hao, hae) = even_odd(ha);
    let (hbo, hbe) = even_odd(hb);
    let t: Vec<usize> = (5..r + 2 * m - 2).step_by(4).collect();
    let pick = |off: isize| -> Vec<usize> { t.iter().map(|&ti| xe[(ti as isize + off) as usize]).collect() };

    let ya = convolve_rows(x, &pick(-1), &hao).add(&convolve_rows(x, &pick(-3), &hae));
    let yb = convolve_rows(x, &pick(0), &hbo).add(&convolve_rows(x, &pick(-2), &hbe));
    let dot: f64 = ha.iter().zip(hb).map(|(a, b)| a * b).sum();
    interleave(&ya, &yb, dot > 0.0)
}

/// Interpolating Q-shift column filter, inverse of [`coldfilt`].
fn colifilt(x: &Plane, ha: &[f64], hb: &[f64]) -> Plane {
    let r = x.rows;
    let m = ha.len();
    let m2 = m / 2;
    debug_assert!(r % 2 == 0 && m % 2 == 0 && m2 % 2 == 1 && hb.len() == m);
    let xe: Vec<usize> = (-(m2 as isize)..(r + m2) as isize).map(|i| reflect(i, r)).collect();
    let (hao, hae) = even_odd(ha);
    let (hbo, hbe) = even_odd(hb);
    let t: Vec<usize> = (2..r + m - 1).step_by(2).collect();
    let dot: f64 = ha.iter().zip(hb).map(|(a, b)| a * b).sum();
    let (ta_off, tb_off) = if dot > 0.0 { (0isize, -1isize) } else { (-1, 0) };
    let pick = |off: isize| -> Vec<usize> { t.iter().map(|&ti| xe[(ti as isize + off) as usize]).collect() };
    let (ta, tb) = (pick(ta_off), pick(tb_off));

    let parts = [
        convolve_rows(x, &tb, &hao),
        convolve_rows(x, &ta, &hbo),
        convolve_rows(x, &tb, &hae),
        convolve_rows(x, &ta, &hbe),
    ];
    let mut out = Plane::zeros(2 * r, x.cols);
    for (phase, part) in parts.iter().enumerate() {
        for i in 0..part.rows {
            let dst = (4 * i + phase) * x.cols;
            out.data[dst..dst + x.cols].copy_from_slice(part.row(i));
        }
    }
    out
}

/// Quads of real samples to two complex subbands.
fn q2c(y: &Plane) -> (ComplexBand, ComplexBand) {
    let (rows, cols) = (y.rows / 2, y.cols / 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut z1 = ComplexBand::zeros(rows, cols);
    let mut z2 = ComplexBand::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let a = y.data[(2 * r) * y.cols + 2 * c];
            let b = y.data[(2 * r) * y.cols + 2 * c + 1];
            let cc = y.data[(2 * r + 1) * y.cols + 2 * c];
            let d = y.data[(2 * r + 1) * y.cols + 2 * c + 1];
            let p = Complex64::new(a * s, b * s);
            let q = Complex64::new(d * s, -cc * s);
            z1.data[r * cols + c] = p - q;
            z2.data[r * cols + c] = p + q;
        }
    }
    (z1, z2)
}

/// Two complex subbands back to quads of real samples.
fn c2q(w1: &ComplexBand, w2: &ComplexBand) -> Plane {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut x = Plane::zeros(w1.rows * 2, w1.cols * 2);
    for r in 0..w1.rows {
        for c in 0..w1.cols {
            let a = w1.data[r * w1.cols + c] * s;
            let b = w2.data[r * w1.cols + c] * s;
            let p = a + b;
            let q = a - b;
            x.data[(2 * r) * x.cols + 2 * c] = p.re;
            x.data[(2 * r) * x.cols + 2 * c + 1] = p.im;
            x.data[(2 * r + 1) * x.cols + 2 * c] = q.im;
            x.data[(2 * r + 1) * x.cols + 2 * c + 1] = -q.re;
        }
    }
    x
}

/// Subband layout shared by every level: (lh → 0,5), (hh → 1,4), (hl → 2,3).
fn assemble(lh: (ComplexBand, ComplexBand), hh: (ComplexBand, ComplexBand), hl: (ComplexBand, ComplexBand)) -> [ComplexBand; 6] {
    [lh.0, hh.0, hl.0, hl.1, hh.1, lh.1]
}

fn lowpass_dc_gain() -> f64 {
    let biort: f64 = H0O.iter().sum();
    let qshift: f64 = H0A.iter().sum();
    (biort * biort) * (qshift * qshift).powi(LEVELS as i32 - 1)
}

fn padded_extent(n: usize) -> usize {
    n.div_ceil(BLOCK).max(1) * BLOCK
}

/// Forward transform. Extents that are not multiples of 8 are extended
/// symmetrically at the bottom and right; the original extent is recorded so
/// [`dtcwt_inverse`] can trim it again.
pub fn dtcwt_forward(img: &Image) -> CoefficientPyramid {
    let (w, h) = (img.width(), img.height());
    let (pw, ph) = (padded_extent(w), padded_extent(h));
    let mut x = Plane::zeros(ph, pw);
    for r in 0..ph {
        let sr = reflect(r as isize, h);
        for c in 0..pw {
            x.data[r * pw + c] = img.get(reflect(c as isize, w), sr);
        }
    }
    let mean = x.data.iter().sum::<f64>() / x.data.len() as f64;
    x.data.iter_mut().for_each(|v| *v -= mean);

    let mut levels = Vec::with_capacity(LEVELS);

    let lo = colfilter(&x, &H0O).transpose();
    let hi = colfilter(&x, &H1O).transpose();
    let mut lolo = colfilter(&lo, &H0O).transpose();
    levels.push(assemble(
        q2c(&colfilter(&hi, &H0O).transpose()),
        q2c(&colfilter(&hi, &H1O).transpose()),
        q2c(&colfilter(&lo, &H1O).transpose()),
    ));

    for _ in 1..LEVELS {
        let lo = coldfilt(&lolo, &H0B, &H0A).transpose();
        let hi = coldfilt(&lolo, &H1B, &H1A).transpose();
        lolo = coldfilt(&lo, &H0B, &H0A).transpose();
        levels.push(assemble(
            q2c(&coldfilt(&hi, &H0B, &H0A).transpose()),
            q2c(&coldfilt(&hi, &H1B, &H1A).transpose()),
            q2c(&coldfilt(&lo, &H1B, &H1A).transpose()),
        ));
    }

    let gain = lowpass_dc_gain();
    lolo.data.iter_mut().for_each(|v| *v += mean * gain);
    CoefficientPyramid {
        levels,
        lowpass: lolo,
        dc_offset: mean,
        width: w,
        height: h,
    }
}

/// Inverse transform, trimming any analysis padding.
pub fn dtcwt_inverse(pyr: &CoefficientPyramid) -> Result<Image> {
    let (ph, pw) = pyr.validate()?;
    let gain = lowpass_dc_gain();
    let mut z = pyr.lowpass.clone();
    z.data.iter_mut().for_each(|v| *v -= pyr.dc_offset * gain);

    for level in (1..LEVELS).rev() {
        let b = &pyr.levels[level];
        let lh = c2q(&b[0], &b[5]);
        let hl = c2q(&b[2], &b[3]);
        let hh = c2q(&b[1], &b[4]);
        let y1 = colifilt(&z, &G0B, &G0A).add(&colifilt(&lh, &G1B, &G1A));
        let y2 = colifilt(&hl, &G0B, &G0A).add(&colifilt(&hh, &G1B, &G1A));
        z = colifilt(&y1.transpose(), &G0B, &G0A)
            .add(&colifilt(&y2.transpose(), &G1B, &G1A))
            .transpose();
    }

    let b = &pyr.levels[0];
    let lh = c2q(&b[0], &b[5]);
    let hl = c2q(&b[2], &b[3]);
    let hh = c2q(&b[1], &b[4]);
    let y1 = colfilter(&z, &G0O).add(&colfilter(&lh, &G1O));
    let y2 = colfilter(&hl, &G0O).add(&colfilter(&hh, &G1O));
    let z = colfilter(&y1.transpose(), &G0O)
        .add(&colfilter(&y2.transpose(), &G1O))
        .transpose();
    debug_assert_eq!((z.rows, z.cols), (ph, pw));

    let mut pixels = Vec::with_capacity(pyr.width * pyr.height);
    for r in 0..pyr.height {
        pixels.extend(z.row(r)[..pyr.width].iter().map(|v| v + pyr.dc_offset));
    }
    Image::new(pyr.width, pyr.height, pixels)
}
