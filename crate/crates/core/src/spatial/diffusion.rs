use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::Image;

/// Edge-stopping function applied to the directional gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conduction {
    /// `exp(-(∇/κ)²)`
    #[default]
    Exponential,
    /// `1 / (1 + (∇/κ)²)`
    Reciprocal,
}

impl Conduction {
    #[inline]
    fn eval(self, grad: f64, inv_kappa: f64) -> f64 {
        let s = grad * inv_kappa;
        match self {
            Conduction::Exponential => (-(s * s)).exp(),
            Conduction::Reciprocal => 1.0 / (1.0 + s * s),
        }
    }
}

impl fmt::Display for Conduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Conduction::Exponential => "exp",
            Conduction::Reciprocal => "rec",
        })
    }
}

impl FromStr for Conduction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" | "exponential" => Ok(Conduction::Exponential),
            "rec" | "reciprocal" => Ok(Conduction::Reciprocal),
            _ => Err(Error::InvalidParams(format!("unknown conduction `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdParams {
    pub iterations: usize,
    /// Explicit time step; stability of the 4-neighbour scheme needs `<= 0.25`.
    pub delta: f64,
    /// Gradient threshold in HU.
    pub kappa: f64,
    pub conduction: Conduction,
}

impl Default for AdParams {
    fn default() -> Self {
        Self {
            iterations: 20,
            delta: 0.2,
            kappa: 54.0,
            conduction: Conduction::Exponential,
        }
    }
}

impl AdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.25) {
            return Err(Error::InvalidParams(format!(
                "ad: delta must lie in (0, 0.25], got {}",
                self.delta
            )));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "ad: kappa must be finite and > 0, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Perona–Malik diffusion, explicit scheme with zero-flux boundaries:
/// `I ← I + δ Σ_{N,E,S,W} g(∇_d I) ∇_d I`.
///
/// Each interior edge flux is evaluated once and applied with opposite signs
/// to the two pixels it joins, so the image sum is conserved up to rounding.
pub fn anisotropic_diffusion(img: &Image, p: &AdParams) -> Image {
    debug_assert!(p.validate().is_ok());
    let (w, h) = (img.width(), img.height());
    let mut cur = img.pixels().to_vec();
    let mut next = vec![0.0; w * h];
    // east_flux[y*w + x] is the flux across the edge (x, y)-(x+1, y)
    let mut east_flux = vec![0.0; w * h];
    // south_flux[y*w + x] is the flux across the edge (x, y)-(x, y+1)
    let mut south_flux = vec![0.0; w * h];
    let inv_kappa = 1.0 / p.kappa;

    for _ in 0..p.iterations {
        for y in 0..h {
            let row = y * w;
            for x in 0..w.saturating_sub(1) {
                let g = cur[row + x + 1] - cur[row + x];
                east_flux[row + x] = p.conduction.eval(g, inv_kappa) * g;
            }
            if y + 1 < h {
                for x in 0..w {
                    let g = cur[row + w + x] - cur[row + x];
                    south_flux[row + x] = p.conduction.eval(g, inv_kappa) * g;
                }
            }
        }
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let north = if y > 0 { -south_flux[i - w] } else { 0.0 };
                let east = if x + 1 < w { east_flux[i] } else { 0.0 };
                let south = if y + 1 < h { south_flux[i] } else { 0.0 };
                let west = if x > 0 { -east_flux[i - 1] } else { 0.0 };
                next[i] = cur[i] + p.delta * (north + east + south + west);
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Image::from_filtered(img, cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_is_identity() {
        let img = Image::from_fn(7, 5, |x, y| (x as f64).sin() * 100.0 + y as f64).unwrap();
        let p = AdParams { iterations: 0, ..Default::default() };
        assert_eq!(anisotropic_diffusion(&img, &p), img);
    }

    #[test]
    fn hand_computed_heat_step() {
        let img = Image::from_fn(3, 3, |x, y| if x == 1 && y == 1 { 1.0 } else { 0.0 }).unwrap();
        let p = AdParams {
            iterations: 1,
            delta: 0.25,
            kappa: 1e9,
            conduction: Conduction::Exponential,
        };
        let out = anisotropic_diffusion(&img, &p);
        #[rustfmt::skip]
        let want = [0.0, 0.25, 0.0,
                    0.25, 0.0, 0.25,
                    0.0, 0.25, 0.0];
        assert_eq!(out.pixels(), &want);
        assert_eq!(out.sum(), 1.0);
    }

    #[test]
    fn constant_image_unchanged() {
        let img = Image::filled(5, 6, -300.5).unwrap();
        for conduction in [Conduction::Exponential, Conduction::Reciprocal] {
            let p = AdParams { iterations: 10, delta: 0.25, kappa: 3.0, conduction };
            assert_eq!(anisotropic_diffusion(&img, &p), img);
        }
    }

    #[test]
    fn single_row_and_single_pixel() {
        let row = Image::new(4, 1, vec![0.0, 4.0, 0.0, 0.0]).unwrap();
        let p = AdParams { iterations: 1, delta: 0.25, kappa: 1e9, ..Default::default() };
        let out = anisotropic_diffusion(&row, &p);
        assert_eq!(out.pixels(), &[1.0, 2.0, 1.0, 0.0]);
        let dot = Image::filled(1, 1, 9.0).unwrap();
        assert_eq!(anisotropic_diffusion(&dot, &p), dot);
    }

    #[test]
    fn conduction_parse_roundtrip() {
        for c in [Conduction::Exponential, Conduction::Reciprocal] {
            assert_eq!(c.to_string().parse::<Conduction>().unwrap(), c);
        }
        assert_eq!("reciprocal".parse::<Conduction>().unwrap(), Conduction::Reciprocal);
        assert!("linear".parse::<Conduction>().is_err());
    }

    #[test]
    fn delta_bound_enforced() {
        assert!(AdParams { delta: 0.26, ..Default::default() }.validate().is_err());
        assert!(AdParams { delta: 0.0, ..Default::default() }.validate().is_err());
        assert!(AdParams { delta: 0.25, ..Default::default() }.validate().is_ok());
        assert!(AdParams { kappa: -1.0, ..Default::default() }.validate().is_err());
    }
}
