#![allow(dead_code)]

use ctnoise::rng::SplitMix64;
use ctnoise::Image;

/// Image of uniform values in `[lo, hi)`.
pub fn random_image(width: usize, height: usize, lo: f64, hi: f64, seed: u64) -> Image {
    let mut r = SplitMix64::new(seed);
    Image::from_fn(width, height, |_, _| lo + (hi - lo) * r.next_f64()).unwrap()
}

/// `sqrt(Σ(a-b)²) / sqrt(Σa²)`.
pub fn rms_relative(reference: &Image, other: &Image) -> f64 {
    let num: f64 = reference.pixels().iter().zip(other.pixels()).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = reference.pixels().iter().map(|a| a * a).sum();
    (num / den).sqrt()
}

pub fn max_abs_diff(a: &Image, b: &Image) -> f64 {
    a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
