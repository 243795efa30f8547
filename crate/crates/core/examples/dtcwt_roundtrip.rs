//! Forward and inverse dual-tree complex wavelet transform, with the energy
//! of each level's six oriented subbands.
//!
//! ```bash
//! cargo run --release --example dtcwt_roundtrip
//! ```

use ctnoise::spectral::{dtcwt_forward, dtcwt_inverse};
use ctnoise::Image;

fn main() -> ctnoise::Result<()> {
    // diagonal stripes plus a disc, on a size that needs padding
    let img = Image::from_fn(100, 70, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let disc = if (fx - 60.0).powi(2) + (fy - 35.0).powi(2) < 15.0f64.powi(2) { 300.0 } else { 0.0 };
        100.0 * ((fx + fy) * 0.4).sin() + disc
    })?;

    let pyr = dtcwt_forward(&img);
    for (level, bands) in pyr.levels.iter().enumerate() {
        let energies: Vec<String> = bands
            .iter()
            .map(|b| format!("{:.3e}", b.data.iter().map(|z| z.norm_sqr()).sum::<f64>()))
            .collect();
        println!("level {} ({}x{}): {}", level + 1, bands[0].cols, bands[0].rows, energies.join(" "));
    }

    let back = dtcwt_inverse(&pyr)?;
    let err = img.pixels().iter().zip(back.pixels()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max reconstruction error {err:.2e}");
    Ok(())
}
