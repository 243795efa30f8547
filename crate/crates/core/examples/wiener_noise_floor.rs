//! Fourier-domain Wiener filtering: a larger assumed noise variance removes
//! more of the spectrum, so the residual grows.
//!
//! ```bash
//! cargo run --release --example wiener_noise_floor
//! ```

use ctnoise::phantom::{generate_pair, PhantomParams, Signal};
use ctnoise::spectral::{fde_wiener, FdeParams};
use ctnoise::{roi_variance, subtract};

fn main() -> ctnoise::Result<()> {
    let params = PhantomParams {
        signal: Signal::Chest { ramp: 0.0 },
        ..PhantomParams::uniform(256, 256, 10.0, 4.0, 3)
    };
    let (pair, _) = generate_pair(&params)?;

    // variances are in normalized units: 10 HU noise is (10/4096)² ≈ 6e-6
    for nv in [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5] {
        let filtered = fde_wiener(&pair.high, &FdeParams { noise_variance: nv });
        let residual = subtract(&pair.high, &filtered)?;
        println!("noise_variance {nv:>7.0e}: residual ROI variance {:>8.3} HU²", roi_variance(&residual, &pair.roi)?);
    }
    Ok(())
}
