//! Generate a high/low phantom pair and check that the ideal residual (the
//! injected noise itself) recovers the dose ratio.
//!
//! ```bash
//! cargo run --release --example phantom_pair
//! ```

use ctnoise::phantom::{generate_pair, oracle_residual, PhantomParams};
use ctnoise::{compute_r_the, r_blind, roi_variance};

fn main() -> ctnoise::Result<()> {
    // 48 mAs vs 5 mAs: the low-dose image carries 9.6x the noise variance
    let params = PhantomParams::uniform(512, 512, 10.0, 9.6, 42);
    let (pair, truth) = generate_pair(&params)?;

    let (res_high, res_low) = oracle_residual(&pair, &truth)?;
    let s2h = roi_variance(&res_high, &pair.roi)?;
    let s2l = roi_variance(&res_low, &pair.roi)?;

    println!("pair {} ROI {}", pair.id, pair.roi);
    println!("sigma2_high {s2h:.3}  sigma2_low {s2l:.3}");
    println!("R_blind {:.4}  R_the {}", r_blind(s2l, s2h)?, compute_r_the(&pair)?);
    Ok(())
}
