//! More diffusion iterations remove more noise but also more signal: the
//! bias term M grows while the ratio estimate settles.
//!
//! ```bash
//! cargo run --release --example diffusion_bias
//! ```

use ctnoise::phantom::{generate_pair, PhantomParams, Signal};
use ctnoise::spatial::AdParams;
use ctnoise::{estimate, FilterSpec};

fn main() -> ctnoise::Result<()> {
    let params = PhantomParams {
        signal: Signal::Chest { ramp: 50.0 },
        ..PhantomParams::uniform(256, 256, 10.0, 9.6, 11)
    };
    let (pair, _) = generate_pair(&params)?;
    for iterations in [1, 5, 10, 20, 40, 80] {
        let spec = FilterSpec::Ad(AdParams { iterations, ..AdParams::default() });
        let e = estimate(&pair, &spec, &[1.0, 10.0])?;
        println!(
            "iterations {iterations:>2}: ratio {:.4}  M {:.3e}  theta@1 {:.5}  theta@10 {:.5}",
            e.ratio_of_ratios,
            e.m,
            e.theta_at(1.0),
            e.theta_at(10.0)
        );
    }
    Ok(())
}
