//! Sweep a small grid over three phantom pairs, pick the θ-minimizing
//! parameters per filter and compare them with the unfiltered baseline.
//!
//! ```bash
//! CTNOISE_THREADS=2 cargo run --release --example parameter_sweep
//! ```

use ctnoise::phantom::{generate_pair, PhantomParams, Signal};
use ctnoise::sweep::{aggregate_summary, run_sweep, select_optimal, threads_from_env, write_records_csv, FilterGrid};

const GRID: &str = r#"{
  "filters": {
    "ad": {"iterations": [5, 10, 20, 40], "kappa": [30, 54]},
    "cdwt": {"threshold": [50, 100, 150, 200, 300]},
    "mf": {"half_width": [1, 2], "sigma_t": [0.5, 1]},
    "none": {}
  },
  "betas": [0.1, 10]
}"#;

fn main() -> ctnoise::Result<()> {
    let pairs = (1..=3)
        .map(|seed| {
            let p = PhantomParams {
                signal: Signal::Chest { ramp: 50.0 },
                ..PhantomParams::uniform(256, 256, 10.0, 9.6, seed)
            };
            generate_pair(&p).map(|(pair, _)| pair)
        })
        .collect::<ctnoise::Result<Vec<_>>>()?;

    let grid = FilterGrid::from_json(GRID)?;
    let records = run_sweep(&pairs, &grid, threads_from_env()?)?;
    println!("{} records", records.len());

    for &beta in &grid.betas {
        println!("\nbeta = {beta}");
        for e in select_optimal(&records, beta)? {
            println!("  {:<5} {:<50} mean theta {:.5}  mean ratio {:.4}", e.filter, e.best_spec.params_string(), e.mean_theta, e.mean_ratio);
        }
        let s = aggregate_summary(&records, beta)?;
        println!("  baseline mean theta {:.5}  mean ratio {:.4}", s.baseline_mean_theta, s.baseline_mean_ratio);
    }

    let mut csv = Vec::new();
    write_records_csv(&records[..2], &grid.betas, &mut csv)?;
    println!("\nfirst records:\n{}", String::from_utf8_lossy(&csv));
    Ok(())
}
