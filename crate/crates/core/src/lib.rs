//! Blind CT noise estimation from residual images.
//!
//! A denoising filter splits each image of a registered high/low dose pair
//! into a signal estimate and a residual `I_r = I_o - I_f`. The ratio of
//! residual ROI variances estimates the dose ratio without any knowledge of
//! the noise, and the cost θ scores how well a filter and its parameters do
//! that while staying close to the original image.
//!
//! ```no_run
//! use ctnoise::{estimate, generate_pair, FilterSpec, PhantomParams, DEFAULT_BETAS};
//!
//! let (pair, _truth) = generate_pair(&PhantomParams::uniform(256, 256, 10.0, 9.6, 42))?;
//! let ad: FilterSpec = "ad:iterations=20,delta=0.2,kappa=54".parse()?;
//! let est = estimate(&pair, &ad, &DEFAULT_BETAS)?;
//! println!("R_blind / R_the = {}", est.ratio_of_ratios);
//! # Ok::<(), ctnoise::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod filter;
pub mod format;
pub mod image;
pub mod io;
pub mod metrics;
pub mod phantom;
pub mod rng;
pub mod spatial;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use filter::{FilterKind, FilterSpec};
pub use image::{roi_mean, roi_variance, subtract, Image, Meta, Roi};
pub use io::{import_pgm, load_image, save_image};
pub use metrics::{
    baseline_estimate, compute_r_the, estimate, mean_abs_error, r_blind, residual_stats, theta, NoiseEstimate,
    ScanPair, DEFAULT_BETAS,
};
pub use phantom::{generate_pair, oracle_residual, GroundTruth, PhantomParams, Signal, Texture};
pub use sweep::{aggregate_summary, enumerate_grid, run_sweep, select_optimal, FilterGrid, SweepRecord};
