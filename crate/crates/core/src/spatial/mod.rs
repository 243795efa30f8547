//! Spatial-domain smoothing filters: Gaussian matched filter, bilateral filter,
//! explicit anisotropic diffusion and patch-wise non-local means.
//!
//! Window filters extend the image by replicating edge pixels; diffusion uses
//! zero-flux boundaries. Every filter maps a constant image onto itself and
//! preserves the image extent.

mod bilateral;
mod diffusion;
mod matched;
mod nlm;

pub use bilateral::{bilateral, BilateralParams};
pub use diffusion::{anisotropic_diffusion, AdParams, Conduction};
pub use matched::{gaussian_taps, matched_filter, MatchedFilterParams};
pub use nlm::{immerkaer_sigma, pwnlm, NlmConstants, NLM};
