//! Transform-domain filters: dual-tree complex wavelet shrinkage and a blind
//! Fourier-domain Wiener filter.

mod cdwt;
pub mod coeffs;
mod dtcwt;
mod fde;

pub use cdwt::{cdwt_denoise, CdwtParams, ThresholdMode};
pub use dtcwt::{dtcwt_forward, dtcwt_inverse, CoefficientPyramid, ComplexBand, Plane, LEVELS};
pub use fde::{fde_wiener, FdeParams};
