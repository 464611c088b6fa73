//! Edge-augmented Fourier reconstruction of piecewise-smooth periodic
//! functions.
//!
//! Given a small band of Fourier coefficients, the library estimates jump
//! locations and heights (Prony-type linear prediction or concentration
//! kernels with nonlinear refinement) and adds the analytic ramp tails of
//! those jumps to the Fourier partial sum. A separable row/column variant
//! handles 2D images.

pub mod bessel;
pub mod concentration;
pub mod detector;
pub mod error;
pub mod functions;
pub mod jumps;
pub mod noise;
pub mod prony;
pub mod quadrature;
pub mod recon2d;
pub mod spectral;
pub mod spectrum;

mod linalg;

pub use error::{Error, Result};
pub use functions::{PiecewiseFn, Side};
pub use jumps::{Jump, JumpSet};
pub use spectrum::Spectrum1D;
pub use detector::Detector;
pub use recon2d::{Grid2D, Spectrum2D};
