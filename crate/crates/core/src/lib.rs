//! Trainable, scale- and noise-adaptive wavelet shrinkage for grayscale image
//! denoising.
//!
//! The denoiser is `u = synthesize(shrink(analyze(f)))`:
//!
//! * [`wavelet`]: a non-decimating 2D Haar transform with periodic
//!   boundaries and perfect reconstruction;
//! * [`shrinkage`]: coupled shrinkage rules, most notably the two-parameter
//!   forward-and-backward (FAB) rule that can amplify coefficients, and the
//!   generic law `lambda = factor * sigma / l^2`;
//! * [`train`]: the reconstruction-error objective, its analytic gradient,
//!   L-BFGS fitting and threshold tuning for classical baselines;
//! * [`experiments`]: ablation and comparison drivers producing CSV reports.
//!
//! ```
//! use wshrink::imaging::{add_gaussian_noise, psnr, Image, NoiseModel};
//! use wshrink::pipeline::{denoise, DenoiseRequest};
//! use wshrink::shrinkage::{GenericParams, ShrinkageSpec};
//!
//! let clean = Image::from_fn(64, 64, |x, y| if (x / 16 + y / 16) % 2 == 0 { 60.0 } else { 190.0 });
//! let noisy = add_gaussian_noise(&clean, NoiseModel::new(25.0, 7)).unwrap();
//! let spec = ShrinkageSpec::Generic { params: GenericParams::default(), sigma: 25.0 };
//! let u = denoise(&DenoiseRequest::new(noisy.clone(), spec)).unwrap();
//! assert!(psnr(&u, &clean).unwrap() > psnr(&noisy, &clean).unwrap());
//! ```

pub mod dataset;
pub mod error;
pub mod experiments;
mod fsutil;
pub mod imaging;
pub mod pipeline;
pub mod seed;
pub mod shrinkage;
pub mod train;
pub mod wavelet;

pub use error::{Error, ErrorCategory, Result};
pub use fsutil::write_atomic;
pub use imaging::Image;

// Code listings of the guide in `book/` compile and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/transform.md")]
    mod transform {}
    #[doc = include_str!("../../../book/src/shrinkage.md")]
    mod shrinkage {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
