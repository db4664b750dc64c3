use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::Image;
use crate::error::{Error, Result};

/// Additive white Gaussian noise with standard deviation `sigma` (grey values),
/// drawn from a generator seeded with `seed`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Self {
        NoiseModel { sigma, seed }
    }
}

/// Returns `img + n` with `n ~ N(0, sigma^2)` i.i.d. per pixel. The result is
/// not clamped, so values may leave `[0, 255]`.
pub fn add_gaussian_noise(img: &Image, noise: NoiseModel) -> Result<Image> {
    if !(noise.sigma >= 0.0 && noise.sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise sigma must be finite and nonnegative, got {}",
            noise.sigma
        )));
    }
    if noise.sigma == 0.0 {
        return Ok(img.clone());
    }
    let dist = Normal::new(0.0, noise.sigma).expect("sigma validated above");
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    Ok(img.map(|v| v + dist.sample(&mut rng)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let img = Image::from_fn(5, 4, |x, y| (x * y) as f64);
        assert_eq!(add_gaussian_noise(&img, NoiseModel::new(0.0, 3)).unwrap(), img);
    }

    #[test]
    fn deterministic_per_seed() {
        let img = Image::filled(16, 16, 100.0);
        let a = add_gaussian_noise(&img, NoiseModel::new(10.0, 42)).unwrap();
        let b = add_gaussian_noise(&img, NoiseModel::new(10.0, 42)).unwrap();
        let c = add_gaussian_noise(&img, NoiseModel::new(10.0, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_negative_sigma() {
        let img = Image::filled(2, 2, 0.0);
        assert!(add_gaussian_noise(&img, NoiseModel::new(-1.0, 0)).is_err());
        assert!(add_gaussian_noise(&img, NoiseModel::new(f64::NAN, 0)).is_err());
    }

    #[test]
    fn sample_moments() {
        // 262144 samples: standard error of the mean is 25/512 ~ 0.05 and of
        // the standard deviation ~ 25/sqrt(2N) ~ 0.035.
        let img = Image::filled(512, 512, 128.0);
        let noisy = add_gaussian_noise(&img, NoiseModel::new(25.0, 2024)).unwrap();
        let n = img.len() as f64;
        let diffs: Vec<f64> = noisy.pixels().iter().map(|v| v - 128.0).collect();
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.3, "mean {mean}");
        assert!((var.sqrt() - 25.0).abs() < 0.5, "std {}", var.sqrt());
        let bright = add_gaussian_noise(&Image::filled(64, 64, 250.0), NoiseModel::new(25.0, 1)).unwrap();
        assert!(bright.min_max().1 > 255.0, "noise must not be clamped");
    }
}
