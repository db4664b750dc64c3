use super::Image;
use crate::error::Result;

/// Peak grey value used for PSNR.
pub const PEAK: f64 = 255.0;

/// Mean squared pixel difference.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    a.check_same_shape(b)?;
    let sum: f64 = a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// Peak signal-to-noise ratio in dB against a peak of 255.
///
/// Identical images yield `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    let e = mse(a, b)?;
    Ok(if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (PEAK * PEAK / e).log10()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_image(w: usize, h: usize, seed: u64) -> Image {
        let mut s = seed;
        Image::from_fn(w, h, |_, _| {
            s = crate::seed::splitmix64(s);
            (s >> 11) as f64 / (1u64 << 53) as f64 * 255.0
        })
    }

    #[test]
    fn known_values() {
        let a = Image::filled(4, 4, 10.0);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &a.offset(3.0)).unwrap(), 9.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert!(psnr(&a, &a.offset(255.0)).unwrap().abs() < 1e-12);
        let p = psnr(&a, &a.offset(25.0)).unwrap();
        assert!((p - 20.1703).abs() < 0.01, "{p}");
    }

    #[test]
    fn matches_double_loop() {
        let a = rand_image(8, 8, 1);
        let b = rand_image(8, 8, 2);
        let mut acc = 0.0;
        for y in 0..8 {
            for x in 0..8 {
                let d = a.get(x, y) - b.get(x, y);
                acc += d * d;
            }
        }
        let oracle = acc / 64.0;
        let got = mse(&a, &b).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        assert!(mse(&Image::filled(2, 3, 0.0), &Image::filled(3, 2, 0.0)).is_err());
        assert!(psnr(&Image::filled(2, 3, 0.0), &Image::filled(2, 2, 0.0)).is_err());
    }

    #[test]
    fn psnr_strictly_decreasing_in_mse() {
        let a = Image::filled(3, 3, 0.0);
        let ps: Vec<f64> = (1..50).map(|k| psnr(&a, &a.offset(k as f64 * 0.7)).unwrap()).collect();
        assert!(ps.windows(2).all(|w| w[1] < w[0]));
    }

    proptest! {
        #[test]
        fn mse_symmetric_nonnegative(sa in any::<u64>(), sb in any::<u64>()) {
            let a = rand_image(6, 5, sa);
            let b = rand_image(6, 5, sb);
            let ab = mse(&a, &b).unwrap();
            prop_assert_eq!(ab, mse(&b, &a).unwrap());
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
        }
    }
}
