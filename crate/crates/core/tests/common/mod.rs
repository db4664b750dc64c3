#![allow(dead_code)]

use wshrink::dataset::{load_dir, sample_patches};
use wshrink::imaging::Image;
use wshrink::seed::splitmix64;

pub const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

pub fn fixture_images(split: &str) -> Vec<Image> {
    load_dir(format!("{DATA}/{split}"))
        .expect("fixture images")
        .into_iter()
        .map(|(_, img)| img)
        .collect()
}

pub fn fixture_patches(split: &str, count: usize, size: usize, seed: u64) -> Vec<Image> {
    sample_patches(&fixture_images(split), count, size, seed).expect("patches")
}

/// Uniform values in `[0, 255)` from a splitmix stream.
pub fn random_image(w: usize, h: usize, seed: u64) -> Image {
    let mut s = seed;
    Image::from_fn(w, h, |_, _| {
        s = splitmix64(s);
        (s >> 11) as f64 / (1u64 << 53) as f64 * 255.0
    })
}

/// Uniform in `[lo, hi)`.
pub fn uniform(state: &mut u64, lo: f64, hi: f64) -> f64 {
    *state = splitmix64(*state);
    lo + (hi - lo) * ((*state >> 11) as f64 / (1u64 << 53) as f64)
}
