use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Image;
use crate::error::{Error, Result};

/// The top-left corner of a seeded `size`x`size` window, drawn uniformly from
/// all valid positions.
pub fn patch_offset(width: usize, height: usize, size: usize, seed: u64) -> Result<(usize, usize)> {
    if size == 0 || size > width.min(height) {
        return Err(Error::PatchTooLarge { size, width, height });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = rng.gen_range(0..=width - size);
    let y0 = rng.gen_range(0..=height - size);
    Ok((x0, y0))
}

/// Crops a square patch at a seeded uniform position.
pub fn extract_patch(img: &Image, size: usize, seed: u64) -> Result<Image> {
    let (x0, y0) = patch_offset(img.width(), img.height(), size, seed)?;
    img.crop(x0, y0, size, size)
}
