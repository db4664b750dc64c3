//! Image directories and patch sampling.

use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{extract_patch, load_image, Image};
use crate::seed::derive_seed;

/// Loads every `.pgm` file of `dir`, sorted by file name.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, Image)>> {
    let dir = dir.as_ref();
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_pgm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
        if is_pgm && path.is_file() {
            names.push(path);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Error::InvalidParameter(format!("no .pgm files in {}", dir.display())));
    }
    names
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            Ok((name, load_image(&p)?))
        })
        .collect()
}

/// Draws `count` square patches, cycling through `images` in order; the
/// `i`-th patch position comes from a seed derived from `(seed, i)`.
pub fn sample_patches(images: &[Image], count: usize, size: usize, seed: u64) -> Result<Vec<Image>> {
    if images.is_empty() {
        return Err(Error::InvalidParameter("no images to sample from".into()));
    }
    (0..count)
        .map(|i| extract_patch(&images[i % images.len()], size, derive_seed(seed, 0x9a7c, i as u64)))
        .collect()
}
