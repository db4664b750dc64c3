//! Grayscale rasters, PGM I/O, noise synthesis, patch sampling and quality metrics.
//!
//! Pixels are stored as `f64` grey values in row-major order. The nominal range
//! is `[0, 255]`, but nothing in memory is clamped: noisy images and
//! reconstructions are allowed to leave that range. Rounding and clamping only
//! happen when an image is written to disk.

mod metrics;
mod noise;
mod patch;
mod pgm;

pub use metrics::{mse, psnr, PEAK};
pub use noise::{add_gaussian_noise, NoiseModel};
pub use patch::{extract_patch, patch_offset};
pub use pgm::{decode_pgm, encode_pgm, load_image, save_image};

use crate::error::{Error, Result};

/// A real-valued grayscale raster.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    /// Builds an image from row-major pixels, checking the size and that all
    /// samples are finite.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "{} samples do not fill a {width}x{height} image",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pixel {i} is not finite ({})",
                data[i]
            )));
        }
        Ok(Image { width, height, data })
    }

    /// A constant image.
    ///
    /// # Panics
    /// If either dimension is zero or `value` is not finite.
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        assert!(value.is_finite());
        Image {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image { width, height, data }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Image { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left_w: self.width,
                left_h: self.height,
                right_w: other.width,
                right_h: other.height,
            })
        }
    }

    /// Pixel-wise map into a new image.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image::from_raw(self.width, self.height, self.data.iter().map(|&v| f(v)).collect())
    }

    /// Adds a constant grey value to every pixel.
    pub fn offset(&self, c: f64) -> Image {
        self.map(|v| v + c)
    }

    /// Periodic translation: the output pixel `(x, y)` is input pixel
    /// `(x - dx, y - dy)` modulo the image size.
    pub fn shifted(&self, dx: isize, dy: isize) -> Image {
        let (w, h) = (self.width as isize, self.height as isize);
        Image::from_fn(self.width, self.height, |x, y| {
            let sx = (x as isize - dx).rem_euclid(w) as usize;
            let sy = (y as isize - dy).rem_euclid(h) as usize;
            self.get(sx, sy)
        })
    }

    /// Copies the `size_w`x`size_h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, size_w: usize, size_h: usize) -> Result<Image> {
        if size_w == 0 || size_h == 0 || x0 + size_w > self.width || y0 + size_h > self.height {
            return Err(Error::InvalidParameter(format!(
                "crop {size_w}x{size_h}+{x0}+{y0} outside {}x{}",
                self.width, self.height
            )));
        }
        let mut data = Vec::with_capacity(size_w * size_h);
        for y in y0..y0 + size_h {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + x0..row + x0 + size_w]);
        }
        Ok(Image::from_raw(size_w, size_h, data))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Largest absolute pixel difference between two images of equal shape.
    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }
}
