//! Non-decimating (à trous) 2D Haar transform with periodic boundaries.
//!
//! Level `l` uses pair filters with hole distance `d = 2^(l-1)`:
//!
//! ```text
//! low[i]  = (a[i] + a[i+d]) / 2
//! high[i] = (a[i] - a[i+d]) / 2
//! ```
//!
//! applied separably along x (columns) and y (rows). Every plane keeps the
//! full image resolution. With the 1/2 normalization each detail coefficient
//! is half the difference of two local means, so coefficients stay in the
//! grey-value range on every scale.
//!
//! Synthesis averages the inversions from all shifts, which makes the
//! transform a tight frame: `synthesize` is the adjoint of `analyze` and
//! `synthesize(analyze(f)) == f`.

use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imaging::{save_image, Image};

/// Directional detail planes of one scale.
#[derive(Clone, Debug, PartialEq)]
pub struct DetailBand {
    /// Differences along x (high-pass in x, low-pass in y).
    pub x: Image,
    /// Differences along y.
    pub y: Image,
    /// Diagonal (high-pass in both directions).
    pub xy: Image,
}

/// Scaling plane plus one detail band per level, finest first.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletPyramid {
    pub scaling: Image,
    pub details: Vec<DetailBand>,
}

impl WaveletPyramid {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn width(&self) -> usize {
        self.scaling.width()
    }

    pub fn height(&self) -> usize {
        self.scaling.height()
    }

    /// Detail band of scale `level` (1-based, 1 is finest).
    pub fn band(&self, level: usize) -> &DetailBand {
        &self.details[level - 1]
    }

    fn validate(&self) -> Result<()> {
        if self.details.is_empty() {
            return Err(Error::InvalidParameter("pyramid has no detail levels".into()));
        }
        for band in &self.details {
            for plane in [&band.x, &band.y, &band.xy] {
                self.scaling.check_same_shape(plane)?;
            }
        }
        Ok(())
    }

    /// Writes every plane as a min/max-stretched PGM into `dir`, plus a
    /// `manifest.txt` listing `plane level min max`.
    pub fn dump(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = Vec::new();
        let mut emit = |name: &str, level: usize, plane: &Image| -> Result<()> {
            let (lo, hi) = plane.min_max();
            let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
            let file = format!("{name}_{level}.pgm");
            save_image(&plane.map(|v| (v - lo) * scale), dir.join(&file))?;
            writeln!(manifest, "{name} {level} {lo} {hi} {file}").expect("write to Vec");
            Ok(())
        };
        emit("scaling", self.levels(), &self.scaling)?;
        for (i, band) in self.details.iter().enumerate() {
            emit("x", i + 1, &band.x)?;
            emit("y", i + 1, &band.y)?;
            emit("xy", i + 1, &band.xy)?;
        }
        crate::fsutil::write_atomic(&dir.join("manifest.txt"), &manifest)
    }
}

/// `min(8, floor(log2(min(width, height))))`, at least 1.
pub fn default_levels(width: usize, height: usize) -> usize {
    let m = width.min(height).max(1);
    (usize::BITS - 1 - m.leading_zeros()).clamp(1, 8) as usize
}

/// Pair filters along x: returns `(low, high)`.
fn split_x(a: &[f64], w: usize, h: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
    let d = d % w;
    let mut low = vec![0.0; w * h];
    let mut high = vec![0.0; w * h];
    for y in 0..h {
        let row = &a[y * w..(y + 1) * w];
        let lo = &mut low[y * w..(y + 1) * w];
        let hi = &mut high[y * w..(y + 1) * w];
        for x in 0..w {
            let p = row[x];
            let q = row[if x + d < w { x + d } else { x + d - w }];
            lo[x] = 0.5 * (p + q);
            hi[x] = 0.5 * (p - q);
        }
    }
    (low, high)
}

/// Pair filters along y: returns `(low, high)`.
fn split_y(a: &[f64], w: usize, h: usize, d: usize) -> (Vec<f64>, Vec<f64>) {
    let d = d % h;
    let mut low = vec![0.0; w * h];
    let mut high = vec![0.0; w * h];
    for y in 0..h {
        let yn = if y + d < h { y + d } else { y + d - h };
        let p = &a[y * w..(y + 1) * w];
        let q = &a[yn * w..(yn + 1) * w];
        let lo = &mut low[y * w..(y + 1) * w];
        let hi = &mut high[y * w..(y + 1) * w];
        for x in 0..w {
            lo[x] = 0.5 * (p[x] + q[x]);
            hi[x] = 0.5 * (p[x] - q[x]);
        }
    }
    (low, high)
}

/// Inverse of `split_x`: `a[i] = ((low[i] + high[i]) + (low[i-d] - high[i-d])) / 2`.
fn merge_x(low: &[f64], high: &[f64], w: usize, h: usize, d: usize) -> Vec<f64> {
    let d = d % w;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let lo = &low[y * w..(y + 1) * w];
        let hi = &high[y * w..(y + 1) * w];
        let o = &mut out[y * w..(y + 1) * w];
        for x in 0..w {
            let xp = if x >= d { x - d } else { x + w - d };
            o[x] = 0.5 * ((lo[x] + hi[x]) + (lo[xp] - hi[xp]));
        }
    }
    out
}

/// Inverse of `split_y`.
fn merge_y(low: &[f64], high: &[f64], w: usize, h: usize, d: usize) -> Vec<f64> {
    let d = d % h;
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let yp = if y >= d { y - d } else { y + h - d };
        let (lo, hi) = (&low[y * w..(y + 1) * w], &high[y * w..(y + 1) * w]);
        let (lp, hp) = (&low[yp * w..(yp + 1) * w], &high[yp * w..(yp + 1) * w]);
        let o = &mut out[y * w..(y + 1) * w];
        for x in 0..w {
            o[x] = 0.5 * ((lo[x] + hi[x]) + (lp[x] - hp[x]));
        }
    }
    out
}

/// Forward transform of `img` into `levels` scales.
pub fn analyze(img: &Image, levels: usize) -> Result<WaveletPyramid> {
    if levels < 1 {
        return Err(Error::InvalidParameter("transform needs at least one level".into()));
    }
    let (w, h) = (img.width(), img.height());
    if 1usize.checked_shl(levels as u32 - 1).is_none_or(|d| d >= w.min(h)) {
        log::warn!("{levels} levels on a {w}x{h} image: coarsest hole distance wraps around");
    }
    let mut approx = img.pixels().to_vec();
    let mut details = Vec::with_capacity(levels);
    for level in 1..=levels {
        let d = 1usize << (level - 1).min(usize::BITS as usize - 2);
        let (lx, hx) = split_x(&approx, w, h, d);
        let (ll, lh) = split_y(&lx, w, h, d);
        let (hl, hh) = split_y(&hx, w, h, d);
        details.push(DetailBand {
            x: Image::from_raw(w, h, hl),
            y: Image::from_raw(w, h, lh),
            xy: Image::from_raw(w, h, hh),
        });
        approx = ll;
    }
    Ok(WaveletPyramid {
        scaling: Image::from_raw(w, h, approx),
        details,
    })
}

/// Inverse transform; also the adjoint of [`analyze`].
pub fn synthesize(pyr: &WaveletPyramid) -> Result<Image> {
    pyr.validate()?;
    let (w, h) = (pyr.width(), pyr.height());
    let mut approx = pyr.scaling.pixels().to_vec();
    for level in (1..=pyr.levels()).rev() {
        let d = 1usize << (level - 1).min(usize::BITS as usize - 2);
        let band = pyr.band(level);
        let lx = merge_y(&approx, band.y.pixels(), w, h, d);
        let hx = merge_y(band.x.pixels(), band.xy.pixels(), w, h, d);
        approx = merge_x(&lx, &hx, w, h, d);
    }
    Ok(Image::from_raw(w, h, approx))
}
