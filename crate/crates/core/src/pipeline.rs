//! Analysis, coupled shrinkage, synthesis.

use crate::error::Result;
use crate::imaging::Image;
use crate::shrinkage::{apply_shrinkage, apply_shrinkage_unchecked, ShrinkageSpec};
use crate::wavelet::{analyze, default_levels, synthesize, WaveletPyramid};

#[derive(Clone, Debug)]
pub struct DenoiseRequest {
    pub input: Image,
    pub spec: ShrinkageSpec,
    pub levels: usize,
}

impl DenoiseRequest {
    /// A request using the per-scale list length as level count, or the
    /// default level rule for the image size otherwise.
    pub fn new(input: Image, spec: ShrinkageSpec) -> Self {
        let levels = match &spec {
            ShrinkageSpec::FabPerScale(ps) => ps.len(),
            _ => default_levels(input.width(), input.height()),
        };
        DenoiseRequest { input, spec, levels }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }
}

/// `synthesize(apply_shrinkage(analyze(input, L), spec))`. The result is not clamped.
pub fn denoise(req: &DenoiseRequest) -> Result<Image> {
    req.spec.validate(req.levels)?;
    let pyr = analyze(&req.input, req.levels)?;
    synthesize(&apply_shrinkage(&pyr, &req.spec)?)
}

/// Shrinks and synthesizes an already analyzed image.
pub fn denoise_pyramid(pyr: &WaveletPyramid, spec: &ShrinkageSpec) -> Result<Image> {
    synthesize(&apply_shrinkage(pyr, spec)?)
}

pub(crate) fn denoise_pyramid_unchecked(pyr: &WaveletPyramid, spec: &ShrinkageSpec) -> Image {
    synthesize(&apply_shrinkage_unchecked(pyr, spec)).expect("pyramid produced by analyze")
}
