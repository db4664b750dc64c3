//! Batch reconstruction error and its analytic gradient.
//!
//! Optimizer variables live in the log domain (`lambda = exp(nu)`), which keeps
//! every evaluated contrast parameter positive. The derivative of the
//! multiplier with respect to `ln(lambda)` is bounded, so the gradient never
//! blows up even for extreme iterates.
//!
//! Because the synthesis operator is the adjoint of the analysis operator,
//! `<r, synthesize(D)> = <analyze(r), D>`: the gradient of one image's error
//! needs a single extra analysis of its residual.

use rayon::prelude::*;

use super::TrainingBatch;
use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::pipeline::denoise_pyramid_unchecked;
use crate::shrinkage::{coupled_magnitude2, multiplier_log_gradient, FabParams, ShrinkageSpec};
use crate::wavelet::{analyze, WaveletPyramid};

/// How the optimizer's variable vector maps onto per-scale FAB parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parametrization {
    /// `(ln lambda1, ln lambda2)` for every scale, finest first: `2L` variables.
    PerScale,
    /// One `(ln lambda1, ln lambda2)` pair shared by all scales.
    Shared,
    /// A single `ln lambda` with `lambda1 = lambda2` on all scales.
    SharedTied,
    /// `(ln alpha, ln beta)` of the law `lambda = factor * sigma / l^2`.
    Generic,
}

impl Parametrization {
    pub fn dimension(&self, levels: usize) -> usize {
        match self {
            Parametrization::PerScale => 2 * levels,
            Parametrization::Shared | Parametrization::Generic => 2,
            Parametrization::SharedTied => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Parametrization::PerScale => "per-scale",
            Parametrization::Shared => "shared",
            Parametrization::SharedTied => "shared-tied",
            Parametrization::Generic => "generic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Parametrization::PerScale,
            Parametrization::Shared,
            Parametrization::SharedTied,
            Parametrization::Generic,
        ]
        .into_iter()
        .find(|p| p.name() == name)
    }

    /// Variable indices feeding `ln lambda1` and `ln lambda2` at `level`.
    fn indices(&self, level: usize) -> (usize, usize) {
        match self {
            Parametrization::PerScale => (2 * (level - 1), 2 * (level - 1) + 1),
            Parametrization::Shared | Parametrization::Generic => (0, 1),
            Parametrization::SharedTied => (0, 0),
        }
    }

    /// Per-scale parameters for a batch at noise level `sigma`.
    pub fn lambdas(&self, x: &[f64], levels: usize, sigma: f64) -> Vec<FabParams> {
        (1..=levels)
            .map(|level| {
                let (i, j) = self.indices(level);
                let (a, b) = (x[i].exp(), x[j].exp());
                match self {
                    Parametrization::Generic => {
                        let k = sigma / (level * level) as f64;
                        FabParams::from_raw(a * k, b * k)
                    }
                    _ => FabParams::from_raw(a, b),
                }
            })
            .collect()
    }
}

fn check_dimension(x: &[f64], family: Parametrization, batches: &[TrainingBatch]) -> Result<()> {
    let levels = batches
        .first()
        .ok_or_else(|| Error::InvalidParameter("no training batches".into()))?
        .levels();
    if family != Parametrization::Generic {
        if let Some(b) = batches.iter().find(|b| b.levels() != levels) {
            return Err(Error::LevelMismatch {
                expected: levels,
                found: b.levels(),
            });
        }
    }
    if family == Parametrization::Generic {
        if let Some(b) = batches.iter().find(|b| b.sigma() <= 0.0 || b.sigma().is_nan()) {
            return Err(Error::InvalidParameter(format!(
                "generic parametrization needs sigma > 0, batch has {}",
                b.sigma()
            )));
        }
    }
    let want = family.dimension(levels);
    if x.len() != want {
        return Err(Error::InvalidParameter(format!(
            "{} parametrization with {levels} levels has {want} variables, got {}",
            family.name(),
            x.len()
        )));
    }
    Ok(())
}

/// Error of one image and, optionally, its gradient with respect to
/// `(ln lambda1, ln lambda2)` of every scale.
fn image_terms(
    pyr: &WaveletPyramid,
    clean: &Image,
    lambdas: &[FabParams],
    with_gradient: bool,
) -> (f64, Vec<[f64; 2]>) {
    let spec = ShrinkageSpec::FabPerScale(lambdas.to_vec());
    let u = denoise_pyramid_unchecked(pyr, &spec);
    let n = u.len() as f64;
    let residual: Vec<f64> = u.pixels().iter().zip(clean.pixels()).map(|(a, b)| a - b).collect();
    let loss = residual.iter().map(|r| r * r).sum::<f64>() / n;
    if !with_gradient {
        return (loss, Vec::new());
    }
    let r = Image::from_raw(u.width(), u.height(), residual);
    let adj = analyze(&r, pyr.levels()).expect("levels validated by batch");
    let grads = pyr
        .details
        .iter()
        .zip(&adj.details)
        .zip(lambdas)
        .map(|((band, back), p)| {
            let mut acc = [0.0; 2];
            let coeffs = band.x.pixels().iter().zip(band.y.pixels()).zip(band.xy.pixels());
            let backs = back.x.pixels().iter().zip(back.y.pixels()).zip(back.xy.pixels());
            for (((&wx, &wy), &wxy), ((&bx, &by), &bxy)) in coeffs.zip(backs) {
                let (d1, d2) = multiplier_log_gradient(coupled_magnitude2(wx, wy, wxy), p);
                let c = bx * wx + by * wy + bxy * wxy;
                acc[0] += d1 * c;
                acc[1] += d2 * c;
            }
            [2.0 * acc[0] / n, 2.0 * acc[1] / n]
        })
        .collect();
    (loss, grads)
}

fn evaluate(
    x: &[f64],
    batches: &[TrainingBatch],
    family: Parametrization,
    with_gradient: bool,
) -> Result<(f64, Vec<f64>)> {
    check_dimension(x, family, batches)?;
    let mut total = 0.0;
    let mut grad = vec![0.0; x.len()];
    for batch in batches {
        let lambdas = family.lambdas(x, batch.levels(), batch.sigma());
        let terms: Vec<(f64, Vec<[f64; 2]>)> = batch
            .pyramids()
            .par_iter()
            .zip(batch.pairs().par_iter())
            .map(|(pyr, (_, clean))| image_terms(pyr, clean, &lambdas, with_gradient))
            .collect();
        // Reduction in index order keeps results bit-reproducible.
        let k = terms.len() as f64;
        let mut batch_loss = 0.0;
        for (loss, level_grads) in &terms {
            batch_loss += loss;
            for (level, g) in level_grads.iter().enumerate() {
                let (i, j) = family.indices(level + 1);
                grad[i] += g[0] / k;
                grad[j] += g[1] / k;
            }
        }
        total += batch_loss / k;
    }
    let nb = batches.len() as f64;
    grad.iter_mut().for_each(|g| *g /= nb);
    Ok((total / nb, grad))
}

/// Mean over batches of the mean per-image MSE between reconstruction and
/// ground truth, for log-domain variables `x`.
pub fn pooled_objective(x: &[f64], batches: &[TrainingBatch], family: Parametrization) -> Result<f64> {
    evaluate(x, batches, family, false).map(|(v, _)| v)
}

/// Objective value and its exact gradient with respect to `x`.
pub fn pooled_objective_and_gradient(
    x: &[f64],
    batches: &[TrainingBatch],
    family: Parametrization,
) -> Result<(f64, Vec<f64>)> {
    evaluate(x, batches, family, true)
}

/// Objective of a single batch.
pub fn objective(x: &[f64], batch: &TrainingBatch, family: Parametrization) -> Result<f64> {
    pooled_objective(x, std::slice::from_ref(batch), family)
}

/// Gradient of [`objective`] with respect to the log-domain variables.
pub fn objective_gradient(x: &[f64], batch: &TrainingBatch, family: Parametrization) -> Result<Vec<f64>> {
    pooled_objective_and_gradient(x, std::slice::from_ref(batch), family).map(|(_, g)| g)
}

/// Objective of a fixed shrinkage rule (any family) on a batch.
pub fn spec_objective(batch: &TrainingBatch, spec: &ShrinkageSpec) -> Result<f64> {
    spec.validate(batch.levels())?;
    let losses: Vec<f64> = batch
        .pyramids()
        .par_iter()
        .zip(batch.pairs().par_iter())
        .map(|(pyr, (_, clean))| {
            let u = denoise_pyramid_unchecked(pyr, spec);
            crate::imaging::mse(&u, clean).expect("shapes checked by batch")
        })
        .collect();
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}
