//! Fitting shrinkage parameters to pairs of noisy and clean images.
//!
//! The objective is the mean squared reconstruction error, averaged over the
//! images of a batch (and over batches when several noise levels are pooled).
//! FAB parameters are fitted with L-BFGS in the log domain; thresholds of the
//! classical rules are tuned by a grid scan refined with golden-section search.

mod golden;
mod lbfgs;
mod objective;
mod result;

pub use golden::golden_section;
pub use lbfgs::{optimize_lbfgs, LbfgsOptions, OptimizeOutcome, StopReason};
pub use objective::{
    objective, objective_gradient, pooled_objective, pooled_objective_and_gradient, spec_objective, Parametrization,
};
pub use result::TrainResult;

use crate::error::{Error, Result};
use crate::imaging::{add_gaussian_noise, Image, NoiseModel};
use crate::seed::derive_seed;
use crate::shrinkage::{FabParams, GenericParams, ShrinkageSpec};
use crate::wavelet::{analyze, WaveletPyramid};

/// Noisy/clean image pairs at one noise level, with the noisy pyramids
/// computed once up front.
#[derive(Clone, Debug)]
pub struct TrainingBatch {
    pairs: Vec<(Image, Image)>,
    sigma: f64,
    levels: usize,
    pyramids: Vec<WaveletPyramid>,
}

impl TrainingBatch {
    pub fn new(pairs: Vec<(Image, Image)>, sigma: f64, levels: usize) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter(
                "a training batch needs at least one pair".into(),
            ));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid batch sigma {sigma}")));
        }
        for (noisy, clean) in &pairs {
            noisy.check_same_shape(clean)?;
        }
        let pyramids = pairs
            .iter()
            .map(|(noisy, _)| analyze(noisy, levels))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrainingBatch {
            pairs,
            sigma,
            levels,
            pyramids,
        })
    }

    /// Corrupts each clean image with its own seeded noise realization.
    /// One realization is drawn per image and kept for the whole run.
    pub fn from_clean(clean: &[Image], sigma: f64, levels: usize, seed: u64) -> Result<Self> {
        let pairs = clean
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let noise = NoiseModel::new(sigma, derive_seed(seed, sigma.to_bits(), k as u64));
                Ok((add_gaussian_noise(v, noise)?, v.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs, sigma, levels)
    }

    pub fn pairs(&self) -> &[(Image, Image)] {
        &self.pairs
    }

    pub fn pyramids(&self) -> &[WaveletPyramid] {
        &self.pyramids
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Fits the variables of `family` over the pooled batches, starting from the
/// log-domain point `x0`.
pub fn train(
    batches: &[TrainingBatch],
    family: Parametrization,
    x0: &[f64],
    opts: &LbfgsOptions,
) -> Result<TrainResult> {
    // Validate once so that the closure below cannot fail on shape errors.
    pooled_objective(x0, batches, family)?;
    let mut failure = None;
    let outcome = optimize_lbfgs(
        |x| match pooled_objective_and_gradient(x, batches, family) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NAN, vec![f64::NAN; x.len()])
            }
        },
        x0,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let outcome = outcome?;
    Ok(TrainResult::from_outcome(family, batches[0].levels(), &outcome))
}

/// Default per-scale start: `lambda1 = lambda2 = 2 sigma / l^2`.
pub fn default_per_scale_init(sigma: f64, levels: usize) -> Vec<FabParams> {
    let sigma = if sigma > 0.0 { sigma } else { 1.0 };
    (1..=levels)
        .map(|l| {
            let v = 2.0 * sigma / (l * l) as f64;
            FabParams::from_raw(v, v)
        })
        .collect()
}

fn log_vars(ps: &[FabParams]) -> Vec<f64> {
    ps.iter().flat_map(|p| [p.lambda1().ln(), p.lambda2().ln()]).collect()
}

/// Trains one FAB parameter pair per scale on a single-noise-level batch.
pub fn train_per_scale(batch: &TrainingBatch, init: Option<&[FabParams]>) -> Result<TrainResult> {
    train_per_scale_with(batch, init, &LbfgsOptions::default())
}

/// Like [`train_per_scale`] with explicit optimizer options.
///
/// The objective has several local minima; in particular a `lambda2` that
/// collapses towards 0 or grows without bound leaves a flat region the
/// optimizer cannot leave. Besides `init`, a second run therefore starts from
/// `lambda1 = lambda2 = sigma` on every scale, and the run with the lower final
/// loss is returned (the one from `init` on ties).
pub fn train_per_scale_with(
    batch: &TrainingBatch,
    init: Option<&[FabParams]>,
    opts: &LbfgsOptions,
) -> Result<TrainResult> {
    let init = match init {
        Some(ps) => {
            if ps.len() != batch.levels() {
                return Err(Error::LevelMismatch {
                    expected: batch.levels(),
                    found: ps.len(),
                });
            }
            ps.to_vec()
        }
        None => default_per_scale_init(batch.sigma(), batch.levels()),
    };
    let batches = std::slice::from_ref(batch);
    let first = train(batches, Parametrization::PerScale, &log_vars(&init), opts)?;
    let flat = vec![FabParams::from_raw(batch.sigma(), batch.sigma()); batch.levels()];
    if batch.sigma() <= 0.0 || batch.sigma().is_nan() || flat == init {
        return Ok(first);
    }
    let second = train(batches, Parametrization::PerScale, &log_vars(&flat), opts)?;
    Ok(if second.final_loss < first.final_loss {
        second
    } else {
        first
    })
}

/// Trains a single FAB pair used on every scale; with `tied` the two contrast
/// parameters are forced equal (pure shrinkage, no amplification).
pub fn train_shared(batch: &TrainingBatch, init: FabParams, tied: bool, opts: &LbfgsOptions) -> Result<TrainResult> {
    if tied {
        train(
            std::slice::from_ref(batch),
            Parametrization::SharedTied,
            &[init.lambda1().ln()],
            opts,
        )
    } else {
        train(
            std::slice::from_ref(batch),
            Parametrization::Shared,
            &log_vars(&[init]),
            opts,
        )
    }
}

/// Fits `(alpha, beta)` over batches covering at least three noise levels.
pub fn train_generic(batches: &[TrainingBatch], init: GenericParams) -> Result<TrainResult> {
    train_generic_with(batches, init, &LbfgsOptions::default())
}

pub fn train_generic_with(batches: &[TrainingBatch], init: GenericParams, opts: &LbfgsOptions) -> Result<TrainResult> {
    let mut sigmas: Vec<f64> = batches.iter().map(|b| b.sigma()).collect();
    sigmas.sort_by(f64::total_cmp);
    sigmas.dedup();
    if sigmas.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "generic training needs at least 3 distinct noise levels, got {}",
            sigmas.len()
        )));
    }
    train(
        batches,
        Parametrization::Generic,
        &[init.alpha.ln(), init.beta.ln()],
        opts,
    )
}

/// Classical threshold rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassicalRule {
    Soft,
    Hard,
    Garrote,
}

impl ClassicalRule {
    pub const ALL: [ClassicalRule; 3] = [ClassicalRule::Soft, ClassicalRule::Hard, ClassicalRule::Garrote];

    pub fn spec(&self, theta: f64) -> ShrinkageSpec {
        match self {
            ClassicalRule::Soft => ShrinkageSpec::Soft(theta),
            ClassicalRule::Hard => ShrinkageSpec::Hard(theta),
            ClassicalRule::Garrote => ShrinkageSpec::Garrote(theta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassicalRule::Soft => "soft",
            ClassicalRule::Hard => "hard",
            ClassicalRule::Garrote => "garrote",
        }
    }
}

/// Number of points of the coarse threshold scan over `[0, 10 sigma]`.
pub const THRESHOLD_GRID: usize = 33;

/// Outcome of a threshold search.
#[derive(Clone, Debug)]
pub struct ThresholdFit {
    pub theta: f64,
    pub loss: f64,
    /// `(theta, loss)` of the coarse scan.
    pub grid: Vec<(f64, f64)>,
}

/// Finds the threshold minimizing the batch objective: a 33-point scan over
/// `[0, 10 sigma]`, then golden-section search between the neighbours of the
/// best grid point. Ties go to the smaller threshold.
pub fn tune_threshold_fit(rule: ClassicalRule, batch: &TrainingBatch) -> Result<ThresholdFit> {
    let upper = 10.0 * batch.sigma();
    let eval = |t: f64| spec_objective(batch, &rule.spec(t));
    let mut grid = Vec::with_capacity(THRESHOLD_GRID);
    for i in 0..THRESHOLD_GRID {
        let t = upper * i as f64 / (THRESHOLD_GRID - 1) as f64;
        grid.push((t, eval(t)?));
        if upper == 0.0 {
            break;
        }
    }
    let (best_i, &(mut theta, mut loss)) = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
        .expect("grid is nonempty");
    if upper > 0.0 {
        let lo = grid[best_i.saturating_sub(1)].0;
        let hi = grid[(best_i + 1).min(grid.len() - 1)].0;
        let mut err = None;
        let (t, l) = golden_section(
            |t| {
                eval(t).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    f64::INFINITY
                })
            },
            lo,
            hi,
            1e-4 * upper,
        );
        if let Some(e) = err {
            return Err(e);
        }
        if l < loss {
            theta = t;
            loss = l;
        }
    }
    Ok(ThresholdFit { theta, loss, grid })
}

/// The optimal threshold for `rule` on `batch`.
pub fn tune_threshold(rule: ClassicalRule, batch: &TrainingBatch) -> Result<f64> {
    tune_threshold_fit(rule, batch).map(|f| f.theta)
}
