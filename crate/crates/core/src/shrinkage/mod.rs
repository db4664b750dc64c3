//! Coupled shrinkage of Haar detail triples.
//!
//! At every pixel of scale `l` the three channels `(w_x, w_y, w_xy)` are
//! multiplied by one common factor `m(s^2)` with
//! `s^2 = w_x^2 + w_y^2 + 2 w_xy^2`. For diffusivity-based rules
//! `m = 1 - g(s^2)`; the classical soft, hard and garrote rules use the same
//! coupling with `s` in place of `|w|`. The scaling plane is never modified.

mod spec_file;

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::wavelet::{DetailBand, WaveletPyramid};

/// Exponent arguments beyond this flush `exp(-t)` to zero.
const EXP_FLUSH: f64 = 700.0;

#[inline]
fn exp_neg(t: f64) -> f64 {
    if t > EXP_FLUSH {
        0.0
    } else {
        (-t).exp()
    }
}

/// `s^2 / lambda^2`, with `0 / 0` read as zero so that vanishing
/// coefficients stay neutral for any lambda.
#[inline]
fn ratio(s2: f64, lambda: f64) -> f64 {
    if s2 == 0.0 {
        0.0
    } else {
        s2 / (lambda * lambda)
    }
}

/// Contrast parameters of the forward-and-backward diffusivity.
///
/// `lambda1` sets the forward (smoothing) range, `lambda2` the backward
/// range. With `lambda2 > lambda1` mid-sized coefficients get amplified;
/// with `lambda1 == lambda2` the rule reduces to exponential Perona–Malik
/// shrinkage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FabParams {
    lambda1: f64,
    lambda2: f64,
}

impl FabParams {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(FabParams { lambda1, lambda2 })
    }

    /// For exponentiated optimizer variables, which may under- or overflow.
    pub(crate) fn from_raw(lambda1: f64, lambda2: f64) -> Self {
        FabParams { lambda1, lambda2 }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Multiplies both contrast parameters by `c`.
    pub fn scaled(&self, c: f64) -> FabParams {
        FabParams::from_raw(self.lambda1 * c, self.lambda2 * c)
    }
}

/// Factors of the scale- and noise-adaptive parameter law
/// `lambda1 = alpha * sigma / l^2`, `lambda2 = beta * sigma / l^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenericParams {
    pub alpha: f64,
    pub beta: f64,
}

impl GenericParams {
    pub const DEFAULT_ALPHA: f64 = 5.4;
    pub const DEFAULT_BETA: f64 = 8.9;

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(GenericParams { alpha, beta })
    }
}

impl Default for GenericParams {
    fn default() -> Self {
        GenericParams {
            alpha: Self::DEFAULT_ALPHA,
            beta: Self::DEFAULT_BETA,
        }
    }
}

/// Which shrinkage rule to apply, with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ShrinkageSpec {
    /// One FAB parameter pair per scale, finest first.
    FabPerScale(Vec<FabParams>),
    /// FAB parameters derived from the `(alpha, beta)` law at noise level `sigma`.
    Generic {
        params: GenericParams,
        sigma: f64,
    },
    Soft(f64),
    Hard(f64),
    Garrote(f64),
}

/// The rule in effect on a single scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelRule {
    Fab(FabParams),
    Soft(f64),
    Hard(f64),
    Garrote(f64),
}

impl ShrinkageSpec {
    /// Family name as used in spec files and reports.
    pub fn family(&self) -> &'static str {
        match self {
            ShrinkageSpec::FabPerScale(_) => "fab",
            ShrinkageSpec::Generic { .. } => "generic",
            ShrinkageSpec::Soft(_) => "soft",
            ShrinkageSpec::Hard(_) => "hard",
            ShrinkageSpec::Garrote(_) => "garrote",
        }
    }

    /// Short human-readable parameter summary.
    pub fn describe(&self) -> String {
        match self {
            ShrinkageSpec::FabPerScale(ps) => ps
                .iter()
                .map(|p| format!("{:.4}/{:.4}", p.lambda1, p.lambda2))
                .collect::<Vec<_>>()
                .join(" "),
            ShrinkageSpec::Generic { params, sigma } => {
                format!("alpha={} beta={} sigma={}", params.alpha, params.beta, sigma)
            }
            ShrinkageSpec::Soft(t) | ShrinkageSpec::Hard(t) | ShrinkageSpec::Garrote(t) => {
                format!("theta={t:.4}")
            }
        }
    }

    /// Checks the parameters and, for per-scale rules, the level count.
    pub fn validate(&self, levels: usize) -> Result<()> {
        match self {
            ShrinkageSpec::FabPerScale(ps) => {
                if ps.len() != levels {
                    return Err(Error::LevelMismatch {
                        expected: levels,
                        found: ps.len(),
                    });
                }
                for p in ps {
                    FabParams::new(p.lambda1, p.lambda2)?;
                }
            }
            ShrinkageSpec::Generic { params, sigma } => {
                GenericParams::new(params.alpha, params.beta)?;
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "generic rule needs a positive noise level, got {sigma}"
                    )));
                }
            }
            ShrinkageSpec::Soft(t) | ShrinkageSpec::Hard(t) | ShrinkageSpec::Garrote(t) => {
                if !(*t >= 0.0 && t.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "threshold must be finite and nonnegative, got {t}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The rule for scale `level` (1-based).
    pub fn level_rule(&self, level: usize) -> LevelRule {
        match self {
            ShrinkageSpec::FabPerScale(ps) => LevelRule::Fab(ps[level - 1]),
            ShrinkageSpec::Generic { params, sigma } => {
                LevelRule::Fab(generic_lambdas_unchecked(level, *sigma, params))
            }
            ShrinkageSpec::Soft(t) => LevelRule::Soft(*t),
            ShrinkageSpec::Hard(t) => LevelRule::Hard(*t),
            ShrinkageSpec::Garrote(t) => LevelRule::Garrote(*t),
        }
    }
}

/// Forward-and-backward diffusivity
/// `g(s^2) = 2 exp(-s^2 / lambda1^2) - exp(-s^2 / lambda2^2)`.
pub fn fab_diffusivity(s2: f64, p: &FabParams) -> f64 {
    2.0 * exp_neg(ratio(s2, p.lambda1)) - exp_neg(ratio(s2, p.lambda2))
}

/// Contrast parameters at scale `level` and noise level `sigma`.
pub fn generic_lambdas(level: usize, sigma: f64, p: &GenericParams) -> Result<FabParams> {
    if level < 1 {
        return Err(Error::InvalidParameter("levels are numbered from 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let p = generic_lambdas_unchecked(level, sigma, p);
    FabParams::new(p.lambda1, p.lambda2)
}

pub(crate) fn generic_lambdas_unchecked(level: usize, sigma: f64, p: &GenericParams) -> FabParams {
    let k = sigma / (level * level) as f64;
    FabParams::from_raw(p.alpha * k, p.beta * k)
}

/// The common channel factor `m(s^2)` for one scale.
pub fn coupled_multiplier(rule: &LevelRule, s2: f64) -> f64 {
    match *rule {
        LevelRule::Fab(p) => 1.0 - fab_diffusivity(s2, &p),
        LevelRule::Hard(t) => {
            if s2.sqrt() <= t {
                0.0
            } else {
                1.0
            }
        }
        LevelRule::Soft(t) => {
            let s = s2.sqrt();
            if s == 0.0 {
                0.0
            } else {
                (1.0 - t / s).max(0.0)
            }
        }
        LevelRule::Garrote(t) => {
            if s2 == 0.0 {
                0.0
            } else {
                (1.0 - t * t / s2).max(0.0)
            }
        }
    }
}

/// `(dm/dlambda1, dm/dlambda2)` for `m = 1 - g(s^2)`.
pub fn multiplier_param_gradient(s2: f64, p: &FabParams) -> Result<(f64, f64)> {
    FabParams::new(p.lambda1, p.lambda2)?;
    let (d1, d2) = multiplier_log_gradient(s2, p);
    Ok((d1 / p.lambda1, d2 / p.lambda2))
}

/// Derivatives of `m` with respect to `ln(lambda1)` and `ln(lambda2)`.
///
/// With `t = s^2 / lambda^2` these are `-4 t e^-t` and `2 t e^-t`, which stay
/// bounded for any lambda, including under- and overflowed ones.
#[inline]
pub(crate) fn multiplier_log_gradient(s2: f64, p: &FabParams) -> (f64, f64) {
    let te = |t: f64| if t > EXP_FLUSH { 0.0 } else { t * (-t).exp() };
    (-4.0 * te(ratio(s2, p.lambda1)), 2.0 * te(ratio(s2, p.lambda2)))
}

/// Squared coupled magnitude `w_x^2 + w_y^2 + 2 w_xy^2`.
#[inline]
pub fn coupled_magnitude2(wx: f64, wy: f64, wxy: f64) -> f64 {
    wx * wx + wy * wy + 2.0 * wxy * wxy
}

fn shrink_band(band: &DetailBand, rule: &LevelRule) -> DetailBand {
    let (w, h) = (band.x.width(), band.x.height());
    let n = w * h;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut xy = Vec::with_capacity(n);
    for ((&a, &b), &c) in band.x.pixels().iter().zip(band.y.pixels()).zip(band.xy.pixels()) {
        let m = coupled_multiplier(rule, coupled_magnitude2(a, b, c));
        x.push(m * a);
        y.push(m * b);
        xy.push(m * c);
    }
    DetailBand {
        x: Image::from_raw(w, h, x),
        y: Image::from_raw(w, h, y),
        xy: Image::from_raw(w, h, xy),
    }
}

/// Applies `spec` to every detail band; the scaling plane is copied.
pub fn apply_shrinkage(pyr: &WaveletPyramid, spec: &ShrinkageSpec) -> Result<WaveletPyramid> {
    spec.validate(pyr.levels())?;
    Ok(apply_shrinkage_unchecked(pyr, spec))
}

pub(crate) fn apply_shrinkage_unchecked(pyr: &WaveletPyramid, spec: &ShrinkageSpec) -> WaveletPyramid {
    let details = pyr
        .details
        .iter()
        .enumerate()
        .map(|(i, band)| shrink_band(band, &spec.level_rule(i + 1)))
        .collect();
    WaveletPyramid {
        scaling: pyr.scaling.clone(),
        details,
    }
}
