use std::fmt::Write as _;
use std::path::Path;

use super::{OptimizeOutcome, Parametrization};
use crate::error::{Error, Result};
use crate::shrinkage::{FabParams, GenericParams, ShrinkageSpec};

/// Trained parameters and optimizer diagnostics.
///
/// `params` holds natural-domain values: `[lambda1, lambda2]` per scale for
/// per-scale training, a single pair (or a single lambda) for the shared
/// variants, and `[alpha, beta]` for the generic law. `gradient_norm` is
/// measured with respect to the log-domain optimizer variables.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainResult {
    pub parametrization: Parametrization,
    pub levels: usize,
    pub params: Vec<f64>,
    pub final_loss: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub loss_trace: Vec<f64>,
}

impl TrainResult {
    pub(crate) fn from_outcome(parametrization: Parametrization, levels: usize, out: &OptimizeOutcome) -> Self {
        TrainResult {
            parametrization,
            levels,
            params: out.x.iter().map(|v| v.exp()).collect(),
            final_loss: out.loss,
            iterations: out.iterations,
            gradient_norm: out.gradient_norm(),
            loss_trace: out.loss_trace.clone(),
        }
    }

    /// Per-scale FAB parameters. For the generic law this needs `sigma`.
    pub fn lambdas(&self, sigma: Option<f64>) -> Result<Vec<FabParams>> {
        let p = &self.params;
        let pairs: Vec<(f64, f64)> = match self.parametrization {
            Parametrization::PerScale => p.chunks(2).map(|c| (c[0], c[1])).collect(),
            Parametrization::Shared => vec![(p[0], p[1]); self.levels],
            Parametrization::SharedTied => vec![(p[0], p[0]); self.levels],
            Parametrization::Generic => {
                let sigma =
                    sigma.ok_or_else(|| Error::InvalidParameter("the generic law needs a noise level".into()))?;
                let law = GenericParams::new(p[0], p[1])?;
                return (1..=self.levels.max(1))
                    .map(|l| crate::shrinkage::generic_lambdas(l, sigma, &law))
                    .collect();
            }
        };
        pairs.into_iter().map(|(a, b)| FabParams::new(a, b)).collect()
    }

    /// The trained rule as a shrinkage spec. Generic results stay generic
    /// and need `sigma`; the others become a per-scale FAB list.
    pub fn spec(&self, sigma: Option<f64>) -> Result<ShrinkageSpec> {
        match self.parametrization {
            Parametrization::Generic => Ok(ShrinkageSpec::Generic {
                params: GenericParams::new(self.params[0], self.params[1])?,
                sigma: sigma.ok_or_else(|| Error::InvalidParameter("the generic law needs a noise level".into()))?,
            }),
            _ => Ok(ShrinkageSpec::FabPerScale(self.lambdas(None)?)),
        }
    }

    /// Text form: metadata, the spec lines, then the loss trace as CSV.
    /// The file can be loaded directly with [`ShrinkageSpec::load`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("# wshrink training result\n");
        writeln!(out, "parametrization {}", self.parametrization.name()).unwrap();
        writeln!(out, "levels {}", self.levels).unwrap();
        writeln!(out, "final_loss {}", self.final_loss).unwrap();
        writeln!(out, "iterations {}", self.iterations).unwrap();
        writeln!(out, "gradient_norm {}", self.gradient_norm).unwrap();
        match self.parametrization {
            Parametrization::Generic => {
                writeln!(out, "family generic").unwrap();
                writeln!(out, "alpha {}", self.params[0]).unwrap();
                writeln!(out, "beta {}", self.params[1]).unwrap();
            }
            _ => {
                out.push_str("family fab\n");
                for (i, p) in self.lambdas(None).unwrap_or_default().iter().enumerate() {
                    writeln!(out, "level {} {} {}", i + 1, p.lambda1(), p.lambda2()).unwrap();
                }
            }
        }
        out.push_str("loss_trace\niteration,loss\n");
        for (i, l) in self.loss_trace.iter().enumerate() {
            writeln!(out, "{i},{l}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::SpecParse { line, message };
        let mut parametrization = None;
        let mut final_loss = None;
        let mut iterations = None;
        let mut gradient_norm = None;
        let mut levels = None;
        let mut trace = Vec::new();
        let mut in_trace = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if in_trace {
                if content == "iteration,loss" {
                    continue;
                }
                let (_, loss) = content
                    .split_once(',')
                    .ok_or_else(|| err(line, format!("bad trace row '{content}'")))?;
                trace.push(
                    loss.parse::<f64>()
                        .map_err(|_| err(line, format!("bad loss '{loss}'")))?,
                );
                continue;
            }
            let mut toks = content.split_whitespace();
            let key = toks.next().unwrap();
            let value = toks.next();
            let num = |v: Option<&str>| -> Result<f64> {
                v.and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(line, format!("{key} needs a numeric value")))
            };
            match key {
                "loss_trace" => in_trace = true,
                "parametrization" => {
                    let name = value.unwrap_or("");
                    parametrization = Some(
                        Parametrization::from_name(name)
                            .ok_or_else(|| err(line, format!("unknown parametrization '{name}'")))?,
                    );
                }
                "final_loss" => final_loss = Some(num(value)?),
                "levels" => levels = Some(num(value)? as usize),
                "iterations" => iterations = Some(num(value)? as usize),
                "gradient_norm" => gradient_norm = Some(num(value)?),
                _ => {}
            }
        }
        let parametrization = parametrization.ok_or_else(|| err(0, "missing parametrization".into()))?;
        // The spec lines carry the parameters; a placeholder noise level lets
        // generic files parse.
        let spec = ShrinkageSpec::parse_with_sigma(text, Some(1.0))?;
        let (spec_levels, params) = match (&spec, parametrization) {
            (ShrinkageSpec::Generic { params, .. }, Parametrization::Generic) => (1, vec![params.alpha, params.beta]),
            (ShrinkageSpec::FabPerScale(ps), Parametrization::PerScale) => {
                (ps.len(), ps.iter().flat_map(|p| [p.lambda1(), p.lambda2()]).collect())
            }
            (ShrinkageSpec::FabPerScale(ps), Parametrization::Shared) => {
                (ps.len(), vec![ps[0].lambda1(), ps[0].lambda2()])
            }
            (ShrinkageSpec::FabPerScale(ps), Parametrization::SharedTied) => (ps.len(), vec![ps[0].lambda1()]),
            _ => {
                return Err(err(
                    0,
                    format!(
                        "family {} does not match parametrization {}",
                        spec.family(),
                        parametrization.name()
                    ),
                ))
            }
        };
        Ok(TrainResult {
            parametrization,
            levels: levels.unwrap_or(spec_levels),
            params,
            final_loss: final_loss.ok_or_else(|| err(0, "missing final_loss".into()))?,
            iterations: iterations.ok_or_else(|| err(0, "missing iterations".into()))?,
            gradient_norm: gradient_norm.ok_or_else(|| err(0, "missing gradient_norm".into()))?,
            loss_trace: trace,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::fsutil::write_atomic(path.as_ref(), self.to_text().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(p: Parametrization, params: Vec<f64>, levels: usize) -> TrainResult {
        TrainResult {
            parametrization: p,
            levels,
            params,
            final_loss: 101.25,
            iterations: 17,
            gradient_norm: 3.5e-7,
            loss_trace: vec![140.0, 120.5, 101.25],
        }
    }

    #[test]
    fn round_trips() {
        for r in [
            sample(Parametrization::PerScale, vec![110.0, 110.2, 33.8, 76.8, 14.9, 20.3], 3),
            sample(Parametrization::Shared, vec![40.0, 55.5], 4),
            sample(Parametrization::SharedTied, vec![42.0], 2),
            sample(Parametrization::Generic, vec![5.4, 8.9], 1),
        ] {
            let text = r.to_text();
            let back = TrainResult::parse(&text).unwrap();
            assert_eq!(back.parametrization, r.parametrization);
            assert_eq!(back.iterations, r.iterations);
            assert_eq!(back.levels, r.levels);
            assert_eq!(back.loss_trace, r.loss_trace);
            for (a, b) in back.params.iter().zip(&r.params) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn readable_as_spec() {
        let r = sample(Parametrization::PerScale, vec![110.0, 110.2, 33.8, 76.8], 2);
        let spec = ShrinkageSpec::parse(&r.to_text()).unwrap();
        assert_eq!(spec.family(), "fab");
        let g = sample(Parametrization::Generic, vec![5.4, 8.9], 1);
        assert!(ShrinkageSpec::parse(&g.to_text()).is_err());
        let spec = ShrinkageSpec::parse_with_sigma(&g.to_text(), Some(25.0)).unwrap();
        assert_eq!(spec, g.spec(Some(25.0)).unwrap());
    }
}
