//! Line-based text format for [`ShrinkageSpec`].
//!
//! ```text
//! # comment
//! family fab
//! level 1 54.2 88.9
//! level 2 13.5 22.25
//! ```
//!
//! `family generic` takes `alpha`, `beta` and an optional `sigma` line;
//! `family soft|hard|garrote` takes a single `theta` line. Parsing stops at a
//! `loss_trace` line so that training result files double as spec files, and
//! the result metadata keys are skipped.

use std::fmt::Write as _;
use std::path::Path;

use super::{FabParams, GenericParams, ShrinkageSpec};
use crate::error::{Error, Result};

const METADATA_KEYS: &[&str] = &[
    "final_loss",
    "iterations",
    "gradient_norm",
    "parametrization",
    "converged",
    "levels",
];

fn parse_f64(line: usize, tok: Option<&str>, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::SpecParse {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse::<f64>().map_err(|_| Error::SpecParse {
        line,
        message: format!("{what} '{tok}' is not a number"),
    })
}

impl ShrinkageSpec {
    /// Serializes to the text format. Numbers use the shortest exact
    /// representation, so parsing the output reproduces `self` bit for bit.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# wshrink shrinkage spec\n");
        writeln!(out, "family {}", self.family()).unwrap();
        match self {
            ShrinkageSpec::FabPerScale(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    writeln!(out, "level {} {} {}", i + 1, p.lambda1, p.lambda2).unwrap();
                }
            }
            ShrinkageSpec::Generic { params, sigma } => {
                writeln!(out, "alpha {}", params.alpha).unwrap();
                writeln!(out, "beta {}", params.beta).unwrap();
                writeln!(out, "sigma {sigma}").unwrap();
            }
            ShrinkageSpec::Soft(t) | ShrinkageSpec::Hard(t) | ShrinkageSpec::Garrote(t) => {
                writeln!(out, "theta {t}").unwrap();
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_sigma(text, None)
    }

    /// Parses a spec; `sigma`, when given, overrides the noise level of a
    /// generic rule (and supplies it when the file has none).
    pub fn parse_with_sigma(text: &str, sigma: Option<f64>) -> Result<Self> {
        let mut family: Option<(usize, String)> = None;
        let mut levels: Vec<(usize, FabParams)> = Vec::new();
        let mut alpha = None;
        let mut beta = None;
        let mut file_sigma = None;
        let mut theta = None;
        let mut last_line = 0;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut toks = content.split_whitespace();
            let key = toks.next().unwrap();
            match key {
                "loss_trace" => break,
                "family" => {
                    let name = toks.next().ok_or_else(|| Error::SpecParse {
                        line,
                        message: "missing family name".into(),
                    })?;
                    family = Some((line, name.to_string()));
                }
                "level" => {
                    let l: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::SpecParse {
                            line,
                            message: "missing or invalid level index".into(),
                        })?;
                    let l1 = parse_f64(line, toks.next(), "lambda1")?;
                    let l2 = parse_f64(line, toks.next(), "lambda2")?;
                    let p = FabParams::new(l1, l2).map_err(|e| Error::SpecParse {
                        line,
                        message: e.to_string(),
                    })?;
                    levels.push((l, p));
                }
                "alpha" => alpha = Some(parse_f64(line, toks.next(), "alpha")?),
                "beta" => beta = Some(parse_f64(line, toks.next(), "beta")?),
                "sigma" => file_sigma = Some(parse_f64(line, toks.next(), "sigma")?),
                "theta" => theta = Some(parse_f64(line, toks.next(), "theta")?),
                k if METADATA_KEYS.contains(&k) => {}
                other => {
                    return Err(Error::SpecParse {
                        line,
                        message: format!("unknown key '{other}'"),
                    })
                }
            }
        }

        let (fline, fam) = family.ok_or(Error::SpecParse {
            line: last_line,
            message: "missing 'family' line".into(),
        })?;
        let missing = |what: &str| Error::SpecParse {
            line: last_line,
            message: format!("family {fam} needs a '{what}' line"),
        };
        let spec = match fam.as_str() {
            "fab" => {
                if levels.is_empty() {
                    return Err(missing("level"));
                }
                for (i, (l, _)) in levels.iter().enumerate() {
                    if *l != i + 1 {
                        return Err(Error::SpecParse {
                            line: fline,
                            message: format!(
                                "levels must be listed as 1..L in order, found {l} at position {}",
                                i + 1
                            ),
                        });
                    }
                }
                ShrinkageSpec::FabPerScale(levels.into_iter().map(|(_, p)| p).collect())
            }
            "generic" => {
                let params = GenericParams::new(
                    alpha.ok_or_else(|| missing("alpha"))?,
                    beta.ok_or_else(|| missing("beta"))?,
                )?;
                let sigma = sigma.or(file_sigma).ok_or_else(|| missing("sigma"))?;
                ShrinkageSpec::Generic { params, sigma }
            }
            "soft" => ShrinkageSpec::Soft(theta.ok_or_else(|| missing("theta"))?),
            "hard" => ShrinkageSpec::Hard(theta.ok_or_else(|| missing("theta"))?),
            "garrote" => ShrinkageSpec::Garrote(theta.ok_or_else(|| missing("theta"))?),
            other => {
                return Err(Error::SpecParse {
                    line: fline,
                    message: format!("unknown family '{other}'"),
                })
            }
        };
        let levels = match &spec {
            ShrinkageSpec::FabPerScale(ps) => ps.len(),
            _ => 1,
        };
        spec.validate(levels)?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>, sigma: Option<f64>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_sigma(&text, sigma)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::fsutil::write_atomic(path.as_ref(), self.to_text().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_each_family() {
        let s = ShrinkageSpec::parse("family fab\nlevel 1 54 89 # finest\nlevel 2 13.5 22.25\n").unwrap();
        assert_eq!(
            s,
            ShrinkageSpec::FabPerScale(vec![
                FabParams::new(54.0, 89.0).unwrap(),
                FabParams::new(13.5, 22.25).unwrap()
            ])
        );
        let g = ShrinkageSpec::parse("family generic\nalpha 5.4\nbeta 8.9\nsigma 25\n").unwrap();
        assert_eq!(
            g,
            ShrinkageSpec::Generic {
                params: GenericParams::default(),
                sigma: 25.0
            }
        );
        let g = ShrinkageSpec::parse_with_sigma("family generic\nalpha 5.4\nbeta 8.9\nsigma 25\n", Some(40.0)).unwrap();
        assert!(matches!(g, ShrinkageSpec::Generic { sigma, .. } if sigma == 40.0));
        assert_eq!(
            ShrinkageSpec::parse("family hard\ntheta 12\n").unwrap(),
            ShrinkageSpec::Hard(12.0)
        );
        assert_eq!(
            ShrinkageSpec::parse("family garrote\ntheta 0\n").unwrap(),
            ShrinkageSpec::Garrote(0.0)
        );
    }

    #[test]
    fn stops_at_loss_trace_and_skips_metadata() {
        let text = "family soft\ntheta 3\nfinal_loss 12.5\niterations 4\nloss_trace\niteration,loss\n0,20\n";
        assert_eq!(ShrinkageSpec::parse(text).unwrap(), ShrinkageSpec::Soft(3.0));
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("theta 3\n", "family"),
            ("family fab\nlevel 2 1 1\n", "levels"),
            ("family fab\nlevel 1 0 1\n", "lambda1"),
            ("family soft\ntheta x\n", "not a number"),
            ("family wavy\n", "unknown family"),
            ("family hard\nbogus 1\n", "unknown key"),
            ("family generic\nalpha 1\nbeta 2\n", "sigma"),
        ];
        for (text, needle) in cases {
            let err = ShrinkageSpec::parse(text).unwrap_err();
            assert!(
                matches!(err, Error::SpecParse { .. } | Error::InvalidParameter(_)),
                "{err}"
            );
            assert!(err.to_string().contains(needle), "{text:?}: {err}");
        }
        assert!(ShrinkageSpec::parse("family hard\ntheta -1\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip(ls in proptest::collection::vec((1e-3f64..1e4, 1e-3f64..1e4), 1..9), t in 0.0f64..500.0) {
            let fab = ShrinkageSpec::FabPerScale(ls.iter().map(|&(a, b)| FabParams::new(a, b).unwrap()).collect());
            prop_assert_eq!(ShrinkageSpec::parse(&fab.to_text()).unwrap(), fab);
            for spec in [ShrinkageSpec::Soft(t), ShrinkageSpec::Hard(t), ShrinkageSpec::Garrote(t),
                         ShrinkageSpec::Generic { params: GenericParams::new(t + 0.1, t + 1.0).unwrap(), sigma: t + 0.5 }] {
                prop_assert_eq!(ShrinkageSpec::parse(&spec.to_text()).unwrap(), spec);
            }
        }
    }
}
