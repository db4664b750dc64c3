//! Flags shared by all subcommands and the optional `key = value` config file
//! that supplies defaults for them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use wshrink::{Error, Result};

#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Config file with `key = value` lines; keys are flag names without `--`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Noise level, or a comma-separated list for `train --mode generic` and `bench`.
    #[arg(long, global = true)]
    pub sigma: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Shrinkage spec file (also accepts training result files).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true)]
    pub train_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub test_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub patch_size: Option<usize>,
    /// Overrides `--train-patches` / `--test-patches` with this many patches per image.
    #[arg(long, global = true)]
    pub patches_per_image: Option<usize>,
    #[arg(long, global = true)]
    pub train_patches: Option<usize>,
    #[arg(long, global = true)]
    pub test_patches: Option<usize>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Clean image; `denoise` then prints PSNR values.
    #[arg(long, global = true)]
    pub reference: Option<PathBuf>,
    /// `per-scale` or `generic`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Directory for a dump of the noisy input's wavelet bands.
    #[arg(long, global = true)]
    pub dump: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "sigma",
    "seed",
    "levels",
    "spec",
    "train-dir",
    "test-dir",
    "out",
    "patch-size",
    "patches-per-image",
    "train-patches",
    "test-patches",
    "input",
    "reference",
    "mode",
    "alpha",
    "beta",
    "dump",
];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::SpecParse { line: idx + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key '{key}'")));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn from_config<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("config value '{v}' for {key} is invalid")))
        })
        .transpose()
}

impl Flags {
    /// Fills every flag left unset on the command line from the config file.
    pub fn resolve(mut self) -> Result<Flags> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
        let map = parse_config(&text)?;
        macro_rules! fill {
            ($($field:ident => $key:literal),* $(,)?) => {
                $( if self.$field.is_none() { self.$field = from_config(&map, $key)?; } )*
            };
        }
        fill!(
            sigma => "sigma",
            seed => "seed",
            levels => "levels",
            spec => "spec",
            train_dir => "train-dir",
            test_dir => "test-dir",
            out => "out",
            patch_size => "patch-size",
            patches_per_image => "patches-per-image",
            train_patches => "train-patches",
            test_patches => "test-patches",
            input => "input",
            reference => "reference",
            mode => "mode",
            alpha => "alpha",
            beta => "beta",
            dump => "dump",
        );
        Ok(self)
    }

    pub fn sigmas(&self) -> Result<Option<Vec<f64>>> {
        let Some(text) = &self.sigma else {
            return Ok(None);
        };
        let values = text
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|s| s.is_finite() && *s >= 0.0)
                    .ok_or_else(|| Error::InvalidParameter(format!("'{t}' is not a valid noise level")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Some(values))
    }

    /// A single noise level, or `default` when none is given.
    pub fn single_sigma(&self, default: Option<f64>) -> Result<f64> {
        match self.sigmas()? {
            Some(v) if v.len() == 1 => Ok(v[0]),
            Some(v) => Err(Error::InvalidParameter(format!(
                "this command takes one noise level, got {}",
                v.len()
            ))),
            None => default.ok_or_else(|| missing("sigma")),
        }
    }

    pub fn require<'a, T>(&self, value: &'a Option<T>, flag: &str) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| missing(flag))
    }
}

pub fn missing(flag: &str) -> Error {
    Error::InvalidParameter(format!("--{flag} is required"))
}

pub fn io_error(path: &Path, source: std::io::Error) -> Error {
    if source.kind() == std::io::ErrorKind::NotFound {
        Error::NotFound(path.to_path_buf())
    } else {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let m = parse_config("# comment\nsigma = 25\ntrain_dir = data/train # trailing\n\n").unwrap();
        assert_eq!(m["sigma"], "25");
        assert_eq!(m["train-dir"], "data/train");
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_lines() {
        assert!(matches!(
            parse_config("colour = red"),
            Err(Error::SpecParse { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("sigma 25"),
            Err(Error::SpecParse { line: 1, .. })
        ));
    }

    #[test]
    fn sigma_lists() {
        let f = Flags {
            sigma: Some("10, 20,30".into()),
            ..Flags::default()
        };
        assert_eq!(f.sigmas().unwrap().unwrap(), vec![10.0, 20.0, 30.0]);
        assert!(f.single_sigma(None).is_err());
        let f = Flags {
            sigma: Some("ten".into()),
            ..Flags::default()
        };
        assert!(f.sigmas().is_err());
        assert_eq!(Flags::default().single_sigma(Some(20.0)).unwrap(), 20.0);
    }
}
