//! `wshrink` command-line driver.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use config::Flags;
use wshrink::dataset::{load_dir, sample_patches};
use wshrink::experiments::{ablation, bench, best_classical, param_table_csv, ExperimentData, ExperimentReport};
use wshrink::imaging::{add_gaussian_noise, load_image, psnr, save_image, Image, NoiseModel};
use wshrink::pipeline::{denoise, DenoiseRequest};
use wshrink::shrinkage::{GenericParams, ShrinkageSpec};
use wshrink::train::{train_generic, train_per_scale, TrainResult};
use wshrink::wavelet::analyze;
use wshrink::{write_atomic, Error, ErrorCategory, Result};

const EXIT_VALIDATION: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_LEVELS: usize = 7;
const DEFAULT_PATCH: usize = 128;
const DEFAULT_TRAIN_PATCHES: usize = 20;
const DEFAULT_TEST_PATCHES: usize = 10;
const DEFAULT_SIGMAS: [f64; 6] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0];

#[derive(Parser, Debug)]
#[command(
    name = "wshrink",
    version,
    about = "Trainable adaptive wavelet shrinkage for image denoising"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Add Gaussian noise to --input and write --out plus a sidecar `<out>.txt`.
    AddNoise,
    /// Denoise --input with --spec, or with the generic law at --sigma.
    Denoise,
    /// Fit per-scale (one --sigma) or generic (several) parameters on --train-dir.
    Train,
    /// Run the four-way ablation at --sigma (default 20).
    Ablate,
    /// Compare tuned classical rules with the generic law over a --sigma list.
    Bench,
    /// Tabulate the generic law for one --sigma over --levels scales.
    Params,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.flags.resolve().and_then(|flags| run(cli.command, &flags)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.category() {
                ErrorCategory::Io => EXIT_IO,
                ErrorCategory::Validation => EXIT_VALIDATION,
                ErrorCategory::Numerical => EXIT_NUMERICAL,
            })
        }
    }
}

fn run(command: Command, flags: &Flags) -> Result<()> {
    match command {
        Command::AddNoise => add_noise(flags),
        Command::Denoise => denoise_cmd(flags),
        Command::Train => train_cmd(flags),
        Command::Ablate => ablate_cmd(flags),
        Command::Bench => bench_cmd(flags),
        Command::Params => params_cmd(flags),
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".txt");
    PathBuf::from(name)
}

fn add_noise(flags: &Flags) -> Result<()> {
    let input = flags.require(&flags.input, "input")?;
    let out = flags.require(&flags.out, "out")?;
    let sigma = flags.single_sigma(None)?;
    let seed = flags.seed.unwrap_or(DEFAULT_SEED);
    let noisy = add_gaussian_noise(&load_image(input)?, NoiseModel::new(sigma, seed))?;
    let (lo, hi) = noisy.min_max();
    save_image(&noisy, out)?;
    let sidecar = format!(
        "# wshrink add-noise\ninput {}\nsigma {sigma}\nseed {seed}\nmin {lo}\nmax {hi}\n",
        input.display()
    );
    write_atomic(&sidecar_path(out), sidecar.as_bytes())?;
    println!("wrote {} (pre-clamp range {lo:.2} .. {hi:.2})", out.display());
    Ok(())
}

fn generic_law(flags: &Flags) -> Result<GenericParams> {
    GenericParams::new(
        flags.alpha.unwrap_or(GenericParams::DEFAULT_ALPHA),
        flags.beta.unwrap_or(GenericParams::DEFAULT_BETA),
    )
}

fn denoise_cmd(flags: &Flags) -> Result<()> {
    let input = load_image(flags.require(&flags.input, "input")?)?;
    let out = flags.require(&flags.out, "out")?;
    let sigma = flags.sigmas()?.map(|_| flags.single_sigma(None)).transpose()?;
    let spec = match (&flags.spec, sigma) {
        (Some(path), sigma) => ShrinkageSpec::load(path, sigma)?,
        (None, Some(sigma)) => ShrinkageSpec::Generic {
            params: generic_law(flags)?,
            sigma,
        },
        (None, None) => {
            return Err(Error::InvalidParameter("denoise needs --spec or --sigma".into()));
        }
    };
    let mut req = DenoiseRequest::new(input, spec);
    if let Some(levels) = flags.levels {
        req = req.with_levels(levels);
    }
    if let Some(dir) = &flags.dump {
        analyze(&req.input, req.levels)?.dump(dir)?;
    }
    let u = denoise(&req)?;
    save_image(&u, out)?;
    println!("wrote {} ({}, {} levels)", out.display(), req.spec.family(), req.levels);
    if let Some(path) = &flags.reference {
        let clean = load_image(path)?;
        println!("psnr noisy {:.4} dB", psnr(&req.input, &clean)?);
        println!("psnr denoised {:.4} dB", psnr(&u, &clean)?);
    }
    Ok(())
}

fn images(dir: &Path) -> Result<Vec<Image>> {
    Ok(load_dir(dir)?.into_iter().map(|(_, img)| img).collect())
}

fn patches(flags: &Flags, dir: &Path, default_count: usize, explicit: Option<usize>, seed: u64) -> Result<Vec<Image>> {
    let imgs = images(dir)?;
    let count = match flags.patches_per_image {
        Some(k) => k * imgs.len(),
        None => explicit.unwrap_or(default_count),
    };
    sample_patches(&imgs, count, flags.patch_size.unwrap_or(DEFAULT_PATCH), seed)
}

/// Training and test patches; the test split draws from a distinct seed.
fn experiment_data(flags: &Flags, with_test: bool) -> Result<ExperimentData> {
    let seed = flags.seed.unwrap_or(DEFAULT_SEED);
    let train_dir = flags.require(&flags.train_dir, "train-dir")?;
    let train = patches(flags, train_dir, DEFAULT_TRAIN_PATCHES, flags.train_patches, seed)?;
    let test = if with_test {
        let test_dir = flags.require(&flags.test_dir, "test-dir")?;
        patches(flags, test_dir, DEFAULT_TEST_PATCHES, flags.test_patches, seed ^ 1)?
    } else {
        Vec::new()
    };
    Ok(ExperimentData::new(
        train,
        test,
        flags.levels.unwrap_or(DEFAULT_LEVELS),
        seed,
    ))
}

fn config_comments(flags: &Flags, data: &ExperimentData) -> Vec<(&'static str, String)> {
    let mut meta = vec![
        ("seed", data.seed.to_string()),
        ("levels", data.levels.to_string()),
        ("patch_size", flags.patch_size.unwrap_or(DEFAULT_PATCH).to_string()),
        ("train_patches", data.train.len().to_string()),
    ];
    if let Some(d) = &flags.train_dir {
        meta.push(("train_dir", d.display().to_string()));
    }
    if !data.test.is_empty() {
        meta.push(("test_patches", data.test.len().to_string()));
    }
    if let Some(d) = &flags.test_dir {
        meta.push(("test_dir", d.display().to_string()));
    }
    meta
}

fn emit(flags: &Flags, text: &str) -> Result<()> {
    match &flags.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn with_config(flags: &Flags, data: &ExperimentData, mut report: ExperimentReport) -> ExperimentReport {
    for (k, v) in config_comments(flags, data) {
        if !report.metadata.iter().any(|(key, _)| key == k) {
            report.push_meta(k, v);
        }
    }
    report
}

fn train_cmd(flags: &Flags) -> Result<()> {
    let out = flags.require(&flags.out, "out")?;
    let mode = flags.mode.as_deref().unwrap_or("per-scale");
    let data = experiment_data(flags, false)?;
    let (result, sigmas): (TrainResult, Vec<f64>) = match mode {
        "per-scale" => {
            let sigma = flags.single_sigma(None)?;
            (train_per_scale(&data.train_batch(sigma)?, None)?, vec![sigma])
        }
        "generic" => {
            let sigmas = flags.sigmas()?.unwrap_or_else(|| DEFAULT_SIGMAS.to_vec());
            let batches = sigmas
                .iter()
                .map(|&s| data.train_batch(s))
                .collect::<Result<Vec<_>>>()?;
            (train_generic(&batches, generic_law(flags)?)?, sigmas)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown mode '{other}', expected per-scale or generic"
            )))
        }
    };
    let mut text = String::new();
    for (k, v) in config_comments(flags, &data) {
        writeln!(text, "# {k}: {v}").unwrap();
    }
    let list: Vec<String> = sigmas.iter().map(f64::to_string).collect();
    writeln!(text, "# sigma: {}", list.join(",")).unwrap();
    text.push_str(&result.to_text());
    write_atomic(out, text.as_bytes())?;
    println!(
        "wrote {} ({} parameters, final loss {:.4}, {} iterations)",
        out.display(),
        result.params.len(),
        result.final_loss,
        result.iterations
    );
    Ok(())
}

fn ablate_cmd(flags: &Flags) -> Result<()> {
    let sigma = flags.single_sigma(Some(20.0))?;
    let data = experiment_data(flags, true)?;
    let report = with_config(flags, &data, ablation(&data, sigma)?);
    for row in &report.rows {
        eprintln!("{:<16} {:.4} dB", row.method, row.psnr_mean);
    }
    emit(flags, &report.to_csv())
}

fn bench_cmd(flags: &Flags) -> Result<()> {
    let sigmas = flags.sigmas()?.unwrap_or_else(|| DEFAULT_SIGMAS.to_vec());
    let data = experiment_data(flags, true)?;
    let report = with_config(flags, &data, bench(&data, &sigmas, generic_law(flags)?)?);
    for &s in &sigmas {
        if let (Some(g), Some(c)) = (report.row("generic", s), best_classical(&report, s)) {
            eprintln!("sigma {s:>5}: generic {:.4} dB, best classical {c:.4} dB", g.psnr_mean);
        }
    }
    emit(flags, &report.to_csv())
}

fn params_cmd(flags: &Flags) -> Result<()> {
    let sigma = flags.single_sigma(Some(25.0))?;
    let levels = flags.levels.unwrap_or(8);
    if levels == 0 {
        return Err(Error::InvalidParameter("--levels must be at least 1".into()));
    }
    let text = format!(
        "# seed: {}\n# levels: {levels}\n{}",
        flags.seed.unwrap_or(DEFAULT_SEED),
        param_table_csv(sigma, levels, &generic_law(flags)?)?
    );
    emit(flags, &text)
}
