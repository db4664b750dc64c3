//! Runs the desk-scale experiments on the bundled fixture images and prints
//! the CSV reports.
//!
//! ```text
//! cargo run --release -p wshrink --example desk_scale
//! ```

use std::time::Instant;

use wshrink::dataset::{load_dir, sample_patches};
use wshrink::experiments::{ablation, bench, best_classical, generic_fit, ExperimentData};
use wshrink::shrinkage::GenericParams;

fn main() -> wshrink::Result<()> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");
    let train: Vec<_> = load_dir(format!("{root}/train"))?.into_iter().map(|(_, i)| i).collect();
    let test: Vec<_> = load_dir(format!("{root}/test"))?.into_iter().map(|(_, i)| i).collect();
    let seed = 20_240_611;
    let data = ExperimentData::new(
        sample_patches(&train, 20, 128, seed)?,
        sample_patches(&test, 10, 128, seed ^ 1)?,
        7,
        seed,
    );

    let t = Instant::now();
    let report = ablation(&data, 20.0)?;
    print!("{}", report.to_csv());
    eprintln!("ablation: {:.1?}", t.elapsed());

    let sigmas = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0];
    let t = Instant::now();
    let report = bench(&data, &sigmas, GenericParams::default())?;
    print!("{}", report.to_csv());
    let gains: Vec<f64> = sigmas
        .iter()
        .map(|&s| report.row("generic", s).unwrap().psnr_mean - best_classical(&report, s).unwrap())
        .collect();
    eprintln!("bench: {:.1?}, generic gain per sigma {gains:.3?}", t.elapsed());

    let t = Instant::now();
    let (report, law) = generic_fit(&data, &sigmas, GenericParams::default())?;
    print!("{}", report.to_csv());
    eprintln!(
        "generic fit: {:.1?}, alpha {:.3} beta {:.3}",
        t.elapsed(),
        law.alpha,
        law.beta
    );
    Ok(())
}
