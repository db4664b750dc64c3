//! Training on natural image patches from the bundled fixtures.

mod common;

use common::fixture_patches;
use wshrink::experiments::{evaluate, mean};
use wshrink::shrinkage::{GenericParams, ShrinkageSpec};
use wshrink::train::{train_generic, train_per_scale, tune_threshold, ClassicalRule, TrainingBatch};

const SEED: u64 = 20_240_611;

fn batch(split: &str, count: usize, sigma: f64) -> TrainingBatch {
    let clean = fixture_patches(split, count, 128, SEED);
    TrainingBatch::from_clean(&clean, sigma, 7, SEED).unwrap()
}

#[test]
fn per_scale_parameters_follow_scale_and_noise() {
    let train25 = batch("train", 20, 25.0);
    let fit25 = train_per_scale(&train25, None).unwrap();
    assert_eq!(fit25.params.len(), 14);
    let l25 = fit25.lambdas(None).unwrap();
    let l1: Vec<f64> = l25.iter().map(|p| p.lambda1()).collect();
    assert!((25.0..=45.0).contains(&l1[1]), "lambda1 at scale 2: {:.2}", l1[1]);
    assert!(l1[..4].windows(2).all(|w| w[1] < w[0]), "{l1:?}");

    let test25 = batch("test", 10, 25.0);
    let trained = mean(&evaluate(&test25, &fit25.spec(None).unwrap()).unwrap());
    let theta = tune_threshold(ClassicalRule::Hard, &train25).unwrap();
    let hard = mean(&evaluate(&test25, &ShrinkageSpec::Hard(theta)).unwrap());
    assert!(trained >= hard, "trained {trained:.3} dB vs hard {hard:.3} dB");

    let fit50 = train_per_scale(&batch("train", 20, 50.0), None).unwrap();
    let l50 = fit50.lambdas(None).unwrap();
    assert!(l50[2].lambda1() > l25[2].lambda1(), "{:?} vs {:?}", l50[2], l25[2]);
}

#[test]
fn generic_law_over_noise_levels() {
    let clean = fixture_patches("train", 20, 128, SEED);
    let batches: Vec<_> = [10.0, 25.0, 40.0, 60.0]
        .iter()
        .map(|&s| TrainingBatch::from_clean(&clean, s, 7, SEED).unwrap())
        .collect();
    let fit = train_generic(&batches, GenericParams::default()).unwrap();
    assert_eq!(fit.params.len(), 2);
    let (alpha, beta) = (fit.params[0], fit.params[1]);
    assert!((4.0..=7.0).contains(&alpha), "alpha {alpha}");
    assert!((7.0..=12.0).contains(&beta), "beta {beta}");
}

#[test]
fn lambdas_scale_with_image_and_noise() {
    let clean = fixture_patches("train", 20, 128, SEED);
    let c = 2.5;
    let scaled: Vec<_> = clean.iter().map(|i| i.map(|v| c * v)).collect();
    let a = train_per_scale(&TrainingBatch::from_clean(&clean, 20.0, 7, 9).unwrap(), None).unwrap();
    let b = train_per_scale(&TrainingBatch::from_clean(&scaled, c * 20.0, 7, 9).unwrap(), None).unwrap();
    for (pa, pb) in a.lambdas(None).unwrap().iter().zip(b.lambdas(None).unwrap()) {
        // Only parameters that matter are pinned down by the data.
        if pa.lambda1() < 0.5 || pa.lambda2() < 0.5 {
            continue;
        }
        for (x, y) in [(pa.lambda1(), pb.lambda1()), (pa.lambda2(), pb.lambda2())] {
            assert!((y / (c * x) - 1.0).abs() <= 0.05, "{pa:?} vs {pb:?}");
        }
    }
    assert!((b.final_loss / (c * c * a.final_loss) - 1.0).abs() <= 0.01);
}
