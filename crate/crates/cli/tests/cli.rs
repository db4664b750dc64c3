use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wshrink::imaging::{load_image, save_image};
use wshrink::pipeline::{denoise, DenoiseRequest};
use wshrink::shrinkage::{FabParams, ShrinkageSpec};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data");

fn wshrink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wshrink")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = wshrink(args);
    assert!(
        out.status.success(),
        "wshrink {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{DATA}/train/{name}")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A 256x256 crop of a fixture, saved into `dir`.
fn crop_256(dir: &Path) -> PathBuf {
    let img = load_image(fixture("camera.pgm")).unwrap().crop(0, 0, 256, 256).unwrap();
    let path = dir.join("clean.pgm");
    save_image(&img, &path).unwrap();
    path
}

fn sidecar_value(path: &Path, key: &str) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse().unwrap()))
        .unwrap()
}

#[test]
fn add_noise_with_zero_sigma_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.pgm");
    ok(&[
        "add-noise",
        "--input",
        &fixture("coffee.pgm"),
        "--out",
        s(&out),
        "--sigma",
        "0",
    ]);
    assert_eq!(load_image(&out).unwrap(), load_image(fixture("coffee.pgm")).unwrap());
}

#[test]
fn add_noise_is_reproducible_and_records_range() {
    let dir = tempfile::tempdir().unwrap();
    let clean = crop_256(dir.path());
    let (a, b) = (dir.path().join("a.pgm"), dir.path().join("b.pgm"));
    for out in [&a, &b] {
        ok(&[
            "add-noise",
            "--input",
            s(&clean),
            "--out",
            s(out),
            "--sigma",
            "50",
            "--seed",
            "4",
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let sidecar = dir.path().join("a.pgm.txt");
    assert_eq!(sidecar_value(&sidecar, "sigma"), 50.0);
    assert_eq!(sidecar_value(&sidecar, "seed"), 4.0);
    let (lo, hi) = (sidecar_value(&sidecar, "min"), sidecar_value(&sidecar, "max"));
    assert!(lo < 0.0 || hi > 255.0, "range {lo} .. {hi}");
}

/// Noisy input rows of a bench run on 256x256 regions at sigma 50.
#[test]
fn noisy_input_psnr_at_sigma_50() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let args = [
        "bench",
        "--train-dir",
        &format!("{DATA}/train"),
        "--test-dir",
        &format!("{DATA}/test"),
        "--patch-size",
        "256",
        "--patches-per-image",
        "1",
        "--sigma",
        "50",
        "--out",
        s(&csv),
    ];
    ok(&args);
    let text = std::fs::read_to_string(&csv).unwrap();
    let per_image: Vec<f64> = text
        .lines()
        .find(|l| l.starts_with("noisy,"))
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .split(';')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(per_image.len(), 4);
    for p in per_image {
        assert!((p - 14.74).abs() <= 0.2, "{p:.3} dB");
    }
}

#[test]
fn denoise_with_generic_law_reports_gain() {
    let dir = tempfile::tempdir().unwrap();
    let clean = crop_256(dir.path());
    let noisy = dir.path().join("n.pgm");
    let out = dir.path().join("u.pgm");
    ok(&[
        "add-noise",
        "--input",
        s(&clean),
        "--out",
        s(&noisy),
        "--sigma",
        "25",
        "--seed",
        "2",
    ]);
    let text = ok(&[
        "denoise",
        "--input",
        s(&noisy),
        "--out",
        s(&out),
        "--sigma",
        "25",
        "--reference",
        s(&clean),
    ]);
    let value = |key: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(key))
            .and_then(|v| v.split_whitespace().next())
            .unwrap()
            .parse()
            .unwrap()
    };
    let (before, after) = (value("psnr noisy"), value("psnr denoised"));
    assert!(after > before, "{text}");
    assert!(out.exists());
}

#[test]
fn spec_file_denoise_matches_library_call() {
    let dir = tempfile::tempdir().unwrap();
    let clean = crop_256(dir.path());
    let noisy = dir.path().join("n.pgm");
    ok(&[
        "add-noise",
        "--input",
        s(&clean),
        "--out",
        s(&noisy),
        "--sigma",
        "20",
        "--seed",
        "3",
    ]);
    let spec = ShrinkageSpec::FabPerScale(
        (1..=5)
            .map(|l| FabParams::new(50.0 / (l * l) as f64, 90.0 / (l * l) as f64).unwrap())
            .collect(),
    );
    let spec_path = dir.path().join("fab.spec");
    spec.save(&spec_path).unwrap();
    let out = dir.path().join("u.pgm");
    ok(&[
        "denoise",
        "--input",
        s(&noisy),
        "--out",
        s(&out),
        "--spec",
        s(&spec_path),
    ]);

    let expected = denoise(&DenoiseRequest::new(load_image(&noisy).unwrap(), spec)).unwrap();
    let reference = dir.path().join("expected.pgm");
    save_image(&expected, &reference).unwrap();
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&reference).unwrap());
}

#[test]
fn exit_codes_by_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("u.pgm");
    let missing = dir.path().join("nope.spec");
    let r = wshrink(&[
        "denoise",
        "--input",
        &fixture("coffee.pgm"),
        "--out",
        s(&out),
        "--spec",
        s(&missing),
    ]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("nope.spec"));
    assert!(!out.exists());

    let r = wshrink(&[
        "add-noise",
        "--input",
        &fixture("coffee.pgm"),
        "--out",
        s(&out),
        "--sigma",
        "-5",
    ]);
    assert_eq!(r.status.code(), Some(2));

    let r = wshrink(&["denoise", "--input", &fixture("coffee.pgm"), "--out", s(&out)]);
    assert_eq!(r.status.code(), Some(2));

    let bad = dir.path().join("bad.pgm");
    std::fs::write(&bad, b"P5\n4 4\n255\n\x01\x02").unwrap();
    let r = wshrink(&["denoise", "--input", s(&bad), "--out", s(&out), "--sigma", "10"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    let out = dir.path().join("n.pgm");
    std::fs::write(
        &config,
        format!(
            "# defaults\ninput = {}\nout = {}\nsigma = 0\nseed = 9\n",
            fixture("coffee.pgm"),
            s(&out)
        ),
    )
    .unwrap();
    ok(&["add-noise", "--config", s(&config)]);
    let original = load_image(fixture("coffee.pgm")).unwrap();
    assert_eq!(load_image(&out).unwrap(), original);
    ok(&["add-noise", "--config", s(&config), "--sigma", "10"]);
    assert_ne!(load_image(&out).unwrap(), original);
    assert_eq!(sidecar_value(&dir.path().join("n.pgm.txt"), "seed"), 9.0);

    std::fs::write(&config, "colour = red\n").unwrap();
    assert_eq!(wshrink(&["add-noise", "--config", s(&config)]).status.code(), Some(2));
}

#[test]
fn params_table() {
    let text = ok(&["params", "--sigma", "25", "--levels", "5"]);
    assert!(text.contains("# seed: "));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("level"))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    for (row, want) in rows.iter().zip([135.0, 33.75, 15.0, 8.4375, 5.4]) {
        assert!((row[1] - want).abs() < 1e-9, "{row:?}");
        assert!((row[2] / row[1] - 8.9 / 5.4).abs() < 1e-12);
    }
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
}

fn small_run(dir: &Path) -> Vec<String> {
    let patch_dir = |split: &str| format!("{DATA}/{split}");
    vec![
        "--train-dir".into(),
        patch_dir("train"),
        "--test-dir".into(),
        patch_dir("test"),
        "--patch-size".into(),
        "32".into(),
        "--patches-per-image".into(),
        "1".into(),
        "--levels".into(),
        "3".into(),
        "--seed".into(),
        "5".into(),
        "--out".into(),
        dir.to_str().unwrap().to_string(),
    ]
}

fn run_small(command: &str, out: &Path, extra: &[&str]) -> String {
    let mut args: Vec<String> = vec![command.into()];
    args.extend(small_run(out));
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(&refs);
    std::fs::read_to_string(out).unwrap()
}

#[test]
fn train_writes_expected_parameter_counts_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let text = run_small("train", &a, &["--sigma", "25"]);
    assert!(text.contains("# seed: 5"));
    assert_eq!(text.lines().filter(|l| l.starts_with("level ")).count(), 3);
    let b = dir.path().join("b.txt");
    assert_eq!(run_small("train", &b, &["--sigma", "25"]), text);

    let g = dir.path().join("g.txt");
    let text = run_small("train", &g, &["--sigma", "10,30,50", "--mode", "generic"]);
    assert!(text.contains("family generic"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("alpha ") || l.starts_with("beta "))
            .count(),
        2
    );

    // A trained file is directly usable as a spec.
    let out = dir.path().join("u.pgm");
    ok(&[
        "denoise",
        "--input",
        &fixture("coffee.pgm"),
        "--out",
        s(&out),
        "--spec",
        s(&g),
        "--sigma",
        "30",
    ]);
}

#[test]
fn ablate_emits_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ablation.csv");
    let text = run_small("ablate", &csv, &[]);
    assert!(text.contains("# seed: 5") && text.contains("# sigma: 20"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    let methods: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["hard", "fab-tied-shared", "fab-shared", "fab-per-scale"]);
}

/// Desk-scale bench: every method loses quality as the noise grows.
#[test]
fn bench_psnr_decreases_with_noise() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let args = [
        "bench",
        "--train-dir",
        &format!("{DATA}/train"),
        "--test-dir",
        &format!("{DATA}/test"),
        "--seed",
        "20240611",
        "--out",
        s(&csv),
    ];
    ok(&args);
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&csv).unwrap();
    let rows: Vec<(String, f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect();
    for method in ["noisy", "soft", "hard", "garrote", "generic"] {
        let series: Vec<(f64, f64)> = rows.iter().filter(|r| r.0 == method).map(|r| (r.1, r.2)).collect();
        assert_eq!(series.len(), 6);
        for w in series.windows(2) {
            assert!(w[1].1 <= w[0].1 + 0.1, "{method}: {series:?}");
        }
    }
}
