//! Experiment drivers: ablation, baseline comparison, parameter tables and
//! the per-scale versus generic fit. They return [`ExperimentReport`]s that
//! serialize to CSV.

use std::fmt::Write as _;

use crate::error::Result;
use crate::imaging::{psnr, Image};
use crate::pipeline::denoise_pyramid_unchecked;
use crate::seed::derive_seed;
use crate::shrinkage::{generic_lambdas, FabParams, GenericParams, ShrinkageSpec};
use crate::train::{
    default_per_scale_init, train_generic_with, train_per_scale_with, train_shared, tune_threshold, ClassicalRule,
    LbfgsOptions, TrainingBatch,
};

/// One method evaluated at one noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub sigma: f64,
    pub psnr_mean: f64,
    pub psnr_per_image: Vec<f64>,
    pub params_used: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    /// Written as `# key: value` comment lines ahead of the table.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn push_meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn row(&self, method: &str, sigma: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.sigma == sigma)
    }

    /// CSV with columns `method,sigma,psnr,params,per_image`; per-image PSNRs
    /// are joined with `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["method", "sigma", "psnr", "params", "per_image"])
            .unwrap();
        for r in &self.rows {
            let per: Vec<String> = r.psnr_per_image.iter().map(|p| format!("{p:.4}")).collect();
            w.write_record([
                r.method.clone(),
                format!("{}", r.sigma),
                format!("{:.4}", r.psnr_mean),
                r.params_used.clone(),
                per.join(";"),
            ])
            .unwrap();
        }
        out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
        out
    }
}

/// Per-image PSNR of `spec` on a batch, against the clean images.
pub fn evaluate(batch: &TrainingBatch, spec: &ShrinkageSpec) -> Result<Vec<f64>> {
    spec.validate(batch.levels())?;
    batch
        .pyramids()
        .iter()
        .zip(batch.pairs())
        .map(|(pyr, (_, clean))| psnr(&denoise_pyramid_unchecked(pyr, spec), clean))
        .collect()
}

/// Per-image PSNR of the noisy inputs themselves.
pub fn noisy_psnr(batch: &TrainingBatch) -> Result<Vec<f64>> {
    batch.pairs().iter().map(|(f, v)| psnr(f, v)).collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn row(method: &str, sigma: f64, per: Vec<f64>, params: String) -> ReportRow {
    ReportRow {
        method: method.to_string(),
        sigma,
        psnr_mean: mean(&per),
        psnr_per_image: per,
        params_used: params,
    }
}

/// Clean train and test images plus shared settings for an experiment.
#[derive(Clone, Debug)]
pub struct ExperimentData {
    pub train: Vec<Image>,
    pub test: Vec<Image>,
    pub levels: usize,
    pub seed: u64,
    pub lbfgs: LbfgsOptions,
}

const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

impl ExperimentData {
    pub fn new(train: Vec<Image>, test: Vec<Image>, levels: usize, seed: u64) -> Self {
        ExperimentData {
            train,
            test,
            levels,
            seed,
            lbfgs: LbfgsOptions::default(),
        }
    }

    pub fn train_batch(&self, sigma: f64) -> Result<TrainingBatch> {
        TrainingBatch::from_clean(&self.train, sigma, self.levels, derive_seed(self.seed, TRAIN_STREAM, 0))
    }

    pub fn test_batch(&self, sigma: f64) -> Result<TrainingBatch> {
        TrainingBatch::from_clean(&self.test, sigma, self.levels, derive_seed(self.seed, TEST_STREAM, 0))
    }

    fn report(&self, experiment: &str) -> ExperimentReport {
        let mut r = ExperimentReport::default();
        r.push_meta("experiment", experiment);
        r.push_meta("seed", self.seed);
        r.push_meta("levels", self.levels);
        r.push_meta("train_images", self.train.len());
        r.push_meta("test_images", self.test.len());
        r
    }
}

pub const ABLATION_METHODS: [&str; 4] = ["hard", "fab-tied-shared", "fab-shared", "fab-per-scale"];

/// Four configurations at one noise level, in order: coupled hard shrinkage
/// with a tuned threshold; one FAB pair with `lambda1 = lambda2` for all
/// scales; one free FAB pair for all scales; one FAB pair per scale.
pub fn ablation(data: &ExperimentData, sigma: f64) -> Result<ExperimentReport> {
    let train = data.train_batch(sigma)?;
    let test = data.test_batch(sigma)?;
    let mut report = data.report("ablation");
    report.push_meta("sigma", sigma);

    let theta = tune_threshold(ClassicalRule::Hard, &train)?;
    let spec = ShrinkageSpec::Hard(theta);
    report.rows.push(row(
        ABLATION_METHODS[0],
        sigma,
        evaluate(&test, &spec)?,
        spec.describe(),
    ));

    let init = FabParams::new(2.0 * sigma, 2.0 * sigma)?;
    for (tied, name) in [(true, ABLATION_METHODS[1]), (false, ABLATION_METHODS[2])] {
        let res = train_shared(&train, init, tied, &data.lbfgs)?;
        let spec = res.spec(None)?;
        report
            .rows
            .push(row(name, sigma, evaluate(&test, &spec)?, spec.describe()));
    }

    let res = train_per_scale_with(&train, None, &data.lbfgs)?;
    let spec = res.spec(None)?;
    report.rows.push(row(
        ABLATION_METHODS[3],
        sigma,
        evaluate(&test, &spec)?,
        spec.describe(),
    ));
    Ok(report)
}

/// Classical rules tuned per noise level on the training images against the
/// fixed generic law, all evaluated on the test images. A `noisy` row records
/// the PSNR of the unprocessed input.
pub fn bench(data: &ExperimentData, sigmas: &[f64], law: GenericParams) -> Result<ExperimentReport> {
    let mut report = data.report("bench");
    report.push_meta("alpha", law.alpha);
    report.push_meta("beta", law.beta);
    for &sigma in sigmas {
        let train = data.train_batch(sigma)?;
        let test = data.test_batch(sigma)?;
        report.rows.push(row("noisy", sigma, noisy_psnr(&test)?, String::new()));
        for rule in ClassicalRule::ALL {
            let spec = rule.spec(tune_threshold(rule, &train)?);
            report
                .rows
                .push(row(rule.name(), sigma, evaluate(&test, &spec)?, spec.describe()));
        }
        let spec = ShrinkageSpec::Generic { params: law, sigma };
        report
            .rows
            .push(row("generic", sigma, evaluate(&test, &spec)?, spec.describe()));
    }
    Ok(report)
}

/// Best classical mean PSNR at `sigma` in a bench report.
pub fn best_classical(report: &ExperimentReport, sigma: f64) -> Option<f64> {
    ClassicalRule::ALL
        .iter()
        .filter_map(|r| report.row(r.name(), sigma))
        .map(|r| r.psnr_mean)
        .max_by(f64::total_cmp)
}

/// Per-scale parameters trained separately for every noise level, against
/// `(alpha, beta)` trained jointly over all of them.
pub fn generic_fit(
    data: &ExperimentData,
    sigmas: &[f64],
    init: GenericParams,
) -> Result<(ExperimentReport, GenericParams)> {
    let mut report = data.report("generic-fit");
    let train: Vec<TrainingBatch> = sigmas.iter().map(|&s| data.train_batch(s)).collect::<Result<_>>()?;
    let test: Vec<TrainingBatch> = sigmas.iter().map(|&s| data.test_batch(s)).collect::<Result<_>>()?;
    let generic = train_generic_with(&train, init, &data.lbfgs)?;
    let law = GenericParams::new(generic.params[0], generic.params[1])?;
    report.push_meta("alpha", law.alpha);
    report.push_meta("beta", law.beta);
    for ((tr, te), &sigma) in train.iter().zip(&test).zip(sigmas) {
        let per = train_per_scale_with(tr, None, &data.lbfgs)?;
        let spec = per.spec(None)?;
        report
            .rows
            .push(row("per-scale", sigma, evaluate(te, &spec)?, spec.describe()));
        let spec = ShrinkageSpec::Generic { params: law, sigma };
        report
            .rows
            .push(row("generic-trained", sigma, evaluate(te, &spec)?, spec.describe()));
    }
    Ok((report, law))
}

/// `(level, lambda1, lambda2)` of the generic law for `level = 1..=levels`.
pub fn param_table(sigma: f64, levels: usize, law: &GenericParams) -> Result<Vec<(usize, f64, f64)>> {
    (1..=levels)
        .map(|l| generic_lambdas(l, sigma, law).map(|p| (l, p.lambda1(), p.lambda2())))
        .collect()
}

/// CSV form of [`param_table`].
pub fn param_table_csv(sigma: f64, levels: usize, law: &GenericParams) -> Result<String> {
    let mut out = format!("# sigma: {sigma}\n# alpha: {}\n# beta: {}\n", law.alpha, law.beta);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "lambda1", "lambda2"]).unwrap();
    for (l, a, b) in param_table(sigma, levels, law)? {
        w.write_record([l.to_string(), a.to_string(), b.to_string()]).unwrap();
    }
    out.push_str(&String::from_utf8(w.into_inner().unwrap()).unwrap());
    Ok(out)
}

/// The default per-scale starting point, exposed for reporting.
pub fn default_init_table(sigma: f64, levels: usize) -> Vec<FabParams> {
    default_per_scale_init(sigma, levels)
}
