//! The seen-particle, unseen-particle, sampling-rate and humidity studies.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::catalog::{sugar_analog, HOLDOUT_NAMES};
use super::dataset::{DatasetRecord, GenConfig};
use super::metrics::{class_metrics, regression_metrics, EvalReport, RegressionMetrics};
use super::pipeline::{evaluate_models, train_models, Models, PipelineConfig};
use super::split::{split_holdout, split_random, HOLDOUT_HEIGHT_RANGE};
use crate::domain::{ContentFill, ParticleSpec};
use crate::estimators::{estimate_humidity, mlp_train, MlpModel, TrainConfig};
use crate::features::{
    downsample_field, envelopes, principal_vibration_signal, vib_features_relaxed, EnvelopeConfig,
    CONTACT_TOP_K, TOPPLE_DIM,
};
use crate::granusim::{stick_slip_trace, RimPolicy, Scene, SweepConfig, TACTILE_RATE_HZ};
use crate::{seed, Error, Result};

pub const SEEN_TEST_FRACTION: f64 = 0.2;
pub const HOLDOUT_EXTRA_PER_PARTICLE: usize = 6;

/// A trained pipeline and its test report.
#[derive(Debug, Clone)]
pub struct SplitRun {
    pub train: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
    pub models: Models,
    pub report: EvalReport,
}

fn seen_split(
    records: &[DatasetRecord],
    master_seed: u64,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>)> {
    split_random(
        records,
        SEEN_TEST_FRACTION,
        seed::derive(master_seed, &[seed::tag("seen-split")]),
    )
}

/// Trains on a random 80 % of the records and tests on the rest.
pub fn run_seen(
    records: &[DatasetRecord],
    gen: &GenConfig,
    config: &PipelineConfig,
    master_seed: u64,
) -> Result<SplitRun> {
    let (train, test) = seen_split(records, master_seed)?;
    let models = train_models(
        &train,
        config,
        &gen.container,
        seed::derive(master_seed, &[seed::tag("seen-train")]),
    )?;
    let mut report = evaluate_models(
        "seen",
        &models,
        &test,
        &gen.container,
        config.oracle_features,
    )?;
    report
        .info
        .push(("train.n".into(), train.len().to_string()));
    report.info.push(("test.n".into(), test.len().to_string()));
    Ok(SplitRun {
        train,
        test,
        models,
        report,
    })
}

/// The holdout split: only the models' training set, without the extra
/// test records.
pub fn holdout_split(
    records: &[DatasetRecord],
    catalog: &[ParticleSpec],
    gen: &GenConfig,
    master_seed: u64,
) -> Result<(Vec<DatasetRecord>, Vec<DatasetRecord>)> {
    split_holdout(
        records,
        catalog,
        &HOLDOUT_NAMES,
        HOLDOUT_EXTRA_PER_PARTICLE,
        gen,
        seed::derive(master_seed, &[seed::tag("holdout-split")]),
    )
}

/// Trains without the held-out particles and tests on them.
pub fn run_holdout(
    records: &[DatasetRecord],
    catalog: &[ParticleSpec],
    gen: &GenConfig,
    config: &PipelineConfig,
    master_seed: u64,
) -> Result<SplitRun> {
    let (train, test) = holdout_split(records, catalog, gen, master_seed)?;
    let models = train_models(
        &train,
        config,
        &gen.container,
        seed::derive(master_seed, &[seed::tag("holdout-train")]),
    )?;
    let mut report = evaluate_models(
        "holdout",
        &models,
        &test,
        &gen.container,
        config.oracle_features,
    )?;
    report
        .info
        .push(("train.n".into(), train.len().to_string()));
    report.info.push(("test.n".into(), test.len().to_string()));
    report.info.push(("held".into(), HOLDOUT_NAMES.join(" ")));
    report.info.push((
        "extra_height_range_mm".into(),
        format!("{} {}", HOLDOUT_HEIGHT_RANGE.0, HOLDOUT_HEIGHT_RANGE.1),
    ));
    Ok(SplitRun {
        train,
        test,
        models,
        report,
    })
}

/// Evaluates saved models on the seen or holdout test set.
pub fn evaluate_saved(
    title: &str,
    models: &Models,
    test: &[DatasetRecord],
    train_n: usize,
    gen: &GenConfig,
    oracle: bool,
) -> Result<EvalReport> {
    let mut report = evaluate_models(title, models, test, &gen.container, oracle)?;
    report.info.push(("train.n".into(), train_n.to_string()));
    report.info.push(("test.n".into(), test.len().to_string()));
    Ok(report)
}

pub fn seen_test_set(
    records: &[DatasetRecord],
    master_seed: u64,
) -> Result<(usize, Vec<DatasetRecord>)> {
    let (train, test) = seen_split(records, master_seed)?;
    Ok((train.len(), test))
}

/// Result of one arm of the sampling-rate study.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationArm {
    pub rate_hz: f64,
    pub size: RegressionMetrics,
    pub shape_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub train_n: usize,
    pub test_n: usize,
    pub arms: Vec<AblationArm>,
}

impl AblationReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("# report ablate-rate\n");
        writeln!(s, "train.n = {}", self.train_n).unwrap();
        writeln!(s, "test.n = {}", self.test_n).unwrap();
        for a in &self.arms {
            writeln!(s, "rate.{}.size_mm.mae = {:.6}", a.rate_hz, a.size.mae).unwrap();
            writeln!(s, "rate.{}.size_mm.mape = {:.6}", a.rate_hz, a.size.mape).unwrap();
            writeln!(
                s,
                "rate.{}.shape.accuracy = {:.6}",
                a.rate_hz, a.shape_accuracy
            )
            .unwrap();
        }
        s
    }
}

/// Records whose vibration features are recomputed from marker fields
/// decimated to `rate_hz`.
pub fn records_at_rate(
    records: &[DatasetRecord],
    gen: &GenConfig,
    rate_hz: f64,
) -> Result<Vec<DatasetRecord>> {
    if rate_hz >= TACTILE_RATE_HZ {
        return Ok(records.to_vec());
    }
    records
        .par_iter()
        .map(|r| {
            let field = downsample_field(&r.marker_field(gen)?, rate_hz)?;
            let signal = principal_vibration_signal(&field, CONTACT_TOP_K)?;
            let mut out = r.clone();
            out.features.vib = vib_features_relaxed(&signal.values);
            Ok(out)
        })
        .collect()
}

/// Retrains the size and shape stages on vibration features sampled at each
/// rate, with identical splits and seeds.
pub fn ablation_rate(
    records: &[DatasetRecord],
    gen: &GenConfig,
    rates: &[f64],
    config: &PipelineConfig,
    master_seed: u64,
) -> Result<AblationReport> {
    let mut arms = Vec::new();
    let (mut train_n, mut test_n) = (0, 0);
    for &rate in rates {
        let arm_records = records_at_rate(records, gen, rate)?;
        let run = run_seen(&arm_records, gen, config, master_seed)?;
        train_n = run.train.len();
        test_n = run.test.len();
        arms.push(AblationArm {
            rate_hz: rate,
            size: *run.report.metric("size_mm").expect("size metric"),
            shape_accuracy: run.report.shape.as_ref().map_or(0.0, |c| c.accuracy),
        });
    }
    Ok(AblationReport {
        train_n,
        test_n,
        arms,
    })
}

/// Settings of the humidity study.
#[derive(Debug, Clone, PartialEq)]
pub struct HumidityConfig {
    pub particle: ParticleSpec,
    pub fill_mass_g: f64,
    pub levels: Vec<f64>,
    pub trials: usize,
    pub hidden: usize,
    pub train: TrainConfig,
    pub interp_train_levels: Vec<f64>,
}

impl Default for HumidityConfig {
    fn default() -> Self {
        HumidityConfig {
            particle: sugar_analog(),
            fill_mass_g: 150.0,
            levels: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            trials: 10,
            hidden: 16,
            train: TrainConfig {
                learning_rate: 1e-2,
                epochs: 4000,
                ..TrainConfig::default()
            },
            interp_train_levels: vec![0.1, 0.3, 0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumidityRecord {
    pub humidity_ml: f64,
    pub trial: usize,
    pub seed: u64,
    pub topple: Vec<f64>,
}

/// Closed-bottle full-turn scene for a humidity level.
pub fn humidity_scene(config: &HumidityConfig, gen: &GenConfig, humidity_ml: f64) -> Result<Scene> {
    let particle = config.particle.clone().with_humidity(humidity_ml)?;
    let fill = ContentFill::with_mass(particle, config.fill_mass_g, &gen.container);
    Ok(Scene::new(fill, gen.container.clone())?.with_rim(RimPolicy::Closed))
}

pub fn humidity_records(
    config: &HumidityConfig,
    gen: &GenConfig,
    master_seed: u64,
) -> Result<Vec<HumidityRecord>> {
    let cells: Vec<(usize, usize)> = (0..config.levels.len())
        .flat_map(|l| (0..config.trials).map(move |t| (l, t)))
        .collect();
    cells
        .par_iter()
        .map(|&(l, t)| {
            let h = config.levels[l];
            let scene = humidity_scene(config, gen, h)?;
            let s = seed::derive(master_seed, &[seed::tag("humidity"), l as u64, t as u64]);
            let sweep = SweepConfig::full_turn();
            let slow = stick_slip_trace(&scene, &sweep, gen.noise.torque_sigma, s)?;
            let env = envelopes(
                &slow.trace,
                &EnvelopeConfig::for_noise(gen.noise.torque_sigma, sweep.kappa),
            )?;
            Ok(HumidityRecord {
                humidity_ml: h,
                trial: t,
                seed: s,
                topple: env.concat(),
            })
        })
        .collect()
}

fn humidity_split_report(
    title: &str,
    train: &[HumidityRecord],
    test: &[HumidityRecord],
    config: &HumidityConfig,
    train_seed: u64,
) -> Result<(MlpModel, EvalReport)> {
    if train.len() < 2 || test.is_empty() {
        return Err(Error::domain(format!(
            "humidity split `{title}` is too small"
        )));
    }
    let start = Instant::now();
    let xs: Vec<Vec<f64>> = train.iter().map(|r| r.topple.clone()).collect();
    let ys: Vec<Vec<f64>> = train.iter().map(|r| vec![r.humidity_ml]).collect();
    let model = mlp_train(
        &xs,
        &ys,
        &[TOPPLE_DIM, config.hidden, 1],
        &config.train,
        train_seed,
    )?;
    let preds: Vec<f64> = test
        .iter()
        .map(|r| estimate_humidity(&model, &r.topple).map(|e| e.value))
        .collect::<Result<_>>()?;
    let truths: Vec<f64> = test.iter().map(|r| r.humidity_ml).collect();
    let mut report = EvalReport::new(title);
    report
        .info
        .push(("train.n".into(), train.len().to_string()));
    report.info.push(("test.n".into(), test.len().to_string()));
    report
        .regression
        .push(("humidity_ml".into(), regression_metrics(&preds, &truths)?));
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok((model, report))
}

/// Humidity study: 80/20 split over all levels, and training on
/// `interp_train_levels` while testing on the others.
pub fn humidity_experiment(
    config: &HumidityConfig,
    gen: &GenConfig,
    master_seed: u64,
) -> Result<(EvalReport, EvalReport)> {
    let records = humidity_records(config, gen, master_seed)?;
    let (train, test) = split_random(
        &records,
        SEEN_TEST_FRACTION,
        seed::derive(master_seed, &[seed::tag("humidity-split")]),
    )?;
    let (_, seen) = humidity_split_report(
        "humidity-seen",
        &train,
        &test,
        config,
        seed::derive(master_seed, &[seed::tag("humidity-seen-model")]),
    )?;
    let in_train = |r: &&HumidityRecord| {
        config
            .interp_train_levels
            .iter()
            .any(|l| (l - r.humidity_ml).abs() < 1e-12)
    };
    let train: Vec<HumidityRecord> = records.iter().filter(in_train).cloned().collect();
    let test: Vec<HumidityRecord> = records.iter().filter(|r| !in_train(r)).cloned().collect();
    let (_, interp) = humidity_split_report(
        "humidity-interpolation",
        &train,
        &test,
        config,
        seed::derive(master_seed, &[seed::tag("humidity-interp-model")]),
    )?;
    Ok((seen, interp))
}

/// Shape accuracy helper for callers holding raw predictions.
pub fn shape_accuracy(
    models: &Models,
    test: &[DatasetRecord],
    gen: &GenConfig,
    oracle: bool,
) -> Result<f64> {
    let preds = test
        .iter()
        .map(|r| super::pipeline::predict(models, r, &gen.container, oracle).map(|p| p.shape))
        .collect::<Result<Vec<_>>>()?;
    let truths: Vec<_> = test.iter().map(|r| r.truth.shape).collect();
    Ok(class_metrics(&preds, &truths)?.accuracy)
}
