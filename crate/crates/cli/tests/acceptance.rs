//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use grainsense::estimators::estimate_mass;
use grainsense::granusim::NoiseModel;
use grainsense::harness::{
    ablation_rate, generate_catalog, generate_dataset, humidity_experiment, regression_metrics,
    run_holdout, run_seen, Dataset, GenConfig, HumidityConfig, PipelineConfig,
};

const SEED: u64 = 42;
const ABLATION_SEEDS: [u64; 3] = [42, 43, 44];

const MASS_REL_TOL: f64 = 1e-9;
const MASS_MAPE_MAX: f64 = 2.0;
const COM_REL_TOL: f64 = 1e-3;
const COM_CONFIGS: usize = 20;
const COM_SAMPLES_PER_SIDE: usize = 1000;
const GRAD_REL_TOL: f64 = 1e-4;
const SEEN_HEIGHT_MAE_MAX: f64 = 3.0;
const SEEN_SIZE_MAE_MAX: f64 = 1.5;
const SEEN_SHAPE_ACC_MIN: f64 = 0.70;
const SEEN_SHAPE_CHANCE_RATIO: f64 = 3.0;
const HOLDOUT_SIZE_MAE_MAX: f64 = 2.0;
const HOLDOUT_SHAPE_ACC_MIN: f64 = 0.55;
const HUMIDITY_SEEN_MAE_MAX: f64 = 0.05;
const HUMIDITY_INTERP_MAE_MAX: f64 = 0.08;
const ENVELOPE_SPREAD_MAX: f64 = 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn dataset(seed: u64, noise: NoiseModel) -> Dataset {
    let gen = GenConfig {
        noise,
        ..GenConfig::default()
    };
    generate_dataset(&generate_catalog(seed), &gen, seed).expect("dataset")
}

/// The default-seed noisy dataset, shared by several criteria, and the time
/// it took to simulate.
fn default_run() -> &'static (Dataset, Duration) {
    static DS: OnceLock<(Dataset, Duration)> = OnceLock::new();
    DS.get_or_init(|| {
        let t = Instant::now();
        let ds = dataset(SEED, NoiseModel::default());
        (ds, t.elapsed())
    })
}

fn default_dataset() -> &'static Dataset {
    &default_run().0
}

fn mass_round_trip() -> Outcome {
    let t = Instant::now();
    let gen = GenConfig::default();
    let c = &gen.container;
    let clean = dataset(SEED, NoiseModel::noiseless());
    let worst = clean
        .records
        .iter()
        .map(|r| {
            let est = estimate_mass(r.delta_fz, c.container_mass_mc, c.gravity_g).unwrap();
            (est - r.truth.mass_g).abs() / r.truth.mass_g
        })
        .fold(0.0, f64::max);
    let el = t.elapsed();
    let noisy = default_dataset();
    let est: Vec<f64> = noisy.records.iter().map(|r| r.features.est_mass).collect();
    let truth: Vec<f64> = noisy.records.iter().map(|r| r.truth.mass_g).collect();
    let mape = regression_metrics(&est, &truth).unwrap().mape;
    check(
        clean.records.len() == 333
            && worst <= MASS_REL_TOL
            && mape <= MASS_MAPE_MAX
            && within(el, 10.0),
        format!(
            "{} records, worst rel err {worst:.2e} in {:.1}s, noisy MAPE {mape:.3}%",
            clean.records.len(),
            el.as_secs_f64()
        ),
    )
}

fn feature_oracle() -> Outcome {
    let t = Instant::now();
    let bad = common::feature_oracle_mismatches(100, 2);
    let el = t.elapsed();
    check(
        bad == 0 && within(el, 10.0),
        format!("{bad}/100 mismatches, {:.1}s", el.as_secs_f64()),
    )
}

fn com_oracle() -> Outcome {
    let t = Instant::now();
    let worst = common::com_oracle_max_error(COM_CONFIGS, COM_SAMPLES_PER_SIDE, 3);
    let el = t.elapsed();
    check(
        worst < COM_REL_TOL && within(el, 60.0),
        format!(
            "worst rel err {worst:.2e} over {COM_CONFIGS} configs, {:.1}s",
            el.as_secs_f64()
        ),
    )
}

fn gradient_check() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for dims in [&[7, 16, 4, 1][..], &[302, 16, 4, 1], &[200, 16, 1]] {
        for point in 0..10 {
            worst = worst.max(common::gradient_check(dims, 500 + point));
        }
    }
    let el = t.elapsed();
    check(
        worst < GRAD_REL_TOL && within(el, 30.0),
        format!("max rel err {worst:.2e}, {:.1}s", el.as_secs_f64()),
    )
}

fn seen_split() -> Outcome {
    let t = Instant::now();
    let ds = default_dataset();
    let run = run_seen(
        &ds.records,
        &GenConfig::default(),
        &PipelineConfig::default(),
        SEED,
    )
    .unwrap();
    // Simulation plus training and evaluation.
    let el = t.elapsed() + default_run().1;
    let height = run.report.metric("height_mm").unwrap().mae;
    let size = run.report.metric("size_mm").unwrap().mae;
    let shape = run.report.shape.as_ref().unwrap();
    check(
        height <= SEEN_HEIGHT_MAE_MAX
            && size <= SEEN_SIZE_MAE_MAX
            && shape.accuracy >= SEEN_SHAPE_ACC_MIN
            && shape.accuracy >= SEEN_SHAPE_CHANCE_RATIO * shape.chance
            && within(el, 600.0),
        format!(
            "{}/{} height MAE {height:.3} mm, size MAE {size:.3} mm, shape {:.1}% (chance {:.1}%), {:.1}s",
            run.train.len(),
            run.test.len(),
            100.0 * shape.accuracy,
            100.0 * shape.chance,
            el.as_secs_f64()
        ),
    )
}

fn holdout_split() -> Outcome {
    let t = Instant::now();
    let ds = default_dataset();
    let catalog = generate_catalog(SEED);
    let run = run_holdout(
        &ds.records,
        &catalog,
        &GenConfig::default(),
        &PipelineConfig::default(),
        SEED,
    )
    .unwrap();
    let size = run.report.metric("size_mm").unwrap().mae;
    let acc = run.report.shape.as_ref().unwrap().accuracy;
    check(
        run.train.len() == 288
            && run.test.len() == 75
            && size <= HOLDOUT_SIZE_MAE_MAX
            && acc >= HOLDOUT_SHAPE_ACC_MIN,
        format!(
            "{}/{} size MAE {size:.3} mm, shape {:.1}%, {:.1}s",
            run.train.len(),
            run.test.len(),
            100.0 * acc,
            t.elapsed().as_secs_f64()
        ),
    )
}

fn rate_ablation() -> Outcome {
    let t = Instant::now();
    let gen = GenConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for seed in ABLATION_SEEDS {
        let fresh;
        let ds = if seed == SEED {
            default_dataset()
        } else {
            fresh = dataset(seed, NoiseModel::default());
            &fresh
        };
        let r = ablation_rate(
            &ds.records,
            &gen,
            &[800.0, 30.0],
            &PipelineConfig::default(),
            seed,
        )
        .unwrap();
        let (fast, slow) = (r.arms[0].size.mae, r.arms[1].size.mae);
        pass &= fast < slow;
        parts.push(format!("seed {seed}: {fast:.3} vs {slow:.3}"));
    }
    check(
        pass,
        format!(
            "size MAE 800 Hz vs 30 Hz, {}, {:.1}s",
            parts.join("; "),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn humidity() -> Outcome {
    let t = Instant::now();
    let (seen, interp) =
        humidity_experiment(&HumidityConfig::default(), &GenConfig::default(), SEED).unwrap();
    let el = t.elapsed();
    let (s, i) = (
        seen.metric("humidity_ml").unwrap().mae,
        interp.metric("humidity_ml").unwrap().mae,
    );
    check(
        s <= HUMIDITY_SEEN_MAE_MAX && i <= HUMIDITY_INTERP_MAE_MAX && within(el, 120.0),
        format!(
            "seen MAE {s:.4} ml, interpolation MAE {i:.4} ml, {:.1}s",
            el.as_secs_f64()
        ),
    )
}

fn invariants() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    if let Err(e) = common::hysteresis_holds(200, 9) {
        failures.push(format!("hysteresis: {e}"));
    }
    let scenes = [
        (0.5, 0.9, 0.0016, 40.0),
        (4.0, 0.6, 0.0009, 60.0),
        (8.0, 0.98, 0.0013, 30.0),
    ];
    for (d, psi, rho, h) in scenes {
        let scene = common::test_scene(d, psi, rho, h);
        for seed in 0..3 {
            if let Err(e) = common::sandwich_holds(&scene, seed) {
                failures.push(format!("sandwich: {e}"));
            }
        }
        let spread = common::envelope_seed_spread(&scene, 11, 12);
        if spread > ENVELOPE_SPREAD_MAX {
            failures.push(format!("envelope spread {spread:.2} σκ"));
        }
    }
    let bad = common::feature_property_failures(100, 10);
    if bad > 0 {
        failures.push(format!("feature properties: {bad} signals"));
    }
    if let Err(e) = common::torque_monotone_in_height(150.0) {
        failures.push(format!("torque monotonicity: {e}"));
    }
    let v = common::size_intensity(&[1.0, 3.0, 6.0, 10.0], 10);
    if !v.windows(2).all(|w| w[1] > w[0]) {
        failures.push(format!("size→intensity: {v:?}"));
    }
    let detail = if failures.is_empty() {
        format!("all suites hold, {:.1}s", t.elapsed().as_secs_f64())
    } else {
        failures.join("; ")
    };
    check(failures.is_empty(), detail)
}

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["grainsense"];
    full.extend_from_slice(args);
    grainsense_cli::run(full, &mut std::io::sink(), &mut std::io::sink())
}

fn collect_files(dir: &Path, base: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(&p, base, out);
        } else {
            let rel = p.strip_prefix(base).unwrap().display().to_string();
            out.push((rel, std::fs::read(&p).unwrap()));
        }
    }
}

fn determinism() -> Outcome {
    let t = Instant::now();
    let outputs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().to_str().unwrap();
            for cmd in ["simulate", "train", "eval"] {
                assert_eq!(cli(&["--seed", "42", "--out", out, cmd]), 0, "{cmd} failed");
            }
            let mut files = Vec::new();
            collect_files(dir.path(), dir.path(), &mut files);
            files
        })
        .collect();
    let names: Vec<&str> = outputs[0].iter().map(|f| f.0.as_str()).collect();
    let identical = outputs[0] == outputs[1];
    check(
        identical && names.len() == 9,
        format!(
            "{} files {}, {:.1}s",
            names.len(),
            if identical {
                "byte-identical"
            } else {
                "differ"
            },
            t.elapsed().as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mass round trip", mass_round_trip),
        ("feature oracle", feature_oracle),
        ("centre-of-mass oracle", com_oracle),
        ("gradient check", gradient_check),
        ("seen split", seen_split),
        ("holdout split", holdout_split),
        ("rate ablation direction", rate_ablation),
        ("humidity", humidity),
        ("invariant suites", invariants),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
