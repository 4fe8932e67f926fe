//! Command-line front end: configuration, subcommands and exit codes.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use grainsense::domain::ContentFill;
use grainsense::features::{envelopes, EnvelopeConfig};
use grainsense::granusim::dump::{write_marker_field, write_signal_trace};
use grainsense::granusim::{
    stick_slip_trace, vibration_markerfield, RimPolicy, Scene, SweepConfig,
};
use grainsense::harness::{
    ablation_rate, evaluate_saved, generate_catalog, generate_dataset, holdout_split,
    humidity_experiment, load_dataset, run_holdout, run_seen, save_dataset, seen_test_set,
    EvalReport, GenConfig, HumidityConfig, Models, PipelineConfig,
};
use grainsense::seed;
use thiserror::Error;

pub use config::{parse_config, ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Simulation(grainsense::Error),
    #[error("training failed: {0}")]
    Training(grainsense::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Simulation(_) => 4,
            CliError::Training(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    fn simulation(e: grainsense::Error) -> Self {
        match e {
            grainsense::Error::Io(_) | grainsense::Error::Format { .. } => {
                CliError::Io(e.to_string())
            }
            e => CliError::Simulation(e),
        }
    }

    fn training(e: grainsense::Error) -> Self {
        match e {
            grainsense::Error::Io(_) | grainsense::Error::Format { .. } => {
                CliError::Io(e.to_string())
            }
            e => CliError::Training(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "grainsense",
    about = "Tactile estimation of granular container content"
)]
pub struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Procedure {
    SlowRotation,
    FastRotation,
    HumiditySweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the particle catalog.
    Catalog,
    /// Generate the dataset.
    Simulate,
    /// Train the seen-split and holdout-split models.
    Train,
    /// Evaluate saved models on both test sets.
    Eval,
    /// Compare size and shape estimation across tactile sampling rates.
    AblateRate,
    /// Run the humidity study.
    Humidity,
    /// Dump one raw trace for plotting.
    Trace {
        particle: String,
        /// Fill height, mm.
        height: f64,
        #[arg(value_enum)]
        procedure: Procedure,
    },
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn gen_config(cfg: &RunConfig) -> GenConfig {
    GenConfig {
        container: cfg.container.clone(),
        noise: cfg.noise,
        ..GenConfig::default()
    }
}

fn pipeline_config(cfg: &RunConfig) -> PipelineConfig {
    PipelineConfig {
        oracle_features: cfg.oracle_features,
        ..PipelineConfig::default()
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_records(cfg: &RunConfig) -> Result<Vec<grainsense::harness::DatasetRecord>, CliError> {
    let path = cfg.dataset_path();
    load_dataset(&path)
        .map(|d| d.records)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_report(
    cfg: &RunConfig,
    name: &str,
    report: &EvalReport,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let path = cfg.report_dir().join(format!("{name}.txt"));
    write_file(&path, &report.to_text())?;
    writeln!(out, "{name}: {}", summary(report))?;
    eprintln!("{name}: evaluated in {:.2} s", report.runtime_s);
    Ok(())
}

fn summary(report: &EvalReport) -> String {
    let mut parts: Vec<String> = report
        .regression
        .iter()
        .map(|(q, m)| format!("{q} mae {:.4}", m.mae))
        .collect();
    if let Some(c) = &report.shape {
        parts.push(format!("shape acc {:.4}", c.accuracy));
    }
    parts.join(", ")
}

/// Runs one subcommand; human-readable progress goes to `out`.
pub fn dispatch(command: &Command, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let gen = gen_config(cfg);
    match command {
        Command::Catalog => {
            let mut text = String::new();
            for p in generate_catalog(cfg.seed) {
                let class = p.shape_class().map_err(CliError::simulation)?;
                text.push_str(&format!(
                    "{} diameter_mm={} sphericity={} density={} packing={} class={}\n",
                    p.name,
                    p.diameter_dp,
                    p.sphericity_psi,
                    p.material_density,
                    p.packing_fraction,
                    class.value()
                ));
            }
            write_file(&cfg.out_dir.join("catalog.txt"), &text)?;
            out.write_all(text.as_bytes())?;
        }
        Command::Simulate => {
            let catalog = generate_catalog(cfg.seed);
            let ds = generate_dataset(&catalog, &gen, cfg.seed).map_err(CliError::simulation)?;
            for n in &ds.notes {
                eprintln!("note: {n}");
            }
            let path = cfg.dataset_path();
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            save_dataset(&ds, &path).map_err(CliError::simulation)?;
            writeln!(
                out,
                "wrote {} records to {}",
                ds.records.len(),
                path.display()
            )?;
        }
        Command::Train => {
            let records = load_records(cfg)?;
            let catalog = generate_catalog(cfg.seed);
            let pc = pipeline_config(cfg);
            let seen = run_seen(&records, &gen, &pc, cfg.seed).map_err(CliError::training)?;
            seen.models
                .save(&cfg.model_dir().join("seen"))
                .map_err(CliError::training)?;
            let holdout =
                run_holdout(&records, &catalog, &gen, &pc, cfg.seed).map_err(CliError::training)?;
            holdout
                .models
                .save(&cfg.model_dir().join("holdout"))
                .map_err(CliError::training)?;
            writeln!(
                out,
                "trained seen ({} records) and holdout ({} records) models in {}",
                seen.train.len(),
                holdout.train.len(),
                cfg.model_dir().display()
            )?;
        }
        Command::Eval => {
            let records = load_records(cfg)?;
            let catalog = generate_catalog(cfg.seed);
            let load = |name: &str| {
                let dir = cfg.model_dir().join(name);
                Models::load(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
            };
            let (train_n, test) = seen_test_set(&records, cfg.seed).map_err(CliError::training)?;
            let report = evaluate_saved(
                "seen",
                &load("seen")?,
                &test,
                train_n,
                &gen,
                cfg.oracle_features,
            )
            .map_err(CliError::training)?;
            write_report(cfg, "seen", &report, out)?;
            let (train, test) =
                holdout_split(&records, &catalog, &gen, cfg.seed).map_err(CliError::simulation)?;
            let report = evaluate_saved(
                "holdout",
                &load("holdout")?,
                &test,
                train.len(),
                &gen,
                cfg.oracle_features,
            )
            .map_err(CliError::training)?;
            write_report(cfg, "holdout", &report, out)?;
        }
        Command::AblateRate => {
            let records = load_records(cfg)?;
            let report = ablation_rate(
                &records,
                &gen,
                &cfg.ablation_rates,
                &pipeline_config(cfg),
                cfg.seed,
            )
            .map_err(CliError::training)?;
            write_file(&cfg.report_dir().join("ablate-rate.txt"), &report.to_text())?;
            for a in &report.arms {
                writeln!(
                    out,
                    "{} Hz: size mae {:.4}, shape acc {:.4}",
                    a.rate_hz, a.size.mae, a.shape_accuracy
                )?;
            }
        }
        Command::Humidity => {
            let hc = HumidityConfig {
                trials: cfg.humidity_trials,
                ..HumidityConfig::default()
            };
            let (seen, interp) =
                humidity_experiment(&hc, &gen, cfg.seed).map_err(CliError::training)?;
            write_report(cfg, "humidity-seen", &seen, out)?;
            write_report(cfg, "humidity-interpolation", &interp, out)?;
        }
        Command::Trace {
            particle,
            height,
            procedure,
        } => {
            let path = trace(cfg, &gen, particle, *height, *procedure)?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

fn trace(
    cfg: &RunConfig,
    gen: &GenConfig,
    name: &str,
    height: f64,
    procedure: Procedure,
) -> Result<PathBuf, CliError> {
    let particle = generate_catalog(cfg.seed)
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown particle `{name}`; see `grainsense catalog`"
            ))
        })?;
    if !(height > 0.0 && height.is_finite()) {
        return Err(CliError::Usage(format!(
            "fill height must be positive, got {height}"
        )));
    }
    let fill = ContentFill::new(particle, height);
    let tag = match procedure {
        Procedure::SlowRotation => "slow-rotation",
        Procedure::FastRotation => "fast-rotation",
        Procedure::HumiditySweep => "humidity-sweep",
    };
    let s = seed::derive(
        cfg.seed,
        &[
            seed::tag("trace"),
            seed::tag(name),
            height.to_bits(),
            seed::tag(tag),
        ],
    );
    let mut buf = Vec::new();
    let sim = CliError::simulation;
    match procedure {
        Procedure::FastRotation => {
            let field = vibration_markerfield(&fill, &gen.container, gen.noise.marker_sigma, s)
                .map_err(sim)?;
            write_marker_field(&mut buf, tag, &field).map_err(sim)?;
        }
        Procedure::SlowRotation | Procedure::HumiditySweep => {
            let (sweep, rim) = if procedure == Procedure::SlowRotation {
                (SweepConfig::slow_rotation(), RimPolicy::Open)
            } else {
                (SweepConfig::full_turn(), RimPolicy::Closed)
            };
            let scene = Scene::new(fill, gen.container.clone())
                .map_err(sim)?
                .with_rim(rim);
            let slow = stick_slip_trace(&scene, &sweep, gen.noise.torque_sigma, s).map_err(sim)?;
            write_signal_trace(&mut buf, tag, &slow.trace).map_err(sim)?;
            let env = envelopes(
                &slow.trace,
                &EnvelopeConfig::for_noise(gen.noise.torque_sigma, sweep.kappa),
            )
            .map_err(sim)?;
            let mut text = format!("# envelopes {tag}\ntheta_deg,lower,upper\n");
            for i in 0..env.angles.len() {
                text.push_str(&format!(
                    "{},{},{}\n",
                    env.angles[i], env.lower[i], env.upper[i]
                ));
            }
            write_file(
                &cfg.out_dir
                    .join(format!("trace_{name}_{height}_{tag}.envelopes.csv")),
                &text,
            )?;
        }
    }
    let path = cfg.out_dir.join(format!("trace_{name}_{height}_{tag}.txt"));
    write_file(
        &path,
        &String::from_utf8(buf).expect("trace dumps are utf-8"),
    )?;
    Ok(path)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = resolve_config(&cli).and_then(|cfg| dispatch(&cli.command, &cfg, out));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
