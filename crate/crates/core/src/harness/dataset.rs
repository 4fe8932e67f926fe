//! Dataset generation: every catalog particle at every fill height, with
//! repeats that differ only in sensor noise.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::domain::{content_mass, ContainerSpec, ContentFill, ParticleSpec, ShapeClass};
use crate::estimators::estimate_mass;
use crate::features::{
    assemble_features, envelopes, principal_vibration_signal, vib_features, EnvelopeConfig,
    FeatureVector, CONTACT_TOP_K, FEATURE_DIM,
};
use crate::granusim::{
    lift_delta_fz, stick_slip_trace, tilt_hold_torques, vibration_markerfield, MarkerField,
    NoiseModel, Scene, SweepConfig,
};
use crate::{seed, Error, Result};

pub const DEFAULT_HEIGHTS: [f64; 3] = [30.0, 50.0, 70.0];
pub const DEFAULT_REPEATS: usize = 3;
/// Height reduction applied when a fill spills during a procedure, mm.
pub const SPILL_STEP_MM: f64 = 5.0;

/// Simulation settings shared by every record.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub container: ContainerSpec,
    pub noise: NoiseModel,
    pub heights: Vec<f64>,
    pub repeats: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            container: ContainerSpec::default(),
            noise: NoiseModel::default(),
            heights: DEFAULT_HEIGHTS.to_vec(),
            repeats: DEFAULT_REPEATS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub mass_g: f64,
    pub height_mm: f64,
    pub diameter_mm: f64,
    pub sphericity: f64,
    pub shape: ShapeClass,
    pub humidity_ml: f64,
}

impl GroundTruth {
    pub fn of(fill: &ContentFill, container: &ContainerSpec) -> Result<Self> {
        let p = &fill.particle;
        Ok(GroundTruth {
            mass_g: content_mass(fill, container)?,
            height_mm: fill.fill_height_hp,
            diameter_mm: p.diameter_dp,
            sphericity: p.sphericity_psi,
            shape: p.shape_class()?,
            humidity_ml: p.humidity_ml,
        })
    }
}

/// One run of all four procedures on one filled bottle.
///
/// The slow-rotation trace and marker field are not stored; `trace_seed`
/// and `marker_seed` regenerate them exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub particle: ParticleSpec,
    pub repeat: usize,
    pub seed: u64,
    pub truth: GroundTruth,
    /// N.
    pub delta_fz: f64,
    /// N·m, `[pre30, post30, pre45, post45, pre60, post60]`.
    pub torques: [f64; 6],
    pub trace_seed: u64,
    pub marker_seed: u64,
    /// Estimated mass, oracle height until the height stage rewrites it.
    pub features: FeatureVector,
}

impl DatasetRecord {
    pub fn fill(&self) -> ContentFill {
        ContentFill::new(self.particle.clone(), self.truth.height_mm)
    }

    /// Regenerates the fast-rotation marker field.
    pub fn marker_field(&self, config: &GenConfig) -> Result<MarkerField> {
        vibration_markerfield(
            &self.fill(),
            &config.container,
            config.noise.marker_sigma,
            self.marker_seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    /// Fills regenerated at a lower height after spilling.
    pub notes: Vec<String>,
}

fn simulate_at(
    particle: &ParticleSpec,
    height: f64,
    repeat: usize,
    cell_seed: u64,
    config: &GenConfig,
) -> Result<DatasetRecord> {
    let c = &config.container;
    let fill = ContentFill::new(particle.clone(), height);
    let scene = Scene::new(fill.clone(), c.clone())?;
    let truth = GroundTruth::of(&fill, c)?;
    let delta_fz = lift_delta_fz(
        &fill,
        c,
        config.noise.force_sigma,
        seed::derive(cell_seed, &[seed::tag("lift")]),
    )?;
    let torques = tilt_hold_torques(
        &scene,
        config.noise.torque_sigma,
        seed::derive(cell_seed, &[seed::tag("tilt")]),
    )?;
    let trace_seed = seed::derive(cell_seed, &[seed::tag("slow")]);
    let marker_seed = seed::derive(cell_seed, &[seed::tag("fast")]);

    let sweep = SweepConfig::slow_rotation();
    let slow = stick_slip_trace(&scene, &sweep, config.noise.torque_sigma, trace_seed)?;
    let env = envelopes(
        &slow.trace,
        &EnvelopeConfig::for_noise(config.noise.torque_sigma, sweep.kappa),
    )?;
    let field = vibration_markerfield(&fill, c, config.noise.marker_sigma, marker_seed)?;
    let vib = vib_features(&principal_vibration_signal(&field, CONTACT_TOP_K)?)?;
    let est_mass = estimate_mass(delta_fz, c.container_mass_mc, c.gravity_g)?;
    let features = assemble_features(&vib, &env.concat(), est_mass, height)?;
    Ok(DatasetRecord {
        particle: particle.clone(),
        repeat,
        seed: cell_seed,
        truth,
        delta_fz,
        torques,
        trace_seed,
        marker_seed,
        features,
    })
}

/// Simulates one cell, lowering the fill in [`SPILL_STEP_MM`] steps if it
/// spills. Returns the record and, when lowered, a note.
pub fn simulate_record(
    particle: &ParticleSpec,
    height: f64,
    repeat: usize,
    cell_seed: u64,
    config: &GenConfig,
) -> Result<(DatasetRecord, Option<String>)> {
    let mut h = height;
    loop {
        match simulate_at(particle, h, repeat, cell_seed, config) {
            Ok(r) => {
                let note = (h != height).then(|| {
                    format!(
                        "{} spilled at {height} mm, regenerated at {h} mm",
                        particle.name
                    )
                });
                return Ok((r, note));
            }
            Err(Error::Spill { .. }) if h - SPILL_STEP_MM > 0.0 => h -= SPILL_STEP_MM,
            Err(e) => return Err(e),
        }
    }
}

/// Seed of the `(particle, height, repeat)` cell.
pub fn cell_seed(master: u64, particle: usize, height: usize, repeat: usize) -> u64 {
    seed::derive(
        master,
        &[
            seed::tag("cell"),
            particle as u64,
            height as u64,
            repeat as u64,
        ],
    )
}

/// Generates all `particles × heights × repeats` records in canonical
/// order. Cells are simulated in parallel.
pub fn generate_dataset(
    catalog: &[ParticleSpec],
    config: &GenConfig,
    master_seed: u64,
) -> Result<Dataset> {
    if catalog.is_empty() || config.heights.is_empty() || config.repeats == 0 {
        return Err(Error::domain("empty dataset request"));
    }
    config.container.validate()?;
    let cells: Vec<(usize, usize, usize)> = (0..catalog.len())
        .flat_map(|p| {
            (0..config.heights.len()).flat_map(move |h| (0..config.repeats).map(move |r| (p, h, r)))
        })
        .collect();
    let out: Vec<(DatasetRecord, Option<String>)> = cells
        .par_iter()
        .map(|&(p, h, r)| {
            simulate_record(
                &catalog[p],
                config.heights[h],
                r,
                cell_seed(master_seed, p, h, r),
                config,
            )
        })
        .collect::<Result<_>>()?;
    let mut notes = Vec::new();
    let records = out
        .into_iter()
        .map(|(rec, note)| {
            notes.extend(note);
            rec
        })
        .collect();
    Ok(Dataset { records, notes })
}

const MAGIC: &str = "# dataset-v1";
const LABEL_COLUMNS: [&str; 20] = [
    "name",
    "mass_g",
    "height_mm",
    "diameter_mm",
    "sphericity",
    "shape_class",
    "humidity_ml",
    "material_density",
    "packing_fraction",
    "repeat",
    "seed",
    "delta_fz",
    "torque_pre30",
    "torque_post30",
    "torque_pre45",
    "torque_post45",
    "torque_pre60",
    "torque_post60",
    "trace_seed",
    "marker_seed",
];

fn header() -> String {
    let mut cols: Vec<String> = LABEL_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend((0..FEATURE_DIM).map(|i| format!("F{i:03}")));
    cols.join(",")
}

pub fn dataset_to_string(ds: &Dataset) -> String {
    let mut s = String::new();
    writeln!(s, "{MAGIC}").unwrap();
    for n in &ds.notes {
        writeln!(s, "# note: {n}").unwrap();
    }
    writeln!(s, "{}", header()).unwrap();
    for r in &ds.records {
        let t = &r.truth;
        let p = &r.particle;
        write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.name,
            t.mass_g,
            t.height_mm,
            t.diameter_mm,
            t.sphericity,
            t.shape.value(),
            t.humidity_ml,
            p.material_density,
            p.packing_fraction,
            r.repeat,
            r.seed,
            r.delta_fz
        )
        .unwrap();
        for v in r.torques {
            write!(s, ",{v}").unwrap();
        }
        writeln!(
            s,
            ",{},{},{}",
            r.trace_seed,
            r.marker_seed,
            r.features.to_csv()
        )
        .unwrap();
    }
    s
}

fn parse_row(line: &str, lineno: usize) -> Result<DatasetRecord> {
    let cols: Vec<&str> = line.split(',').collect();
    if cols.len() != LABEL_COLUMNS.len() + FEATURE_DIM {
        return Err(Error::format(
            lineno,
            format!(
                "expected {} columns, found {}",
                LABEL_COLUMNS.len() + FEATURE_DIM,
                cols.len()
            ),
        ));
    }
    let f = |i: usize| -> Result<f64> {
        cols[i].parse().map_err(|_| {
            Error::format(
                lineno,
                format!("bad number `{}` in column {}", cols[i], LABEL_COLUMNS[i]),
            )
        })
    };
    let u = |i: usize| -> Result<u64> {
        cols[i].parse().map_err(|_| {
            Error::format(
                lineno,
                format!("bad integer `{}` in column {}", cols[i], LABEL_COLUMNS[i]),
            )
        })
    };
    let mut particle = ParticleSpec::new(cols[0], f(3)?, f(4)?, f(7)?)
        .map_err(|e| Error::format(lineno, e.to_string()))?;
    particle.packing_fraction = f(8)?;
    particle = particle
        .with_humidity(f(6)?)
        .map_err(|e| Error::format(lineno, e.to_string()))?;
    let shape = ShapeClass::new(u(5)? as u8).map_err(|e| Error::format(lineno, e.to_string()))?;
    let features: Vec<f64> = (LABEL_COLUMNS.len()..cols.len())
        .map(f)
        .collect::<Result<_>>()?;
    let features =
        FeatureVector::from_slice(&features).map_err(|e| Error::format(lineno, e.to_string()))?;
    Ok(DatasetRecord {
        truth: GroundTruth {
            mass_g: f(1)?,
            height_mm: f(2)?,
            diameter_mm: f(3)?,
            sphericity: f(4)?,
            shape,
            humidity_ml: f(6)?,
        },
        particle,
        repeat: u(9)? as usize,
        seed: u(10)?,
        delta_fz: f(11)?,
        torques: [f(12)?, f(13)?, f(14)?, f(15)?, f(16)?, f(17)?],
        trace_seed: u(18)?,
        marker_seed: u(19)?,
        features,
    })
}

pub fn dataset_from_str(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => return Err(Error::format(1, "missing dataset-v1 header")),
    }
    let mut notes = Vec::new();
    let mut records = Vec::new();
    let mut seen_header = false;
    for (i, line) in lines {
        let lineno = i + 1;
        if let Some(n) = line.strip_prefix("# note: ") {
            notes.push(n.to_string());
        } else if line.starts_with('#') || line.trim().is_empty() {
            continue;
        } else if !seen_header {
            if line != header() {
                return Err(Error::format(lineno, "unexpected column header"));
            }
            seen_header = true;
        } else {
            records.push(parse_row(line, lineno)?);
        }
    }
    if !seen_header {
        return Err(Error::format(0, "missing column header"));
    }
    Ok(Dataset { records, notes })
}

pub fn save_dataset(ds: &Dataset, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, dataset_to_string(ds))?;
    Ok(())
}

pub fn load_dataset(path: &std::path::Path) -> Result<Dataset> {
    dataset_from_str(&std::fs::read_to_string(path)?)
}
