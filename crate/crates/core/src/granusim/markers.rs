//! Virtual high-speed tactile sensor for the fast rotation.
//!
//! During the recorded part of the fast rotation the content falls onto the
//! bottle base. Each particle impact rings the gel at its resonance; the
//! markers inside the contact patch pick up the ringing, scaled by their
//! distance from the patch centre.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::domain::{content_mass, si, ContainerSpec, ContentFill};
use crate::{seed, Error, Result};

pub const MARKER_COUNT: usize = 70;
const MARKER_COLUMNS: usize = 10;
const MARKER_SPACING_MM: f64 = 1.7;
const CONTACT_MARKERS: usize = 30;
const CONTACT_FALLOFF_MM: f64 = 3.0;

pub const TACTILE_RATE_HZ: f64 = 800.0;
/// Time for the bottle axis to travel from −60° to 0° at 15°/s.
pub const FAST_ROTATION_WINDOW_S: f64 = 4.0;
pub const GEL_RESONANCE_HZ: f64 = 150.0;
pub const GEL_DECAY_S: f64 = 0.025;
/// Cap on the expected number of impacts in the window.
pub const MAX_COLLISION_RATE: f64 = 500.0;
/// Marker displacement per unit impact momentum, mm / (g·m/s).
const IMPACT_GAIN: f64 = 0.1;
const MIN_FALL_MM: f64 = 10.0;

/// Marker grid and the fixed spatial response of the contact patch.
#[derive(Debug, Clone)]
pub struct MarkerLayout {
    /// Marker centres, mm.
    pub positions: Vec<[f64; 2]>,
    /// Response weight per marker; zero outside the contact patch.
    pub weights: Vec<f64>,
}

impl Default for MarkerLayout {
    fn default() -> Self {
        let rows = MARKER_COUNT / MARKER_COLUMNS;
        let positions: Vec<[f64; 2]> = (0..MARKER_COUNT)
            .map(|i| {
                let col = (i % MARKER_COLUMNS) as f64 - 0.5 * (MARKER_COLUMNS - 1) as f64;
                let row = (i / MARKER_COLUMNS) as f64 - 0.5 * (rows - 1) as f64;
                [col * MARKER_SPACING_MM, row * MARKER_SPACING_MM]
            })
            .collect();
        let r2: Vec<f64> = positions
            .iter()
            .map(|p| p[0] * p[0] + p[1] * p[1])
            .collect();
        let mut order: Vec<usize> = (0..MARKER_COUNT).collect();
        order.sort_by(|&a, &b| r2[a].total_cmp(&r2[b]).then(a.cmp(&b)));
        let mut weights = vec![0.0; MARKER_COUNT];
        for &i in &order[..CONTACT_MARKERS] {
            weights[i] = (-r2[i] / (2.0 * CONTACT_FALLOFF_MM * CONTACT_FALLOFF_MM)).exp();
        }
        MarkerLayout { positions, weights }
    }
}

impl MarkerLayout {
    pub fn contact_markers(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, _)| i)
    }
}

/// Per-frame 2D displacements of every marker.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerField {
    marker_count: usize,
    /// Frame-major displacement vectors, mm.
    displacements: Vec<[f64; 2]>,
    /// Hz.
    pub sample_rate: f64,
}

impl MarkerField {
    pub fn new(
        marker_count: usize,
        displacements: Vec<[f64; 2]>,
        sample_rate: f64,
    ) -> Result<Self> {
        if marker_count == 0 || displacements.len() % marker_count != 0 {
            return Err(Error::domain(format!(
                "{} displacements do not form frames of {marker_count} markers",
                displacements.len()
            )));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::domain("marker field sample rate must be positive"));
        }
        Ok(MarkerField {
            marker_count,
            displacements,
            sample_rate,
        })
    }

    pub fn from_frames(frames: &[Vec<[f64; 2]>], sample_rate: f64) -> Result<Self> {
        let marker_count = frames.first().map_or(0, Vec::len);
        if frames.iter().any(|f| f.len() != marker_count) {
            return Err(Error::domain("every frame needs the same marker count"));
        }
        Self::new(marker_count, frames.concat(), sample_rate)
    }

    pub fn marker_count(&self) -> usize {
        self.marker_count
    }

    pub fn frame_count(&self) -> usize {
        self.displacements.len() / self.marker_count
    }

    pub fn frame(&self, i: usize) -> &[[f64; 2]] {
        &self.displacements[i * self.marker_count..(i + 1) * self.marker_count]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[[f64; 2]]> {
        self.displacements.chunks_exact(self.marker_count)
    }

    /// Keeps every `step`-th frame starting from the first.
    pub fn decimate(&self, step: usize, sample_rate: f64) -> MarkerField {
        let displacements = self
            .frames()
            .step_by(step.max(1))
            .flatten()
            .copied()
            .collect();
        MarkerField {
            marker_count: self.marker_count,
            displacements,
            sample_rate,
        }
    }
}

/// One particle impact on the bottle base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    /// Seconds from the start of the window.
    pub time_s: f64,
    /// Peak gel displacement, mm.
    pub amplitude_mm: f64,
    /// Unit shear direction in the sensor plane.
    pub direction: [f64; 2],
}

/// Draws the impacts for a falling fill.
pub fn collision_events<R: Rng>(
    fill: &ContentFill,
    container: &ContainerSpec,
    rng: &mut R,
) -> Result<Vec<CollisionEvent>> {
    let total = content_mass(fill, container)?;
    let particle_mass = fill.particle.particle_mass();
    let rate = (total / particle_mass).min(MAX_COLLISION_RATE);
    let count = Poisson::new(rate)
        .map_err(|_| Error::domain(format!("collision rate {rate} invalid")))?
        .sample(rng) as usize;
    let fall = si::mm((container.inner_height - fill.fill_height_hp).max(MIN_FALL_MM));
    let speed = (2.0 * container.gravity_g * fall).sqrt();
    let mut events: Vec<CollisionEvent> = (0..count)
        .map(|_| {
            let time_s = rng.gen_range(0.0..FAST_ROTATION_WINDOW_S);
            let v = speed * rng.gen_range(0.7..1.3);
            let angle = rng.gen_range(0.0..2.0 * PI);
            CollisionEvent {
                time_s,
                amplitude_mm: IMPACT_GAIN * particle_mass * v,
                direction: [angle.cos(), angle.sin()],
            }
        })
        .collect();
    events.sort_by(|a, b| a.time_s.total_cmp(&b.time_s));
    Ok(events)
}

/// Renders marker displacements from an impact stream plus sensor noise.
pub fn render_marker_field<R: Rng>(
    events: &[CollisionEvent],
    layout: &MarkerLayout,
    frame_count: usize,
    sample_rate: f64,
    marker_sigma: f64,
    rng: &mut R,
) -> Result<MarkerField> {
    let noise = Normal::new(0.0, marker_sigma).map_err(|_| {
        Error::domain(format!(
            "marker sigma {marker_sigma} must be finite and >= 0"
        ))
    })?;
    let dt = 1.0 / sample_rate;
    let tail = (10.0 * GEL_DECAY_S * sample_rate).ceil() as usize;
    let omega = 2.0 * PI * GEL_RESONANCE_HZ;

    let mut ringing = vec![[0.0f64; 2]; frame_count];
    for ev in events {
        let first = (ev.time_s * sample_rate).ceil() as usize;
        for (k, r) in ringing.iter_mut().enumerate().skip(first).take(tail) {
            let age = k as f64 * dt - ev.time_s;
            let h = ev.amplitude_mm * (-age / GEL_DECAY_S).exp() * (omega * age).sin();
            r[0] += h * ev.direction[0];
            r[1] += h * ev.direction[1];
        }
    }

    let markers = layout.weights.len();
    let mut displacements = Vec::with_capacity(frame_count * markers);
    for r in &ringing {
        for &w in &layout.weights {
            displacements.push([w * r[0] + noise.sample(rng), w * r[1] + noise.sample(rng)]);
        }
    }
    MarkerField::new(markers, displacements, sample_rate)
}

/// Marker field recorded over the fast-rotation impact window.
pub fn vibration_markerfield(
    fill: &ContentFill,
    container: &ContainerSpec,
    marker_sigma: f64,
    seed: u64,
) -> Result<MarkerField> {
    let mut rng = seed::rng(seed, &[seed::tag("fast-rotation")]);
    let events = collision_events(fill, container, &mut rng)?;
    let frames = (FAST_ROTATION_WINDOW_S * TACTILE_RATE_HZ).round() as usize;
    render_marker_field(
        &events,
        &MarkerLayout::default(),
        frames,
        TACTILE_RATE_HZ,
        marker_sigma,
        &mut rng,
    )
}
