//! Wrist force/torque readings for the lift and tilt-and-shake procedures.

use rand_distr::{Distribution, Normal};

use super::geometry::{container_com, content_com};
use super::{Scene, StickSlip};
use crate::domain::{content_mass, si, ContainerSpec, ContentFill};
use crate::{seed, Error, Result};

/// Tilt angles at which torques are held, degrees.
pub const TILT_HOLD_ANGLES: [f64; 3] = [30.0, 45.0, 60.0];

/// One wrist sensor sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WristReading {
    pub tilt_angle_theta: f64,
    /// N.
    pub force_z: f64,
    /// N·m.
    pub torque_y: f64,
}

fn gaussian(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma)
        .map_err(|_| Error::domain(format!("noise sigma {sigma} must be finite and >= 0")))
}

/// Gravity torque about the grasp point for an open bottle, N·m.
pub fn wrist_torque(
    theta_deg: f64,
    beta_deg: f64,
    fill: &ContentFill,
    container: &ContainerSpec,
) -> Result<f64> {
    let (x, _) = content_com(theta_deg, beta_deg, fill, container)?;
    let (xc, _) = container_com(theta_deg, container);
    let m = si::grams(content_mass(fill, container)?);
    let mc = si::grams(container.container_mass_mc);
    Ok(container.gravity_g * (m * x + mc * xc))
}

/// Vertical force change after lifting the filled bottle, N.
pub fn lift_delta_fz(
    fill: &ContentFill,
    container: &ContainerSpec,
    noise_sigma: f64,
    seed: u64,
) -> Result<f64> {
    let m = content_mass(fill, container)?;
    let mut rng = seed::rng(seed, &[seed::tag("lift")]);
    let noise = gaussian(noise_sigma)?.sample(&mut rng);
    Ok(si::grams(m + container.container_mass_mc) * container.gravity_g + noise)
}

/// Noise-free lift reading of the empty bottle, N.
pub fn container_delta_fz(container: &ContainerSpec) -> f64 {
    si::grams(container.container_mass_mc) * container.gravity_g
}

/// Torques held at 30°, 45° and 60°, each before and after shaking.
///
/// Returned as `[pre30, post30, pre45, post45, pre60, post60]`. Each tilt
/// starts from the settled upright pile; shaking levels the mobile surface.
pub fn tilt_hold_torques(scene: &Scene, noise_sigma: f64, seed: u64) -> Result<[f64; 6]> {
    let noise = gaussian(noise_sigma)?;
    let mut rng = seed::rng(seed, &[seed::tag("tilt-hold")]);
    let mut out = [0.0; 6];
    for (i, &theta) in TILT_HOLD_ANGLES.iter().enumerate() {
        let mut pile = StickSlip::settled(scene.aor);
        pile.advance_to(theta);
        let pre = scene.torque(theta, pile.state().surface_angle_beta)?;
        let post = scene.torque(theta, 0.0)?;
        out[2 * i] = pre + noise.sample(&mut rng);
        out[2 * i + 1] = post + noise.sample(&mut rng);
    }
    Ok(out)
}
