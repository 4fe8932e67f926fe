//! Simulator for the exploratory procedures: lift, tilt-and-shake, slow
//! rotation and fast rotation. It emits the readings of a wrist
//! force/torque sensor and of a high-speed marker-based tactile sensor.
//!
//! Every function is pure given its inputs and seed.

mod aor;
pub mod dump;
pub mod geometry;
mod markers;
mod stick_slip;
mod wrist;

pub use aor::{aor_model, AorParams};
pub use geometry::{content_com, content_com_with, RimPolicy};
pub use markers::{
    collision_events, render_marker_field, vibration_markerfield, CollisionEvent, MarkerField,
    MarkerLayout, FAST_ROTATION_WINDOW_S, GEL_DECAY_S, GEL_RESONANCE_HZ, MARKER_COUNT,
    MAX_COLLISION_RATE, TACTILE_RATE_HZ,
};
pub use stick_slip::{
    stick_slip_trace, Collapse, SignalTrace, SlowSweep, StickSlip, StickSlipState, SweepConfig,
    FINGERTIP_UNITS_PER_NM,
};
pub use wrist::{
    container_delta_fz, lift_delta_fz, tilt_hold_torques, wrist_torque, WristReading,
    TILT_HOLD_ANGLES,
};

use crate::domain::{content_mass, si, ContainerSpec, ContentFill};
use crate::Result;

/// Sensor noise levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Wrist force, N.
    pub force_sigma: f64,
    /// Wrist and fingertip torque, sensor units.
    pub torque_sigma: f64,
    /// Marker displacement, mm.
    pub marker_sigma: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            force_sigma: 0.01,
            torque_sigma: 0.002,
            marker_sigma: 0.001,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel {
            force_sigma: 0.0,
            torque_sigma: 0.0,
            marker_sigma: 0.0,
        }
    }
}

/// A filled container together with the pile behaviour of its content.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub fill: ContentFill,
    pub container: ContainerSpec,
    pub aor: AorParams,
    pub rim: RimPolicy,
}

impl Scene {
    pub fn new(fill: ContentFill, container: ContainerSpec) -> Result<Self> {
        fill.validate(&container)?;
        let aor = aor_model(&fill.particle);
        aor.validate()?;
        Ok(Scene {
            fill,
            container,
            aor,
            rim: RimPolicy::Open,
        })
    }

    pub fn with_aor(mut self, aor: AorParams) -> Result<Self> {
        aor.validate()?;
        self.aor = aor;
        Ok(self)
    }

    pub fn with_rim(mut self, rim: RimPolicy) -> Self {
        self.rim = rim;
        self
    }

    /// Ground-truth content mass, g.
    pub fn content_mass(&self) -> f64 {
        content_mass(&self.fill, &self.container).expect("scene fill validated on construction")
    }

    /// Wrist torque in N·m with the mobile surface at `beta_deg`.
    ///
    /// The sticky share of the content keeps its settled shape and moves
    /// rigidly with the bottle.
    pub fn torque(&self, theta_deg: f64, beta_deg: f64) -> Result<f64> {
        let g = self.container.gravity_g;
        let m = si::grams(self.content_mass());
        let sticky = self.aor.sticky_fraction;
        let (x_mobile, _) =
            content_com_with(theta_deg, beta_deg, &self.fill, &self.container, self.rim)?;
        let (x_sticky, _) = geometry::settled_com(theta_deg, &self.fill, &self.container);
        let (x_c, _) = geometry::container_com(theta_deg, &self.container);
        let mc = si::grams(self.container.container_mass_mc);
        Ok(g * (m * ((1.0 - sticky) * x_mobile + sticky * x_sticky) + mc * x_c))
    }
}
