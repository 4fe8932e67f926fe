//! Stick-slip evolution of the pile surface and the slow-rotation torque
//! trace it produces.
//!
//! While the pile sticks, its free surface turns with the bottle. Once the
//! surface reaches the upper angle of repose it avalanches back to the lower
//! angle; the resulting torque-versus-tilt curve is a staircase.

use rand_distr::{Distribution, Normal};

use super::{AorParams, Scene};
use crate::{seed, Error, Result};

/// Fingertip torque units per N·m at unit gain.
pub const FINGERTIP_UNITS_PER_NM: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickSlipState {
    /// Free-surface inclination from world horizontal, degrees.
    pub surface_angle_beta: f64,
    pub collapse_count: usize,
}

/// An avalanche at tilt `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collapse {
    pub theta: f64,
    pub beta_before: f64,
    pub beta_after: f64,
}

/// Hysteretic pile surface.
///
/// The surface angle is tracked through an anchor `(theta, beta)` set at the
/// last avalanche so that collapse angles stay exact over long sweeps.
#[derive(Debug, Clone)]
pub struct StickSlip {
    aor: AorParams,
    theta: f64,
    anchor: (f64, f64),
    collapse_count: usize,
}

impl StickSlip {
    /// Level pile in an upright bottle.
    pub fn settled(aor: AorParams) -> Self {
        StickSlip {
            aor,
            theta: 0.0,
            anchor: (0.0, 0.0),
            collapse_count: 0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn beta_at(&self, theta: f64) -> f64 {
        self.anchor.1 + (theta - self.anchor.0)
    }

    pub fn state(&self) -> StickSlipState {
        StickSlipState {
            surface_angle_beta: self.beta_at(self.theta),
            collapse_count: self.collapse_count,
        }
    }

    pub fn reset_count(&mut self) {
        self.collapse_count = 0;
    }

    /// Shaking levels the surface.
    pub fn shake(&mut self) {
        self.anchor = (self.theta, 0.0);
    }

    /// Rotates the bottle to `theta`, returning the avalanches on the way.
    pub fn advance_to(&mut self, theta: f64) -> Vec<Collapse> {
        let upper = self.aor.aor_upper;
        let lower = self.aor.aor_lower;
        let mut events = Vec::new();
        if theta >= self.theta {
            while self.beta_at(theta) >= upper {
                let at = self.anchor.0 + (upper - self.anchor.1);
                events.push(Collapse {
                    theta: at,
                    beta_before: upper,
                    beta_after: lower,
                });
                self.anchor = (at, lower);
            }
        } else {
            while self.beta_at(theta) <= -upper {
                let at = self.anchor.0 + (-upper - self.anchor.1);
                events.push(Collapse {
                    theta: at,
                    beta_before: -upper,
                    beta_after: -lower,
                });
                self.anchor = (at, -lower);
            }
        }
        self.collapse_count += events.len();
        self.theta = theta;
        events
    }
}

/// A sensor value sampled against tilt angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTrace {
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    /// Hz.
    pub sample_rate: f64,
}

impl SignalTrace {
    pub fn new(angles: Vec<f64>, values: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if angles.len() != values.len() {
            return Err(Error::domain("trace angle and value counts differ"));
        }
        if !(sample_rate > 0.0) {
            return Err(Error::domain("trace sample rate must be positive"));
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("trace angles must be strictly increasing"));
        }
        Ok(SignalTrace {
            angles,
            values,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Rotation sweep settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub theta_start: f64,
    pub theta_end: f64,
    /// deg/s.
    pub rate: f64,
    /// Hz.
    pub readout_rate: f64,
    /// Sensor gain.
    pub kappa: f64,
}

impl SweepConfig {
    /// The −60°→60° slow rotation.
    pub fn slow_rotation() -> Self {
        SweepConfig {
            theta_start: -60.0,
            theta_end: 60.0,
            rate: 5.0,
            readout_rate: 100.0,
            kappa: 1.0,
        }
    }

    /// The −135°→135° sweep used on humid powders.
    pub fn full_turn() -> Self {
        SweepConfig {
            theta_start: -135.0,
            theta_end: 135.0,
            ..Self::slow_rotation()
        }
    }

    pub fn angles(&self) -> Result<Vec<f64>> {
        let ok = self.theta_start < self.theta_end
            && self.rate > 0.0
            && self.readout_rate > 0.0
            && self.theta_start.is_finite()
            && self.theta_end.is_finite();
        if !ok {
            return Err(Error::domain(format!("invalid sweep {self:?}")));
        }
        let span = self.theta_end - self.theta_start;
        let intervals = ((span / self.rate * self.readout_rate).round() as usize).max(1);
        let mut angles: Vec<f64> = (0..=intervals)
            .map(|i| self.theta_start + span * i as f64 / intervals as f64)
            .collect();
        angles[intervals] = self.theta_end;
        Ok(angles)
    }
}

/// Output of a slow sweep: the sensor trace and the hidden pile history.
#[derive(Debug, Clone)]
pub struct SlowSweep {
    pub trace: SignalTrace,
    /// Surface angle at each readout, degrees.
    pub surface_angles: Vec<f64>,
    pub collapses: Vec<Collapse>,
}

impl SlowSweep {
    pub fn collapse_count(&self) -> usize {
        self.collapses.len()
    }
}

/// Simulates a slow rotation and records the fingertip torque.
///
/// The pile starts settled in the upright bottle and is carried to
/// `theta_start` before recording begins; only avalanches during the
/// recorded sweep are reported.
pub fn stick_slip_trace(
    scene: &Scene,
    config: &SweepConfig,
    noise_sigma: f64,
    seed: u64,
) -> Result<SlowSweep> {
    let angles = config.angles()?;
    let noise = Normal::new(0.0, noise_sigma)
        .map_err(|_| Error::domain(format!("noise sigma {noise_sigma} must be finite and >= 0")))?;
    let mut rng = seed::rng(seed, &[seed::tag("slow-sweep")]);
    let gain = config.kappa * FINGERTIP_UNITS_PER_NM;

    let mut pile = StickSlip::settled(scene.aor);
    pile.advance_to(config.theta_start);
    pile.reset_count();

    let mut values = Vec::with_capacity(angles.len());
    let mut surface_angles = Vec::with_capacity(angles.len());
    let mut collapses = Vec::new();
    for &theta in &angles {
        collapses.extend(pile.advance_to(theta));
        let beta = pile.state().surface_angle_beta;
        surface_angles.push(beta);
        values.push(gain * scene.torque(theta, beta)? + noise.sample(&mut rng));
    }
    let sample_rate = config.readout_rate;
    Ok(SlowSweep {
        trace: SignalTrace::new(angles, values, sample_rate)?,
        surface_angles,
        collapses,
    })
}
