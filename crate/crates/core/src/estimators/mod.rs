//! Property estimators: closed-form mass, learned height/size/humidity
//! regressors and the shape classifier.

pub mod forest;
pub mod mlp;
pub mod persist;

pub use forest::{forest_train, DecisionTree, ForestConfig, ForestModel, Node};
pub use mlp::{mlp_train, Activation, Layer, MlpModel, Standardizer, TrainConfig};
pub use persist::{
    forest_from_str, forest_to_string, load_forest, load_mlp, mlp_from_str, mlp_to_string,
    save_forest, save_mlp,
};

use crate::domain::{si, ContainerSpec, ShapeClass};
use crate::features::{FeatureVector, FEATURE_DIM, TOPPLE_DIM, VIB_DIM};
use crate::{Error, Result};

/// Smallest height or size an estimator will report.
pub const MIN_ESTIMATE: f64 = 1e-3;

/// A scalar estimate and whether it was clamped into the valid range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
}

impl Estimate {
    fn clamp(raw: f64, lo: f64, hi: f64) -> Self {
        let value = raw.clamp(lo, hi);
        Estimate {
            value,
            raw,
            clamped: value != raw,
        }
    }
}

/// Content mass in grams from the lift force change: `ΔF_z / g − M_c`.
///
/// Values below zero by more than rounding noise are inconsistent readings.
pub fn estimate_mass(delta_fz: f64, container_mass_mc: f64, gravity_g: f64) -> Result<f64> {
    if !(gravity_g > 0.0) || !delta_fz.is_finite() || !container_mass_mc.is_finite() {
        return Err(Error::domain(
            "estimate_mass needs finite readings and positive gravity",
        ));
    }
    let m = si::to_grams(delta_fz / gravity_g) - container_mass_mc;
    if m < -1e-9 * container_mass_mc.abs().max(1.0) {
        return Err(Error::NegativeMass(m));
    }
    Ok(m.max(0.0))
}

fn require_trained(model: &MlpModel, inputs: usize, what: &str) -> Result<()> {
    if !model.is_trained() {
        return Err(Error::domain(format!("{what} model is untrained")));
    }
    if model.input_dim() != inputs || model.output_dim() != 1 {
        return Err(Error::domain(format!(
            "{what} model must map {inputs} inputs to one output, has {:?}",
            model.layer_dims
        )));
    }
    Ok(())
}

/// Fill height from the six tilt-hold torques and the estimated mass.
pub fn estimate_height(
    model: &MlpModel,
    torques: &[f64; 6],
    est_mass: f64,
    container: &ContainerSpec,
) -> Result<Estimate> {
    require_trained(model, 7, "height")?;
    let mut x = torques.to_vec();
    x.push(est_mass);
    let raw = model.forward(&x)?[0];
    Ok(Estimate::clamp(
        raw,
        MIN_ESTIMATE,
        container.inner_height - MIN_ESTIMATE,
    ))
}

/// Envelope samples per curve.
const ENVELOPE_POINTS: usize = TOPPLE_DIM / 2;

/// Width of the shape classifier's input.
pub const SHAPE_INPUT_DIM: usize = VIB_DIM + TOPPLE_DIM + ENVELOPE_POINTS + 2;

/// Shape classifier input derived from a feature vector:
/// `[vib | topple / m | (upper − lower) / m | m | h]`.
///
/// Dividing the torque envelopes by the estimated mass turns them into
/// centre-of-mass lever arms, and the envelope gap is the avalanche step,
/// so neither depends on how heavy the particle material is.
pub fn shape_inputs(fv: &FeatureVector) -> Vec<f64> {
    let m = fv.est_mass.max(MIN_ESTIMATE);
    let (lower, upper) = fv.topple.split_at(ENVELOPE_POINTS);
    let mut out = Vec::with_capacity(SHAPE_INPUT_DIM);
    out.extend_from_slice(&fv.vib);
    out.extend(fv.topple.iter().map(|v| v / m));
    out.extend(upper.iter().zip(lower).map(|(u, l)| (u - l) / m));
    out.push(fv.est_mass);
    out.push(fv.est_height);
    out
}

/// Particle size and shape class from the assembled feature vector.
pub fn estimate_size_shape(
    size_model: &MlpModel,
    shape_model: &ForestModel,
    fv: &FeatureVector,
) -> Result<(Estimate, ShapeClass)> {
    require_trained(size_model, FEATURE_DIM, "size")?;
    let x = fv.as_vec();
    let raw = size_model.forward(&x)?[0];
    let shape = shape_model.predict(&shape_inputs(fv))?;
    Ok((Estimate::clamp(raw, MIN_ESTIMATE, f64::INFINITY), shape))
}

/// Added-water volume from a full-turn topple feature.
pub fn estimate_humidity(model: &MlpModel, topple: &[f64]) -> Result<Estimate> {
    require_trained(model, TOPPLE_DIM, "humidity")?;
    if topple.len() != TOPPLE_DIM {
        return Err(Error::domain(format!(
            "expected {TOPPLE_DIM} topple values, got {}",
            topple.len()
        )));
    }
    let raw = model.forward(topple)?[0];
    Ok(Estimate::clamp(raw, 0.0, f64::INFINITY))
}

/// The pipeline's combined output for one container.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyEstimate {
    pub mass_g: f64,
    pub height_mm: f64,
    pub volume_ml: f64,
    pub size_mm: f64,
    pub shape: ShapeClass,
}

impl PropertyEstimate {
    pub fn new(
        mass_g: f64,
        height_mm: f64,
        size_mm: f64,
        shape: ShapeClass,
        container: &ContainerSpec,
    ) -> Self {
        PropertyEstimate {
            mass_g,
            height_mm,
            volume_ml: container.volume_ml(height_mm),
            size_mm,
            shape,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_from_force() {
        assert!((estimate_mass(1.4715, 50.0, 9.81).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(estimate_mass(0.05 * 9.81, 50.0, 9.81).unwrap(), 0.0);
        assert!(matches!(
            estimate_mass(0.1, 50.0, 9.81),
            Err(Error::NegativeMass(_))
        ));
        assert!(estimate_mass(1.0, 50.0, 0.0).is_err());
    }

    fn constant_model(inputs: usize, hidden: &[usize], out: f64) -> MlpModel {
        let mut dims = vec![inputs];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let mut m = MlpModel::zeros(&dims).unwrap();
        m.layers.last_mut().unwrap().biases[0] = out;
        m.training_loss = Some(0.0);
        m
    }

    #[test]
    fn height_is_clamped_and_flagged() {
        let c = ContainerSpec::default();
        let m = constant_model(7, &[16, 4], -5.0);
        let e = estimate_height(&m, &[0.0; 6], 10.0, &c).unwrap();
        assert_eq!(e.value, MIN_ESTIMATE);
        assert!(e.clamped && e.raw == -5.0);
        let m = constant_model(7, &[16, 4], 42.0);
        let e = estimate_height(&m, &[0.0; 6], 10.0, &c).unwrap();
        assert_eq!(e.value, 42.0);
        assert!(!e.clamped);
    }

    #[test]
    fn untrained_model_is_rejected() {
        let mut m = constant_model(7, &[16, 4], 1.0);
        m.training_loss = None;
        assert!(estimate_height(&m, &[0.0; 6], 1.0, &ContainerSpec::default()).is_err());
        let m = constant_model(5, &[16, 4], 1.0);
        assert!(estimate_height(&m, &[0.0; 6], 1.0, &ContainerSpec::default()).is_err());
    }

    #[test]
    fn humidity_clamped_at_zero() {
        let m = constant_model(TOPPLE_DIM, &[16], -0.2);
        let e = estimate_humidity(&m, &[0.0; TOPPLE_DIM]).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.clamped);
        assert!(estimate_humidity(&m, &[0.0; 10]).is_err());
    }

    #[test]
    fn size_shape_on_zero_features() {
        let size = constant_model(FEATURE_DIM, &[16, 4], 3.0);
        let mut leaf = [0; ShapeClass::COUNT];
        leaf[2] = 1;
        let shape =
            ForestModel::from_trees(SHAPE_INPUT_DIM, vec![DecisionTree::leaf(leaf)]).unwrap();
        let fv = FeatureVector::from_slice(&vec![0.0; FEATURE_DIM]).unwrap();
        let (s, c) = estimate_size_shape(&size, &shape, &fv).unwrap();
        assert_eq!(s.value, 3.0);
        assert_eq!(c.value(), 2);
    }

    #[test]
    fn volume_follows_height() {
        let c = ContainerSpec::default();
        let p = PropertyEstimate::new(100.0, 40.0, 2.0, ShapeClass::new(1).unwrap(), &c);
        let expect = 40.0 * c.cross_section() / 1000.0;
        assert!((p.volume_ml - expect).abs() <= 1e-9 * expect);
    }
}
