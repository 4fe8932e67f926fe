//! Feature extraction: the principal vibration signal and its local
//! variability features, the topple envelopes of the slow-rotation trace,
//! and assembly of the full feature vector.

mod assemble;
mod downsample;
mod envelope;
mod vibration;

pub use assemble::{assemble_features, FeatureVector, FEATURE_DIM, TOPPLE_DIM, VIB_DIM};
pub use downsample::{decimation_step, downsample_field, downsample_signal};
pub use envelope::{envelopes, Curve, EnvelopeConfig, Envelopes};
pub use vibration::{
    principal_vibration_signal, vib_features, vib_features_relaxed, VibrationSignal, CONTACT_TOP_K,
    MAX_LAG,
};
