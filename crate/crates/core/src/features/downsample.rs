//! Rate reduction by plain decimation. No anti-alias filter is applied, so
//! the result carries the aliasing a slow camera would see.

use super::VibrationSignal;
use crate::granusim::MarkerField;
use crate::{Error, Result};

/// Frames to advance per kept frame: `⌊source / target⌋`.
pub fn decimation_step(source_rate: f64, target_rate: f64) -> Result<usize> {
    if !(target_rate > 0.0) || !(source_rate > 0.0) {
        return Err(Error::domain("sample rates must be positive"));
    }
    if target_rate > source_rate {
        return Err(Error::domain(format!(
            "cannot upsample from {source_rate} Hz to {target_rate} Hz"
        )));
    }
    Ok((source_rate / target_rate).floor() as usize)
}

pub fn downsample_field(field: &MarkerField, target_rate: f64) -> Result<MarkerField> {
    let step = decimation_step(field.sample_rate, target_rate)?;
    if step == 1 {
        return Ok(field.clone());
    }
    Ok(field.decimate(step, field.sample_rate / step as f64))
}

pub fn downsample_signal(signal: &VibrationSignal, target_rate: f64) -> Result<VibrationSignal> {
    let step = decimation_step(signal.sample_rate, target_rate)?;
    if step == 1 {
        return Ok(signal.clone());
    }
    Ok(VibrationSignal {
        values: signal.values.iter().step_by(step).copied().collect(),
        sample_rate: signal.sample_rate / step as f64,
    })
}
