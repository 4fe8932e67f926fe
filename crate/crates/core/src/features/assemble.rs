use crate::{Error, Result};

pub const VIB_DIM: usize = 100;
pub const TOPPLE_DIM: usize = 200;
pub const FEATURE_DIM: usize = VIB_DIM + TOPPLE_DIM + 2;

/// Input record of the size and shape estimators.
///
/// Flattened order is `[vib | topple | est_mass | est_height]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub vib: Vec<f64>,
    pub topple: Vec<f64>,
    /// g.
    pub est_mass: f64,
    /// mm.
    pub est_height: f64,
}

pub fn assemble_features(
    vib: &[f64],
    topple: &[f64],
    est_mass: f64,
    est_height: f64,
) -> Result<FeatureVector> {
    if vib.len() != VIB_DIM || topple.len() != TOPPLE_DIM {
        return Err(Error::domain(format!(
            "feature parts have {} + {} values, expected {VIB_DIM} + {TOPPLE_DIM}",
            vib.len(),
            topple.len()
        )));
    }
    let fv = FeatureVector {
        vib: vib.to_vec(),
        topple: topple.to_vec(),
        est_mass,
        est_height,
    };
    if !fv.as_vec().iter().all(|v| v.is_finite()) {
        return Err(Error::domain("feature vector has non-finite values"));
    }
    Ok(fv)
}

impl FeatureVector {
    pub fn as_vec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(FEATURE_DIM);
        out.extend_from_slice(&self.vib);
        out.extend_from_slice(&self.topple);
        out.push(self.est_mass);
        out.push(self.est_height);
        out
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::domain(format!(
                "feature vector needs {FEATURE_DIM} values, got {}",
                values.len()
            )));
        }
        assemble_features(
            &values[..VIB_DIM],
            &values[VIB_DIM..VIB_DIM + TOPPLE_DIM],
            values[FEATURE_DIM - 2],
            values[FEATURE_DIM - 1],
        )
    }

    /// Comma-separated values in flattened order.
    pub fn to_csv(&self) -> String {
        self.as_vec()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::domain(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_slice(&values)
    }
}
