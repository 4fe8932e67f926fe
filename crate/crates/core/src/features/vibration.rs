use crate::granusim::MarkerField;
use crate::{Error, Result};

/// Markers averaged into the principal signal.
pub const CONTACT_TOP_K: usize = 30;
/// Largest lag of the variability features.
pub const MAX_LAG: usize = 50;

/// Averaged displacement magnitude of the contact markers over time.
#[derive(Debug, Clone, PartialEq)]
pub struct VibrationSignal {
    /// mm.
    pub values: Vec<f64>,
    /// Hz.
    pub sample_rate: f64,
}

/// Picks the `k` markers with the longest displacement path and averages
/// their per-frame displacement magnitude.
pub fn principal_vibration_signal(field: &MarkerField, k: usize) -> Result<VibrationSignal> {
    let markers = field.marker_count();
    if k == 0 || markers < k {
        return Err(Error::domain(format!(
            "need {k} markers, field has {markers}"
        )));
    }
    let mut path = vec![0.0; markers];
    let mut prev: Option<&[[f64; 2]]> = None;
    for frame in field.frames() {
        if let Some(p) = prev {
            for (acc, (a, b)) in path.iter_mut().zip(p.iter().zip(frame)) {
                *acc += (b[0] - a[0]).hypot(b[1] - a[1]);
            }
        }
        prev = Some(frame);
    }
    let mut order: Vec<usize> = (0..markers).collect();
    order.sort_by(|&a, &b| path[b].total_cmp(&path[a]).then(a.cmp(&b)));
    let top = &order[..k];

    let values = field
        .frames()
        .map(|frame| {
            top.iter()
                .map(|&m| frame[m][0].hypot(frame[m][1]))
                .sum::<f64>()
                / k as f64
        })
        .collect();
    Ok(VibrationSignal {
        values,
        sample_rate: field.sample_rate,
    })
}

/// `[v1_1..v1_50, v2_1..v2_50]` for a signal with at least 101 samples.
pub fn vib_features(s: &VibrationSignal) -> Result<Vec<f64>> {
    if s.values.len() < 2 * MAX_LAG + 1 {
        return Err(Error::domain(format!(
            "vibration signal has {} samples, need at least {}",
            s.values.len(),
            2 * MAX_LAG + 1
        )));
    }
    Ok(vib_features_relaxed(&s.values))
}

/// Variability features for any length; lags the signal cannot support
/// contribute empty sums (zero).
///
/// `v1_a = Σ_t |s(t) − s(t−a)|` and `v2_a = Σ_t |2s(t) − s(t−a) − s(t+a)|`.
pub fn vib_features_relaxed(s: &[f64]) -> Vec<f64> {
    let n = s.len();
    let mut out = vec![0.0; 2 * MAX_LAG];
    for a in 1..=MAX_LAG {
        let mut v1 = 0.0;
        for t in a..n {
            v1 += (s[t] - s[t - a]).abs();
        }
        let mut v2 = 0.0;
        for t in a..n.saturating_sub(a) {
            v2 += (2.0 * s[t] - s[t - a] - s[t + a]).abs();
        }
        out[a - 1] = v1;
        out[MAX_LAG + a - 1] = v2;
    }
    out
}
