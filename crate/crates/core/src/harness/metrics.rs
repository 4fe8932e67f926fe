//! Error metrics and the evaluation report.

use std::fmt::Write as _;

use crate::domain::ShapeClass;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionMetrics {
    pub n: usize,
    pub mae: f64,
    /// Percent, over samples with non-zero truth.
    pub mape: f64,
    /// Samples left out of the MAPE because their truth is zero.
    pub zero_truths: usize,
}

pub fn regression_metrics(predictions: &[f64], truths: &[f64]) -> Result<RegressionMetrics> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(Error::domain(
            "metrics need equal, non-empty prediction and truth lists",
        ));
    }
    let n = predictions.len();
    let mae = predictions
        .iter()
        .zip(truths)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / n as f64;
    let (mut sum, mut counted) = (0.0, 0usize);
    for (p, t) in predictions.iter().zip(truths) {
        if *t != 0.0 {
            sum += (p - t).abs() / t.abs();
            counted += 1;
        }
    }
    let mape = if counted > 0 {
        100.0 * sum / counted as f64
    } else {
        0.0
    };
    Ok(RegressionMetrics {
        n,
        mae,
        mape,
        zero_truths: n - counted,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassMetrics {
    pub n: usize,
    pub accuracy: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: [[usize; ShapeClass::COUNT]; ShapeClass::COUNT],
    /// Accuracy of always guessing the most common test class.
    pub chance: f64,
}

pub fn class_metrics(predictions: &[ShapeClass], truths: &[ShapeClass]) -> Result<ClassMetrics> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(Error::domain(
            "metrics need equal, non-empty prediction and truth lists",
        ));
    }
    let mut confusion = [[0; ShapeClass::COUNT]; ShapeClass::COUNT];
    for (p, t) in predictions.iter().zip(truths) {
        confusion[t.index()][p.index()] += 1;
    }
    let n = predictions.len();
    let correct: usize = (0..ShapeClass::COUNT).map(|i| confusion[i][i]).sum();
    let largest = confusion
        .iter()
        .map(|row| row.iter().sum::<usize>())
        .max()
        .unwrap_or(0);
    Ok(ClassMetrics {
        n,
        accuracy: correct as f64 / n as f64,
        confusion,
        chance: largest as f64 / n as f64,
    })
}

/// Per-particle errors within a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleBreakdown {
    pub name: String,
    pub n: usize,
    pub mass_mae: f64,
    pub height_mae: f64,
    pub size_mae: f64,
    pub shape_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub title: String,
    /// `(quantity, metrics)` in a fixed order.
    pub regression: Vec<(String, RegressionMetrics)>,
    pub shape: Option<ClassMetrics>,
    pub per_particle: Vec<ParticleBreakdown>,
    /// Extra `key = value` lines, e.g. split sizes.
    pub info: Vec<(String, String)>,
    /// Wall time, seconds. Not written to report files.
    pub runtime_s: f64,
}

impl EvalReport {
    pub fn new(title: impl Into<String>) -> Self {
        EvalReport {
            title: title.into(),
            regression: Vec::new(),
            shape: None,
            per_particle: Vec::new(),
            info: Vec::new(),
            runtime_s: 0.0,
        }
    }

    pub fn metric(&self, quantity: &str) -> Option<&RegressionMetrics> {
        self.regression
            .iter()
            .find(|(q, _)| q == quantity)
            .map(|(_, m)| m)
    }

    /// Key-value text; identical inputs give identical bytes.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# report {}", self.title).unwrap();
        for (k, v) in &self.info {
            writeln!(s, "{k} = {v}").unwrap();
        }
        for (q, m) in &self.regression {
            writeln!(s, "{q}.n = {}", m.n).unwrap();
            writeln!(s, "{q}.mae = {:.6}", m.mae).unwrap();
            writeln!(s, "{q}.mape = {:.6}", m.mape).unwrap();
            if m.zero_truths > 0 {
                writeln!(s, "{q}.mape_excluded_zero = {}", m.zero_truths).unwrap();
            }
        }
        if let Some(c) = &self.shape {
            writeln!(s, "shape.n = {}", c.n).unwrap();
            writeln!(s, "shape.accuracy = {:.6}", c.accuracy).unwrap();
            writeln!(s, "shape.chance = {:.6}", c.chance).unwrap();
            for (i, row) in c.confusion.iter().enumerate() {
                let row: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(s, "shape.confusion.{i} = {}", row.join(" ")).unwrap();
            }
        }
        for p in &self.per_particle {
            writeln!(
                s,
                "particle.{} = n {} mass_mae {:.4} height_mae {:.4} size_mae {:.4} shape_acc {:.4}",
                p.name, p.n, p.mass_mae, p.height_mae, p.size_mae, p.shape_accuracy
            )
            .unwrap();
        }
        s
    }
}
