//! The staged estimator pipeline: mass, then height, then size and shape.

use std::path::Path;
use std::time::Instant;

use super::dataset::DatasetRecord;
use super::metrics::{class_metrics, regression_metrics, EvalReport, ParticleBreakdown};
use crate::domain::ContainerSpec;
use crate::estimators::{
    estimate_height, estimate_size_shape, forest_train, load_forest, load_mlp, mlp_train,
    save_forest, save_mlp, shape_inputs, ForestConfig, ForestModel, MlpModel, PropertyEstimate,
    TrainConfig,
};
use crate::features::{FeatureVector, FEATURE_DIM};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub height_dims: Vec<usize>,
    pub size_dims: Vec<usize>,
    pub height_train: TrainConfig,
    pub size_train: TrainConfig,
    pub forest: ForestConfig,
    /// Feed ground-truth mass and height to the size/shape stage instead
    /// of the estimates.
    pub oracle_features: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            height_dims: vec![7, 16, 4, 1],
            size_dims: vec![FEATURE_DIM, 16, 4, 1],
            height_train: TrainConfig {
                learning_rate: 3e-3,
                epochs: 4000,
                ..TrainConfig::default()
            },
            size_train: TrainConfig::default(),
            forest: ForestConfig::default(),
            oracle_features: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Models {
    pub height: MlpModel,
    pub size: MlpModel,
    pub shape: ForestModel,
}

const HEIGHT_FILE: &str = "height.mlp";
const SIZE_FILE: &str = "size.mlp";
const SHAPE_FILE: &str = "shape.forest";

impl Models {
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        save_mlp(&self.height, &dir.join(HEIGHT_FILE))?;
        save_mlp(&self.size, &dir.join(SIZE_FILE))?;
        save_forest(&self.shape, &dir.join(SHAPE_FILE))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        Ok(Models {
            height: load_mlp(&dir.join(HEIGHT_FILE))?,
            size: load_mlp(&dir.join(SIZE_FILE))?,
            shape: load_forest(&dir.join(SHAPE_FILE))?,
        })
    }
}

/// `[6 torques | estimated mass]`.
pub fn height_input(r: &DatasetRecord) -> Vec<f64> {
    let mut x = r.torques.to_vec();
    x.push(r.features.est_mass);
    x
}

/// The record's feature vector with the height slot filled by the height
/// model (or with ground truth in oracle mode).
pub fn stage_features(
    r: &DatasetRecord,
    height_model: &MlpModel,
    container: &ContainerSpec,
    oracle: bool,
) -> Result<FeatureVector> {
    let mut fv = r.features.clone();
    if oracle {
        fv.est_mass = r.truth.mass_g;
        fv.est_height = r.truth.height_mm;
    } else {
        let torques = r.torques;
        fv.est_height = estimate_height(height_model, &torques, fv.est_mass, container)?.value;
    }
    Ok(fv)
}

/// Trains the three learned stages on `train`.
pub fn train_models(
    train: &[DatasetRecord],
    config: &PipelineConfig,
    container: &ContainerSpec,
    master_seed: u64,
) -> Result<Models> {
    if train.is_empty() {
        return Err(Error::domain("no training records"));
    }
    let xs: Vec<Vec<f64>> = train.iter().map(height_input).collect();
    let ys: Vec<Vec<f64>> = train.iter().map(|r| vec![r.truth.height_mm]).collect();
    let height = mlp_train(
        &xs,
        &ys,
        &config.height_dims,
        &config.height_train,
        seed::derive(master_seed, &[seed::tag("height-model")]),
    )?;

    let fvs: Vec<Vec<f64>> = train
        .iter()
        .map(|r| stage_features(r, &height, container, config.oracle_features).map(|f| f.as_vec()))
        .collect::<Result<_>>()?;
    train_size_shape(&fvs, train, height, config, master_seed)
}

/// Trains the size regressor and shape classifier on prepared features.
pub fn train_size_shape(
    fvs: &[Vec<f64>],
    train: &[DatasetRecord],
    height: MlpModel,
    config: &PipelineConfig,
    master_seed: u64,
) -> Result<Models> {
    let ys: Vec<Vec<f64>> = train.iter().map(|r| vec![r.truth.diameter_mm]).collect();
    let size = mlp_train(
        fvs,
        &ys,
        &config.size_dims,
        &config.size_train,
        seed::derive(master_seed, &[seed::tag("size-model")]),
    )?;
    let classes: Vec<_> = train.iter().map(|r| r.truth.shape).collect();
    let shape_xs: Vec<Vec<f64>> = fvs
        .iter()
        .map(|f| FeatureVector::from_slice(f).map(|fv| shape_inputs(&fv)))
        .collect::<Result<_>>()?;
    let shape = forest_train(
        &shape_xs,
        &classes,
        &config.forest,
        seed::derive(master_seed, &[seed::tag("shape-model")]),
    )?;
    Ok(Models {
        height,
        size,
        shape,
    })
}

/// Runs the full pipeline on one record.
pub fn predict(
    models: &Models,
    r: &DatasetRecord,
    container: &ContainerSpec,
    oracle: bool,
) -> Result<PropertyEstimate> {
    let fv = stage_features(r, &models.height, container, oracle)?;
    let height = if oracle {
        estimate_height(&models.height, &r.torques, r.features.est_mass, container)?.value
    } else {
        fv.est_height
    };
    let (size, shape) = estimate_size_shape(&models.size, &models.shape, &fv)?;
    Ok(PropertyEstimate::new(
        r.features.est_mass,
        height,
        size.value,
        shape,
        container,
    ))
}

/// Scores the pipeline on `test`.
pub fn evaluate_models(
    title: &str,
    models: &Models,
    test: &[DatasetRecord],
    container: &ContainerSpec,
    oracle: bool,
) -> Result<EvalReport> {
    let start = Instant::now();
    let preds: Vec<PropertyEstimate> = test
        .iter()
        .map(|r| predict(models, r, container, oracle))
        .collect::<Result<_>>()?;
    let mut report = evaluate(title, &preds, test, container)?;
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Metrics of `predictions` against the records' ground truth.
pub fn evaluate(
    title: &str,
    predictions: &[PropertyEstimate],
    truths: &[DatasetRecord],
    container: &ContainerSpec,
) -> Result<EvalReport> {
    if predictions.is_empty() || predictions.len() != truths.len() {
        return Err(Error::domain(
            "evaluation needs equal, non-empty prediction and truth lists",
        ));
    }
    let col = |f: &dyn Fn(&PropertyEstimate) -> f64| predictions.iter().map(f).collect::<Vec<_>>();
    let truth = |f: &dyn Fn(&DatasetRecord) -> f64| truths.iter().map(f).collect::<Vec<_>>();
    let mut report = EvalReport::new(title);
    report.regression.push((
        "mass_g".into(),
        regression_metrics(&col(&|p| p.mass_g), &truth(&|r| r.truth.mass_g))?,
    ));
    report.regression.push((
        "height_mm".into(),
        regression_metrics(&col(&|p| p.height_mm), &truth(&|r| r.truth.height_mm))?,
    ));
    report.regression.push((
        "volume_ml".into(),
        regression_metrics(
            &col(&|p| p.volume_ml),
            &truth(&|r| container.volume_ml(r.truth.height_mm)),
        )?,
    ));
    report.regression.push((
        "size_mm".into(),
        regression_metrics(&col(&|p| p.size_mm), &truth(&|r| r.truth.diameter_mm))?,
    ));
    let pc: Vec<_> = predictions.iter().map(|p| p.shape).collect();
    let tc: Vec<_> = truths.iter().map(|r| r.truth.shape).collect();
    report.shape = Some(class_metrics(&pc, &tc)?);

    let mut names: Vec<&str> = truths.iter().map(|r| r.particle.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    for name in names {
        let idx: Vec<usize> = (0..truths.len())
            .filter(|&i| truths[i].particle.name == name)
            .collect();
        let mae = |f: &dyn Fn(usize) -> f64| {
            idx.iter().map(|&i| f(i).abs()).sum::<f64>() / idx.len() as f64
        };
        report.per_particle.push(ParticleBreakdown {
            name: name.to_string(),
            n: idx.len(),
            mass_mae: mae(&|i| predictions[i].mass_g - truths[i].truth.mass_g),
            height_mae: mae(&|i| predictions[i].height_mm - truths[i].truth.height_mm),
            size_mae: mae(&|i| predictions[i].size_mm - truths[i].truth.diameter_mm),
            shape_accuracy: idx
                .iter()
                .filter(|&&i| predictions[i].shape == truths[i].truth.shape)
                .count() as f64
                / idx.len() as f64,
        });
    }
    Ok(report)
}
