//! Synthetic catalog, dataset generation, splits, metrics and the studies
//! built on them.

mod catalog;
mod dataset;
mod experiments;
mod metrics;
mod pipeline;
mod split;

pub use catalog::{generate_catalog, sugar_analog, CATALOG_SIZE, HOLDOUT_NAMES};
pub use dataset::{
    cell_seed, dataset_from_str, dataset_to_string, generate_dataset, load_dataset, save_dataset,
    simulate_record, Dataset, DatasetRecord, GenConfig, GroundTruth, DEFAULT_HEIGHTS,
    DEFAULT_REPEATS, SPILL_STEP_MM,
};
pub use experiments::{
    ablation_rate, evaluate_saved, holdout_split, humidity_experiment, humidity_records,
    humidity_scene, records_at_rate, run_holdout, run_seen, seen_test_set, shape_accuracy,
    AblationArm, AblationReport, HumidityConfig, HumidityRecord, SplitRun,
    HOLDOUT_EXTRA_PER_PARTICLE, SEEN_TEST_FRACTION,
};
pub use metrics::{
    class_metrics, regression_metrics, ClassMetrics, EvalReport, ParticleBreakdown,
    RegressionMetrics,
};
pub use pipeline::{
    evaluate, evaluate_models, height_input, predict, stage_features, train_models,
    train_size_shape, Models, PipelineConfig,
};
pub use split::{split_holdout, split_random, test_count, HOLDOUT_HEIGHT_RANGE};
