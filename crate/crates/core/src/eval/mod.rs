//! k-NN evaluation, cross-validation, planted data and experiment runs.

mod cv;
mod experiment;
mod knn;
mod report;
mod synth;

pub use cv::{cross_validate, mean_std, stratified_folds, CvOptions, CvScore, HoldoutSplit};
pub use experiment::{
    order_trials, prepare_data, run_experiment, run_prepared, run_selector, Accuracy, AlgorithmRow, DataSource,
    ExperimentConfig, ExperimentReport, GroupSpec, OrderTrials, PreparedData, Recovery, KNOWN_ALGORITHMS,
};
pub use knn::{knn_predict, subset_rows};
pub use report::{median, report_csv, AlgorithmSummary, ReportFile, ReportSet};
pub use synth::{planted_dataset, PlantedDataset, SynthConfig};
