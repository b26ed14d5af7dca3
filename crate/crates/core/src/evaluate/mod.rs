//! Confusion matrices, the five classification metrics, repeated stratified
//! cross-validation and report export.

mod cv;
mod metrics;
mod report;

pub use cv::{cross_validate, stratified_folds, CvOutcome};
pub use metrics::{
    average_performance, confusion, confusion_named, metrics_from_confusion, ClassMetrics, ConfusionMatrix,
    MetricsReport, METRIC_NAMES,
};
pub use report::{
    anova_f, top_features, write_confusion_csv, write_metrics_csv, write_parallel_coordinates_csv, AVERAGE_ROW,
};
