use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::{average_performance, confusion_named, metrics_from_confusion, ConfusionMatrix, MetricsReport};
use crate::classify::{fit, ClassifierKind};
use crate::error::{Error, Result};
use crate::signal::LabeledDataset;

/// Fold index per sample. Each class is shuffled with `seed`, the classes
/// are concatenated in class order and positions are dealt round-robin, so
/// every fold holds each class to within one sample and fold sizes differ by
/// at most one.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labels.len());
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        order.extend(members);
    }
    let mut assignment = vec![0; labels.len()];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % folds;
    }
    assignment
}

#[derive(Debug, Clone)]
pub struct CvOutcome {
    /// Mean over repeats of the metrics of each repeat's pooled confusion.
    pub report: MetricsReport,
    pub confusions: Vec<ConfusionMatrix>,
}

fn run_repeat(
    dataset: &LabeledDataset,
    kind: &ClassifierKind,
    folds: usize,
    seed: u64,
) -> Result<ConfusionMatrix> {
    let assignment = stratified_folds(dataset.labels(), dataset.n_classes(), folds, seed);
    let mut pooled = ConfusionMatrix::zeros(dataset.class_names().to_vec());
    for f in 0..folds {
        let train: Vec<usize> = (0..dataset.len()).filter(|&i| assignment[i] != f).collect();
        let test: Vec<usize> = (0..dataset.len()).filter(|&i| assignment[i] == f).collect();
        let model = fit(kind, &dataset.subset(&train), seed)?;
        let test_set = dataset.subset(&test);
        let pred = model.predict_all(test_set.features())?;
        pooled.merge(&confusion_named(test_set.labels(), &pred, dataset.class_names().to_vec())?)?;
    }
    Ok(pooled)
}

/// Stratified k-fold cross-validation repeated `repeats` times; repeat `r`
/// shuffles folds and seeds the classifier with `seed + r`. Repeats run on
/// separate threads; results do not depend on scheduling.
pub fn cross_validate(
    dataset: &LabeledDataset,
    kind: &ClassifierKind,
    folds: usize,
    repeats: usize,
    seed: u64,
) -> Result<CvOutcome> {
    if folds < 2 {
        return Err(Error::param(format!("need at least 2 folds, got {folds}")));
    }
    if repeats == 0 {
        return Err(Error::param("need at least one repeat"));
    }
    for (name, &count) in dataset.class_names().iter().zip(&dataset.class_counts()) {
        if count < folds {
            return Err(Error::data(format!(
                "class {name:?} has {count} samples, fewer than {folds} folds"
            )));
        }
    }
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(repeats);
    let mut slots: Vec<Option<Result<ConfusionMatrix>>> = (0..repeats).map(|_| None).collect();
    std::thread::scope(|s| {
        for (t, chunk) in slots.chunks_mut(repeats.div_ceil(threads)).enumerate() {
            let base = t * repeats.div_ceil(threads);
            s.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let r = (base + i) as u64;
                    *slot = Some(run_repeat(dataset, kind, folds, seed.wrapping_add(r)));
                }
            });
        }
    });
    let confusions = slots
        .into_iter()
        .map(|s| s.expect("every repeat ran"))
        .collect::<Result<Vec<_>>>()?;
    let reports = confusions
        .iter()
        .map(metrics_from_confusion)
        .collect::<Result<Vec<_>>>()?;
    let mut report = average_performance(&reports)?;
    report.folds = folds;
    report.repeats = repeats;
    Ok(CvOutcome { report, confusions })
}
