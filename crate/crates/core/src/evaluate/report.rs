use std::path::Path;

use super::metrics::{ConfusionMatrix, MetricsReport, METRIC_NAMES};
use crate::error::{Error, Result};
use crate::io::{csv_writer, finish, fmt_real};
use crate::signal::LabeledDataset;

/// Label of the row holding the mean over all classifiers.
pub const AVERAGE_ROW: &str = "Average Performance Score";

/// One-way ANOVA F statistic per feature. Features with no within-class
/// spread score infinity when the class means differ and 0 otherwise.
pub fn anova_f(dataset: &LabeledDataset) -> Vec<f64> {
    let n = dataset.len();
    let k = dataset.n_classes();
    let counts = dataset.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count();
    (0..dataset.dim())
        .map(|j| {
            let mut sums = vec![0.0; k];
            for (r, &l) in dataset.features().iter().zip(dataset.labels()) {
                sums[l] += r[j];
            }
            let grand = sums.iter().sum::<f64>() / n as f64;
            let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 }).collect();
            let between: f64 = means.iter().zip(&counts).map(|(m, &c)| c as f64 * (m - grand).powi(2)).sum();
            let within: f64 = dataset
                .features()
                .iter()
                .zip(dataset.labels())
                .map(|(r, &l)| (r[j] - means[l]).powi(2))
                .sum();
            let df_b = present.saturating_sub(1).max(1) as f64;
            let df_w = n.saturating_sub(present).max(1) as f64;
            if within > 0.0 {
                (between / df_b) / (within / df_w)
            } else if between > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect()
}

/// Indices of the `n` highest-F features, best first; ties keep feature order.
pub fn top_features(dataset: &LabeledDataset, n: usize) -> Vec<usize> {
    let f = anova_f(dataset);
    let mut idx: Vec<usize> = (0..f.len()).collect();
    idx.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    idx.truncate(n);
    idx
}

/// Classifier x metric table with a final row averaging every column.
pub fn write_metrics_csv(rows: &[(String, MetricsReport)], average: &MetricsReport, path: &Path) -> Result<()> {
    let mut w = csv_writer();
    let mut header = vec!["classifier"];
    header.extend(METRIC_NAMES);
    header.extend(["overall_accuracy", "folds", "repeats", "averaging"]);
    let to_err = |e: csv::Error| Error::csv(path, e);
    w.write_record(&header).map_err(to_err)?;
    for (name, r) in rows.iter().map(|(n, r)| (n.as_str(), r)).chain([(AVERAGE_ROW, average)]) {
        let mut rec = vec![name.to_string()];
        rec.extend(r.macro_values().iter().map(|&v| fmt_real(v)));
        rec.push(fmt_real(r.overall_accuracy));
        rec.push(r.folds.to_string());
        rec.push(r.repeats.to_string());
        rec.push("macro".to_string());
        w.write_record(&rec).map_err(to_err)?;
    }
    finish(path, w)
}

/// Counts with true classes down the rows and predicted classes across.
pub fn write_confusion_csv(cm: &ConfusionMatrix, path: &Path) -> Result<()> {
    let mut w = csv_writer();
    let to_err = |e: csv::Error| Error::csv(path, e);
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(cm.class_names.iter().cloned());
    w.write_record(&header).map_err(to_err)?;
    for (name, row) in cm.class_names.iter().zip(&cm.counts) {
        let mut rec = vec![name.clone()];
        rec.extend(row.iter().map(u64::to_string));
        w.write_record(&rec).map_err(to_err)?;
    }
    finish(path, w)
}

/// Per-sample values of the top `n` features by ANOVA F, plus the class.
pub fn write_parallel_coordinates_csv(dataset: &LabeledDataset, n: usize, path: &Path) -> Result<()> {
    let top = top_features(dataset, n);
    let mut w = csv_writer();
    let to_err = |e: csv::Error| Error::csv(path, e);
    let mut header: Vec<String> = top.iter().map(|&j| dataset.feature_names()[j].clone()).collect();
    header.push("class".to_string());
    w.write_record(&header).map_err(to_err)?;
    for (r, &l) in dataset.features().iter().zip(dataset.labels()) {
        let mut rec: Vec<String> = top.iter().map(|&j| fmt_real(r[j])).collect();
        rec.push(dataset.class_names()[l].clone());
        w.write_record(&rec).map_err(to_err)?;
    }
    finish(path, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{average_performance, metrics_from_confusion};

    #[test]
    fn anova_matches_hand_computation() {
        // feature 0: groups {1,2,3} and {5,6,7}; feature 1 constant
        let rows = [1.0, 2.0, 3.0, 5.0, 6.0, 7.0].iter().map(|&v| vec![v, 4.0]).collect();
        let ds = LabeledDataset::new(
            rows,
            vec![0, 0, 0, 1, 1, 1],
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let f = anova_f(&ds);
        // between = 6 * 2^2 = 24 with 1 dof; within = 4 with 4 dof
        assert!((f[0] - 24.0).abs() < 1e-12);
        assert_eq!(f[1], 0.0);
        assert_eq!(top_features(&ds, 1), vec![0]);
    }

    #[test]
    fn metrics_csv_layout() {
        let cm = ConfusionMatrix {
            counts: vec![vec![3, 1], vec![0, 4]],
            class_names: vec!["normal".into(), "faulty".into()],
        };
        let mut r = metrics_from_confusion(&cm).unwrap();
        r.folds = 5;
        r.repeats = 10;
        let rows = vec![("svm_linear".to_string(), r.clone()), ("knn".to_string(), r.clone())];
        let avg = average_performance(&[r.clone(), r]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        write_metrics_csv(&rows, &avg, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(
            lines[0],
            "classifier,accuracy,sensitivity,specificity,precision,f_score,overall_accuracy,folds,repeats,averaging"
        );
        assert!(lines[3].starts_with("Average Performance Score,0.875,"));
        assert!(lines[3].ends_with(",5,10,macro"));

        let p = dir.path().join("c.csv");
        write_confusion_csv(&cm, &p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "true\\predicted,normal,faulty\nnormal,3,1\nfaulty,0,4\n");
    }
}
