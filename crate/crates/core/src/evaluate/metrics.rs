use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn zeros(class_names: Vec<String>) -> Self {
        let k = class_names.len();
        Self {
            counts: vec![vec![0; k]; k],
            class_names,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    /// Adds another matrix over the same classes.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.class_names != self.class_names {
            return Err(Error::data("cannot merge confusion matrices over different classes"));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

/// Tallies `(y_true, y_pred)` pairs into a `k x k` matrix with classes
/// named by index.
pub fn confusion(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ConfusionMatrix> {
    confusion_named(y_true, y_pred, (0..k).map(|i| i.to_string()).collect())
}

pub fn confusion_named(y_true: &[usize], y_pred: &[usize], class_names: Vec<String>) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let k = class_names.len();
    let mut cm = ConfusionMatrix::zeros(class_names);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= k || p >= k {
            return Err(Error::param(format!("class index {} out of range for {k} classes", t.max(p))));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// One-vs-rest values for one class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f_score: f64,
}

impl ClassMetrics {
    pub fn values(&self) -> [f64; 5] {
        [self.accuracy, self.sensitivity, self.specificity, self.precision, self.f_score]
    }

    fn from_values(v: [f64; 5]) -> Self {
        Self {
            accuracy: v[0],
            sensitivity: v[1],
            specificity: v[2],
            precision: v[3],
            f_score: v[4],
        }
    }
}

pub const METRIC_NAMES: [&str; 5] = ["accuracy", "sensitivity", "specificity", "precision", "f_score"];

/// Macro-averaged metrics plus the overall accuracy `trace / total`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub overall_accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f_score: f64,
    /// (class name, metrics), in class order.
    pub per_class: Vec<(String, ClassMetrics)>,
    pub folds: usize,
    pub repeats: usize,
    /// "class:metric" cells whose denominator was zero and were set to 0.
    pub zero_division: Vec<String>,
}

impl MetricsReport {
    pub fn macro_values(&self) -> [f64; 5] {
        [self.accuracy, self.sensitivity, self.specificity, self.precision, self.f_score]
    }
}

fn ratio(num: f64, den: f64, flag: &str, flags: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        flags.push(flag.to_string());
        0.0
    } else {
        num / den
    }
}

pub fn metrics_from_confusion(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 || cm.n_classes() == 0 {
        return Err(Error::data("confusion matrix is empty"));
    }
    let k = cm.n_classes();
    let n = total as f64;
    let mut flags = Vec::new();
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let tp = cm.counts[c][c];
        let row: u64 = cm.counts[c].iter().sum();
        let col: u64 = cm.counts.iter().map(|r| r[c]).sum();
        let (fn_, fp) = (row - tp, col - tp);
        let tn = total - tp - fn_ - fp;
        let name = &cm.class_names[c];
        let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
        let sensitivity = ratio(tp, tp + fn_, &format!("{name}:sensitivity"), &mut flags);
        let specificity = ratio(tn, tn + fp, &format!("{name}:specificity"), &mut flags);
        let precision = ratio(tp, tp + fp, &format!("{name}:precision"), &mut flags);
        let f_score = ratio(
            2.0 * precision * sensitivity,
            precision + sensitivity,
            &format!("{name}:f_score"),
            &mut flags,
        );
        per_class.push((
            name.clone(),
            ClassMetrics {
                accuracy: (tp + tn) / n,
                sensitivity,
                specificity,
                precision,
                f_score,
            },
        ));
    }
    let mut mean = [0.0; 5];
    for (_, m) in &per_class {
        for (acc, v) in mean.iter_mut().zip(m.values()) {
            *acc += v / k as f64;
        }
    }
    Ok(MetricsReport {
        accuracy: mean[0],
        overall_accuracy: cm.trace() as f64 / n,
        sensitivity: mean[1],
        specificity: mean[2],
        precision: mean[3],
        f_score: mean[4],
        per_class,
        folds: 0,
        repeats: 0,
        zero_division: flags,
    })
}

/// Arithmetic mean of every metric, per class included. Zero-division flags
/// are unioned.
pub fn average_performance(reports: &[MetricsReport]) -> Result<MetricsReport> {
    let first = reports.first().ok_or_else(|| Error::param("no reports to average"))?;
    let names: Vec<&String> = first.per_class.iter().map(|(n, _)| n).collect();
    for r in reports {
        if r.per_class.iter().map(|(n, _)| n).collect::<Vec<_>>() != names {
            return Err(Error::data("reports cover different classes"));
        }
    }
    let n = reports.len() as f64;
    let avg = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    let per_class = (0..names.len())
        .map(|c| {
            let mut v = [0.0; 5];
            for r in reports {
                for (acc, x) in v.iter_mut().zip(r.per_class[c].1.values()) {
                    *acc += x;
                }
            }
            (names[c].clone(), ClassMetrics::from_values(v.map(|x| x / n)))
        })
        .collect();
    let mut flags: Vec<String> = reports.iter().flat_map(|r| r.zero_division.iter().cloned()).collect();
    flags.sort();
    flags.dedup();
    Ok(MetricsReport {
        accuracy: avg(&|r| r.accuracy),
        overall_accuracy: avg(&|r| r.overall_accuracy),
        sensitivity: avg(&|r| r.sensitivity),
        specificity: avg(&|r| r.specificity),
        precision: avg(&|r| r.precision),
        f_score: avg(&|r| r.f_score),
        per_class,
        folds: first.folds,
        repeats: first.repeats,
        zero_division: flags,
    })
}
