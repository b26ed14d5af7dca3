use std::f64::consts::PI;

/// Gaussian naive Bayes with empirical priors.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayes {
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
}

impl NaiveBayes {
    /// `var_floor` is relative: `var_floor * max feature variance` is added
    /// to every per-class variance.
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], n_classes: usize, var_floor: f64) -> Self {
        let dim = rows[0].len();
        let n = rows.len() as f64;
        let mut overall_max = 0.0f64;
        for j in 0..dim {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let v = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
            overall_max = overall_max.max(v);
        }
        let eps = (var_floor * overall_max).max(f64::MIN_POSITIVE);
        let mut means = vec![vec![0.0; dim]; n_classes];
        let mut vars = vec![vec![0.0; dim]; n_classes];
        let mut counts = vec![0usize; n_classes];
        for (r, &l) in rows.iter().zip(labels) {
            counts[l] += 1;
            for (m, v) in means[l].iter_mut().zip(r) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= c.max(1) as f64);
        }
        for (r, &l) in rows.iter().zip(labels) {
            for j in 0..dim {
                vars[l][j] += (r[j] - means[l][j]).powi(2);
            }
        }
        for (v, &c) in vars.iter_mut().zip(&counts) {
            v.iter_mut().for_each(|x| *x = *x / c.max(1) as f64 + eps);
        }
        let log_priors = counts
            .iter()
            .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64 / n).ln() })
            .collect();
        Self {
            means,
            vars,
            log_priors,
        }
    }

    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        self.means
            .iter()
            .zip(&self.vars)
            .zip(&self.log_priors)
            .map(|((m, v), lp)| {
                lp + x
                    .iter()
                    .zip(m.iter().zip(v))
                    .map(|(xi, (mi, vi))| -0.5 * (2.0 * PI * vi).ln() - (xi - mi).powi(2) / (2.0 * vi))
                    .sum::<f64>()
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        super::argmax_first(self.log_joint(x))
    }
}
