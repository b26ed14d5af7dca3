use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Linear discriminant with a pooled, shrunk covariance:
/// `score_k(x) = w_k . x + b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lda {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl Lda {
    /// Rows are expected to be standardized, so the shrinkage target is the
    /// identity.
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], n_classes: usize, shrinkage: f64) -> Result<Self> {
        let n = rows.len();
        let dim = rows[0].len();
        let mut means = vec![vec![0.0; dim]; n_classes];
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
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for (r, &l) in rows.iter().zip(labels) {
            let d = DVector::from_iterator(dim, r.iter().zip(&means[l]).map(|(a, b)| a - b));
            cov.ger(1.0, &d, &d, 1.0);
        }
        let dof = n.saturating_sub(n_classes).max(1) as f64;
        cov /= dof;
        cov *= 1.0 - shrinkage;
        for i in 0..dim {
            cov[(i, i)] += shrinkage;
        }
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::data("pooled covariance is not positive definite"))?;
        let mut weights = Vec::with_capacity(n_classes);
        let mut biases = Vec::with_capacity(n_classes);
        for (m, &c) in means.iter().zip(&counts) {
            let mu = DVector::from_column_slice(m);
            let w = chol.solve(&mu);
            let prior = if c == 0 { f64::NEG_INFINITY } else { (c as f64 / n as f64).ln() };
            biases.push(-0.5 * w.dot(&mu) + prior);
            weights.push(w.iter().copied().collect());
        }
        Ok(Self { weights, biases })
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        super::argmax_first(
            self.weights
                .iter()
                .zip(&self.biases)
                .map(|(w, b)| w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + b),
        )
    }
}
