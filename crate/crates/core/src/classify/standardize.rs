/// Per-feature z-scoring fitted on training rows. Constant features keep
/// mean 0 and deviation 1, i.e. pass through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Indices of features that had zero variance at fit time.
    pub constant: Vec<usize>,
}

impl Standardization {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
            constant: Vec::new(),
        }
    }

    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        let mut std = vec![1.0; dim];
        let mut constant = Vec::new();
        for j in 0..dim {
            let m = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
            if var > 0.0 && var.sqrt() > 0.0 {
                mean[j] = m;
                std[j] = var.sqrt();
            } else {
                constant.push(j);
            }
        }
        Self {
            mean,
            std,
            constant,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}
