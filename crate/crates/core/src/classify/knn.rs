/// Stored training set; Euclidean distance, majority vote over the `k`
/// closest rows (earlier rows win distance ties, smaller classes win vote ties).
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub k: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl Knn {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let k = self.k.min(dist.len());
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in &dist[..k] {
            votes[self.labels[i]] += 1;
        }
        super::argmax_first(votes.iter().map(|&v| v as f64))
    }
}
