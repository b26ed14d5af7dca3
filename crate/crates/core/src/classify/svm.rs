use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Soft-margin linear machine separating `positive` (score >= 0) from
/// `negative`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMachine {
    pub positive: usize,
    pub negative: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearMachine {
    pub fn score(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// Stochastic subgradient descent on the regularised hinge loss with
    /// `lambda = 1 / (c n)`, a per-epoch shuffled order and the iterate
    /// averaged over the second half of training.
    pub fn fit(rows: &[&[f64]], targets: &[f64], positive: usize, negative: usize, c: f64, epochs: usize, seed: u64) -> Self {
        let n = rows.len();
        let dim = rows[0].len();
        let lambda = 1.0 / (c * n as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = vec![0.0; dim + 1];
        let mut avg = vec![0.0; dim + 1];
        let mut n_avg = 0usize;
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0usize;
        let radius = 1.0 / lambda.sqrt();
        for epoch in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let x = rows[i];
                let y = targets[i];
                let margin = y * (w[..dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[dim]);
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (wj, xj) in w[..dim].iter_mut().zip(x) {
                        *wj += eta * y * xj;
                    }
                    w[dim] += eta * y;
                }
                let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > radius {
                    let s = radius / norm;
                    w.iter_mut().for_each(|v| *v *= s);
                }
                if 2 * epoch >= epochs {
                    avg.iter_mut().zip(&w).for_each(|(a, v)| *a += v);
                    n_avg += 1;
                }
            }
        }
        if n_avg > 0 {
            avg.iter_mut().for_each(|v| *v /= n_avg as f64);
        } else {
            avg = w;
        }
        let bias = avg[dim];
        avg.truncate(dim);
        Self {
            positive,
            negative,
            weights: avg,
            bias,
        }
    }
}

/// Binary machine for two classes, pairwise voting otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    pub machines: Vec<LinearMachine>,
    pub n_classes: usize,
}

impl Svm {
    pub fn fit(rows: &[Vec<f64>], labels: &[usize], n_classes: usize, c: f64, epochs: usize, seed: u64) -> Self {
        let mut machines = Vec::new();
        for a in 0..n_classes {
            for b in a + 1..n_classes {
                let idx: Vec<usize> = (0..rows.len()).filter(|&i| labels[i] == a || labels[i] == b).collect();
                if idx.is_empty() {
                    continue;
                }
                let sub: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_slice()).collect();
                let targets: Vec<f64> = idx.iter().map(|&i| if labels[i] == a { 1.0 } else { -1.0 }).collect();
                let pair_seed = seed.wrapping_add(machines.len() as u64);
                machines.push(LinearMachine::fit(&sub, &targets, a, b, c, epochs, pair_seed));
            }
        }
        Self { machines, n_classes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0.0; self.n_classes];
        for m in &self.machines {
            if m.score(x) >= 0.0 {
                votes[m.positive] += 1.0;
            } else {
                votes[m.negative] += 1.0;
            }
        }
        super::argmax_first(votes)
    }
}
