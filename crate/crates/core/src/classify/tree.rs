use rand::seq::index::sample;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf { class: usize },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART tree with Gini impurity; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    /// 0 means unlimited.
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; 0 means all.
    pub max_features: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

struct Builder<'a, R> {
    rows: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> Builder<'_, R> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &i in idx {
            c[self.labels[i]] += 1;
        }
        c
    }

    /// Best (weighted child impurity, feature, threshold) over `features`.
    /// Splits with zero gain are accepted so an impure node always splits
    /// when its rows are separable on some feature.
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(f64, usize, f64)> {
        let n = idx.len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = idx.to_vec();
        for &f in features {
            sorted.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = self.counts(idx);
            for pos in 0..n - 1 {
                let i = sorted[pos];
                left[self.labels[i]] += 1;
                right[self.labels[i]] -= 1;
                let (a, b) = (self.rows[i][f], self.rows[sorted[pos + 1]][f]);
                let n_left = pos + 1;
                if a == b || n_left < self.params.min_leaf || n - n_left < self.params.min_leaf {
                    continue;
                }
                let score = (n_left as f64 * gini(&left, n_left) + (n - n_left) as f64 * gini(&right, n - n_left)) / n as f64;
                if best.is_none_or(|(s, _, _)| score < s) {
                    let mut thr = a + (b - a) / 2.0;
                    if thr >= b {
                        thr = a;
                    }
                    best = Some((score, f, thr));
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            class: super::argmax_first(counts.iter().map(|&c| c as f64)),
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_ok = self.params.max_depth == 0 || depth < self.params.max_depth;
        if pure || !depth_ok || idx.len() < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let dim = self.rows[0].len();
        let m = self.params.max_features;
        let split = if m == 0 || m >= dim {
            self.best_split(&idx, &(0..dim).collect::<Vec<_>>())
        } else {
            let mut feats = sample(self.rng, dim, m).into_vec();
            feats.sort_unstable();
            self.best_split(&idx, &feats)
                .or_else(|| self.best_split(&idx, &(0..dim).collect::<Vec<_>>()))
        };
        let Some((_, feature, threshold)) = split else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

impl Tree {
    pub fn fit<R: Rng>(
        rows: &[Vec<f64>],
        labels: &[usize],
        idx: Vec<usize>,
        n_classes: usize,
        params: TreeParams,
        rng: &mut R,
    ) -> Self {
        let mut b = Builder {
            rows,
            labels,
            n_classes,
            params,
            rng,
            nodes: Vec::new(),
        };
        b.grow(idx, 0);
        Self { nodes: b.nodes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// Bootstrap-aggregated trees with per-split feature subsampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub n_classes: usize,
}

impl Forest {
    pub fn fit<R: Rng>(
        rows: &[Vec<f64>],
        labels: &[usize],
        n_classes: usize,
        n_trees: usize,
        params: TreeParams,
        rng: &mut R,
    ) -> Self {
        let n = rows.len();
        let trees = (0..n_trees)
            .map(|_| {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                Tree::fit(rows, labels, idx, n_classes, params, rng)
            })
            .collect();
        Self { trees, n_classes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1.0;
        }
        super::argmax_first(votes)
    }
}
