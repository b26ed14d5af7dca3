use super::{FilterBankSet, ScatteringResult};
use crate::error::{Error, Result};

/// One route through the network. Ordering is by (order, j1, j2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScatteringPath {
    pub order: u8,
    pub j1: Option<usize>,
    pub j2: Option<usize>,
}

impl ScatteringPath {
    pub const ZERO: Self = Self {
        order: 0,
        j1: None,
        j2: None,
    };

    pub fn first(j1: usize) -> Self {
        Self {
            order: 1,
            j1: Some(j1),
            j2: None,
        }
    }

    pub fn second(j1: usize, j2: usize) -> Self {
        Self {
            order: 2,
            j1: Some(j1),
            j2: Some(j2),
        }
    }

    /// "0", "1:j1" or "2:j1:j2".
    pub fn label(&self) -> String {
        match (self.j1, self.j2) {
            (Some(a), Some(b)) => format!("{}:{a}:{b}", self.order),
            (Some(a), None) => format!("{}:{a}", self.order),
            _ => self.order.to_string(),
        }
    }
}

/// Order 0, every order-1 path, then each (j1, j2) whose second wavelet lies
/// inside the band where `|f * psi_j1|` carries energy.
pub fn enumerate_paths(banks: &FilterBankSet) -> Vec<ScatteringPath> {
    let mut out = vec![ScatteringPath::ZERO];
    out.extend((0..banks.bank1.len()).map(ScatteringPath::first));
    for (j1, w1) in banks.bank1.iter().enumerate() {
        for (j2, w2) in banks.bank2.iter().enumerate() {
            if w2.center_frequency_hz < w1.bandwidth_hz {
                out.push(ScatteringPath::second(j1, j2));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub path_labels: Vec<String>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Time average of each path's S sequence, in the order of `paths`.
pub fn feature_vector(result: &ScatteringResult, paths: &[ScatteringPath]) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(paths.len());
    for p in paths {
        let seq = match p.order {
            0 => Some(&result.s0),
            1 => result.s1.get(p),
            2 => result.s2.get(p),
            _ => None,
        };
        let seq = seq.ok_or_else(|| Error::param(format!("unknown scattering path {}", p.label())))?;
        values.push(mean(seq));
    }
    Ok(FeatureVector {
        values,
        path_labels: paths.iter().map(ScatteringPath::label).collect(),
    })
}
