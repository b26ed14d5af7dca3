//! The six classifier families evaluated on scattering features.

mod bayes;
mod knn;
mod lda;
mod persist;
mod standardize;
mod svm;
mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use persist::{load_model, model_from_text, model_to_text, save_model, MODEL_FORMAT_TAG, MODEL_FORMAT_VERSION};
pub use standardize::Standardization;

use crate::error::{Error, Result};
use crate::signal::LabeledDataset;
use bayes::NaiveBayes;
use knn::Knn;
use lda::Lda;
use svm::{LinearMachine, Svm};
use tree::{Forest, Node, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassifierType {
    SvmLinear,
    Knn,
    DecisionTree,
    EnsembleBaggedTrees,
    NaiveBayesGaussian,
    DiscriminantLinear,
}

struct ParamSpec {
    key: &'static str,
    default: f64,
    min: f64,
    max: f64,
    integer: bool,
}

const fn spec(key: &'static str, default: f64, min: f64, max: f64, integer: bool) -> ParamSpec {
    ParamSpec {
        key,
        default,
        min,
        max,
        integer,
    }
}

const SVM_PARAMS: &[ParamSpec] = &[spec("c", 1.0, 1e-6, 1e6, false), spec("epochs", 50.0, 1.0, 1e5, true)];
const KNN_PARAMS: &[ParamSpec] = &[spec("k", 5.0, 1.0, 1e9, true)];
const TREE_PARAMS: &[ParamSpec] = &[spec("max_depth", 0.0, 0.0, 1e4, true), spec("min_leaf", 1.0, 1.0, 1e9, true)];
const ENSEMBLE_PARAMS: &[ParamSpec] = &[
    spec("n_trees", 50.0, 1.0, 1e5, true),
    spec("max_depth", 0.0, 0.0, 1e4, true),
    spec("min_leaf", 1.0, 1.0, 1e9, true),
];
const BAYES_PARAMS: &[ParamSpec] = &[spec("var_floor", 1e-9, 0.0, 1.0, false)];
const LDA_PARAMS: &[ParamSpec] = &[spec("shrinkage", 1e-4, 0.0, 1.0, false)];

impl ClassifierType {
    pub const ALL: [ClassifierType; 6] = [
        ClassifierType::SvmLinear,
        ClassifierType::Knn,
        ClassifierType::DecisionTree,
        ClassifierType::EnsembleBaggedTrees,
        ClassifierType::NaiveBayesGaussian,
        ClassifierType::DiscriminantLinear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierType::SvmLinear => "svm_linear",
            ClassifierType::Knn => "knn",
            ClassifierType::DecisionTree => "decision_tree",
            ClassifierType::EnsembleBaggedTrees => "ensemble_bagged_trees",
            ClassifierType::NaiveBayesGaussian => "naive_bayes_gaussian",
            ClassifierType::DiscriminantLinear => "discriminant_linear",
        }
    }

    fn params(self) -> &'static [ParamSpec] {
        match self {
            ClassifierType::SvmLinear => SVM_PARAMS,
            ClassifierType::Knn => KNN_PARAMS,
            ClassifierType::DecisionTree => TREE_PARAMS,
            ClassifierType::EnsembleBaggedTrees => ENSEMBLE_PARAMS,
            ClassifierType::NaiveBayesGaussian => BAYES_PARAMS,
            ClassifierType::DiscriminantLinear => LDA_PARAMS,
        }
    }

    /// Whether features are z-scored before fitting.
    pub fn standardizes(self) -> bool {
        matches!(
            self,
            ClassifierType::SvmLinear | ClassifierType::Knn | ClassifierType::DiscriminantLinear
        )
    }
}

impl fmt::Display for ClassifierType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierType::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ClassifierType::ALL.iter().map(|k| k.name()).collect();
                Error::param(format!("unknown classifier {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// A classifier family plus its fully resolved hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierKind {
    pub kind: ClassifierType,
    hyperparams: BTreeMap<String, f64>,
}

impl ClassifierKind {
    /// Unspecified keys take their defaults; unknown keys and out-of-range
    /// values are rejected.
    pub fn new(kind: ClassifierType, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let specs = kind.params();
        for (key, &v) in overrides {
            let Some(s) = specs.iter().find(|s| s.key == key) else {
                let keys: Vec<_> = specs.iter().map(|s| s.key).collect();
                return Err(Error::param(format!(
                    "{kind} has no hyperparameter {key:?}; valid keys: {}",
                    keys.join(", ")
                )));
            };
            if !v.is_finite() || v < s.min || v > s.max || (s.integer && v.fract() != 0.0) {
                return Err(Error::param(format!(
                    "{kind} hyperparameter {key} = {v} outside [{}, {}]{}",
                    s.min,
                    s.max,
                    if s.integer { " or not an integer" } else { "" }
                )));
            }
        }
        let hyperparams = specs
            .iter()
            .map(|s| (s.key.to_string(), overrides.get(s.key).copied().unwrap_or(s.default)))
            .collect();
        Ok(Self { kind, hyperparams })
    }

    pub fn with_defaults(kind: ClassifierType) -> Self {
        Self::new(kind, &BTreeMap::new()).expect("defaults are valid")
    }

    pub fn hyperparams(&self) -> &BTreeMap<String, f64> {
        &self.hyperparams
    }

    fn get(&self, key: &str) -> f64 {
        self.hyperparams[key]
    }

    fn get_usize(&self, key: &str) -> usize {
        self.get(key) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MulticlassStrategy {
    Native,
    OneVsOne,
}

/// Linear SVMs vote pairwise beyond two classes; everything else handles
/// any number of classes directly.
pub fn multiclass_strategy(kind: ClassifierType, n_classes: usize) -> MulticlassStrategy {
    if kind == ClassifierType::SvmLinear && n_classes > 2 {
        MulticlassStrategy::OneVsOne
    } else {
        MulticlassStrategy::Native
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Params {
    Svm(Svm),
    Knn(Knn),
    Tree(Tree),
    Forest(Forest),
    Bayes(NaiveBayes),
    Lda(Lda),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    kind: ClassifierKind,
    params: Params,
    class_names: Vec<String>,
    standardization: Standardization,
}

/// Index of the first maximum; the tie rule shared by every classifier.
pub(crate) fn argmax_first<I: IntoIterator<Item = f64>>(values: I) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

pub fn fit(kind: &ClassifierKind, train: &LabeledDataset, seed: u64) -> Result<TrainedModel> {
    if train.is_empty() {
        return Err(Error::data("training set is empty"));
    }
    let k = train.n_classes();
    let present = train.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Err(Error::data("training set contains fewer than two classes"));
    }
    if kind.kind == ClassifierType::DiscriminantLinear && train.len() < k {
        return Err(Error::data(format!(
            "discriminant analysis needs at least as many samples ({}) as classes ({k})",
            train.len()
        )));
    }
    let standardization = if kind.kind.standardizes() {
        Standardization::fit(train.features())
    } else {
        Standardization::identity(train.dim())
    };
    let rows: Vec<Vec<f64>> = train.features().iter().map(|r| standardization.apply(r)).collect();
    let labels = train.labels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree_params = |max_features| TreeParams {
        max_depth: kind.get_usize("max_depth"),
        min_leaf: kind.get_usize("min_leaf"),
        max_features,
    };

    let params = match kind.kind {
        ClassifierType::SvmLinear => Params::Svm(Svm::fit(
            &rows,
            labels,
            k,
            kind.get("c"),
            kind.get_usize("epochs"),
            seed,
        )),
        ClassifierType::Knn => Params::Knn(Knn {
            k: kind.get_usize("k"),
            rows,
            labels: labels.to_vec(),
            n_classes: k,
        }),
        ClassifierType::DecisionTree => Params::Tree(Tree::fit(
            &rows,
            labels,
            (0..rows.len()).collect(),
            k,
            tree_params(0),
            &mut rng,
        )),
        ClassifierType::EnsembleBaggedTrees => {
            let m = ((train.dim() as f64).sqrt().round() as usize).max(1);
            Params::Forest(Forest::fit(
                &rows,
                labels,
                k,
                kind.get_usize("n_trees"),
                tree_params(m),
                &mut rng,
            ))
        }
        ClassifierType::NaiveBayesGaussian => {
            Params::Bayes(NaiveBayes::fit(&rows, labels, k, kind.get("var_floor")))
        }
        ClassifierType::DiscriminantLinear => {
            Params::Lda(Lda::fit(&rows, labels, k, kind.get("shrinkage"))?)
        }
    };
    Ok(TrainedModel {
        kind: kind.clone(),
        params,
        class_names: train.class_names().to_vec(),
        standardization,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> &ClassifierKind {
        &self.kind
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn standardization(&self) -> &Standardization {
        &self.standardization
    }

    pub fn dim(&self) -> usize {
        self.standardization.mean.len()
    }

    /// Number of underlying binary machines for pairwise SVMs, 1 otherwise.
    pub fn n_submodels(&self) -> usize {
        match &self.params {
            Params::Svm(s) => s.machines.len(),
            Params::Forest(f) => f.trees.len(),
            _ => 1,
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<usize> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: features.len(),
            });
        }
        let x = self.standardization.apply(features);
        Ok(match &self.params {
            Params::Svm(m) => m.predict(&x),
            Params::Knn(m) => m.predict(&x),
            Params::Tree(m) => m.predict(&x),
            Params::Forest(m) => m.predict(&x),
            Params::Bayes(m) => m.predict(&x),
            Params::Lda(m) => m.predict(&x),
        })
    }

    pub fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }
}

pub fn predict(model: &TrainedModel, features: &[f64]) -> Result<usize> {
    model.predict(features)
}
