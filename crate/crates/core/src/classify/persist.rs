//! Line-based text format for trained models.
//!
//! ```text
//! dss-fdd-model<TAB>1
//! kind<TAB>knn
//! hyperparam<TAB>k<TAB>5.0000000000000000e0
//! class<TAB>normal
//! class<TAB>faulty
//! mean<TAB>...            one value per feature
//! std<TAB>...
//! constant<TAB>...        indices of zero-variance features
//! array<TAB>rows<TAB>...  named parameter arrays
//! end
//! ```
//!
//! Reals are written with 17 significant digits.

use std::collections::BTreeMap;
use std::path::Path;

use super::*;
use crate::io::write_atomic;

pub const MODEL_FORMAT_TAG: &str = "dss-fdd-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn line(out: &mut String, key: &str, values: impl IntoIterator<Item = String>) {
    out.push_str(key);
    for v in values {
        out.push('\t');
        out.push_str(&v);
    }
    out.push('\n');
}

fn arrays(params: &Params) -> Vec<(&'static str, Vec<f64>)> {
    let flat = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<f64>>();
    let usize_vec = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    let trees = |ts: &[Tree]| {
        let mut sizes = Vec::new();
        let (mut feat, mut thr, mut left, mut right, mut class) = (vec![], vec![], vec![], vec![], vec![]);
        for t in ts {
            sizes.push(t.nodes.len() as f64);
            for n in &t.nodes {
                match *n {
                    Node::Leaf { class: c } => {
                        feat.push(-1.0);
                        thr.push(0.0);
                        left.push(0.0);
                        right.push(0.0);
                        class.push(c as f64);
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left: l,
                        right: r,
                    } => {
                        feat.push(feature as f64);
                        thr.push(threshold);
                        left.push(l as f64);
                        right.push(r as f64);
                        class.push(0.0);
                    }
                }
            }
        }
        vec![
            ("tree_sizes", sizes),
            ("node_feature", feat),
            ("node_threshold", thr),
            ("node_left", left),
            ("node_right", right),
            ("node_class", class),
        ]
    };
    match params {
        Params::Svm(s) => vec![
            ("n_classes", vec![s.n_classes as f64]),
            (
                "pairs",
                s.machines.iter().flat_map(|m| [m.positive as f64, m.negative as f64]).collect(),
            ),
            ("bias", s.machines.iter().map(|m| m.bias).collect()),
            ("weights", s.machines.iter().flat_map(|m| m.weights.iter().copied()).collect()),
        ],
        Params::Knn(k) => vec![
            ("n_classes", vec![k.n_classes as f64]),
            ("rows", flat(&k.rows)),
            ("labels", usize_vec(&k.labels)),
        ],
        Params::Tree(t) => trees(std::slice::from_ref(t)),
        Params::Forest(f) => {
            let mut a = vec![("n_classes", vec![f.n_classes as f64])];
            a.extend(trees(&f.trees));
            a
        }
        Params::Bayes(b) => vec![
            ("means", flat(&b.means)),
            ("vars", flat(&b.vars)),
            ("log_priors", b.log_priors.clone()),
        ],
        Params::Lda(l) => vec![("weights", flat(&l.weights)), ("biases", l.biases.clone())],
    }
}

pub fn model_to_text(model: &TrainedModel) -> Result<String> {
    let mut out = String::new();
    line(&mut out, MODEL_FORMAT_TAG, [MODEL_FORMAT_VERSION.to_string()]);
    line(&mut out, "kind", [model.kind.kind.name().to_string()]);
    for (k, v) in &model.kind.hyperparams {
        line(&mut out, "hyperparam", [k.clone(), real(*v)]);
    }
    for name in &model.class_names {
        if name.contains(['\t', '\n', '\r']) || name.is_empty() {
            return Err(Error::data(format!("class name {name:?} cannot be stored")));
        }
        line(&mut out, "class", [name.clone()]);
    }
    let st = &model.standardization;
    line(&mut out, "mean", st.mean.iter().map(|&v| real(v)));
    line(&mut out, "std", st.std.iter().map(|&v| real(v)));
    line(&mut out, "constant", st.constant.iter().map(|i| i.to_string()));
    for (name, values) in arrays(&model.params) {
        line(&mut out, "array", std::iter::once(name.to_string()).chain(values.into_iter().map(real)));
    }
    out.push_str("end\n");
    Ok(out)
}

struct Reader<'a> {
    arrays: BTreeMap<&'a str, Vec<f64>>,
}

impl Reader<'_> {
    fn get(&self, name: &str) -> Result<&[f64]> {
        self.arrays
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::data(format!("model file lacks array {name:?}")))
    }

    fn indices(&self, name: &str) -> Result<Vec<usize>> {
        self.get(name)?
            .iter()
            .map(|&v| {
                if v >= 0.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::data(format!("array {name:?} holds a non-index value {v}")))
                }
            })
            .collect()
    }

    fn scalar(&self, name: &str) -> Result<usize> {
        self.indices(name)?
            .first()
            .copied()
            .ok_or_else(|| Error::data(format!("array {name:?} is empty")))
    }
}

fn matrix(values: &[f64], rows: usize, cols: usize, what: &str) -> Result<Vec<Vec<f64>>> {
    if values.len() != rows * cols {
        return Err(Error::data(format!(
            "{what} has {} values, expected {rows} x {cols}",
            values.len()
        )));
    }
    if cols == 0 {
        return Ok(vec![Vec::new(); rows]);
    }
    Ok(values.chunks(cols).map(<[f64]>::to_vec).collect())
}

fn read_trees(r: &Reader, n_classes: usize, dim: usize) -> Result<Vec<Tree>> {
    let sizes = r.indices("tree_sizes")?;
    let feat = r.get("node_feature")?;
    let thr = r.get("node_threshold")?;
    let left = r.indices("node_left")?;
    let right = r.indices("node_right")?;
    let class = r.indices("node_class")?;
    let total: usize = sizes.iter().sum();
    if [feat.len(), thr.len(), left.len(), right.len(), class.len()]
        .iter()
        .any(|&l| l != total)
    {
        return Err(Error::data("tree arrays have inconsistent lengths"));
    }
    let mut trees = Vec::new();
    let mut at = 0;
    for &size in &sizes {
        let mut nodes = Vec::with_capacity(size);
        for i in at..at + size {
            let node = if feat[i] < 0.0 {
                if class[i] >= n_classes {
                    return Err(Error::data("tree leaf refers to an unknown class"));
                }
                Node::Leaf { class: class[i] }
            } else {
                let (l, rt) = (left[i], right[i]);
                // children always follow their parent
                if feat[i] as usize >= dim || l <= i - at || rt <= i - at || l >= size || rt >= size {
                    return Err(Error::data("tree node refers outside its tree"));
                }
                Node::Split {
                    feature: feat[i] as usize,
                    threshold: thr[i],
                    left: l,
                    right: rt,
                }
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(Error::data("empty tree in model file"));
        }
        trees.push(Tree { nodes });
        at += size;
    }
    Ok(trees)
}

pub fn model_from_text(text: &str) -> Result<TrainedModel> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head: Vec<&str> = lines.next().unwrap_or("").split('\t').collect();
    if head.first() != Some(&MODEL_FORMAT_TAG) {
        return Err(Error::data("not a model file (missing format tag)"));
    }
    match head.get(1).map(|v| v.parse::<u32>()) {
        Some(Ok(MODEL_FORMAT_VERSION)) => {}
        other => {
            return Err(Error::data(format!(
                "unsupported model format version {:?}",
                other.and(head.get(1))
            )))
        }
    }
    let parse_real = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::data(format!("invalid number {s:?} in model file")))
    };

    let mut kind = None;
    let mut hyper = BTreeMap::new();
    let mut classes = Vec::new();
    let (mut mean, mut std, mut constant) = (None, None, Vec::new());
    let mut reader = Reader {
        arrays: BTreeMap::new(),
    };
    let mut ended = false;
    for l in lines {
        let mut parts = l.split('\t');
        let key = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        match key {
            "kind" => kind = Some(rest.first().copied().unwrap_or("").parse::<ClassifierType>()?),
            "hyperparam" if rest.len() == 2 => {
                hyper.insert(rest[0].to_string(), parse_real(rest[1])?);
            }
            "class" if rest.len() == 1 => classes.push(rest[0].to_string()),
            "mean" => mean = Some(rest.iter().map(|s| parse_real(s)).collect::<Result<Vec<_>>>()?),
            "std" => std = Some(rest.iter().map(|s| parse_real(s)).collect::<Result<Vec<_>>>()?),
            "constant" => {
                constant = rest
                    .iter()
                    .map(|s| s.parse::<usize>().map_err(|_| Error::data(format!("invalid index {s:?}"))))
                    .collect::<Result<Vec<_>>>()?
            }
            "array" if !rest.is_empty() => {
                let values = rest[1..].iter().map(|s| parse_real(s)).collect::<Result<Vec<_>>>()?;
                reader.arrays.insert(rest[0], values);
            }
            "end" => {
                ended = true;
                break;
            }
            _ => return Err(Error::data(format!("unexpected line in model file: {l:?}"))),
        }
    }
    if !ended {
        return Err(Error::data("model file is truncated (no end marker)"));
    }
    let kind = ClassifierKind::new(kind.ok_or_else(|| Error::data("model file lacks a kind"))?, &hyper)?;
    let (mean, std) = match (mean, std) {
        (Some(m), Some(s)) if m.len() == s.len() => (m, s),
        _ => return Err(Error::data("model file lacks a consistent standardization")),
    };
    if std.iter().any(|&s| !s.is_finite() || s <= 0.0) {
        return Err(Error::data("standardization deviations must be positive"));
    }
    let dim = mean.len();
    let k = classes.len();
    if k < 2 {
        return Err(Error::data("model file names fewer than two classes"));
    }

    let params = match kind.kind {
        ClassifierType::SvmLinear => {
            let n_classes = reader.scalar("n_classes")?;
            let pairs = reader.indices("pairs")?;
            let bias = reader.get("bias")?;
            let m = bias.len();
            let weights = matrix(reader.get("weights")?, m, dim, "weights")?;
            if pairs.len() != 2 * m || pairs.iter().any(|&c| c >= k) || n_classes != k {
                return Err(Error::data("svm arrays are inconsistent"));
            }
            Params::Svm(Svm {
                machines: (0..m)
                    .map(|i| LinearMachine {
                        positive: pairs[2 * i],
                        negative: pairs[2 * i + 1],
                        weights: weights[i].clone(),
                        bias: bias[i],
                    })
                    .collect(),
                n_classes,
            })
        }
        ClassifierType::Knn => {
            let labels = reader.indices("labels")?;
            let rows = matrix(reader.get("rows")?, labels.len(), dim, "rows")?;
            if labels.iter().any(|&c| c >= k) || labels.is_empty() {
                return Err(Error::data("knn labels are inconsistent"));
            }
            Params::Knn(Knn {
                k: kind.get_usize("k"),
                rows,
                labels,
                n_classes: reader.scalar("n_classes")?,
            })
        }
        ClassifierType::DecisionTree => {
            let mut t = read_trees(&reader, k, dim)?;
            if t.len() != 1 {
                return Err(Error::data("decision tree model must hold exactly one tree"));
            }
            Params::Tree(t.remove(0))
        }
        ClassifierType::EnsembleBaggedTrees => Params::Forest(Forest {
            trees: read_trees(&reader, k, dim)?,
            n_classes: reader.scalar("n_classes")?,
        }),
        ClassifierType::NaiveBayesGaussian => Params::Bayes(NaiveBayes {
            means: matrix(reader.get("means")?, k, dim, "means")?,
            vars: matrix(reader.get("vars")?, k, dim, "vars")?,
            log_priors: matrix(reader.get("log_priors")?, 1, k, "log_priors")?.remove(0),
        }),
        ClassifierType::DiscriminantLinear => Params::Lda(Lda {
            weights: matrix(reader.get("weights")?, k, dim, "weights")?,
            biases: matrix(reader.get("biases")?, 1, k, "biases")?.remove(0),
        }),
    };
    Ok(TrainedModel {
        kind,
        params,
        class_names: classes,
        standardization: Standardization { mean, std, constant },
    })
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    write_atomic(path, model_to_text(model)?.as_bytes())
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_text(&text).map_err(|e| match e {
        Error::InvalidData(message) => Error::Format {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}
