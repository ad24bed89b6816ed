//! Supervised composers over the three component scores.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ComposerError, FeatureRow};

const N_FEATURES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logistic,
    DecisionTree,
    RandomForest,
    Mlp,
}

/// Training hyperparameters. Overridable through fusion-spec params with the
/// dotted keys noted on each field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// `lr.learning_rate`
    pub lr_learning_rate: f64,
    /// `lr.epochs`
    pub lr_epochs: usize,
    /// `dt.max_depth`
    pub max_depth: usize,
    /// `dt.min_leaf`
    pub min_leaf: usize,
    /// `rf.trees`
    pub trees: usize,
    /// `rf.max_features`
    pub max_features: usize,
    /// `mlp.hidden`
    pub hidden: usize,
    /// `mlp.learning_rate`
    pub mlp_learning_rate: f64,
    /// `mlp.batch_size`
    pub batch_size: usize,
    /// `mlp.epochs`
    pub mlp_epochs: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            lr_learning_rate: 0.1,
            lr_epochs: 1000,
            max_depth: 10,
            min_leaf: 5,
            trees: 100,
            max_features: 2,
            hidden: 16,
            mlp_learning_rate: 1e-3,
            batch_size: 200,
            mlp_epochs: 200,
        }
    }
}

impl ModelParams {
    pub fn from_params(params: &BTreeMap<String, f64>) -> Self {
        let mut p = Self::default();
        let get = |k: &str| params.get(k).copied();
        if let Some(v) = get("lr.learning_rate") {
            p.lr_learning_rate = v;
        }
        let set_usize = |k: &str, slot: &mut usize| {
            if let Some(v) = get(k) {
                *slot = v.max(1.0) as usize;
            }
        };
        set_usize("lr.epochs", &mut p.lr_epochs);
        set_usize("dt.max_depth", &mut p.max_depth);
        set_usize("dt.min_leaf", &mut p.min_leaf);
        set_usize("rf.trees", &mut p.trees);
        set_usize("rf.max_features", &mut p.max_features);
        set_usize("mlp.hidden", &mut p.hidden);
        set_usize("mlp.batch_size", &mut p.batch_size);
        set_usize("mlp.epochs", &mut p.mlp_epochs);
        if let Some(v) = get("mlp.learning_rate") {
            p.mlp_learning_rate = v;
        }
        p.max_features = p.max_features.min(N_FEATURES);
        p
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: [f64; N_FEATURES],
    pub bias: f64,
}

impl Logistic {
    /// Full-batch gradient descent on mean log-loss from zero weights.
    pub fn fit(x: &[[f64; N_FEATURES]], y: &[f64], learning_rate: f64, epochs: usize) -> Self {
        let mut m = Logistic { weights: [0.0; N_FEATURES], bias: 0.0 };
        let n = x.len() as f64;
        for _ in 0..epochs {
            let mut gw = [0.0; N_FEATURES];
            let mut gb = 0.0;
            for (xi, yi) in x.iter().zip(y) {
                let err = m.predict_proba(xi) - yi;
                for k in 0..N_FEATURES {
                    gw[k] += err * xi[k];
                }
                gb += err;
            }
            for k in 0..N_FEATURES {
                m.weights[k] -= learning_rate * gw[k] / n;
            }
            m.bias -= learning_rate * gb / n;
        }
        m
    }

    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        sigmoid(self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf { p: f64 },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

/// CART classifier with Gini impurity. Leaves hold the positive fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    root: Node,
    importances: [f64; N_FEATURES],
}

fn gini(pos: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let p = pos / n;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    x: &'a [[f64; N_FEATURES]],
    y: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    max_features: usize,
    total: f64,
    decrease: [f64; N_FEATURES],
}

impl TreeBuilder<'_> {
    fn build(&mut self, idx: &mut [usize], depth: usize, rng: &mut Option<&mut ChaCha8Rng>) -> Node {
        let n = idx.len() as f64;
        let pos: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let leaf = Node::Leaf { p: if n > 0.0 { pos / n } else { 0.0 } };
        if depth >= self.max_depth || pos == 0.0 || pos == n || idx.len() < 2 * self.min_leaf {
            return leaf;
        }
        let features: Vec<usize> = match rng {
            Some(r) if self.max_features < N_FEATURES => {
                let mut f: Vec<usize> = sample(*r, N_FEATURES, self.max_features).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..N_FEATURES).collect(),
        };
        let parent = gini(pos, n);
        // (gain, feature, threshold)
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in &features {
            idx.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left_pos = 0.0;
            for k in 0..idx.len() - 1 {
                left_pos += self.y[idx[k]];
                let (lo, hi) = (self.x[idx[k]][f], self.x[idx[k + 1]][f]);
                let n_left = k + 1;
                if lo == hi || n_left < self.min_leaf || idx.len() - n_left < self.min_leaf {
                    continue;
                }
                let (nl, nr) = (n_left as f64, n - n_left as f64);
                let child = (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / n;
                let gain = parent - child;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        let Some((gain, feature, threshold)) = best else { return leaf };
        self.decrease[feature] += n / self.total * gain;
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(&mut left, depth + 1, rng)),
            right: Box::new(self.build(&mut right, depth + 1, rng)),
        }
    }
}

fn normalized(v: [f64; N_FEATURES]) -> [f64; N_FEATURES] {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        v.map(|x| x / total)
    } else {
        [0.0; N_FEATURES]
    }
}

impl DecisionTree {
    pub fn fit(x: &[[f64; N_FEATURES]], y: &[f64], max_depth: usize, min_leaf: usize) -> Self {
        let idx: Vec<usize> = (0..x.len()).collect();
        Self::fit_indices(x, y, idx, max_depth, min_leaf, N_FEATURES, None)
    }

    fn fit_indices(
        x: &[[f64; N_FEATURES]],
        y: &[f64],
        mut idx: Vec<usize>,
        max_depth: usize,
        min_leaf: usize,
        max_features: usize,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Self {
        let mut builder = TreeBuilder {
            x,
            y,
            max_depth,
            min_leaf: min_leaf.max(1),
            max_features,
            total: idx.len() as f64,
            decrease: [0.0; N_FEATURES],
        };
        let root = builder.build(&mut idx, 0, &mut rng);
        Self { root, importances: normalized(builder.decrease) }
    }

    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { p } => return *p,
                Node::Split { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Normalized total impurity decrease per feature, `[R, H, S]`.
    pub fn feature_importances(&self) -> [f64; N_FEATURES] {
        self.importances
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.root, Node::Leaf { .. })
    }
}

/// Bagged CART trees with per-split feature subsampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<DecisionTree>,
}

impl Forest {
    pub fn fit(x: &[[f64; N_FEATURES]], y: &[f64], params: &ModelParams, seed: u64) -> Self {
        let n = x.len();
        let trees = (0..params.trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t as u64);
                let idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                DecisionTree::fit_indices(x, y, idx, params.max_depth, params.min_leaf, params.max_features, Some(&mut rng))
            })
            .collect();
        Self { trees }
    }

    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        self.trees.iter().map(|t| t.predict_proba(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn feature_importances(&self) -> [f64; N_FEATURES] {
        let mut sum = [0.0; N_FEATURES];
        for t in &self.trees {
            for (s, v) in sum.iter_mut().zip(t.feature_importances()) {
                *s += v;
            }
        }
        normalized(sum)
    }
}

/// One hidden ReLU layer, sigmoid output, trained with Adam on log-loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    w1: Vec<[f64; N_FEATURES]>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(size: usize, lr: f64) -> Self {
        Self { m: vec![0.0; size], v: vec![0.0; size], t: 0, lr }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let (c1, c2) = (1.0 - B1.powi(self.t), 1.0 - B2.powi(self.t));
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grads[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grads[i] * grads[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + EPS);
        }
    }
}

impl Mlp {
    fn flatten(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.w1.iter().flatten().copied().collect();
        p.extend(&self.b1);
        p.extend(&self.w2);
        p.push(self.b2);
        p
    }

    fn unflatten(&mut self, p: &[f64]) {
        let h = self.b1.len();
        for (j, row) in self.w1.iter_mut().enumerate() {
            row.copy_from_slice(&p[j * N_FEATURES..(j + 1) * N_FEATURES]);
        }
        let off = h * N_FEATURES;
        self.b1.copy_from_slice(&p[off..off + h]);
        self.w2.copy_from_slice(&p[off + h..off + 2 * h]);
        self.b2 = p[off + 2 * h];
    }

    fn forward(&self, x: &[f64; N_FEATURES], hidden: &mut [f64]) -> f64 {
        let mut z = self.b2;
        for j in 0..self.b1.len() {
            let a = (self.b1[j] + self.w1[j].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()).max(0.0);
            hidden[j] = a;
            z += self.w2[j] * a;
        }
        sigmoid(z)
    }

    pub fn fit(x: &[[f64; N_FEATURES]], y: &[f64], params: &ModelParams, seed: u64) -> Self {
        let h = params.hidden;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Glorot-uniform weights, zero biases
        let l1 = (6.0 / (N_FEATURES + h) as f64).sqrt();
        let l2 = (6.0 / (h + 1) as f64).sqrt();
        let mut model = Mlp {
            w1: (0..h).map(|_| std::array::from_fn(|_| rng.gen_range(-l1..l1))).collect(),
            b1: vec![0.0; h],
            w2: (0..h).map(|_| rng.gen_range(-l2..l2)).collect(),
            b2: 0.0,
        };
        let mut flat = model.flatten();
        let mut adam = Adam::new(flat.len(), params.mlp_learning_rate);
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut hidden = vec![0.0; h];
        let batch = params.batch_size.max(1);
        for _ in 0..params.mlp_epochs {
            for i in (1..order.len()).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            for chunk in order.chunks(batch) {
                let mut grad = vec![0.0; flat.len()];
                let off = h * N_FEATURES;
                for &i in chunk {
                    let p = model.forward(&x[i], &mut hidden);
                    let dz = (p - y[i]) / chunk.len() as f64;
                    for j in 0..h {
                        grad[off + h + j] += dz * hidden[j];
                        if hidden[j] > 0.0 {
                            let dh = dz * model.w2[j];
                            for k in 0..N_FEATURES {
                                grad[j * N_FEATURES + k] += dh * x[i][k];
                            }
                            grad[off + j] += dh;
                        }
                    }
                    grad[off + 2 * h] += dz;
                }
                adam.step(&mut flat, &grad);
                model.unflatten(&flat);
            }
        }
        model
    }

    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mut hidden = vec![0.0; self.b1.len()];
        self.forward(x, &mut hidden)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Logistic(Logistic),
    DecisionTree(DecisionTree),
    RandomForest(Forest),
    Mlp(Mlp),
}

impl Model {
    pub fn predict_proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        match self {
            Model::Logistic(m) => m.predict_proba(x),
            Model::DecisionTree(m) => m.predict_proba(x),
            Model::RandomForest(m) => m.predict_proba(x),
            Model::Mlp(m) => m.predict_proba(x),
        }
    }

    /// Tree-based models only.
    pub fn feature_importances(&self) -> Option<[f64; N_FEATURES]> {
        match self {
            Model::DecisionTree(m) => Some(m.feature_importances()),
            Model::RandomForest(m) => Some(m.feature_importances()),
            _ => None,
        }
    }
}

pub fn train_model(
    kind: ModelKind,
    rows: &[FeatureRow],
    params: &ModelParams,
    seed: u64,
) -> Result<Model, ComposerError> {
    if let Some(r) = rows.iter().find(|r| r.features().iter().any(|v| !v.is_finite())) {
        return Err(ComposerError::NonFinite { bug: r.bug_id.clone(), file: r.file_path.clone() });
    }
    if rows.is_empty() {
        return Err(ComposerError::SingleClass);
    }
    let x: Vec<[f64; N_FEATURES]> = rows.iter().map(FeatureRow::features).collect();
    let y: Vec<f64> = rows.iter().map(|r| if r.label { 1.0 } else { 0.0 }).collect();
    Ok(match kind {
        ModelKind::Logistic => Model::Logistic(Logistic::fit(&x, &y, params.lr_learning_rate, params.lr_epochs)),
        ModelKind::DecisionTree => Model::DecisionTree(DecisionTree::fit(&x, &y, params.max_depth, params.min_leaf)),
        ModelKind::RandomForest => Model::RandomForest(Forest::fit(&x, &y, params, seed)),
        ModelKind::Mlp => Model::Mlp(Mlp::fit(&x, &y, params, seed)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(data: &[(f64, f64, f64, bool)]) -> Vec<FeatureRow> {
        data.iter()
            .enumerate()
            .map(|(i, &(r, h, s, label))| FeatureRow {
                bug_id: "B".into(),
                file_path: format!("f{i:03}"),
                susp_r: r,
                susp_h: h,
                susp_s: s,
                label,
            })
            .collect()
    }

    fn separable() -> Vec<FeatureRow> {
        let data: Vec<_> = (0..40).map(|i| (i as f64 / 40.0, 0.5, 0.5, i >= 20)).collect();
        rows(&data)
    }

    #[test]
    fn every_model_separates_one_feature() {
        let train = separable();
        for kind in [ModelKind::Logistic, ModelKind::DecisionTree, ModelKind::RandomForest, ModelKind::Mlp] {
            let params = ModelParams { mlp_epochs: 2000, ..Default::default() };
            let m = train_model(kind, &train, &params, 3).unwrap();
            let worst_pos = train.iter().filter(|r| r.label).map(|r| m.predict_proba(&r.features())).fold(f64::INFINITY, f64::min);
            let best_neg = train.iter().filter(|r| !r.label).map(|r| m.predict_proba(&r.features())).fold(f64::NEG_INFINITY, f64::max);
            assert!(worst_pos > best_neg, "{kind:?}: {worst_pos} <= {best_neg}");
        }
    }

    #[test]
    fn constant_features_give_a_prior_leaf() {
        let train = rows(&[(0.3, 0.3, 0.3, true), (0.3, 0.3, 0.3, false), (0.3, 0.3, 0.3, false), (0.3, 0.3, 0.3, false)]);
        let Model::DecisionTree(t) = train_model(ModelKind::DecisionTree, &train, &ModelParams::default(), 0).unwrap() else {
            unreachable!()
        };
        assert!(t.is_leaf());
        assert_eq!(t.predict_proba(&[0.9, 0.0, 0.1]), 0.25);
        assert_eq!(t.feature_importances(), [0.0; 3]);
    }

    #[test]
    fn importances_follow_the_informative_feature() {
        let data: Vec<_> = (0..60).map(|i| (((i * 7) % 13) as f64, (i % 2) as f64, ((i * 5) % 11) as f64, i % 2 == 1)).collect();
        let m = train_model(ModelKind::RandomForest, &rows(&data), &ModelParams::default(), 11).unwrap();
        let imp = m.feature_importances().unwrap();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(imp[1] > imp[0] && imp[1] > imp[2]);
    }

    #[test]
    fn seeded_models_are_reproducible() {
        let train = separable();
        for kind in [ModelKind::RandomForest, ModelKind::Mlp] {
            let a = train_model(kind, &train, &ModelParams::default(), 5).unwrap();
            let b = train_model(kind, &train, &ModelParams::default(), 5).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_finite_rejected() {
        let train = rows(&[(f64::NAN, 0.0, 0.0, true), (0.0, 0.0, 0.0, false)]);
        assert!(matches!(
            train_model(ModelKind::Logistic, &train, &ModelParams::default(), 0),
            Err(ComposerError::NonFinite { .. })
        ));
    }
}
