//! L2-regularized logistic regression over sparse user-sharing features.
//!
//! The positive class is misinfo. Rows are sparse `(feature, value)` lists;
//! sharing data only ever produces the value 1.0.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LabelIndex;
use crate::label::Label;
use crate::sharing::SharingMatrix;

pub const DEFAULT_TEST_FRACTION: f64 = 0.25;
pub const DEFAULT_FOLDS: usize = 5;
pub const THRESHOLD: f64 = 0.5;

pub type SparseRow = Vec<(u32, f64)>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<SparseRow>,
    /// `true` for misinfo.
    pub labels: Vec<bool>,
    pub names: Vec<String>,
    /// Feature names, one per column (user ids for sharing data).
    pub feature_space: Vec<String>,
}

impl Dataset {
    pub fn new(
        rows: Vec<SparseRow>,
        labels: Vec<bool>,
        names: Vec<String>,
        feature_space: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != names.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows, {} labels, {} names",
                rows.len(),
                labels.len(),
                names.len()
            )));
        }
        let dim = feature_space.len();
        for row in &rows {
            if let Some(&(i, _)) = row.iter().find(|(i, _)| *i as usize >= dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: i as usize + 1,
                });
            }
        }
        Ok(Dataset {
            rows,
            labels,
            names,
            feature_space,
        })
    }

    /// Dense rows with generated names, mostly for synthetic data.
    pub fn from_dense(x: &[Vec<f64>], labels: Vec<bool>) -> Result<Self> {
        let dim = x.first().map_or(0, Vec::len);
        if x.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("ragged dense matrix".into()));
        }
        let rows = x
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(i, v)| (i as u32, *v))
                    .collect()
            })
            .collect();
        let names = (0..x.len()).map(|i| format!("row{i}")).collect();
        let features = (0..dim).map(|i| format!("f{i}")).collect();
        Dataset::new(rows, labels, names, features)
    }

    /// Keep the matrix rows labeled misinfo or info; unlabeled domains are
    /// returned by name.
    pub fn from_sharing(matrix: &SharingMatrix, labels: &LabelIndex) -> (Dataset, Vec<String>) {
        let mut data = Dataset {
            feature_space: matrix.users().to_vec(),
            ..Dataset::default()
        };
        let mut unlabeled = Vec::new();
        for (i, domain) in matrix.domains().iter().enumerate() {
            let y = match labels.label(domain) {
                Label::Misinfo => true,
                Label::Info => false,
                Label::None => {
                    unlabeled.push(domain.clone());
                    continue;
                }
            };
            data.rows.push(binary_row(matrix.sharers(i)));
            data.labels.push(y);
            data.names.push(domain.clone());
        }
        (data, unlabeled)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.feature_space.len()
    }

    /// `(misinfo, info)` row counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y).count();
        (pos, self.labels.len() - pos)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            names: indices.iter().map(|&i| self.names[i].clone()).collect(),
            feature_space: self.feature_space.clone(),
        }
    }
}

pub fn binary_row(indices: &[u32]) -> SparseRow {
    indices.iter().map(|&i| (i, 1.0)).collect()
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    /// False when class counts forced an unstratified split.
    pub stratified: bool,
}

/// Seeded train/test split. Each class contributes `round(n_c * fraction)`
/// rows to the test side when stratifying.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64, stratified: bool) -> Result<Split> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_fraction} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pos, neg) = data.class_counts();
    let stratify = stratified && pos >= 2 && neg >= 2;
    if stratified && !stratify {
        log::warn!(
            "class counts {pos}/{neg} too small to stratify; splitting without stratification"
        );
    }
    let mut test = Vec::new();
    let groups: Vec<Vec<usize>> = if stratify {
        vec![
            (0..data.len()).filter(|&i| data.labels[i]).collect(),
            (0..data.len()).filter(|&i| !data.labels[i]).collect(),
        ]
    } else {
        vec![(0..data.len()).collect()]
    };
    for mut group in groups {
        group.shuffle(&mut rng);
        let take = (group.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&group[..take.min(group.len())]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; data.len()];
    for &i in &test {
        in_test[i] = true;
    }
    let train: Vec<usize> = (0..data.len()).filter(|&i| !in_test[i]).collect();
    Ok(Split {
        train: data.subset(&train),
        test: data.subset(&test),
        train_indices: train,
        test_indices: test,
        stratified: stratify,
    })
}

/// Resample minority rows with replacement until both classes have equal
/// counts. Resampled rows are appended after the original rows.
pub fn oversample(data: &Dataset, seed: u64) -> Dataset {
    let (pos, neg) = data.class_counts();
    if pos == 0 || neg == 0 {
        log::warn!("oversampling skipped: only one class present");
        return data.clone();
    }
    let minority = pos < neg;
    let pool: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] == minority)
        .collect();
    let deficit = pos.abs_diff(neg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = data.clone();
    for _ in 0..deficit {
        let i = pool[rng.random_range(0..pool.len())];
        out.rows.push(data.rows[i].clone());
        out.labels.push(data.labels[i]);
        out.names.push(data.names[i].clone());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub l2_strength: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the Euclidean norm of the full gradient falls below this.
    pub convergence_tol: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            l2_strength: 0.01,
            learning_rate: 1.0,
            max_epochs: 5000,
            convergence_tol: 1e-6,
        }
    }
}

impl Hyperparams {
    pub fn with_l2(self, l2_strength: f64) -> Self {
        Hyperparams {
            l2_strength,
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.l2_strength >= 0.0
            && self.l2_strength.is_finite()
            && self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.convergence_tol >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid hyperparameters {self:?}"
            )))
        }
    }
}

/// Default tuning grid over the regularization strength.
pub fn default_grid() -> Vec<Hyperparams> {
    [0.001, 0.01, 0.1, 1.0]
        .into_iter()
        .map(|l2| Hyperparams::default().with_l2(l2))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
    pub feature_space: Vec<String>,
    pub seed: u64,
    pub converged: bool,
    pub epochs: usize,
    pub trained_at: Option<String>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn margin(row: &SparseRow, weights: &[f64], bias: f64) -> f64 {
    bias + row
        .iter()
        .map(|&(i, v)| weights[i as usize] * v)
        .sum::<f64>()
}

/// Mean binary cross-entropy plus `l2/2 * |w|^2`. The bias is not penalized.
pub fn objective(data: &Dataset, weights: &[f64], bias: f64, l2: f64) -> f64 {
    let n = data.len().max(1) as f64;
    let ce: f64 = data
        .rows
        .iter()
        .zip(&data.labels)
        .map(|(row, &y)| {
            let z = margin(row, weights, bias);
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    ce / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`objective`] as `(d/dw, d/db)`.
pub fn gradient(data: &Dataset, weights: &[f64], bias: f64, l2: f64) -> (Vec<f64>, f64) {
    let n = data.len().max(1) as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (row, &y) in data.rows.iter().zip(&data.labels) {
        let r = (sigmoid(margin(row, weights, bias)) - if y { 1.0 } else { 0.0 }) / n;
        gb += r;
        for &(i, v) in row {
            gw[i as usize] += r * v;
        }
    }
    (gw, gb)
}

#[derive(Debug, Clone)]
pub struct Training {
    pub model: ClassifierModel,
    /// Objective before the first epoch and after each epoch.
    pub loss_history: Vec<f64>,
}

/// Full-batch gradient descent from zero weights. The step is the configured
/// learning rate; a step that would raise the objective is rejected and the
/// rate halved for the remaining epochs, so the recorded loss never rises.
pub fn train(data: &Dataset, hyperparams: &Hyperparams, seed: u64) -> Result<Training> {
    hyperparams.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot train on an empty dataset".into(),
        ));
    }
    let (pos, neg) = data.class_counts();
    if pos == 0 || neg == 0 {
        log::warn!("training on a single class");
    }
    let l2 = hyperparams.l2_strength;
    let mut w = vec![0.0; data.dimension()];
    let mut b = 0.0;
    let mut step = hyperparams.learning_rate;
    let mut loss = objective(data, &w, b, l2);
    let mut history = vec![loss];
    let mut converged = false;
    let mut epochs = 0;
    while epochs < hyperparams.max_epochs {
        let (gw, gb) = gradient(data, &w, b, l2);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        if norm <= hyperparams.convergence_tol {
            converged = true;
            break;
        }
        if step < 1e-12 {
            log::warn!("step size underflow after {epochs} epochs");
            break;
        }
        epochs += 1;
        loop {
            let w_next: Vec<f64> = w.iter().zip(&gw).map(|(w, g)| w - step * g).collect();
            let b_next = b - step * gb;
            let next = objective(data, &w_next, b_next, l2);
            if next <= loss || step < 1e-12 {
                if next <= loss {
                    w = w_next;
                    b = b_next;
                    loss = next;
                }
                break;
            }
            step *= 0.5;
        }
        history.push(loss);
    }
    if !converged && epochs == hyperparams.max_epochs && hyperparams.max_epochs > 0 {
        let (gw, gb) = gradient(data, &w, b, l2);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        converged = norm <= hyperparams.convergence_tol;
    }
    Ok(Training {
        model: ClassifierModel {
            weights: w,
            bias: b,
            hyperparams: *hyperparams,
            feature_space: data.feature_space.clone(),
            seed,
            converged,
            epochs,
            trained_at: None,
        },
        loss_history: history,
    })
}

impl ClassifierModel {
    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// Misinfo probability for a sparse row.
    pub fn predict(&self, row: &SparseRow) -> Result<f64> {
        if let Some(&(i, _)) = row.iter().find(|(i, _)| *i as usize >= self.weights.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: i as usize + 1,
            });
        }
        Ok(sigmoid(margin(row, &self.weights, self.bias)))
    }

    pub fn predict_dense(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.len(),
            });
        }
        let z = self.bias + x.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>();
        Ok(sigmoid(z))
    }

    /// Map sharer ids onto this model's feature space. Unknown users carry
    /// no weight and are dropped.
    pub fn features_for<S: AsRef<str>>(&self, users: &[S]) -> SparseRow {
        let index: std::collections::HashMap<&str, u32> = self
            .feature_space
            .iter()
            .enumerate()
            .map(|(i, u)| (u.as_str(), i as u32))
            .collect();
        let mut idx: Vec<u32> = users
            .iter()
            .filter_map(|u| index.get(u.as_ref()).copied())
            .collect();
        idx.sort_unstable();
        idx.dedup();
        binary_row(&idx)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            dimension: self.weights.len(),
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i as u32, *w))
                .collect(),
            bias: self.bias,
            hyperparams: self.hyperparams,
            feature_space: self.feature_space.clone(),
            trained_at: self.trained_at.clone(),
            seed: self.seed,
            converged: self.converged,
            epochs: self.epochs,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelFile>(text)?.into_model()
    }
}

/// On-disk model layout with sparse weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dimension: usize,
    pub weights: Vec<(u32, f64)>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
    pub feature_space: Vec<String>,
    pub trained_at: Option<String>,
    pub seed: u64,
    pub converged: bool,
    pub epochs: usize,
}

impl ModelFile {
    pub fn into_model(self) -> Result<ClassifierModel> {
        if self.feature_space.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: self.feature_space.len(),
            });
        }
        let mut weights = vec![0.0; self.dimension];
        for (i, w) in self.weights {
            let slot = weights
                .get_mut(i as usize)
                .ok_or(Error::DimensionMismatch {
                    expected: self.dimension,
                    actual: i as usize + 1,
                })?;
            *slot = w;
        }
        Ok(ClassifierModel {
            weights,
            bias: self.bias,
            hyperparams: self.hyperparams,
            feature_space: self.feature_space,
            seed: self.seed,
            converged: self.converged,
            epochs: self.epochs,
            trained_at: self.trained_at,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    /// Misinfo predicted as misinfo.
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

impl ClassMetrics {
    fn from_counts(hit: usize, false_pos: usize, false_neg: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(hit, hit + false_pos);
        let recall = ratio(hit, hit + false_neg);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support: hit + false_neg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub misinfo: ClassMetrics,
    pub info: ClassMetrics,
    pub confusion: Confusion,
}

impl EvalMetrics {
    pub fn from_confusion(c: Confusion) -> Self {
        EvalMetrics {
            misinfo: ClassMetrics::from_counts(c.tp, c.fp, c.fn_),
            info: ClassMetrics::from_counts(c.tn, c.fn_, c.fp),
            confusion: c,
        }
    }

    /// Two-row precision/recall/F1/support table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<8} {:>9} {:>7} {:>6} {:>8}\n",
            "class", "precision", "recall", "f1", "support"
        );
        for (name, m) in [("misinfo", &self.misinfo), ("info", &self.info)] {
            let _ = writeln!(
                out,
                "{:<8} {:>9.2} {:>7.2} {:>6.2} {:>8}",
                name, m.precision, m.recall, m.f1, m.support
            );
        }
        out
    }
}

pub fn evaluate(model: &ClassifierModel, test: &Dataset) -> Result<EvalMetrics> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if test.dimension() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            actual: test.dimension(),
        });
    }
    let mut c = Confusion::default();
    for (row, &y) in test.rows.iter().zip(&test.labels) {
        let predicted = model.predict(row)? >= THRESHOLD;
        match (predicted, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(EvalMetrics::from_confusion(c))
}

#[derive(Debug, Clone)]
pub struct Tuning {
    pub best: Hyperparams,
    /// Mean misinfo F1 across folds for each grid point, in grid order.
    pub scores: Vec<(Hyperparams, f64)>,
}

/// Stratified fold id per row: each class is shuffled and dealt round-robin.
fn fold_assignment(data: &Dataset, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; data.len()];
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..data.len())
            .filter(|&i| data.labels[i] == class)
            .collect();
        idx.shuffle(&mut rng);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// K-fold grid search on mean misinfo F1. Oversampling happens inside each
/// training fold. Ties go to the larger `l2_strength`.
pub fn tune(data: &Dataset, grid: &[Hyperparams], k_folds: usize, seed: u64) -> Result<Tuning> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty hyperparameter grid".into()));
    }
    if k_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k_folds}"
        )));
    }
    let fold = fold_assignment(data, k_folds, seed);
    let mut scores = Vec::with_capacity(grid.len());
    for hp in grid {
        let mut total = 0.0;
        let mut counted = 0;
        for f in 0..k_folds {
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold[i] != f).collect();
            let test_idx: Vec<usize> = (0..data.len()).filter(|&i| fold[i] == f).collect();
            if test_idx.is_empty() || train_idx.is_empty() {
                continue;
            }
            let fold_seed = seed.wrapping_add(f as u64 + 1);
            let train_set = oversample(&data.subset(&train_idx), fold_seed);
            let model = train(&train_set, hp, fold_seed)?.model;
            total += evaluate(&model, &data.subset(&test_idx))?.misinfo.f1;
            counted += 1;
        }
        let mean = if counted == 0 {
            0.0
        } else {
            total / counted as f64
        };
        scores.push((*hp, mean));
    }
    let mut best = scores[0];
    for &(hp, score) in &scores[1..] {
        let better = score > best.1 + 1e-12;
        let tie = (score - best.1).abs() <= 1e-12;
        if better || (tie && hp.l2_strength > best.0.l2_strength) {
            best = (hp, score);
        }
    }
    Ok(Tuning {
        best: best.0,
        scores,
    })
}
