//! Stratified cross-validation and evaluation reports.

mod metrics;
mod report;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{class_frequency, ClassFrequency, Dataset, DatasetError};
use crate::tree::{build_tree, DecisionTree, InductionParams, TreeError};

pub use metrics::{
    accuracy, confusion_matrix, error_metrics, kappa, per_class_metrics, roc_area,
    weighted_average, ClassMetrics, ConfusionMatrix, ErrorAccumulator, ErrorMetrics, Prediction,
};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("nothing to evaluate")]
    Empty,
    #[error("class index {0} is not in the class order")]
    UnknownClass(usize),
    #[error("prior class frequencies are empty")]
    EmptyPrior,
    #[error("distribution has {found} entries, expected {expected}")]
    DistributionLength { expected: usize, found: usize },
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("{folds} folds requested for {instances} instances")]
    TooManyFolds { folds: usize, instances: usize },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Overall measures plus the per-class table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub instances: f64,
    pub accuracy_pct: f64,
    pub kappa: f64,
    pub mae: f64,
    pub rmse: f64,
    pub rae_pct: Option<f64>,
    pub rrse_pct: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
    pub weighted_avg: ClassMetrics,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    /// Scores pooled predictions whose error baseline sums are already in `errors`.
    pub fn from_predictions(
        preds: &[Prediction],
        classes: &[String],
        errors: &ErrorAccumulator,
    ) -> Result<Self, EvalError> {
        let cm = confusion_matrix(preds, classes)?;
        let err = errors.finish()?;
        let (per_class, weighted_avg) = per_class_metrics(&cm, preds)?;
        Ok(Self {
            instances: cm.total(),
            accuracy_pct: accuracy(&cm)?,
            kappa: kappa(&cm)?,
            mae: err.mae,
            rmse: err.rmse,
            rae_pct: err.rae_pct,
            rrse_pct: err.rrse_pct,
            per_class,
            weighted_avg,
            confusion: cm,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Splits instance indices into `k` folds. Each class's indices are
/// shuffled with `seed` and dealt round-robin, the deal continuing from
/// class to class, so per-class counts differ by at most one between folds.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if k > ds.len() {
        return Err(EvalError::TooManyFolds {
            folds: k,
            instances: ds.len(),
        });
    }
    let n_classes = ds.class_values().ok_or(DatasetError::NoClass)?.len();
    let mut by_class = vec![Vec::new(); n_classes];
    for i in 0..ds.len() {
        let c = ds.class_of(i).ok_or(DatasetError::MissingClass(i))?;
        by_class[c].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut position = 0;
    for mut members in by_class {
        members.shuffle(&mut rng);
        for i in members {
            folds[position % k].push(i);
            position += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Predictions for every instance of `test` under `tree`.
pub fn predict_all(tree: &DecisionTree, test: &Dataset) -> Result<Vec<Prediction>, EvalError> {
    (0..test.len())
        .map(|i| {
            let actual = test.class_of(i).ok_or(DatasetError::MissingClass(i))?;
            let inst = &test.instances()[i];
            let c = tree.classify(inst)?;
            Ok(Prediction {
                actual,
                predicted: c.class,
                distribution: c.distribution,
                weight: inst.weight,
            })
        })
        .collect()
}

/// k-fold stratified cross-validation with pooled scoring. Each fold's
/// error baseline is the class prior of its own training part.
pub fn cross_validate(
    ds: &Dataset,
    k: usize,
    seed: u64,
    params: &InductionParams,
) -> Result<EvalReport, EvalError> {
    let folds = stratified_folds(ds, k, seed)?;
    let mut in_fold = vec![0; ds.len()];
    for (f, members) in folds.iter().enumerate() {
        for &i in members {
            in_fold[i] = f;
        }
    }

    let results: Vec<(Vec<Prediction>, ClassFrequency)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..ds.len()).filter(|&i| in_fold[i] != f).collect();
            let train = ds.subset(&train_idx);
            let test = ds.subset(&folds[f]);
            let tree = build_tree(&train, params)?;
            let prior = class_frequency(&train)?;
            Ok((predict_all(&tree, &test)?, prior))
        })
        .collect::<Result<_, EvalError>>()?;

    let mut pooled = Vec::with_capacity(ds.len());
    let mut errors = ErrorAccumulator::default();
    for (preds, prior) in &results {
        errors.add(preds, prior)?;
        pooled.extend_from_slice(preds);
    }
    let classes = ds.class_values().ok_or(DatasetError::NoClass)?;
    EvalReport::from_predictions(&pooled, classes, &errors)
}

/// Resubstitution report: train on `ds`, score on `ds`.
pub fn evaluate_on(tree: &DecisionTree, ds: &Dataset) -> Result<EvalReport, EvalError> {
    let preds = predict_all(tree, ds)?;
    let mut errors = ErrorAccumulator::default();
    errors.add(&preds, &class_frequency(ds)?)?;
    let classes = ds.class_values().ok_or(DatasetError::NoClass)?;
    EvalReport::from_predictions(&preds, classes, &errors)
}
