use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::forest::{train_rf, RfModel};
use super::metrics::{evaluate, EvalReport};
use super::mnnb::{train_mnnb, MnnbModel};
use super::resample::{oversample_class, subsample_spread};
use super::{LabeledDataset, Prediction};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::rng;
use crate::text::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Mnnb,
    Rf,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Mnnb => "mnnb",
            ClassifierKind::Rf => "rf",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnnb" => Ok(ClassifierKind::Mnnb),
            "rf" => Ok(ClassifierKind::Rf),
            other => Err(Error::InvalidArgument(format!("unknown classifier `{other}`"))),
        }
    }
}

/// Learner choice plus rebalancing applied to training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub classifier: ClassifierKind,
    pub alpha: f64,
    pub n_trees: usize,
    /// SMOTE percentage applied to the Relevant class; 0 disables it.
    pub smote_percent: u32,
    pub smote_k: usize,
    /// Spread sub-sampling ratio; `None` disables it.
    pub spread_ratio: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            classifier: ClassifierKind::Rf,
            alpha: 1.0,
            n_trees: 100,
            smote_percent: 100,
            smote_k: 5,
            spread_ratio: None,
            seed: 0,
        }
    }
}

/// A trained model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Mnnb(MnnbModel),
    Rf(RfModel),
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Mnnb(_) => ClassifierKind::Mnnb,
            Classifier::Rf(_) => ClassifierKind::Rf,
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> Prediction {
        match self {
            Classifier::Mnnb(m) => m.predict(v),
            Classifier::Rf(m) => m.predict(v),
        }
    }
}

/// Sub-samples (if configured), then over-samples Relevant (if configured).
pub fn rebalance(data: &LabeledDataset, config: &TrainConfig, seed: u64) -> Result<LabeledDataset> {
    let mut out = match config.spread_ratio {
        Some(ratio) => subsample_spread(data, ratio, rng::derive_seed(seed, 1))?,
        None => data.clone(),
    };
    if config.smote_percent > 0 {
        out = oversample_class(
            &out,
            Label::Relevant,
            config.smote_percent,
            config.smote_k,
            rng::derive_seed(seed, 2),
        )?;
    }
    Ok(out)
}

/// Rebalances `data` per `config` and fits the configured learner.
pub fn train(data: &LabeledDataset, config: &TrainConfig) -> Result<Classifier> {
    data.require_all_classes()?;
    let balanced = rebalance(data, config, config.seed)?;
    match config.classifier {
        ClassifierKind::Mnnb => Ok(Classifier::Mnnb(train_mnnb(&balanced, config.alpha)?)),
        ClassifierKind::Rf => Ok(Classifier::Rf(train_rf(
            &balanced,
            config.n_trees,
            rng::derive_seed(config.seed, 3),
        )?)),
    }
}

/// Stratified fold index of every instance.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, 0);
    let mut assignment = vec![0; labels.len()];
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    assignment
}

/// Stratified k-fold estimate. Rebalancing happens inside each training
/// fold only; held-out folds are never resampled.
pub fn cross_validate(data: &LabeledDataset, folds: usize, config: &TrainConfig, seed: u64) -> Result<EvalReport> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    let counts = data.class_counts();
    for label in Label::ALL {
        if counts[label.index()] < folds {
            return Err(Error::ClassTooSmall {
                label,
                count: counts[label.index()],
                folds,
            });
        }
    }
    let assignment = stratified_folds(&data.labels, folds, seed);
    let mut predictions: Vec<Option<Prediction>> = vec![None; data.len()];
    for fold in 0..folds {
        let (test, train_idx): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| assignment[i] == fold);
        let fold_config = TrainConfig {
            seed: rng::derive_seed(seed, 100 + fold as u64),
            ..config.clone()
        };
        let model = train(&data.subset(&train_idx), &fold_config)?;
        for i in test {
            predictions[i] = Some(model.predict(&data.vectors[i]));
        }
    }
    let predictions: Vec<Prediction> = predictions.into_iter().map(|p| p.expect("every instance is held out once")).collect();
    evaluate(&predictions, &data.labels)
}
