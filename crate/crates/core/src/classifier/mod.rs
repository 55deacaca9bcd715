//! Three-class relevance models, rebalancing and evaluation.

mod dataset;
mod forest;
mod metrics;
mod mnnb;
mod model;
mod resample;
mod validation;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;

pub use dataset::LabeledDataset;
pub use forest::{train_rf, DecisionTree, Node, RfModel};
pub use metrics::{evaluate, info_gain_rank, ClassMetrics, EvalReport};
pub use mnnb::{train_mnnb, MnnbModel};
pub use model::{classify_corpus, read_model, write_model, RelevanceModel, MODEL_FORMAT, MODEL_VERSION};
pub use resample::{interpolate, nearest_neighbors, oversample_class, smote, subsample_spread};
pub use validation::{
    cross_validate, rebalance, stratified_folds, train, Classifier, ClassifierKind, TrainConfig,
};

/// A predicted label with its class probabilities (indexed by `Label::index`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub probabilities: [f64; 3],
}

impl Prediction {
    /// Argmax with ties going to the earlier label (Relevant < News < Noise).
    pub fn from_probabilities(probabilities: [f64; 3]) -> Self {
        let mut best = 0;
        for c in 1..3 {
            if probabilities[c] > probabilities[best] {
                best = c;
            }
        }
        Prediction {
            label: Label::ALL[best],
            probabilities,
        }
    }
}
