use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Prediction};
use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub support: u64,
}

/// Held-out performance summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: u64,
    pub accuracy: f64,
    /// One entry per label, in `Label::ALL` order.
    pub per_class: Vec<ClassMetrics>,
    /// Support-weighted mean F-measure.
    pub weighted_f: f64,
    /// Root mean squared error of the probability vectors against one-hot truth.
    pub rmse: f64,
    /// `confusion[truth][predicted]`.
    pub confusion: [[u64; 3]; 3],
}

impl EvalReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate(predictions: &[Prediction], truth: &[Label]) -> Result<EvalReport> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty("predictions"));
    }
    let n = truth.len();
    let mut confusion = [[0u64; 3]; 3];
    let mut squared = 0.0;
    for (p, &t) in predictions.iter().zip(truth) {
        confusion[t.index()][p.label.index()] += 1;
        for c in 0..3 {
            let target = if c == t.index() { 1.0 } else { 0.0 };
            squared += (p.probabilities[c] - target).powi(2);
        }
    }
    let correct: u64 = (0..3).map(|c| confusion[c][c]).sum();
    let per_class: Vec<ClassMetrics> = Label::ALL
        .iter()
        .map(|&label| {
            let c = label.index();
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = (0..3).map(|t| confusion[t][c]).sum();
            let precision = ratio(confusion[c][c], predicted);
            let recall = ratio(confusion[c][c], support);
            let f_measure = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                label,
                precision,
                recall,
                f_measure,
                support,
            }
        })
        .collect();
    let weighted_f = per_class.iter().map(|m| m.support as f64 / n as f64 * m.f_measure).sum();
    Ok(EvalReport {
        n: n as u64,
        accuracy: ratio(correct, n as u64),
        per_class,
        weighted_f,
        rmse: (squared / (n as f64 * 3.0)).sqrt(),
        confusion,
    })
}

fn entropy(counts: &[f64; 3]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    -counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Information gain (bits) of binary term presence about the label, for
/// every feature id; sorted by gain descending, then id.
pub fn info_gain_rank(data: &LabeledDataset) -> Result<Vec<(u32, f64)>> {
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let totals = data.class_counts().map(|c| c as f64);
    let n = data.len() as f64;
    let prior = entropy(&totals);
    let mut present = vec![[0.0f64; 3]; data.n_features()];
    for (v, label) in data.vectors.iter().zip(&data.labels) {
        for (id, value) in v.iter() {
            if value > 0.0 {
                present[id as usize][label.index()] += 1.0;
            }
        }
    }
    let mut ranked: Vec<(u32, f64)> = present
        .iter()
        .enumerate()
        .map(|(id, with)| {
            let without = [totals[0] - with[0], totals[1] - with[1], totals[2] - with[2]];
            let n_with: f64 = with.iter().sum();
            let conditional = (n_with / n) * entropy(with) + ((n - n_with) / n) * entropy(&without);
            (id as u32, (prior - conditional).max(0.0))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}
