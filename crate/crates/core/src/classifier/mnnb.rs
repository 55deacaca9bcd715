//! Multinomial Naive Bayes with Lidstone smoothing.

use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Prediction};
use crate::error::{Error, Result};
use crate::text::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnnbModel {
    /// `ln P(class)`, indexed by `Label::index`.
    pub class_log_prior: [f64; 3],
    /// `ln P(term | class)`, one row per class.
    pub term_log_prob: [Vec<f64>; 3],
    pub alpha: f64,
    pub vocab_size: usize,
}

/// Fits priors from class frequencies and
/// `ln((count(t, c) + alpha) / (total(c) + alpha * |V|))` per term.
pub fn train_mnnb(data: &LabeledDataset, alpha: f64) -> Result<MnnbModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    data.require_all_classes()?;
    let vocab_size = data.n_features();
    let mut counts = [vec![0.0; vocab_size], vec![0.0; vocab_size], vec![0.0; vocab_size]];
    let mut totals = [0.0; 3];
    for (vector, label) in data.vectors.iter().zip(&data.labels) {
        let c = label.index();
        for (id, value) in vector.iter() {
            counts[c][id as usize] += value;
            totals[c] += value;
        }
    }
    let n = data.len() as f64;
    let class_counts = data.class_counts();
    let class_log_prior = [0, 1, 2].map(|c| (class_counts[c] as f64 / n).ln());
    let term_log_prob = [0, 1, 2].map(|c| {
        let denom = totals[c] + alpha * vocab_size as f64;
        counts[c].iter().map(|&x| ((x + alpha) / denom).ln()).collect()
    });
    Ok(MnnbModel {
        class_log_prior,
        term_log_prob,
        alpha,
        vocab_size,
    })
}

impl MnnbModel {
    /// Joint log-likelihood per class; terms outside the vocabulary are ignored.
    pub fn log_scores(&self, v: &FeatureVector) -> [f64; 3] {
        let mut scores = self.class_log_prior;
        for (id, count) in v.iter() {
            if (id as usize) < self.vocab_size {
                for (c, score) in scores.iter_mut().enumerate() {
                    *score += count * self.term_log_prob[c][id as usize];
                }
            }
        }
        scores
    }

    pub fn predict(&self, v: &FeatureVector) -> Prediction {
        let scores = self.log_scores(v);
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp = scores.map(|s| (s - max).exp());
        let sum: f64 = exp.iter().sum();
        Prediction::from_probabilities(exp.map(|e| e / sum))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.term_log_prob.iter().any(|row| row.len() != self.vocab_size) {
            return Err(Error::Model("term_log_prob rows do not match vocab_size".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Model("alpha must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn fv(pairs: &[(u32, f64)]) -> FeatureVector {
        FeatureVector::from_pairs(pairs.iter().copied()).unwrap()
    }

    /// docs {a a}/Relevant, {b}/News, {a b}/Noise x2 over vocabulary {a=0, b=1}.
    fn toy() -> LabeledDataset {
        LabeledDataset::new(
            vec![fv(&[(0, 2.0)]), fv(&[(1, 1.0)]), fv(&[(0, 1.0), (1, 1.0)]), fv(&[(0, 1.0), (1, 1.0)])],
            vec![Label::Relevant, Label::News, Label::Noise, Label::Noise],
            2,
        )
        .unwrap()
    }

    #[test]
    fn toy_parameters_by_hand() {
        let m = train_mnnb(&toy(), 1.0).unwrap();
        // priors 1/4, 1/4, 2/4
        assert!((m.class_log_prior[0] - 0.25f64.ln()).abs() < 1e-15);
        assert!((m.class_log_prior[2] - 0.5f64.ln()).abs() < 1e-15);
        // Relevant: a=(2+1)/(2+2), b=(0+1)/(2+2)
        assert!((m.term_log_prob[0][0] - 0.75f64.ln()).abs() < 1e-15);
        assert!((m.term_log_prob[0][1] - 0.25f64.ln()).abs() < 1e-15);
        // News: a=1/3, b=2/3; Noise: a=(2+1)/(4+2)=1/2
        assert!((m.term_log_prob[1][1] - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((m.term_log_prob[2][0] - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn toy_posterior_by_hand() {
        let m = train_mnnb(&toy(), 1.0).unwrap();
        let p = m.predict(&fv(&[(0, 2.0)]));
        // unnormalized: R 1/4*9/16, N 1/4*1/9, Noise 1/2*1/4
        let raw = [0.25 * 9.0 / 16.0, 0.25 / 9.0, 0.5 * 0.25];
        let z: f64 = raw.iter().sum();
        for c in 0..3 {
            assert!((p.probabilities[c] - raw[c] / z).abs() < 1e-12);
        }
        assert_eq!(p.label, Label::Relevant);
    }

    #[test]
    fn empty_vector_predicts_prior_argmax() {
        let m = train_mnnb(&toy(), 1.0).unwrap();
        let p = m.predict(&FeatureVector::default());
        assert_eq!(p.label, Label::Noise);
        assert!((p.probabilities[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn balanced_priors_are_equal() {
        let data = LabeledDataset::new(
            vec![fv(&[(0, 1.0)]), fv(&[(1, 1.0)]), fv(&[(2, 1.0)])],
            vec![Label::Relevant, Label::News, Label::Noise],
            3,
        )
        .unwrap();
        let m = train_mnnb(&data, 1.0).unwrap();
        for c in 0..3 {
            assert!((m.class_log_prior[c] - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let single =
            LabeledDataset::new(vec![fv(&[(0, 1.0)]), fv(&[(1, 1.0)])], vec![Label::News, Label::News], 2).unwrap();
        assert!(matches!(train_mnnb(&single, 1.0), Err(Error::MissingClass(Label::Relevant))));
        assert!(train_mnnb(&toy(), 0.0).is_err());
        let empty = LabeledDataset::new(vec![], vec![], 2).unwrap();
        assert!(matches!(train_mnnb(&empty, 1.0), Err(Error::Empty(_))));
    }

    #[test]
    fn distributions_normalize() {
        let m = train_mnnb(&toy(), 0.5).unwrap();
        let prior: f64 = m.class_log_prior.iter().map(|l| l.exp()).sum();
        assert!((prior - 1.0).abs() < 1e-9);
        for row in &m.term_log_prob {
            let s: f64 = row.iter().map(|l| l.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }
}
