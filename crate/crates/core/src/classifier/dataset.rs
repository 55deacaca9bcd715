use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::text::{normalize, vectorize, FeatureVector, ReplacementTable, Vocabulary};

/// Feature vectors with parallel gold labels over a vocabulary of
/// `n_features` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub vectors: Vec<FeatureVector>,
    pub labels: Vec<Label>,
    n_features: usize,
}

impl LabeledDataset {
    pub fn new(vectors: Vec<FeatureVector>, labels: Vec<Label>, n_features: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if let Some(id) = vectors.iter().filter_map(FeatureVector::max_id).max() {
            if id as usize >= n_features {
                return Err(Error::InvalidArgument(format!(
                    "feature id {id} outside vocabulary of {n_features}"
                )));
            }
        }
        Ok(LabeledDataset {
            vectors,
            labels,
            n_features,
        })
    }

    /// Vectorizes every record; each must carry a gold label.
    pub fn from_corpus(corpus: &Corpus, vocab: &Vocabulary, table: &ReplacementTable) -> Result<Self> {
        let mut vectors = Vec::with_capacity(corpus.len());
        let mut labels = Vec::with_capacity(corpus.len());
        for record in &corpus.records {
            let label = record.label.ok_or_else(|| {
                Error::InvalidArgument(format!("record `{}` has no label", record.id))
            })?;
            vectors.push(vectorize(&normalize(&record.text, table), vocab));
            labels.push(label);
        }
        Ok(LabeledDataset {
            vectors,
            labels,
            n_features: vocab.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Instance counts indexed by [`Label::index`].
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for label in &self.labels {
            counts[label.index()] += 1;
        }
        counts
    }

    pub(crate) fn require_all_classes(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        let counts = self.class_counts();
        match Label::ALL.iter().find(|l| counts[l.index()] == 0) {
            Some(&missing) => Err(Error::MissingClass(missing)),
            None => Ok(()),
        }
    }

    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            n_features: self.n_features,
        }
    }

    /// Appends `other`, e.g. extra annotated examples for one class.
    pub fn concat(&self, other: &LabeledDataset) -> Result<LabeledDataset> {
        if other.n_features != self.n_features {
            return Err(Error::InvalidArgument("datasets use different vocabularies".into()));
        }
        let mut out = self.clone();
        out.vectors.extend(other.vectors.iter().cloned());
        out.labels.extend(other.labels.iter().copied());
        Ok(out)
    }

    pub(crate) fn push(&mut self, vector: FeatureVector, label: Label) {
        self.vectors.push(vector);
        self.labels.push(label);
    }
}
