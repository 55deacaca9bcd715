//! Model files: vocabulary, replacement-table digest and learner parameters
//! in one JSON document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Classifier, ClassifierKind, MnnbModel, Prediction, RfModel};
use crate::corpus::{Corpus, TweetRecord};
use crate::error::{Error, Result};
use crate::jsonfmt::{self, FloatStyle};
use crate::text::{normalize, ngrams, vectorize, ReplacementTable, Vocabulary};

pub const MODEL_FORMAT: &str = "sensor-rank-model";
pub const MODEL_VERSION: u32 = 1;

/// A classifier bundled with the feature space it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceModel {
    pub vocabulary: Vocabulary,
    /// Digest of the replacement table used during training.
    pub table_digest: String,
    pub classifier: Classifier,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    kind: ClassifierKind,
    n_max: usize,
    replacement_table_hash: String,
    vocabulary: Vocabulary,
    params: Value,
}

impl RelevanceModel {
    /// Predicts one raw text. Fails if `table` differs from the training table.
    pub fn classify_text(&self, text: &str, table: &ReplacementTable) -> Result<Prediction> {
        self.check_table(table)?;
        Ok(self.predict_text(text, table))
    }

    fn check_table(&self, table: &ReplacementTable) -> Result<()> {
        let digest = table.digest();
        if digest != self.table_digest {
            return Err(Error::Model(format!(
                "replacement table {digest} differs from the one used in training ({})",
                self.table_digest
            )));
        }
        Ok(())
    }

    fn predict_text(&self, text: &str, table: &ReplacementTable) -> Prediction {
        let tokens = normalize(text, table);
        let grams = ngrams(&tokens, self.vocabulary.n_max()).expect("vocabulary n_max is validated");
        self.classifier.predict(&vectorize(&grams, &self.vocabulary))
    }

    pub fn to_json(&self) -> Result<String> {
        let params = match &self.classifier {
            Classifier::Mnnb(m) => serde_json::to_value(m)?,
            Classifier::Rf(m) => serde_json::to_value(m)?,
        };
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            kind: self.classifier.kind(),
            n_max: self.vocabulary.n_max(),
            replacement_table_hash: self.table_digest.clone(),
            vocabulary: self.vocabulary.clone(),
            params,
        };
        Ok(jsonfmt::to_string(&file, FloatStyle::Exact)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Model(format!("unexpected format `{}`", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(Error::Model(format!("unsupported version {}", file.version)));
        }
        if file.n_max != file.vocabulary.n_max() {
            return Err(Error::Model("n_max disagrees with the vocabulary".into()));
        }
        let classifier = match file.kind {
            ClassifierKind::Mnnb => {
                let m: MnnbModel = serde_json::from_value(file.params)?;
                m.validate()?;
                if m.vocab_size != file.vocabulary.len() {
                    return Err(Error::Model("vocab_size disagrees with the vocabulary".into()));
                }
                Classifier::Mnnb(m)
            }
            ClassifierKind::Rf => {
                let m: RfModel = serde_json::from_value(file.params)?;
                m.validate()?;
                Classifier::Rf(m)
            }
        };
        Ok(RelevanceModel {
            vocabulary: file.vocabulary,
            table_digest: file.replacement_table_hash,
            classifier,
        })
    }
}

pub fn write_model(path: &Path, model: &RelevanceModel) -> Result<()> {
    let mut json = model.to_json()?;
    json.push('\n');
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<RelevanceModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RelevanceModel::from_json(&text)
}

/// Copies `corpus` with every record's label replaced by the model's prediction.
pub fn classify_corpus(model: &RelevanceModel, corpus: &Corpus, table: &ReplacementTable) -> Result<Corpus> {
    model.check_table(table)?;
    let records: Vec<TweetRecord> = corpus
        .records
        .iter()
        .map(|r| TweetRecord {
            label: Some(model.predict_text(&r.text, table).label),
            ..r.clone()
        })
        .collect();
    Ok(Corpus {
        records,
        keyword_set: corpus.keyword_set.clone(),
    })
}
