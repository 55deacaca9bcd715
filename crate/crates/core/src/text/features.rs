use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::normalize::{fold_token, normalize, ReplacementTable, TokenSequence};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Separator between the tokens of an n-gram term.
pub const NGRAM_JOIN: char = '_';

/// All contiguous k-grams for `k = 1..=n_max`, ordered by (position, k).
pub fn ngrams(tokens: &[String], n_max: usize) -> Result<Vec<String>> {
    check_n_max(n_max)?;
    Ok(ngrams_unchecked(tokens, n_max))
}

fn check_n_max(n_max: usize) -> Result<()> {
    if (1..=3).contains(&n_max) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("n_max must be 1, 2 or 3, got {n_max}")))
    }
}

fn ngrams_unchecked(tokens: &[String], n_max: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len() * n_max);
    for start in 0..tokens.len() {
        let mut term = String::new();
        for (k, token) in tokens[start..].iter().take(n_max).enumerate() {
            if k > 0 {
                term.push(NGRAM_JOIN);
            }
            term.push_str(token);
            out.push(term.clone());
        }
    }
    out
}

/// Dense term ids over an n-gram vocabulary, with document frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyParts", into = "VocabularyParts")]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_id: HashMap<String, u32>,
    doc_freq: Vec<u32>,
    n_max: usize,
    doc_count: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyParts {
    n_max: usize,
    doc_count: usize,
    terms: Vec<String>,
    doc_freq: Vec<u32>,
}

impl TryFrom<VocabularyParts> for Vocabulary {
    type Error = Error;

    fn try_from(parts: VocabularyParts) -> Result<Self> {
        Vocabulary::from_parts(parts.terms, parts.doc_freq, parts.n_max, parts.doc_count)
    }
}

impl From<Vocabulary> for VocabularyParts {
    fn from(v: Vocabulary) -> Self {
        VocabularyParts {
            n_max: v.n_max,
            doc_count: v.doc_count,
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    /// Vocabulary over already-normalized documents; ids follow first appearance.
    pub fn from_documents<'a, I>(documents: I, n_max: usize) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        check_n_max(n_max)?;
        let mut terms = Vec::new();
        let mut term_to_id: HashMap<String, u32> = HashMap::new();
        let mut doc_freq: Vec<u32> = Vec::new();
        let mut doc_count = 0;
        let mut seen_in_doc = HashSet::new();
        for doc in documents {
            doc_count += 1;
            seen_in_doc.clear();
            for term in ngrams_unchecked(doc, n_max) {
                let id = match term_to_id.get(&term) {
                    Some(&id) => id,
                    None => {
                        let id = terms.len() as u32;
                        term_to_id.insert(term.clone(), id);
                        terms.push(term);
                        doc_freq.push(0);
                        id
                    }
                };
                if seen_in_doc.insert(id) {
                    doc_freq[id as usize] += 1;
                }
            }
        }
        if doc_count == 0 {
            return Err(Error::Empty("corpus"));
        }
        Ok(Vocabulary {
            terms,
            term_to_id,
            doc_freq,
            n_max,
            doc_count,
        })
    }

    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<u32>, n_max: usize, doc_count: usize) -> Result<Self> {
        check_n_max(n_max)?;
        if terms.len() != doc_freq.len() {
            return Err(Error::Model("vocabulary terms and doc_freq differ in length".into()));
        }
        if doc_freq.iter().any(|&df| df == 0 || df as usize > doc_count) {
            return Err(Error::Model("vocabulary doc_freq out of range".into()));
        }
        let mut term_to_id = HashMap::with_capacity(terms.len());
        for (id, term) in terms.iter().enumerate() {
            if term_to_id.insert(term.clone(), id as u32).is_some() {
                return Err(Error::Model(format!("vocabulary repeats term `{term}`")));
            }
        }
        Ok(Vocabulary {
            terms,
            term_to_id,
            doc_freq,
            n_max,
            doc_count,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.term_to_id.get(term).copied()
    }

    pub fn term(&self, id: u32) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, id: u32) -> u32 {
        self.doc_freq[id as usize]
    }
}

/// Vocabulary over every normalized record of `corpus`.
pub fn build_vocabulary(corpus: &Corpus, table: &ReplacementTable, n_max: usize) -> Result<Vocabulary> {
    check_n_max(n_max)?;
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let docs: Vec<TokenSequence> = corpus.records.iter().map(|r| normalize(&r.text, table)).collect();
    Vocabulary::from_documents(&docs, n_max)
}

/// Sparse term-id → count vector. Entries are sorted by id and never zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    /// Builds a vector from arbitrary `(id, value)` pairs; duplicate ids are
    /// summed and zeros dropped. Negative or non-finite values are rejected.
    pub fn from_pairs<I: IntoIterator<Item = (u32, f64)>>(pairs: I) -> Result<Self> {
        let mut map: BTreeMap<u32, f64> = BTreeMap::new();
        for (id, value) in pairs {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidArgument(format!("feature {id} has invalid value {value}")));
            }
            *map.entry(id).or_insert(0.0) += value;
        }
        Ok(FeatureVector {
            entries: map.into_iter().filter(|&(_, v)| v != 0.0).collect(),
        })
    }

    /// Trusted constructor for entries already sorted, unique and positive.
    pub(crate) fn from_sorted(entries: Vec<(u32, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v > 0.0));
        FeatureVector { entries }
    }

    pub fn get(&self, id: u32) -> f64 {
        match self.entries.binary_search_by_key(&id, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn max_id(&self) -> Option<u32> {
        self.entries.last().map(|&(id, _)| id)
    }

    /// Squared Euclidean distance, merging the two sorted entry lists.
    pub fn squared_distance(&self, other: &FeatureVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(&(ia, va)), Some(&(ib, vb))) => match ia.cmp(&ib) {
                    Ordering::Less => {
                        i += 1;
                        va
                    }
                    Ordering::Greater => {
                        j += 1;
                        vb
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        va - vb
                    }
                },
                (Some(&(_, va)), None) => {
                    i += 1;
                    va
                }
                (None, Some(&(_, vb))) => {
                    j += 1;
                    vb
                }
                (None, None) => unreachable!(),
            };
            acc += d * d;
        }
        acc
    }
}

/// Counts the in-vocabulary n-grams of `tokens`.
pub fn vectorize(tokens: &[String], vocab: &Vocabulary) -> FeatureVector {
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for term in ngrams_unchecked(tokens, vocab.n_max) {
        if let Some(id) = vocab.id(&term) {
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
    }
    FeatureVector::from_sorted(counts.into_iter().collect())
}

/// Corpus-level TF-IDF: `tf(t) * ln(N / df(t))`, where `tf` is the total
/// count of `t` over the corpus. A term is skipped when it, or any token of
/// an n-gram term, is a stopword. Sorted by score descending, then term.
pub fn tfidf_rank(
    corpus: &Corpus,
    vocab: &Vocabulary,
    stopwords: &HashSet<String>,
    table: &ReplacementTable,
) -> Vec<(String, f64)> {
    let stopwords: HashSet<String> = stopwords.iter().map(|s| fold_token(s.trim())).collect();
    let mut tf = vec![0u64; vocab.len()];
    for record in &corpus.records {
        let tokens = normalize(&record.text, table);
        for term in ngrams_unchecked(&tokens, vocab.n_max) {
            if let Some(id) = vocab.id(&term) {
                tf[id as usize] += 1;
            }
        }
    }
    let n = vocab.doc_count as f64;
    let mut ranked: Vec<(String, f64)> = vocab
        .terms
        .iter()
        .enumerate()
        .filter(|(_, term)| !term.split(NGRAM_JOIN).any(|t| stopwords.contains(t)))
        .map(|(id, term)| {
            let idf = (n / vocab.doc_freq[id] as f64).ln();
            (term.clone(), tf[id] as f64 * idf)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}
