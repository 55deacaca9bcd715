//! Text normalization, n-gram features and TF-IDF keyword ranking.

mod features;
mod normalize;

pub use features::{
    build_vocabulary, ngrams, tfidf_rank, vectorize, FeatureVector, Vocabulary, NGRAM_JOIN,
};
pub use normalize::{
    fold_token, normalize, Replacement, ReplacementTable, TokenSequence, DROP_MARKER, FUNNY_TOKEN,
    IMAGE_TOKEN, NUMBER_TOKEN, URL_TOKEN,
};
