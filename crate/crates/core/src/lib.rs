//! Relevance classification of short social-media posts and ranking of the
//! users who post them (TwitterRank, topic focus, overall focus).

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod jsonfmt;
pub mod ranker;
pub mod rng;
pub mod synthlab;
pub mod text;

pub use error::{Error, Result};
