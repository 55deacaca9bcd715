//! Seeded synthetic harvests and reference oracles for testing.

mod generate;
mod oracle;

pub use generate::{
    generate, keyword_plant_corpus, reference_histogram, PlantedInfluencer, SynthConfig, SynthData, TailBucket,
    EXPANSION_KEYWORDS, SEED_KEYWORDS,
};
pub use oracle::{oracle_linear_solve, oracle_nb_posterior};
