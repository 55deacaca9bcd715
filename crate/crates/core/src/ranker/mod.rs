//! Per-user statistics, candidate selection and the three ranking criteria.

mod components;
mod rank;
mod report;
mod stats;

use serde::{Deserialize, Serialize};

pub use components::{connected_components, ComponentSummary};
pub use rank::{build_transition, power_iterate, twitterrank, RankVector, TransitionMatrix};
pub use report::{ranking_report, score_candidates, Metric, RankingReport, ReportRow, TSV_HEADER};
pub use stats::{
    candidate_filter, compute_user_stats, overall_focus, relevant_histogram, stats_from_labeled, topic_focus,
    UserStats, TAIL_BUCKETS,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankConfig {
    /// Probability of following an edge rather than teleporting.
    pub gamma: f64,
    /// L1 residual at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    pub min_relevant: u64,
    /// Report size.
    pub k: usize,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            gamma: 0.85,
            tol: 1e-9,
            max_iter: 1000,
            min_relevant: 3,
            k: 10,
        }
    }
}
