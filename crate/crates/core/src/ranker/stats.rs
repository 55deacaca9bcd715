use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::RankConfig;
use crate::corpus::{Label, TweetRecord};
use crate::error::{Error, Result};

/// Per-user activity counts over a classified harvest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserStats {
    pub user_id: String,
    /// Relevant tweets in the harvest, R_K(u).
    pub relevant_count: u64,
    /// Tweets in the harvest, T_K(u).
    pub harvest_count: u64,
    /// All tweets in the period, T(u).
    pub total_count: u64,
    /// Normalized occurrence; zero until set by `candidate_filter`.
    pub v: f64,
    /// `total_count` was not supplied and fell back to `harvest_count`.
    pub total_count_defaulted: bool,
}

/// Aggregates classified records by author. `total_count` is the largest
/// `user_total_tweets` seen for the user (never below `harvest_count`).
pub fn compute_user_stats<'a, I>(classified: I) -> Result<BTreeMap<String, UserStats>>
where
    I: IntoIterator<Item = (&'a TweetRecord, Label)>,
{
    let mut out: BTreeMap<String, (UserStats, Option<u64>)> = BTreeMap::new();
    for (record, label) in classified {
        let (stats, total) = out.entry(record.author.clone()).or_insert_with(|| {
            (
                UserStats {
                    user_id: record.author.clone(),
                    relevant_count: 0,
                    harvest_count: 0,
                    total_count: 0,
                    v: 0.0,
                    total_count_defaulted: false,
                },
                None,
            )
        });
        stats.harvest_count += 1;
        if label == Label::Relevant {
            stats.relevant_count += 1;
        }
        if let Some(t) = record.user_total_tweets {
            *total = Some(total.map_or(t, |seen| seen.max(t)));
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("classified corpus"));
    }
    Ok(out
        .into_iter()
        .map(|(id, (mut stats, total))| {
            match total {
                Some(t) => stats.total_count = t.max(stats.harvest_count),
                None => {
                    stats.total_count = stats.harvest_count;
                    stats.total_count_defaulted = true;
                }
            }
            (id, stats)
        })
        .collect())
}

/// Stats from records that already carry labels; unlabeled records are an error.
pub fn stats_from_labeled(records: &[TweetRecord]) -> Result<BTreeMap<String, UserStats>> {
    let mut pairs = Vec::with_capacity(records.len());
    for r in records {
        let label = r
            .label
            .ok_or_else(|| Error::InvalidArgument(format!("record `{}` has no label", r.id)))?;
        pairs.push((r, label));
    }
    compute_user_stats(pairs)
}

/// Relevant-tweet buckets used to summarize the long tail of per-user counts.
pub const TAIL_BUCKETS: [(u64, Option<u64>, &str); 7] = [
    (1, Some(1), "1"),
    (2, Some(2), "2"),
    (3, Some(3), "3"),
    (4, Some(4), "4"),
    (5, Some(9), "5-9"),
    (10, Some(19), "10-19"),
    (20, None, ">=20"),
];

/// Number of users in each `TAIL_BUCKETS` bucket; users with no relevant
/// tweets are not counted.
pub fn relevant_histogram<'a, I: IntoIterator<Item = &'a UserStats>>(stats: I) -> [u64; 7] {
    let mut out = [0; 7];
    for s in stats {
        if let Some(b) = TAIL_BUCKETS
            .iter()
            .position(|&(lo, hi, _)| s.relevant_count >= lo && hi.is_none_or(|h| s.relevant_count <= h))
        {
            out[b] += 1;
        }
    }
    out
}

/// Users with at least `min_relevant` relevant tweets and not excluded,
/// sorted by id, with `v` set to their share of the candidates' relevant tweets.
pub fn candidate_filter(
    stats: &BTreeMap<String, UserStats>,
    config: &RankConfig,
    excluded: &HashSet<String>,
) -> Result<Vec<UserStats>> {
    let mut out: Vec<UserStats> = stats
        .values()
        .filter(|s| s.relevant_count >= config.min_relevant && s.relevant_count > 0 && !excluded.contains(&s.user_id))
        .cloned()
        .collect();
    if out.is_empty() {
        return Err(Error::NoCandidates);
    }
    let total: u64 = out.iter().map(|s| s.relevant_count).sum();
    for s in &mut out {
        s.v = s.relevant_count as f64 / total as f64;
    }
    Ok(out)
}

/// `100 * R_K(u) / T_K(u)`.
pub fn topic_focus(u: &UserStats) -> Result<f64> {
    if u.harvest_count == 0 {
        return Err(Error::InvalidArgument(format!("user `{}` has no harvested tweets", u.user_id)));
    }
    Ok((100 * u.relevant_count) as f64 / u.harvest_count as f64)
}

/// `100 * R_K(u) / T(u)`.
pub fn overall_focus(u: &UserStats) -> Result<f64> {
    if u.total_count == 0 {
        return Err(Error::InvalidArgument(format!("user `{}` has no tweets in the period", u.user_id)));
    }
    Ok((100 * u.relevant_count) as f64 / u.total_count as f64)
}
