use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{overall_focus, topic_focus, RankVector, UserStats};
use crate::error::{Error, Result};
use crate::jsonfmt::{self, FloatStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// TwitterRank.
    Tr,
    /// Topic focus.
    Tf,
    /// Overall focus.
    Of,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Tr, Metric::Tf, Metric::Of];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Tr => "tr",
            Metric::Tf => "tf",
            Metric::Of => "of",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tr" => Ok(Metric::Tr),
            "tf" => Ok(Metric::Tf),
            "of" => Ok(Metric::Of),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub user_id: String,
    pub relevant_count: u64,
    pub harvest_count: u64,
    pub total_count: u64,
    /// TwitterRank score (unscaled).
    pub tr_score: f64,
    pub tr_rank: usize,
    pub topic_focus: f64,
    pub tf_rank: usize,
    pub overall_focus: f64,
    pub of_rank: usize,
    pub total_count_defaulted: bool,
}

impl ReportRow {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Tr => self.tr_score,
            Metric::Tf => self.topic_focus,
            Metric::Of => self.overall_focus,
        }
    }

    pub fn rank(&self, metric: Metric) -> usize {
        match metric {
            Metric::Tr => self.tr_rank,
            Metric::Tf => self.tf_rank,
            Metric::Of => self.of_rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub metric: Metric,
    pub rows: Vec<ReportRow>,
}

fn by_metric(metric: Metric) -> impl Fn(&ReportRow, &ReportRow) -> Ordering {
    move |a, b| b.value(metric).total_cmp(&a.value(metric)).then_with(|| a.user_id.cmp(&b.user_id))
}

/// All candidates with their three scores and 1-based positions under each
/// metric (descending, ties by user id).
pub fn score_candidates(candidates: &[UserStats], ranks: &RankVector) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::with_capacity(candidates.len());
    for c in candidates {
        let tr_score = ranks
            .score(&c.user_id)
            .ok_or_else(|| Error::InvalidArgument(format!("no TwitterRank score for `{}`", c.user_id)))?;
        rows.push(ReportRow {
            user_id: c.user_id.clone(),
            relevant_count: c.relevant_count,
            harvest_count: c.harvest_count,
            total_count: c.total_count,
            tr_score,
            tr_rank: 0,
            topic_focus: topic_focus(c)?,
            tf_rank: 0,
            overall_focus: overall_focus(c)?,
            of_rank: 0,
            total_count_defaulted: c.total_count_defaulted,
        });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for metric in Metric::ALL {
        let cmp = by_metric(metric);
        order.sort_by(|&a, &b| cmp(&rows[a], &rows[b]));
        for (pos, &i) in order.iter().enumerate() {
            match metric {
                Metric::Tr => rows[i].tr_rank = pos + 1,
                Metric::Tf => rows[i].tf_rank = pos + 1,
                Metric::Of => rows[i].of_rank = pos + 1,
            }
        }
    }
    Ok(rows)
}

/// Top-`k` rows under `metric`.
pub fn ranking_report(candidates: &[UserStats], ranks: &RankVector, metric: Metric, k: usize) -> Result<RankingReport> {
    if k < 1 {
        return Err(Error::InvalidArgument("report size k must be at least 1".into()));
    }
    let mut rows = score_candidates(candidates, ranks)?;
    rows.sort_by(by_metric(metric));
    rows.truncate(k);
    Ok(RankingReport { metric, rows })
}

pub const TSV_HEADER: &str = "user_id\trelevant_count\tharvest_count\ttotal_count\ttr_score\ttr_rank\ttopic_focus\ttf_rank\toverall_focus\tof_rank\ttotal_count_defaulted";

#[derive(Serialize)]
struct JsonRow<'a> {
    user_id: &'a str,
    relevant_count: u64,
    harvest_count: u64,
    total_count: u64,
    tr_score: f64,
    tr_rank: usize,
    topic_focus: f64,
    tf_rank: usize,
    overall_focus: f64,
    of_rank: usize,
    total_count_defaulted: bool,
}

impl RankingReport {
    /// Tab-separated table; TR is shown x100, reals with 4 decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.4}\t{}\t{:.4}\t{}\t{:.4}\t{}\t{}\n",
                r.user_id,
                r.relevant_count,
                r.harvest_count,
                r.total_count,
                r.tr_score * 100.0,
                r.tr_rank,
                r.topic_focus,
                r.tf_rank,
                r.overall_focus,
                r.of_rank,
                r.total_count_defaulted
            ));
        }
        out
    }

    /// JSON array with the same columns and scaling as `to_tsv`.
    pub fn to_json(&self) -> Result<String> {
        let rows: Vec<JsonRow> = self
            .rows
            .iter()
            .map(|r| JsonRow {
                user_id: &r.user_id,
                relevant_count: r.relevant_count,
                harvest_count: r.harvest_count,
                total_count: r.total_count,
                tr_score: r.tr_score * 100.0,
                tr_rank: r.tr_rank,
                topic_focus: r.topic_focus,
                tf_rank: r.tf_rank,
                overall_focus: r.overall_focus,
                of_rank: r.of_rank,
                total_count_defaulted: r.total_count_defaulted,
            })
            .collect();
        Ok(jsonfmt::to_string_pretty(&rows, FloatStyle::Fixed(4))?)
    }
}
