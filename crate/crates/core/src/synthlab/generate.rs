use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use chrono::{DateTime, Duration, SecondsFormat, Utc};
use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, FollowerGraph, Label, TweetRecord};
use crate::error::{Error, Result};
use crate::rng;

pub const SEED_KEYWORDS: [&str; 8] = [
    "dengue",
    "combateadengue",
    "focodengue",
    "todoscontradengue",
    "aedeseagypti",
    "zika",
    "chikungunya",
    "virus",
];

pub const EXPANSION_KEYWORDS: [&str; 10] = [
    "microcefalia",
    "transmitido",
    "epidemia",
    "transmissao",
    "doenca",
    "eagypti",
    "doencas",
    "gestantes",
    "infeccao",
    "mosquitos",
];

/// Users whose relevant count falls in `[min, max]` (`max = None` is open).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBucket {
    pub min: u64,
    pub max: Option<u64>,
    pub users: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedInfluencer {
    pub user_id: String,
    pub relevant_count: u64,
    /// Number of other candidates that follow this user.
    pub fan_in: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    /// Relevant, News and Noise vocabularies; pairwise disjoint.
    pub class_vocabularies: [Vec<String>; 3],
    /// Words shared by all classes.
    pub common_vocabulary: Vec<String>,
    /// One of these appears in every tweet, so the whole corpus is a harvest.
    pub harvest_keywords: Vec<String>,
    /// Target proportions of Relevant, News and Noise tweets.
    pub class_mix: [f64; 3],
    /// Probability that a token is drawn from another class's vocabulary.
    pub cross_class_noise: f64,
    /// Probability that a token is drawn from the common vocabulary.
    pub common_rate: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Per-user relevant-tweet histogram; users not covered post no relevant tweets.
    pub tail_histogram: Vec<TailBucket>,
    /// Largest relevant count drawn for ordinary users of an open bucket.
    pub open_bucket_max: u64,
    /// The first entry is the expected leader.
    pub planted_influencers: Vec<PlantedInfluencer>,
    /// Relevant count at which a user becomes a ranking candidate.
    pub candidate_min_relevant: u64,
    /// Mean number of users each user follows.
    pub edge_density: f64,
    /// Range of off-harvest tweets added to each ordinary user's total.
    pub extra_tweets: (u64, u64),
    /// Off-harvest tweets of planted influencers.
    pub influencer_extra_tweets: u64,
    /// Size of the labeled training sample drawn from the corpus.
    pub training_size: usize,
    pub start: String,
    pub window_days: i64,
}

fn pseudo_words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

/// Per-user relevant-tweet distribution of the reference harvest.
pub fn reference_histogram() -> Vec<TailBucket> {
    [(1, Some(1), 11860), (2, Some(2), 1058), (3, Some(3), 209), (4, Some(4), 57), (5, Some(9), 41), (10, Some(19), 1), (20, None, 2)]
        .into_iter()
        .map(|(min, max, users)| TailBucket { min, max, users })
        .collect()
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_users: 14_000,
            class_vocabularies: [pseudo_words("rel", 200), pseudo_words("news", 200), pseudo_words("noise", 200)],
            common_vocabulary: pseudo_words("word", 100),
            harvest_keywords: SEED_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            class_mix: [0.121, 0.506, 0.373],
            cross_class_noise: 0.15,
            common_rate: 0.25,
            min_tokens: 6,
            max_tokens: 14,
            tail_histogram: reference_histogram(),
            open_bucket_max: 35,
            planted_influencers: vec![PlantedInfluencer {
                user_id: "influencer".into(),
                relevant_count: 40,
                fan_in: 40,
            }],
            candidate_min_relevant: 3,
            edge_density: 4.0,
            extra_tweets: (10, 2000),
            influencer_extra_tweets: 2,
            training_size: 10_000,
            start: "2016-01-01T00:00:00Z".into(),
            window_days: 90,
        }
    }
}

impl SynthConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let mix: f64 = self.class_mix.iter().sum();
        if (mix - 1.0).abs() > 1e-9 || self.class_mix.iter().any(|&m| !(m > 0.0)) {
            return bad(format!("class_mix must be positive and sum to 1, got {mix}"));
        }
        let mut seen = HashSet::new();
        for vocab in self.class_vocabularies.iter() {
            if vocab.is_empty() {
                return bad("class vocabularies must be nonempty".into());
            }
            for w in vocab {
                if !seen.insert(w.as_str()) {
                    return bad(format!("term `{w}` appears in more than one class vocabulary"));
                }
            }
        }
        if self.harvest_keywords.is_empty() {
            return bad("harvest_keywords must be nonempty".into());
        }
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return bad("token length range is empty".into());
        }
        if !(0.0..=1.0).contains(&(self.cross_class_noise + self.common_rate)) || self.cross_class_noise < 0.0 || self.common_rate < 0.0 {
            return bad("noise and common rates must be probabilities summing to at most 1".into());
        }
        if self.extra_tweets.0 > self.extra_tweets.1 || !(self.edge_density >= 0.0) {
            return bad("invalid extra_tweets or edge_density".into());
        }
        for b in &self.tail_histogram {
            if b.min == 0 || b.max.is_some_and(|m| m < b.min) {
                return bad(format!("invalid histogram bucket starting at {}", b.min));
            }
            if b.max.is_none() && self.open_bucket_max < b.min {
                return bad("open_bucket_max lies below the open bucket".into());
            }
        }
        let demanded: usize = self.tail_histogram.iter().map(|b| b.users).sum();
        if demanded > self.n_users {
            return bad(format!("histogram demands {demanded} users but n_users is {}", self.n_users));
        }
        chrono::DateTime::parse_from_rfc3339(&self.start)
            .map_err(|e| Error::InvalidArgument(format!("invalid start `{}`: {e}", self.start)))?;
        Ok(())
    }
}

/// Output of `generate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    /// Unlabeled harvest, records ordered by id and time.
    pub corpus: Corpus,
    pub graph: FollowerGraph,
    /// Gold label of each corpus record.
    pub gold: Vec<Label>,
    /// Record indices of the labeled training sample, ascending.
    pub training: Vec<usize>,
}

impl SynthData {
    /// The corpus with gold labels attached.
    pub fn labeled(&self) -> Corpus {
        self.with_labels(0..self.corpus.len())
    }

    /// The training sample with gold labels attached.
    pub fn training_corpus(&self) -> Corpus {
        self.with_labels(self.training.iter().copied())
    }

    fn with_labels(&self, indices: impl Iterator<Item = usize>) -> Corpus {
        Corpus {
            records: indices
                .map(|i| TweetRecord {
                    label: Some(self.gold[i]),
                    ..self.corpus.records[i].clone()
                })
                .collect(),
            keyword_set: None,
        }
    }
}

struct User {
    id: String,
    relevant: u64,
    other: u64,
    extra: u64,
}

/// Draws each user's relevant count from the histogram; planted influencers
/// take the first slot of the bucket containing their count.
fn relevant_counts(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<(Vec<(Option<usize>, u64)>, u64)> {
    let top = config.planted_influencers.first().map(|p| p.relevant_count);
    let mut remaining: Vec<usize> = config.tail_histogram.iter().map(|b| b.users).collect();
    let mut out = Vec::with_capacity(config.n_users);
    for (k, p) in config.planted_influencers.iter().enumerate() {
        let bucket = config
            .tail_histogram
            .iter()
            .position(|b| p.relevant_count >= b.min && b.max.is_none_or(|m| p.relevant_count <= m))
            .filter(|&b| remaining[b] > 0)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("no histogram slot for influencer `{}`", p.user_id))
            })?;
        if k > 0 && Some(p.relevant_count) >= top {
            return Err(Error::InvalidArgument("the first planted influencer must have the largest count".into()));
        }
        remaining[bucket] -= 1;
        out.push((Some(k), p.relevant_count));
    }
    let cap = top.map_or(u64::MAX, |t| t - 1);
    for (b, bucket) in config.tail_histogram.iter().enumerate() {
        let hi = bucket.max.unwrap_or(config.open_bucket_max).min(cap);
        if remaining[b] > 0 && hi < bucket.min {
            return Err(Error::InvalidArgument(format!(
                "bucket starting at {} cannot stay below the leading influencer",
                bucket.min
            )));
        }
        for _ in 0..remaining[b] {
            out.push((None, rng.random_range(bucket.min..=hi)));
        }
    }
    out.resize(config.n_users, (None, 0));
    let total = out.iter().map(|&(_, r)| r).sum();
    Ok((out, total))
}

fn tweet_text(config: &SynthConfig, label: Label, rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(config.min_tokens..=config.max_tokens);
    let own = label.index();
    let mut tokens: Vec<&str> = Vec::with_capacity(len + 1);
    for _ in 0..len {
        let r: f64 = rng.random();
        let word = if r < config.cross_class_noise {
            let other = (own + rng.random_range(1..3)) % 3;
            config.class_vocabularies[other].choose(rng)
        } else if r < config.cross_class_noise + config.common_rate && !config.common_vocabulary.is_empty() {
            config.common_vocabulary.choose(rng)
        } else {
            config.class_vocabularies[own].choose(rng)
        };
        tokens.push(word.expect("nonempty vocabulary"));
    }
    let at = rng.random_range(0..=tokens.len());
    tokens.insert(at, config.harvest_keywords.choose(rng).expect("nonempty keywords"));
    tokens.join(" ")
}

/// Builds a labeled harvest, follower graph and training sample from `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = rng::stream(config.seed, 0);
    let (counts, relevant_total) = relevant_counts(config, &mut rng)?;
    let n_influencers = config.planted_influencers.len();

    let total_tweets = (relevant_total as f64 / config.class_mix[0]).round() as u64;
    let other_total = total_tweets.saturating_sub(relevant_total);
    let ordinary = config.n_users - n_influencers;
    if other_total < ordinary as u64 {
        return Err(Error::InvalidArgument(format!(
            "{other_total} non-relevant tweets cannot give each of {ordinary} users one"
        )));
    }

    // Ordinary users all post at least one non-relevant harvest tweet.
    let mut order: Vec<usize> = (n_influencers..config.n_users).collect();
    order.shuffle(&mut rng);
    let mut users: Vec<User> = counts
        .iter()
        .map(|&(planted, relevant)| User {
            id: planted.map_or_else(String::new, |k| config.planted_influencers[k].user_id.clone()),
            relevant,
            other: u64::from(planted.is_none()),
            extra: config.influencer_extra_tweets,
        })
        .collect();
    let width = config.n_users.to_string().len().max(5);
    let mut taken: HashSet<String> = config.planted_influencers.iter().map(|p| p.user_id.clone()).collect();
    for (pos, &u) in order.iter().enumerate() {
        let mut id = format!("u{:0width$}", pos + 1);
        while taken.contains(&id) {
            id.push('x');
        }
        taken.insert(id.clone());
        users[u].id = id;
        users[u].extra = rng.random_range(config.extra_tweets.0..=config.extra_tweets.1);
    }
    if ordinary > 0 {
        for _ in 0..other_total - ordinary as u64 {
            users[order[rng.random_range(0..ordinary)]].other += 1;
        }
    }

    let news_total = (total_tweets as f64 * config.class_mix[1]).round().min(other_total as f64) as u64;
    let mut other_labels: Vec<Label> = (0..other_total)
        .map(|i| if i < news_total { Label::News } else { Label::Noise })
        .collect();
    other_labels.shuffle(&mut rng);

    let mut tweets: Vec<(usize, Label)> = Vec::with_capacity(total_tweets as usize);
    let mut next_other = other_labels.into_iter();
    for (u, user) in users.iter().enumerate() {
        tweets.extend(std::iter::repeat_n((u, Label::Relevant), user.relevant as usize));
        for _ in 0..user.other {
            tweets.push((u, next_other.next().expect("label per tweet")));
        }
    }
    tweets.shuffle(&mut rng);

    let start: DateTime<Utc> = DateTime::parse_from_rfc3339(&config.start).expect("validated").with_timezone(&Utc);
    let window = Duration::days(config.window_days).num_seconds().max(1);
    let id_width = tweets.len().to_string().len().max(7);
    let mut text_rng = rng::stream(config.seed, 1);
    let mut records = Vec::with_capacity(tweets.len());
    let mut gold = Vec::with_capacity(tweets.len());
    for (n, &(u, label)) in tweets.iter().enumerate() {
        let user = &users[u];
        let at = start + Duration::seconds(n as i64 * window / tweets.len() as i64);
        records.push(TweetRecord {
            id: format!("t{:0id_width$}", n + 1),
            author: user.id.clone(),
            text: tweet_text(config, label, &mut text_rng),
            created_at: at.to_rfc3339_opts(SecondsFormat::Secs, true),
            label: None,
            user_total_tweets: Some(user.relevant + user.other + user.extra),
        });
        gold.push(label);
    }

    let graph = follower_graph(config, &users, &mut rng::stream(config.seed, 2))?;

    let mut sample_rng = rng::stream(config.seed, 3);
    let mut training: Vec<usize> = index::sample(&mut sample_rng, records.len(), config.training_size.min(records.len())).into_vec();
    training.sort_unstable();

    Ok(SynthData {
        corpus: Corpus::new(records)?,
        graph,
        gold,
        training,
    })
}

/// Random follows with mean out-degree `edge_density`, plus candidate
/// followers of each planted influencer. No other candidate receives as many
/// candidate followers as the leading influencer.
fn follower_graph(config: &SynthConfig, users: &[User], rng: &mut ChaCha8Rng) -> Result<FollowerGraph> {
    let n = users.len();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    if n > 1 {
        let max_degree = (2.0 * config.edge_density).round() as usize;
        for u in 0..n {
            let d = rng.random_range(0..=max_degree);
            for _ in 0..d {
                let mut v = rng.random_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                edges.insert((u, v));
            }
        }
    }
    let candidates: Vec<usize> = (0..n).filter(|&u| users[u].relevant >= config.candidate_min_relevant).collect();
    for (k, p) in config.planted_influencers.iter().enumerate() {
        let pool: Vec<usize> = candidates.iter().copied().filter(|&c| c != k).collect();
        if p.fan_in > pool.len() {
            return Err(Error::InvalidArgument(format!(
                "influencer `{}` wants {} candidate followers but only {} exist",
                p.user_id,
                p.fan_in,
                pool.len()
            )));
        }
        for i in index::sample(rng, pool.len(), p.fan_in) {
            edges.insert((pool[i], k));
        }
    }
    if let Some(leader) = config.planted_influencers.first() {
        let is_candidate: HashSet<usize> = candidates.iter().copied().collect();
        let mut fan_in: BTreeMap<usize, usize> = BTreeMap::new();
        edges.retain(|&(a, b)| {
            if b == 0 || !is_candidate.contains(&a) || !is_candidate.contains(&b) {
                return true;
            }
            let f = fan_in.entry(b).or_default();
            *f += 1;
            *f < leader.fan_in
        });
    }
    let mut graph = FollowerGraph::new();
    for (a, b) in edges {
        graph.add_edge(&users[a].id, &users[b].id)?;
    }
    Ok(graph)
}

/// A small corpus in which every document mentions a seed keyword and the
/// given expansion terms are frequent but not universal, while filler words
/// are either universal (zero IDF) or rare.
pub fn keyword_plant_corpus(seeds: &[&str], expansions: &[&str], n_docs: usize, seed: u64) -> Result<Corpus> {
    if seeds.is_empty() || n_docs < 2 {
        return Err(Error::InvalidArgument("need seeds and at least 2 documents".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let universal = ["de", "que", "para"];
    let mut records = Vec::with_capacity(n_docs);
    for d in 0..n_docs {
        let mut tokens: Vec<String> = universal.iter().map(|s| s.to_string()).collect();
        tokens.push(seeds[d % seeds.len()].to_string());
        for (k, term) in expansions.iter().enumerate() {
            // each term in roughly a third of the documents, twice when present
            if (d + k) % 3 == 0 {
                tokens.push(term.to_string());
                tokens.push(term.to_string());
            }
        }
        tokens.push(format!("raro{d:04}"));
        tokens.shuffle(&mut rng);
        records.push(TweetRecord {
            id: format!("k{d:05}"),
            author: format!("w{:03}", d % 50),
            text: tokens.join(" "),
            created_at: "2016-01-15T12:00:00Z".into(),
            label: None,
            user_total_tweets: None,
        });
    }
    Corpus::new(records)
}
