//! Tweet corpora and follower graphs: domain types plus the line-oriented
//! file formats they are stored in.
//!
//! * tweet records: one JSON object per line (`id`, `user`, `text`,
//!   `created_at`, optional `label` and `user_total_tweets`);
//! * follower edges: headerless CSV, one `follower_id,friend_id` per line.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{fold_token, normalize, ReplacementTable};

/// Relevance class of a post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Relevant,
    News,
    Noise,
}

impl Label {
    /// All labels in tie-break order.
    pub const ALL: [Label; 3] = [Label::Relevant, Label::News, Label::Noise];

    pub fn index(self) -> usize {
        match self {
            Label::Relevant => 0,
            Label::News => 1,
            Label::Noise => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Relevant => "relevant",
            Label::News => "news",
            Label::Noise => "noise",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "relevant" => Ok(Label::Relevant),
            "news" => Ok(Label::News),
            "noise" => Ok(Label::Noise),
            other => Err(Error::InvalidArgument(format!("unknown label `{other}`"))),
        }
    }
}

/// One harvested post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    #[serde(rename = "user")]
    pub author: String,
    pub text: String,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    /// The author's total number of posts over the harvest period, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_total_tweets: Option<u64>,
}

impl TweetRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if self.id.is_empty() {
            return Err("empty `id`".into());
        }
        if self.author.is_empty() {
            return Err("empty `user`".into());
        }
        if self.text.trim().is_empty() {
            return Err(format!("record `{}` has empty text", self.id));
        }
        parse_timestamp(&self.created_at)
            .map_err(|e| format!("record `{}`: bad created_at `{}`: {e}", self.id, self.created_at))?;
        Ok(())
    }
}

fn parse_timestamp(s: &str) -> std::result::Result<(), chrono::ParseError> {
    if chrono::DateTime::parse_from_rfc3339(s).is_ok() {
        return Ok(());
    }
    chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").map(|_| ())
}

/// Normalized keywords used to filter a harvest.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KeywordSet(BTreeSet<String>);

impl KeywordSet {
    /// Builds a set from raw keywords; each is lowercased and accent-folded.
    /// Blank entries are skipped.
    pub fn new<I, S>(keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        KeywordSet(
            keywords
                .into_iter()
                .map(|k| fold_token(k.as_ref().trim()))
                .filter(|k| !k.is_empty())
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(KeywordSet::new(read_id_list(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn insert(&mut self, keyword: &str) {
        let folded = fold_token(keyword.trim());
        if !folded.is_empty() {
            self.0.insert(folded);
        }
    }
}

/// An ordered collection of records with pairwise distinct ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub records: Vec<TweetRecord>,
    pub keyword_set: Option<KeywordSet>,
}

impl Corpus {
    pub fn new(records: Vec<TweetRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            if !seen.insert(record.id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate record id `{}`", record.id)));
            }
        }
        Ok(Corpus {
            records,
            keyword_set: None,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Reads a tweet-record file.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), path)
}

/// Reads tweet records from `reader`; `origin` is used in error messages.
pub fn read_corpus<R: BufRead>(reader: R, origin: &Path) -> Result<Corpus> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (index, line) in reader.lines().enumerate() {
        let lineno = index + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TweetRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        record.validate().map_err(|message| Error::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message,
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                path: origin.to_path_buf(),
                line: lineno,
                id: record.id,
            });
        }
        records.push(record);
    }
    Ok(Corpus {
        records,
        keyword_set: None,
    })
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records(&mut out, &corpus.records).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_records<W: Write>(out: &mut W, records: &[TweetRecord]) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps the records whose normalized token stream contains at least one
/// keyword as a whole token.
pub fn keyword_filter(
    corpus: &Corpus,
    keywords: &KeywordSet,
    table: &ReplacementTable,
) -> Result<Corpus> {
    if keywords.is_empty() {
        return Err(Error::InvalidArgument("keyword set is empty".into()));
    }
    let records = corpus
        .records
        .iter()
        .filter(|r| normalize(&r.text, table).iter().any(|t| keywords.contains(t)))
        .cloned()
        .collect();
    Ok(Corpus {
        records,
        keyword_set: Some(keywords.clone()),
    })
}

/// Directed follow relation: `(follower, friend)` means follower follows friend.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FollowerGraph {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

impl FollowerGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a follow edge. Returns `false` if it was already present.
    pub fn add_edge(&mut self, follower: &str, friend: &str) -> Result<bool> {
        if follower == friend {
            return Err(Error::InvalidArgument(format!("self-edge for user `{follower}`")));
        }
        self.nodes.insert(follower.to_string());
        self.nodes.insert(friend.to_string());
        Ok(self.edges.insert((follower.to_string(), friend.to_string())))
    }

    pub fn add_node(&mut self, user: &str) {
        self.nodes.insert(user.to_string());
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, follower: &str, friend: &str) -> bool {
        self.edges.contains(&(follower.to_string(), friend.to_string()))
    }

    /// The subgraph induced by `keep`.
    pub fn restrict(&self, keep: &HashSet<String>) -> FollowerGraph {
        let mut out = FollowerGraph::new();
        for (a, b) in self.edges() {
            if keep.contains(a) && keep.contains(b) {
                out.nodes.insert(a.to_string());
                out.nodes.insert(b.to_string());
                out.edges.insert((a.to_string(), b.to_string()));
            }
        }
        out
    }
}

pub fn load_follower_graph(path: &Path) -> Result<FollowerGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_follower_graph(BufReader::new(file), path)
}

pub fn read_follower_graph<R: BufRead>(reader: R, origin: &Path) -> Result<FollowerGraph> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut graph = FollowerGraph::new();
    for row in csv.records() {
        let row = row.map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() == 1 && row[0].is_empty() {
            continue;
        }
        if row.len() != 2 || row[0].is_empty() || row[1].is_empty() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line,
                message: "expected `follower_id,friend_id`".into(),
            });
        }
        if row[0] == row[1] {
            return Err(Error::SelfEdge {
                path: origin.to_path_buf(),
                line,
                user: row[0].to_string(),
            });
        }
        graph.add_edge(&row[0], &row[1])?;
    }
    Ok(graph)
}

/// Writes the edge list in sorted order.
pub fn write_follower_graph(path: &Path, graph: &FollowerGraph) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    for (a, b) in graph.edges() {
        out.write_record([a, b]).map_err(|e| Error::io(path, e.into()))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a one-entry-per-line file (user ids, stopwords, keywords).
/// Blank lines and surrounding whitespace are ignored.
pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
