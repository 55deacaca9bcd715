use std::collections::BTreeMap;
use std::ops::Deref;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use sha2::{Digest, Sha256};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

pub const URL_TOKEN: &str = "url";
pub const IMAGE_TOKEN: &str = "image";
pub const NUMBER_TOKEN: &str = "number";
pub const FUNNY_TOKEN: &str = "funny";

/// Literal `to` value in a replacement file that deletes the token.
pub const DROP_MARKER: &str = "<DROP>";

static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.|pic\.twitter\.com/)\S+").unwrap());

static IMAGE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?ix)
        (?:\.(?:jpe?g|png|gif|webp|bmp)(?:[?\#]\S*)?$)
        | ^(?:https?://)?(?:www\.)?(?:pic\.twitter\.com|pbs\.twimg\.com|instagram\.com|instagr\.am|i\.imgur\.com)/",
    )
    .unwrap()
});

static LAUGHTER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:k{3,}|(?:ha){2,}|(?:rs){2,})$").unwrap());

static EMOTICON_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[:;=8xX][-o^']?[()\[\]dDpP/\\|*3oO@]+|<3+|[()\[\]]+[-o^']?[:;=])$").unwrap());

/// Ordered, lowercase, accent-folded tokens of one post.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
        TokenSequence(tokens)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Tokens joined by single spaces.
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSequence {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSequence::new(iter.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Replacement {
    Token(String),
    Drop,
}

/// Exact token rewrites (lingo abbreviations, lemma entries, removals)
/// applied after the built-in pattern classes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplacementTable {
    exact: BTreeMap<String, Replacement>,
}

impl ReplacementTable {
    /// Builds a table from `(from, to)` pairs; `to == "<DROP>"` deletes.
    ///
    /// Keys are folded like tokens. Every replacement must itself be a
    /// stable token (not a key, not a pattern trigger) so that normalizing
    /// twice gives the same result as normalizing once.
    pub fn from_entries<I, A, B>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (A, B)>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let mut exact = BTreeMap::new();
        for (from, to) in entries {
            let key = fold_token(from.as_ref().trim());
            if key.is_empty() || !key.chars().all(char::is_alphanumeric) {
                return Err(Error::InvalidArgument(format!(
                    "replacement key `{}` is not a single token",
                    from.as_ref()
                )));
            }
            let to = to.as_ref().trim();
            let value = if to == DROP_MARKER {
                Replacement::Drop
            } else {
                Replacement::Token(to.to_string())
            };
            exact.insert(key, value);
        }
        for (key, value) in &exact {
            if let Replacement::Token(to) = value {
                let stable = !to.is_empty()
                    && fold_token(to) == *to
                    && to.chars().all(char::is_alphanumeric)
                    && pattern_class(to).is_none()
                    && !exact.contains_key(to);
                if !stable {
                    return Err(Error::InvalidArgument(format!(
                        "replacement `{key}` -> `{to}` does not produce a stable token"
                    )));
                }
            }
        }
        Ok(ReplacementTable { exact })
    }

    /// Loads a headerless `from,to` CSV file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: e.to_string(),
            })?;
        let mut entries = Vec::new();
        for row in reader.records() {
            let row = row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            if row.len() == 1 && row[0].trim().is_empty() {
                continue;
            }
            if row.len() != 2 {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: row.position().map_or(0, |p| p.line() as usize),
                    message: "expected `from,to`".into(),
                });
            }
            entries.push((row[0].to_string(), row[1].to_string()));
        }
        Self::from_entries(entries)
    }

    pub fn lookup(&self, token: &str) -> Option<&Replacement> {
        self.exact.get(token)
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    /// Hex SHA-256 of the canonical entry listing. Stored in model files so
    /// classification can check it runs with the training-time table.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for (from, to) in &self.exact {
            hasher.update(from.as_bytes());
            hasher.update(b",");
            match to {
                Replacement::Token(t) => hasher.update(t.as_bytes()),
                Replacement::Drop => hasher.update(DROP_MARKER.as_bytes()),
            }
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

/// Lowercases and strips combining marks after canonical decomposition.
pub fn fold_token(s: &str) -> String {
    s.to_lowercase().nfd().filter(|c| !is_combining_mark(*c)).collect()
}

fn pattern_class(piece: &str) -> Option<&'static str> {
    if piece.chars().all(char::is_numeric) {
        Some(NUMBER_TOKEN)
    } else if LAUGHTER_RE.is_match(piece) {
        Some(FUNNY_TOKEN)
    } else {
        None
    }
}

fn push_token(out: &mut Vec<String>, token: &str, table: &ReplacementTable) {
    match table.lookup(token) {
        Some(Replacement::Drop) => {}
        Some(Replacement::Token(t)) => out.push(t.clone()),
        None => out.push(token.to_string()),
    }
}

fn push_plain(out: &mut Vec<String>, segment: &str, table: &ReplacementTable) {
    let folded = fold_token(segment);
    for piece in folded.split(|c: char| !c.is_alphanumeric()).filter(|p| !p.is_empty()) {
        push_token(out, pattern_class(piece).unwrap_or(piece), table);
    }
}

/// Turns raw post text into tokens.
///
/// Links become `url` (or `image` for picture hosts and image files),
/// numerals `number`, laughter `funny`; emoticons and other non-verbal
/// glyphs disappear; the replacement table is applied last.
pub fn normalize(text: &str, table: &ReplacementTable) -> TokenSequence {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        if !chunk.chars().all(char::is_alphanumeric) && EMOTICON_RE.is_match(chunk) {
            continue;
        }
        let mut rest = 0;
        for link in URL_RE.find_iter(chunk) {
            push_plain(&mut out, &chunk[rest..link.start()], table);
            let class = if IMAGE_RE.is_match(link.as_str()) {
                IMAGE_TOKEN
            } else {
                URL_TOKEN
            };
            push_token(&mut out, class, table);
            rest = link.end();
        }
        push_plain(&mut out, &chunk[rest..], table);
    }
    TokenSequence(out)
}
