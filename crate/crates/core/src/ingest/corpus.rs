use std::path::Path;

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::{SourceError, Tweet, TweetSource};

/// The 200-tweet replay corpus shipped with the crate.
pub const BUNDLED_CORPUS: &str = include_str!("../../data/corpus.jsonl");

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: invalid JSON: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: field `{field}` {problem}")]
    Schema {
        line: usize,
        field: &'static str,
        problem: String,
    },
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Parses one JSONL corpus record. `line` is only used for error reporting.
pub fn parse_corpus_line(text: &str, line: usize) -> Result<Tweet, CorpusError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CorpusError::Parse {
        line,
        message: e.to_string(),
    })?;
    let Value::Object(record) = value else {
        return Err(CorpusError::Parse {
            line,
            message: "expected a JSON object".to_string(),
        });
    };

    let field = |name: &'static str| -> Result<String, CorpusError> {
        match record.get(name) {
            None | Some(Value::Null) => Err(CorpusError::Schema {
                line,
                field: name,
                problem: "is missing".to_string(),
            }),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(CorpusError::Schema {
                line,
                field: name,
                problem: "must be a string".to_string(),
            }),
        }
    };
    let non_empty = |name: &'static str| -> Result<String, CorpusError> {
        let value = field(name)?;
        if value.is_empty() {
            return Err(CorpusError::Schema {
                line,
                field: name,
                problem: "is empty".to_string(),
            });
        }
        Ok(value)
    };

    let id = non_empty("id")?;
    let text = non_empty("text")?;
    let created_raw = field("created_at")?;
    let created_at = DateTime::parse_from_rfc3339(&created_raw)
        .map_err(|e| CorpusError::Schema {
            line,
            field: "created_at",
            problem: format!("is not RFC 3339 ({e})"),
        })?
        .with_timezone(&Utc);
    let author = field("author")?;
    let lang = field("lang")?;

    Ok(Tweet {
        id,
        text,
        created_at,
        author,
        lang,
        topic: None,
    })
}

/// File-backed tweet source. The whole corpus is parsed up front, so a bad
/// line fails at construction rather than mid-session.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    tweets: Vec<Tweet>,
    cursor: usize,
    batch_size: usize,
}

impl ReplaySource {
    pub fn from_str(content: &str, batch_size: usize) -> Result<Self, CorpusError> {
        let tweets = content
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(idx, l)| parse_corpus_line(l, idx + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            tweets,
            cursor: 0,
            batch_size: batch_size.max(1),
        })
    }

    pub fn from_path(path: &Path, batch_size: usize) -> Result<Self, CorpusError> {
        let content = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_str(&content, batch_size)
    }

    pub fn bundled(batch_size: usize) -> Self {
        Self::from_str(BUNDLED_CORPUS, batch_size).expect("bundled corpus is valid")
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }
}

impl TweetSource for ReplaySource {
    fn next_batch(&mut self) -> Result<Vec<Tweet>, SourceError> {
        let end = (self.cursor + self.batch_size).min(self.tweets.len());
        let batch = self.tweets[self.cursor..end].to_vec();
        self.cursor = end;
        Ok(batch)
    }

    fn is_exhausted(&self) -> bool {
        self.cursor >= self.tweets.len()
    }
}
