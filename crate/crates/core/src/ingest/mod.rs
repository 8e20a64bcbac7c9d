//! Tweet ingestion for the two session topics.

mod corpus;
mod live;

pub use corpus::{parse_corpus_line, CorpusError, ReplaySource, BUNDLED_CORPUS};
pub use live::{
    build_search_request, fetch_live_batch, parse_search_response, Credentials, HttpResponse, LiveCursor, LiveSource,
    SearchPage, SearchRequest, SearchTransport, BEARER_TOKEN_ENV, RECENT_SEARCH_URL,
};

use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Which of the two session topics a tweet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopicId {
    A,
    B,
}

impl TopicId {
    pub const BOTH: [TopicId; 2] = [TopicId::A, TopicId::B];

    pub fn as_str(self) -> &'static str {
        match self {
            TopicId::A => "A",
            TopicId::B => "B",
        }
    }

    pub fn other(self) -> TopicId {
        match self {
            TopicId::A => TopicId::B,
            TopicId::B => TopicId::A,
        }
    }
}

impl fmt::Display for TopicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TopicId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(TopicId::A),
            "B" => Ok(TopicId::B),
            other => Err(format!("unknown topic `{other}`")),
        }
    }
}

/// One ingested post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub author: String,
    pub lang: String,
    /// Set by the live client or by topic matching; `None` straight off a corpus line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<TopicId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("topic {0} phrase is empty")]
    EmptyPhrase(TopicId),
    #[error("topics must differ (both are `{0}`)")]
    SameTopics(String),
    #[error("both queries are for topic {0}")]
    SameTopicId(TopicId),
}

/// A user topic and the search filters that go with it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicQuery {
    pub topic_id: TopicId,
    pub phrase: String,
    #[serde(default = "default_lang")]
    pub lang: String,
    #[serde(default = "default_true")]
    pub exclude_retweets: bool,
}

fn default_lang() -> String {
    "en".to_string()
}

fn default_true() -> bool {
    true
}

impl TopicQuery {
    pub fn new(topic_id: TopicId, phrase: impl Into<String>) -> Self {
        Self {
            topic_id,
            phrase: phrase.into(),
            lang: default_lang(),
            exclude_retweets: true,
        }
    }

    pub fn trimmed_phrase(&self) -> &str {
        self.phrase.trim()
    }

    pub fn validate(&self) -> Result<(), QueryError> {
        if self.trimmed_phrase().is_empty() {
            return Err(QueryError::EmptyPhrase(self.topic_id));
        }
        Ok(())
    }
}

/// Checks both queries and that their phrases differ ignoring case.
pub fn validate_topic_pair(a: &TopicQuery, b: &TopicQuery) -> Result<(), QueryError> {
    a.validate()?;
    b.validate()?;
    if a.topic_id == b.topic_id {
        return Err(QueryError::SameTopicId(a.topic_id));
    }
    if a.trimmed_phrase().to_lowercase() == b.trimmed_phrase().to_lowercase() {
        return Err(QueryError::SameTopics(a.trimmed_phrase().to_string()));
    }
    Ok(())
}

/// Search-API query text: `"<phrase>" lang:<code> -is:retweet`.
pub fn build_query(q: &TopicQuery) -> Result<String, QueryError> {
    q.validate()?;
    let mut query = format!("\"{}\" lang:{}", q.trimmed_phrase(), q.lang);
    if q.exclude_retweets {
        query.push_str(" -is:retweet");
    }
    Ok(query)
}

/// Topics whose phrase occurs in the tweet text, ignoring case.
pub fn match_topic(tweet: &Tweet, a: &TopicQuery, b: &TopicQuery) -> BTreeSet<TopicId> {
    let text = tweet.text.to_lowercase();
    [a, b]
        .into_iter()
        .filter(|q| {
            let phrase = q.trimmed_phrase().to_lowercase();
            !phrase.is_empty() && text.contains(&phrase)
        })
        .map(|q| q.topic_id)
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SourceError {
    #[error("search API rejected the credentials (HTTP 401)")]
    Auth,
    #[error("rate limited; retry after {}s", .0.as_secs())]
    RateLimited(Duration),
    #[error("malformed search response: {0}")]
    Protocol(String),
    #[error("transport failure: {0}")]
    Transport(String),
}

/// A pull-based producer of tweets. One consumer at a time.
pub trait TweetSource: Send {
    fn next_batch(&mut self) -> Result<Vec<Tweet>, SourceError>;

    /// True once no further tweets will ever be produced.
    fn is_exhausted(&self) -> bool {
        false
    }

    /// Whether tweets arrive already attributed to a topic.
    fn stamps_topic(&self) -> bool {
        false
    }
}
