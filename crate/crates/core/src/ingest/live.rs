use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use super::{build_query, QueryError, SourceError, TopicId, TopicQuery, Tweet, TweetSource};

pub const RECENT_SEARCH_URL: &str = "https://api.twitter.com/2/tweets/search/recent";
pub const BEARER_TOKEN_ENV: &str = "PLEXUS_BEARER_TOKEN";

/// Used when a 429 arrives without a usable `retry-after` header; the
/// search API's rate-limit window is 15 minutes.
const DEFAULT_RETRY_AFTER: Duration = Duration::from_secs(15 * 60);

#[derive(Clone, PartialEq, Eq)]
pub struct Credentials {
    bearer_token: String,
}

impl Credentials {
    pub fn new(bearer_token: impl Into<String>) -> Option<Self> {
        let bearer_token = bearer_token.into();
        (!bearer_token.trim().is_empty()).then(|| Self {
            bearer_token: bearer_token.trim().to_string(),
        })
    }

    /// Reads `PLEXUS_BEARER_TOKEN`; `None` when unset or blank.
    pub fn from_env() -> Option<Self> {
        std::env::var(BEARER_TOKEN_ENV).ok().and_then(Self::new)
    }

    pub fn bearer_token(&self) -> &str {
        &self.bearer_token
    }
}

impl fmt::Debug for Credentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Credentials")
            .field("bearer_token", &"<redacted>")
            .finish()
    }
}

/// Pagination state for one topic's search.
///
/// While `next_token` is set the client walks older pages of the current
/// window; once the window is exhausted the next poll asks only for tweets
/// newer than `since_id`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiveCursor {
    pub next_token: Option<String>,
    pub since_id: Option<String>,
    newest_in_window: Option<String>,
    pub pages: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchRequest {
    pub url: String,
    pub params: Vec<(String, String)>,
    pub bearer_token: String,
}

/// The parts of an HTTP response the search client looks at. Header names
/// are lower-case.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct HttpResponse {
    pub status: u16,
    #[serde(default)]
    pub headers: BTreeMap<String, String>,
    #[serde(default)]
    pub body: String,
}

/// Executes search requests. The service plugs in a real HTTP client; tests
/// use canned responses.
pub trait SearchTransport: Send {
    fn execute(&self, request: &SearchRequest) -> Result<HttpResponse, SourceError>;
}

pub fn build_search_request(
    q: &TopicQuery,
    credentials: &Credentials,
    cursor: &LiveCursor,
    max_results: u32,
) -> Result<SearchRequest, QueryError> {
    let mut params = vec![
        ("query".to_string(), build_query(q)?),
        ("max_results".to_string(), max_results.clamp(10, 100).to_string()),
        ("tweet.fields".to_string(), "created_at,lang,author_id".to_string()),
        ("expansions".to_string(), "author_id".to_string()),
        ("user.fields".to_string(), "username".to_string()),
    ];
    if let Some(token) = &cursor.next_token {
        params.push(("next_token".to_string(), token.clone()));
    }
    if let Some(since) = &cursor.since_id {
        params.push(("since_id".to_string(), since.clone()));
    }
    Ok(SearchRequest {
        url: RECENT_SEARCH_URL.to_string(),
        params,
        bearer_token: credentials.bearer_token().to_string(),
    })
}

#[derive(Deserialize)]
struct SearchBody {
    #[serde(default)]
    data: Vec<SearchTweet>,
    #[serde(default)]
    includes: Includes,
    #[serde(default)]
    meta: Meta,
}

#[derive(Deserialize)]
struct SearchTweet {
    id: String,
    text: String,
    created_at: DateTime<Utc>,
    #[serde(default)]
    author_id: Option<String>,
    #[serde(default)]
    lang: Option<String>,
}

#[derive(Default, Deserialize)]
struct Includes {
    #[serde(default)]
    users: Vec<User>,
}

#[derive(Deserialize)]
struct User {
    id: String,
    username: String,
}

#[derive(Default, Deserialize)]
struct Meta {
    newest_id: Option<String>,
    next_token: Option<String>,
}

/// A page of search results.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchPage {
    pub tweets: Vec<Tweet>,
    pub next_token: Option<String>,
    pub newest_id: Option<String>,
}

/// Maps an HTTP response to tweets stamped with `topic`, or to the error the
/// caller must act on.
pub fn parse_search_response(response: &HttpResponse, topic: TopicId) -> Result<SearchPage, SourceError> {
    match response.status {
        200..=299 => {}
        401 => return Err(SourceError::Auth),
        429 => {
            let wait = response
                .headers
                .get("retry-after")
                .and_then(|v| v.trim().parse::<u64>().ok())
                .map(Duration::from_secs)
                .unwrap_or(DEFAULT_RETRY_AFTER);
            return Err(SourceError::RateLimited(wait));
        }
        other => return Err(SourceError::Protocol(format!("unexpected HTTP status {other}"))),
    }

    let body: SearchBody = serde_json::from_str(&response.body).map_err(|e| SourceError::Protocol(e.to_string()))?;
    let usernames: HashMap<&str, &str> = body
        .includes
        .users
        .iter()
        .map(|u| (u.id.as_str(), u.username.as_str()))
        .collect();

    let mut tweets = Vec::with_capacity(body.data.len());
    for item in &body.data {
        if item.id.is_empty() || item.text.is_empty() {
            return Err(SourceError::Protocol(format!("tweet `{}` lacks id or text", item.id)));
        }
        let author = item
            .author_id
            .as_deref()
            .map(|id| usernames.get(id).copied().unwrap_or(id).to_string())
            .unwrap_or_default();
        tweets.push(Tweet {
            id: item.id.clone(),
            text: item.text.clone(),
            created_at: item.created_at,
            author,
            lang: item.lang.clone().unwrap_or_else(|| "und".to_string()),
            topic: Some(topic),
        });
    }

    Ok(SearchPage {
        tweets,
        next_token: body.meta.next_token,
        newest_id: body.meta.newest_id,
    })
}

/// Snowflake ids compare numerically; shorter decimal strings are smaller.
fn newer_id(a: Option<String>, b: Option<String>) -> Option<String> {
    match (a, b) {
        (Some(a), Some(b)) => match a.len().cmp(&b.len()).then_with(|| a.cmp(&b)) {
            Ordering::Less => Some(b),
            _ => Some(a),
        },
        (a, b) => a.or(b),
    }
}

/// Fetches one page for `q` and returns its tweets and the advanced cursor.
pub fn fetch_live_batch(
    q: &TopicQuery,
    credentials: &Credentials,
    cursor: &LiveCursor,
    transport: &dyn SearchTransport,
) -> Result<(Vec<Tweet>, LiveCursor), SourceError> {
    let request =
        build_search_request(q, credentials, cursor, 100).map_err(|e| SourceError::Protocol(e.to_string()))?;
    let response = transport.execute(&request)?;
    let page = parse_search_response(&response, q.topic_id)?;

    let newest = newer_id(cursor.newest_in_window.clone(), page.newest_id);
    let next = match page.next_token {
        Some(token) => LiveCursor {
            next_token: Some(token),
            since_id: cursor.since_id.clone(),
            newest_in_window: newest,
            pages: cursor.pages + 1,
        },
        None => LiveCursor {
            next_token: None,
            since_id: newer_id(cursor.since_id.clone(), newest),
            newest_in_window: None,
            pages: cursor.pages + 1,
        },
    };
    Ok((page.tweets, next))
}

/// Polls the recent-search endpoint for one topic at most once per
/// `poll_interval`, backing off after a 429.
pub struct LiveSource<T: SearchTransport> {
    query: TopicQuery,
    credentials: Credentials,
    cursor: LiveCursor,
    transport: T,
    poll_interval: Duration,
    next_poll: Option<Instant>,
}

impl<T: SearchTransport> LiveSource<T> {
    pub const DEFAULT_POLL_INTERVAL: Duration = Duration::from_secs(10);

    pub fn new(query: TopicQuery, credentials: Credentials, transport: T) -> Self {
        Self {
            query,
            credentials,
            cursor: LiveCursor::default(),
            transport,
            poll_interval: Self::DEFAULT_POLL_INTERVAL,
            next_poll: None,
        }
    }

    pub fn with_poll_interval(mut self, interval: Duration) -> Self {
        self.poll_interval = interval;
        self
    }

    pub fn cursor(&self) -> &LiveCursor {
        &self.cursor
    }
}

impl<T: SearchTransport> TweetSource for LiveSource<T> {
    fn next_batch(&mut self) -> Result<Vec<Tweet>, SourceError> {
        let now = Instant::now();
        if self.next_poll.is_some_and(|at| now < at) {
            return Ok(Vec::new());
        }
        match fetch_live_batch(&self.query, &self.credentials, &self.cursor, &self.transport) {
            Ok((tweets, cursor)) => {
                self.cursor = cursor;
                self.next_poll = Some(now + self.poll_interval);
                Ok(tweets)
            }
            Err(SourceError::RateLimited(wait)) => {
                self.next_poll = Some(now + wait);
                Err(SourceError::RateLimited(wait))
            }
            Err(e) => {
                self.next_poll = Some(now + self.poll_interval);
                Err(e)
            }
        }
    }

    fn stamps_topic(&self) -> bool {
        true
    }
}
