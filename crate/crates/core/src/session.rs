//! One visualization session: the pipeline that pulls tweets, scores them,
//! grows the graph, advances the layout and records every change in an
//! append-only event log.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::emotion::{score_text, EmotionLabel, EmotionScores, Lexicon, LexiconError};
use crate::graph::{
    emotion_hub_id, parse_node_id, topic_node_id, EventPayload, GraphError, GraphEvent, GraphSnapshot, GraphWriter,
    NodeKind, NodeRef,
};
use crate::ingest::{
    match_topic, validate_topic_pair, CorpusError, Credentials, LiveSource, QueryError, ReplaySource, SearchTransport,
    SourceError, TopicId, TopicQuery, Tweet, TweetSource,
};
use crate::layout::{LayoutError, LayoutParams, LayoutState};
use crate::style::{default_theme, parse_stylesheet, resolve_style, ComputedStyle, Element, StyleError, StyleRule};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    /// Replay a JSONL corpus; `None` uses the bundled corpus.
    Replay {
        corpus: Option<PathBuf>,
    },
    Live,
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub topic_a: TopicQuery,
    pub topic_b: TopicQuery,
    pub source: SourceSpec,
    pub seed: u64,
    /// `None` uses the bundled lexicon.
    pub lexicon: Option<PathBuf>,
    /// `None` uses the bundled theme.
    pub stylesheet: Option<PathBuf>,
    pub tick_interval: Duration,
    /// Tweets taken from a replay corpus per tick.
    pub batch_size: usize,
    pub live_poll_interval: Duration,
    /// Layout parameters; the seed is replaced by `seed`.
    pub layout: LayoutParams,
}

impl SessionConfig {
    pub fn new(topic_a: &str, topic_b: &str, source: SourceSpec, seed: u64) -> Self {
        Self {
            topic_a: TopicQuery::new(TopicId::A, topic_a),
            topic_b: TopicQuery::new(TopicId::B, topic_b),
            source,
            seed,
            lexicon: None,
            stylesheet: None,
            tick_interval: Duration::from_secs(1),
            batch_size: 10,
            live_poll_interval: Duration::from_secs(10),
            layout: LayoutParams::default(),
        }
    }

    pub fn layout_params(&self) -> LayoutParams {
        LayoutParams {
            seed: self.seed,
            ..self.layout.clone()
        }
    }

    /// Checks the topics and that every referenced file exists.
    pub fn validate(&self) -> Result<(), SessionError> {
        validate_topic_pair(&self.topic_a, &self.topic_b)?;
        self.layout_params().validate()?;
        if let SourceSpec::Replay { corpus: Some(path) } = &self.source {
            require_file("corpus", path)?;
        }
        if let Some(path) = &self.lexicon {
            require_file("lexicon", path)?;
        }
        if let Some(path) = &self.stylesheet {
            require_file("stylesheet", path)?;
        }
        Ok(())
    }
}

fn require_file(what: &'static str, path: &Path) -> Result<(), SessionError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(SessionError::MissingFile {
            what,
            path: path.to_path_buf(),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Topics(#[from] QueryError),
    #[error("{what} file not found: {}", path.display())]
    MissingFile { what: &'static str, path: PathBuf },
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("stylesheet {}: {source}", path.display())]
    Stylesheet { path: PathBuf, source: StyleError },
    #[error("live source needs a bearer token in {}", crate::ingest::BEARER_TOKEN_ENV)]
    MissingCredentials,
    #[error("live source needs an HTTP transport")]
    NoTransport,
    #[error("headless runs need a replay source")]
    HeadlessNeedsReplay,
    #[error("search API rejected the credentials")]
    Unauthorized,
    #[error("node `{0}` not found")]
    NotFound(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// A graph event as published to subscribers and written to the headless log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEvent {
    pub seq: u64,
    pub session: String,
    pub event: EventPayload,
}

impl WireEvent {
    pub fn graph_event(&self) -> GraphEvent {
        GraphEvent {
            seq: self.seq,
            event: self.event.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    /// Sources still produce tweets.
    Running,
    /// Sources are exhausted; the layout keeps settling.
    Drained,
    /// Drained and the layout has converged; ticks emit nothing.
    Stable,
    /// The search API refused the credentials.
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SessionStats {
    pub tweets_pulled: u64,
    pub unmatched: u64,
    pub duplicates: u64,
    /// Leaves attached; a tweet matching both topics counts twice.
    pub attached: u64,
    pub rate_limited: u64,
    pub source_errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicSummary {
    pub phrase: String,
    pub ingested: u64,
    pub skipped: u64,
    pub tallies: BTreeMap<EmotionLabel, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionSummary {
    pub session: String,
    pub status: SessionStatus,
    pub events: u64,
    pub layout_steps: usize,
    /// Largest node displacement of the most recent layout step.
    pub last_displacement: f64,
    pub stats: SessionStats,
    pub topics: BTreeMap<TopicId, TopicSummary>,
}

/// What a click on a node reveals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NodeDetail {
    Tweet {
        id: String,
        topic: TopicId,
        tweet_id: String,
        text: String,
        author: String,
        created_at: String,
        lang: String,
        #[serde(rename = "docEmotions")]
        doc_emotions: EmotionScores,
        #[serde(rename = "finalEmotion")]
        final_emotion: EmotionLabel,
        style: ComputedStyle,
        clicked_style: ComputedStyle,
    },
    Emotion {
        id: String,
        topic: TopicId,
        emotion: EmotionLabel,
        total_count: u64,
        live: u64,
        style: ComputedStyle,
        clicked_style: ComputedStyle,
    },
    Topic {
        id: String,
        topic: TopicId,
        phrase: String,
        skipped: u64,
        style: ComputedStyle,
        clicked_style: ComputedStyle,
    },
}

pub struct Session {
    id: String,
    config: SessionConfig,
    lexicon: Arc<Lexicon>,
    rules: Arc<Vec<StyleRule>>,
    sources: Vec<Box<dyn TweetSource>>,
    writer: GraphWriter,
    layout: LayoutState,
    layout_params: LayoutParams,
    tweets: HashMap<String, (Tweet, EmotionScores)>,
    seen: HashSet<(TopicId, String)>,
    log: Vec<WireEvent>,
    status: SessionStatus,
    stats: SessionStats,
    layout_steps: usize,
    last_displacement: f64,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("status", &self.status)
            .field("events", &self.log.len())
            .finish_non_exhaustive()
    }
}

impl Session {
    /// Starts a replay session. Live sessions go through [`Session::create_live`].
    pub fn create(id: impl Into<String>, config: SessionConfig) -> Result<Self, SessionError> {
        config.validate()?;
        let source: Box<dyn TweetSource> = match &config.source {
            SourceSpec::Replay { corpus: Some(path) } => Box::new(ReplaySource::from_path(path, config.batch_size)?),
            SourceSpec::Replay { corpus: None } => Box::new(ReplaySource::bundled(config.batch_size)),
            SourceSpec::Live => return Err(SessionError::NoTransport),
        };
        Self::with_sources(id, config, vec![source])
    }

    /// Starts a live session with one search poller per topic.
    pub fn create_live<T>(
        id: impl Into<String>,
        config: SessionConfig,
        credentials: Option<Credentials>,
        transport: T,
    ) -> Result<Self, SessionError>
    where
        T: SearchTransport + Clone + 'static,
    {
        config.validate()?;
        if config.source != SourceSpec::Live {
            return Self::create(id, config);
        }
        let credentials = credentials.ok_or(SessionError::MissingCredentials)?;
        let sources: Vec<Box<dyn TweetSource>> = [&config.topic_a, &config.topic_b]
            .into_iter()
            .map(|q| {
                Box::new(
                    LiveSource::new(q.clone(), credentials.clone(), transport.clone())
                        .with_poll_interval(config.live_poll_interval),
                ) as Box<dyn TweetSource>
            })
            .collect();
        Self::with_sources(id, config, sources)
    }

    /// Starts a session over arbitrary sources and emits the initial graph.
    pub fn with_sources(
        id: impl Into<String>,
        config: SessionConfig,
        sources: Vec<Box<dyn TweetSource>>,
    ) -> Result<Self, SessionError> {
        config.validate()?;
        let lexicon = match &config.lexicon {
            Some(path) => Lexicon::load(path)?,
            None => Lexicon::bundled(),
        };
        let rules = match &config.stylesheet {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|_| SessionError::MissingFile {
                    what: "stylesheet",
                    path: path.clone(),
                })?;
                parse_stylesheet(&text).map_err(|source| SessionError::Stylesheet {
                    path: path.clone(),
                    source,
                })?
            }
            None => default_theme(),
        };
        let layout_params = config.layout_params();
        let layout = LayoutState::new(&layout_params)?;

        let mut session = Self {
            id: id.into(),
            lexicon: Arc::new(lexicon),
            rules: Arc::new(rules),
            sources,
            writer: GraphWriter::new(),
            layout,
            layout_params,
            tweets: HashMap::new(),
            seen: HashSet::new(),
            log: Vec::new(),
            status: SessionStatus::Running,
            stats: SessionStats::default(),
            layout_steps: 0,
            last_displacement: f64::INFINITY,
            config,
        };
        let events = session
            .writer
            .init_session_graph(&session.config.topic_a, &session.config.topic_b)?;
        for event in &events {
            if let EventPayload::NodeAdded { node } = &event.event {
                session.place(&node.id)?;
            }
        }
        session.record(events);
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn stats(&self) -> &SessionStats {
        &self.stats
    }

    pub fn snapshot(&self) -> &GraphSnapshot {
        self.writer.snapshot()
    }

    pub fn layout(&self) -> &LayoutState {
        &self.layout
    }

    pub fn layout_steps(&self) -> usize {
        self.layout_steps
    }

    pub fn rules(&self) -> &[StyleRule] {
        &self.rules
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// The full event log from seq 0.
    pub fn log(&self) -> &[WireEvent] {
        &self.log
    }

    /// Places a freshly added node next to an already placed neighbor.
    fn place(&mut self, node_id: &str) -> Result<(), SessionError> {
        let snapshot = self.writer.snapshot();
        let neighbor = snapshot
            .incident_edges(node_id)
            .map(|e| if e.from == node_id { &e.to } else { &e.from })
            .find(|other| self.layout.is_placed(other))
            .cloned();
        self.layout.retain_nodes(snapshot);
        self.layout.place_new_node(node_id, neighbor.as_deref())?;
        Ok(())
    }

    fn record(&mut self, events: Vec<GraphEvent>) -> Vec<WireEvent> {
        let wire: Vec<WireEvent> = events
            .into_iter()
            .map(|e| WireEvent {
                seq: e.seq,
                session: self.id.clone(),
                event: e.event,
            })
            .collect();
        self.log.extend(wire.iter().cloned());
        wire
    }

    fn ingest(&mut self, tweet: Tweet, stamped: bool) -> Result<Vec<GraphEvent>, SessionError> {
        self.stats.tweets_pulled += 1;
        let topics: Vec<TopicId> = if stamped {
            tweet.topic.into_iter().collect()
        } else {
            match_topic(&tweet, &self.config.topic_a, &self.config.topic_b)
                .into_iter()
                .collect()
        };
        if topics.is_empty() {
            self.stats.unmatched += 1;
            return Ok(Vec::new());
        }
        let fresh: Vec<TopicId> = topics
            .into_iter()
            .filter(|t| self.seen.insert((*t, tweet.id.clone())))
            .collect();
        if fresh.is_empty() {
            self.stats.duplicates += 1;
            return Ok(Vec::new());
        }

        let scores = score_text(&tweet.text, &self.lexicon);
        let mut events = Vec::new();
        for topic in fresh {
            let added = self.writer.ingest_tweet(&tweet, topic, &scores)?;
            let leaf = added.iter().find_map(|e| match &e.event {
                EventPayload::NodeAdded { node } => Some(node.id.clone()),
                _ => None,
            });
            if let Some(leaf) = leaf {
                self.stats.attached += 1;
                self.place(&leaf)?;
            }
            events.extend(added);
        }
        self.tweets.insert(tweet.id.clone(), (tweet, scores));
        Ok(events)
    }

    /// Runs one pipeline step and returns the events it appended to the log.
    pub fn tick(&mut self) -> Result<Vec<WireEvent>, SessionError> {
        if matches!(self.status, SessionStatus::Stable | SessionStatus::Failed) {
            return Ok(Vec::new());
        }
        let mut events = Vec::new();

        if self.status == SessionStatus::Running {
            for i in 0..self.sources.len() {
                let source = &mut self.sources[i];
                let stamped = source.stamps_topic();
                match source.next_batch() {
                    Ok(batch) => {
                        for tweet in batch {
                            events.extend(self.ingest(tweet, stamped)?);
                        }
                    }
                    Err(SourceError::RateLimited(wait)) => {
                        log::warn!("session {}: rate limited, retrying in {}s", self.id, wait.as_secs());
                        self.stats.rate_limited += 1;
                    }
                    Err(SourceError::Auth) => {
                        self.status = SessionStatus::Failed;
                        self.record(events);
                        return Err(SessionError::Unauthorized);
                    }
                    Err(e) => {
                        log::warn!("session {}: {e}", self.id);
                        self.stats.source_errors += 1;
                    }
                }
            }
            if self.sources.iter().all(|s| s.is_exhausted()) {
                self.status = SessionStatus::Drained;
            }
        }

        let moved = self.layout.step(self.writer.snapshot(), &self.layout_params)?;
        self.layout_steps += 1;
        self.last_displacement = moved;
        events.push(self.writer.publish_positions(self.layout.published_positions())?);
        if self.status == SessionStatus::Drained
            && (moved < self.layout_params.epsilon || self.layout_steps >= self.layout_params.max_iters)
        {
            self.status = SessionStatus::Stable;
        }
        Ok(self.record(events))
    }

    /// Ticks until the replay is drained and the layout has settled.
    pub fn run_to_completion(&mut self) -> Result<SessionSummary, SessionError> {
        if !matches!(self.config.source, SourceSpec::Replay { .. }) {
            return Err(SessionError::HeadlessNeedsReplay);
        }
        while !matches!(self.status, SessionStatus::Stable | SessionStatus::Failed) {
            self.tick()?;
        }
        Ok(self.summary())
    }

    pub fn summary(&self) -> SessionSummary {
        let snapshot = self.writer.snapshot();
        let topics = [&self.config.topic_a, &self.config.topic_b]
            .into_iter()
            .map(|q| {
                let tallies: BTreeMap<EmotionLabel, u64> = EmotionLabel::ALL
                    .into_iter()
                    .map(|e| {
                        let total = snapshot
                            .hub_counts(&emotion_hub_id(q.topic_id, e))
                            .map_or(0, |c| c.total_count);
                        (e, total)
                    })
                    .collect();
                let summary = TopicSummary {
                    phrase: q.trimmed_phrase().to_string(),
                    ingested: tallies.values().sum(),
                    skipped: self.writer.skipped(q.topic_id),
                    tallies,
                };
                (q.topic_id, summary)
            })
            .collect();
        SessionSummary {
            session: self.id.clone(),
            status: self.status,
            events: self.log.len() as u64,
            layout_steps: self.layout_steps,
            last_displacement: self.last_displacement,
            stats: self.stats.clone(),
            topics,
        }
    }

    fn styles_for(&self, classes: &[String]) -> (ComputedStyle, ComputedStyle) {
        (
            resolve_style(&self.rules, Element::Node, classes, false),
            resolve_style(&self.rules, Element::Node, classes, true),
        )
    }

    pub fn node_detail(&self, node_id: &str) -> Result<NodeDetail, SessionError> {
        let not_found = || SessionError::NotFound(node_id.to_string());
        let snapshot = self.writer.snapshot();
        let node = snapshot.node(node_id).ok_or_else(not_found)?;
        let (style, clicked_style) = self.styles_for(&node.classes);
        let reference = parse_node_id(node_id).ok_or_else(not_found)?;
        match (node.kind, reference) {
            (NodeKind::Tweet, NodeRef::Tweet(topic, tweet_id)) => {
                let (tweet, scores) = self.tweets.get(tweet_id).ok_or_else(not_found)?;
                Ok(NodeDetail::Tweet {
                    id: node_id.to_string(),
                    topic,
                    tweet_id: tweet.id.clone(),
                    text: tweet.text.clone(),
                    author: tweet.author.clone(),
                    created_at: tweet.created_at.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                    lang: tweet.lang.clone(),
                    doc_emotions: *scores,
                    final_emotion: scores.final_emotion(),
                    style,
                    clicked_style,
                })
            }
            (NodeKind::Emotion, NodeRef::EmotionHub(topic, emotion)) => {
                let counts = snapshot.hub_counts(node_id).ok_or_else(not_found)?;
                Ok(NodeDetail::Emotion {
                    id: node_id.to_string(),
                    topic,
                    emotion,
                    total_count: counts.total_count,
                    live: counts.live,
                    style,
                    clicked_style,
                })
            }
            (NodeKind::Topic, NodeRef::Topic(topic)) => {
                let query = match topic {
                    TopicId::A => &self.config.topic_a,
                    TopicId::B => &self.config.topic_b,
                };
                debug_assert_eq!(topic_node_id(topic), node_id);
                Ok(NodeDetail::Topic {
                    id: node_id.to_string(),
                    topic,
                    phrase: query.trimmed_phrase().to_string(),
                    skipped: self.writer.skipped(topic),
                    style,
                    clicked_style,
                })
            }
            _ => Err(not_found()),
        }
    }
}

/// Writes events as JSONL, one `\n`-terminated line per event.
pub fn write_event_log<W: Write>(mut out: W, events: &[WireEvent]) -> io::Result<()> {
    for event in events {
        serde_json::to_writer(&mut out, event)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[derive(Debug, thiserror::Error)]
#[error("event log line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

pub fn read_event_log(text: &str) -> Result<Vec<WireEvent>, LogParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| LogParseError {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}
