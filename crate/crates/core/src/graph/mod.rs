//! Event-sourced session graph.
//!
//! The graph has a fixed three-tier shape: one hub per topic, five emotion
//! hubs per topic, and tweet leaves hanging off the emotion hubs. All changes
//! are expressed as [`GraphEvent`]s; a [`GraphSnapshot`] is nothing more than
//! the fold of the event log.

mod snapshot;
mod writer;

pub use snapshot::{GraphError, GraphSnapshot};
pub use writer::{init_session_graph, GraphWriter, HubCounts, LEAF_CAP};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::emotion::{EmotionLabel, EmotionScores};
use crate::fixed::Point3;
use crate::ingest::TopicId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Topic,
    Emotion,
    Tweet,
}

/// Value of a named node attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Count(u64),
    Text(String),
    Emotions(EmotionScores),
}

impl AttrValue {
    pub fn as_count(&self) -> Option<u64> {
        match self {
            AttrValue::Count(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    pub classes: Vec<String>,
    #[serde(default)]
    pub attrs: BTreeMap<String, AttrValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub id: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventPayload {
    NodeAdded {
        node: GraphNode,
    },
    EdgeAdded {
        id: String,
        from: String,
        to: String,
    },
    AttrChanged {
        node_id: String,
        key: String,
        value: AttrValue,
    },
    NodeRemoved {
        id: String,
    },
    EdgeRemoved {
        id: String,
    },
    Positions {
        positions: BTreeMap<String, Point3>,
    },
}

/// One entry of the session event log; serialized as `{"seq":n,"event":{...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEvent {
    pub seq: u64,
    pub event: EventPayload,
}

pub const TOTAL_COUNT: &str = "total_count";
pub const TWEET_ID: &str = "tweet_id";
pub const DOC_EMOTIONS: &str = "docEmotions";

pub fn topic_node_id(topic: TopicId) -> String {
    format!("topic:{topic}")
}

pub fn emotion_hub_id(topic: TopicId, emotion: EmotionLabel) -> String {
    format!("{topic}:{emotion}")
}

pub fn tweet_node_id(topic: TopicId, tweet_id: &str) -> String {
    format!("t:{topic}:{tweet_id}")
}

/// Each non-topic node has exactly one parent edge, named after the child.
pub fn parent_edge_id(child: &str) -> String {
    format!("e:{child}")
}

/// What a node id refers to, recovered from the id scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeRef<'a> {
    Topic(TopicId),
    EmotionHub(TopicId, EmotionLabel),
    Tweet(TopicId, &'a str),
}

pub fn parse_node_id(id: &str) -> Option<NodeRef<'_>> {
    if let Some(rest) = id.strip_prefix("topic:") {
        return rest.parse().ok().map(NodeRef::Topic);
    }
    if let Some(rest) = id.strip_prefix("t:") {
        let (topic, tweet) = rest.split_once(':')?;
        return (!tweet.is_empty()).then_some(NodeRef::Tweet(topic.parse().ok()?, tweet));
    }
    let (topic, emotion) = id.split_once(':')?;
    Some(NodeRef::EmotionHub(topic.parse().ok()?, emotion.parse().ok()?))
}
