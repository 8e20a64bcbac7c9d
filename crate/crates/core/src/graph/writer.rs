use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{
    emotion_hub_id, parent_edge_id, topic_node_id, tweet_node_id, AttrValue, EventPayload, GraphError, GraphEvent,
    GraphNode, GraphSnapshot, NodeKind, DOC_EMOTIONS, TOTAL_COUNT, TWEET_ID,
};
use crate::emotion::{EmotionLabel, EmotionScores};
use crate::fixed::{quantize, Point3};
use crate::ingest::{TopicId, TopicQuery, Tweet};

/// Scores as they read back from the wire, so a folded log matches the
/// writer's own snapshot exactly.
fn wire_scores(scores: &EmotionScores) -> EmotionScores {
    EmotionScores::from_array(scores.to_array().map(|v| quantize(v, 6)))
}

/// Live leaves kept per emotion hub; older leaves are evicted first.
pub const LEAF_CAP: usize = 50;

const LABEL_CHARS: usize = 40;

fn topic_payloads(q: &TopicQuery) -> (Vec<EventPayload>, Vec<EventPayload>) {
    let topic = q.topic_id;
    let topic_id = topic_node_id(topic);
    let mut nodes = vec![EventPayload::NodeAdded {
        node: GraphNode {
            id: topic_id.clone(),
            kind: NodeKind::Topic,
            label: q.trimmed_phrase().to_string(),
            classes: vec!["topic".into(), format!("topic-{}", topic.as_str().to_lowercase())],
            attrs: BTreeMap::new(),
        },
    }];
    let mut edges = Vec::new();
    for emotion in EmotionLabel::ALL {
        let hub = emotion_hub_id(topic, emotion);
        nodes.push(EventPayload::NodeAdded {
            node: GraphNode {
                id: hub.clone(),
                kind: NodeKind::Emotion,
                label: emotion.to_string(),
                classes: vec!["emotion".into(), emotion.to_string()],
                attrs: [(TOTAL_COUNT.to_string(), AttrValue::Count(0))].into(),
            },
        });
        edges.push(EventPayload::EdgeAdded {
            id: parent_edge_id(&hub),
            from: topic_id.clone(),
            to: hub,
        });
    }
    (nodes, edges)
}

/// Events building the empty two-cluster graph: twelve nodes (topic hubs and
/// their emotion hubs) followed by the ten hub edges, numbered from seq 0.
pub fn init_session_graph(a: &TopicQuery, b: &TopicQuery) -> Vec<GraphEvent> {
    let (nodes_a, edges_a) = topic_payloads(a);
    let (nodes_b, edges_b) = topic_payloads(b);
    nodes_a
        .into_iter()
        .chain(nodes_b)
        .chain(edges_a)
        .chain(edges_b)
        .enumerate()
        .map(|(seq, event)| GraphEvent { seq: seq as u64, event })
        .collect()
}

/// The single writer of a session graph: assigns sequence numbers, keeps
/// the authoritative snapshot and the per-hub FIFO of live leaves.
#[derive(Debug, Clone, Default)]
pub struct GraphWriter {
    snapshot: GraphSnapshot,
    leaves: HashMap<String, VecDeque<String>>,
    skipped: BTreeMap<TopicId, u64>,
}

impl GraphWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn snapshot(&self) -> &GraphSnapshot {
        &self.snapshot
    }

    /// Tweets dropped for `topic` because every score was zero.
    pub fn skipped(&self, topic: TopicId) -> u64 {
        self.skipped.get(&topic).copied().unwrap_or(0)
    }

    pub fn init_session_graph(&mut self, a: &TopicQuery, b: &TopicQuery) -> Result<Vec<GraphEvent>, GraphError> {
        if self.snapshot.last_seq.is_some() {
            return Err(GraphError::Contract("session graph already initialized".into()));
        }
        let events = init_session_graph(a, b);
        for event in &events {
            self.snapshot.apply_in_place(event)?;
        }
        Ok(events)
    }

    fn emit(&mut self, payload: EventPayload) -> Result<GraphEvent, GraphError> {
        let event = GraphEvent {
            seq: self.snapshot.next_seq(),
            event: payload,
        };
        self.snapshot.apply_in_place(&event)?;
        Ok(event)
    }

    /// Attaches `tweet` to the hub of its dominant emotion within `topic`.
    ///
    /// All-zero scores produce no events; the topic's skip counter goes up
    /// instead. A hub over [`LEAF_CAP`] evicts its oldest leaf.
    pub fn ingest_tweet(
        &mut self,
        tweet: &Tweet,
        topic: TopicId,
        scores: &EmotionScores,
    ) -> Result<Vec<GraphEvent>, GraphError> {
        if self.snapshot.node(&topic_node_id(topic)).is_none() {
            return Err(GraphError::Contract(format!("topic {topic} is not part of this graph")));
        }
        if scores.is_all_zero() {
            *self.skipped.entry(topic).or_default() += 1;
            return Ok(Vec::new());
        }

        let label = scores.final_emotion();
        let hub = emotion_hub_id(topic, label);
        let leaf = tweet_node_id(topic, &tweet.id);
        if self.snapshot.node(&leaf).is_some() || self.snapshot.is_retired(&leaf) {
            return Err(GraphError::Contract(format!("tweet node `{leaf}` already used")));
        }
        let total = self
            .snapshot
            .node(&hub)
            .and_then(|n| n.attrs.get(TOTAL_COUNT))
            .and_then(AttrValue::as_count)
            .unwrap_or(0);

        let mut events = Vec::with_capacity(5);
        events.push(
            self.emit(EventPayload::NodeAdded {
                node: GraphNode {
                    id: leaf.clone(),
                    kind: NodeKind::Tweet,
                    label: tweet.text.chars().take(LABEL_CHARS).collect(),
                    classes: vec!["tweet".into(), label.to_string()],
                    attrs: [
                        (TWEET_ID.to_string(), AttrValue::Text(tweet.id.clone())),
                        (DOC_EMOTIONS.to_string(), AttrValue::Emotions(wire_scores(scores))),
                    ]
                    .into(),
                },
            })?,
        );
        events.push(self.emit(EventPayload::EdgeAdded {
            id: parent_edge_id(&leaf),
            from: leaf.clone(),
            to: hub.clone(),
        })?);
        events.push(self.emit(EventPayload::AttrChanged {
            node_id: hub.clone(),
            key: TOTAL_COUNT.to_string(),
            value: AttrValue::Count(total + 1),
        })?);

        let queue = self.leaves.entry(hub).or_default();
        queue.push_back(leaf);
        if queue.len() > LEAF_CAP {
            let oldest = queue.pop_front().expect("queue over cap is non-empty");
            events.push(self.emit(EventPayload::EdgeRemoved {
                id: parent_edge_id(&oldest),
            })?);
            events.push(self.emit(EventPayload::NodeRemoved { id: oldest })?);
        }
        Ok(events)
    }

    pub fn publish_positions(&mut self, positions: BTreeMap<String, Point3>) -> Result<GraphEvent, GraphError> {
        self.emit(EventPayload::Positions { positions })
    }
}

/// Cumulative and live tally of one emotion hub.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HubCounts {
    pub total_count: u64,
    pub live: u64,
}

impl GraphSnapshot {
    pub fn hub_counts(&self, hub_id: &str) -> Option<HubCounts> {
        let node = self.node(hub_id).filter(|n| n.kind == NodeKind::Emotion)?;
        let total_count = node.attrs.get(TOTAL_COUNT).and_then(AttrValue::as_count).unwrap_or(0);
        let live = self
            .edges
            .values()
            .filter(|e| e.to == hub_id && self.node(&e.from).is_some_and(|n| n.kind == NodeKind::Tweet))
            .count() as u64;
        Some(HubCounts { total_count, live })
    }
}
