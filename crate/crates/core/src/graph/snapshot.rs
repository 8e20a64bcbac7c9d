use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{EventPayload, GraphEdge, GraphEvent, GraphNode, NodeKind};
use crate::fixed::Point3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("event seq {found} out of order (expected {expected})")]
    Ordering { expected: u64, found: u64 },
    #[error("integrity violation: {0}")]
    Integrity(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

/// The graph as of `last_seq`: the left fold of events `0..=last_seq`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphSnapshot {
    pub nodes: BTreeMap<String, GraphNode>,
    pub edges: BTreeMap<String, GraphEdge>,
    pub positions: BTreeMap<String, Point3>,
    pub last_seq: Option<u64>,
    /// Removed ids; never reused within a session.
    #[serde(skip)]
    retired_nodes: BTreeSet<String>,
    #[serde(skip)]
    retired_edges: BTreeSet<String>,
}

impl GraphSnapshot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fold<'a>(events: impl IntoIterator<Item = &'a GraphEvent>) -> Result<Self, GraphError> {
        let mut snapshot = Self::new();
        for event in events {
            snapshot.apply_in_place(event)?;
        }
        Ok(snapshot)
    }

    pub fn next_seq(&self) -> u64 {
        self.last_seq.map_or(0, |s| s + 1)
    }

    /// Pure variant of [`apply_in_place`](Self::apply_in_place).
    pub fn apply_event(&self, event: &GraphEvent) -> Result<Self, GraphError> {
        let mut next = self.clone();
        next.apply_in_place(event)?;
        Ok(next)
    }

    /// Applies one event. On error the snapshot is left untouched.
    pub fn apply_in_place(&mut self, event: &GraphEvent) -> Result<(), GraphError> {
        let expected = self.next_seq();
        if event.seq != expected {
            return Err(GraphError::Ordering {
                expected,
                found: event.seq,
            });
        }
        match &event.event {
            EventPayload::NodeAdded { node } => {
                if node.id.is_empty() {
                    return Err(GraphError::Integrity("empty node id".into()));
                }
                if self.nodes.contains_key(&node.id) || self.retired_nodes.contains(&node.id) {
                    return Err(GraphError::Integrity(format!("node `{}` already used", node.id)));
                }
                self.nodes.insert(node.id.clone(), node.clone());
            }
            EventPayload::EdgeAdded { id, from, to } => {
                if self.edges.contains_key(id) || self.retired_edges.contains(id) {
                    return Err(GraphError::Integrity(format!("edge `{id}` already used")));
                }
                self.require_node(from)?;
                self.require_node(to)?;
                self.edges.insert(
                    id.clone(),
                    GraphEdge {
                        id: id.clone(),
                        from: from.clone(),
                        to: to.clone(),
                    },
                );
            }
            EventPayload::AttrChanged { node_id, key, value } => {
                let node = self
                    .nodes
                    .get_mut(node_id)
                    .ok_or_else(|| GraphError::Integrity(format!("unknown node `{node_id}`")))?;
                node.attrs.insert(key.clone(), value.clone());
            }
            EventPayload::NodeRemoved { id } => {
                self.require_node(id)?;
                if let Some(edge) = self.edges.values().find(|e| &e.from == id || &e.to == id) {
                    return Err(GraphError::Integrity(format!(
                        "node `{id}` still has edge `{}`",
                        edge.id
                    )));
                }
                self.nodes.remove(id);
                self.positions.remove(id);
                self.retired_nodes.insert(id.clone());
            }
            EventPayload::EdgeRemoved { id } => {
                if self.edges.remove(id).is_none() {
                    return Err(GraphError::Integrity(format!("unknown edge `{id}`")));
                }
                self.retired_edges.insert(id.clone());
            }
            EventPayload::Positions { positions } => {
                for id in positions.keys() {
                    self.require_node(id)?;
                }
                for (id, p) in positions {
                    self.positions.insert(id.clone(), *p);
                }
            }
        }
        self.last_seq = Some(event.seq);
        Ok(())
    }

    fn require_node(&self, id: &str) -> Result<(), GraphError> {
        if self.nodes.contains_key(id) {
            Ok(())
        } else {
            Err(GraphError::Integrity(format!("unknown node `{id}`")))
        }
    }

    pub fn node(&self, id: &str) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    /// Edges touching `id`, in edge-id order.
    pub fn incident_edges<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a GraphEdge> + 'a {
        self.edges.values().filter(move |e| e.from == id || e.to == id)
    }

    pub fn is_retired(&self, node_id: &str) -> bool {
        self.retired_nodes.contains(node_id)
    }
}
