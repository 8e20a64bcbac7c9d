//! Core of the Plexus pipeline: tweets for two topics are scored against five
//! emotion modes and folded into an event-sourced two-cluster graph that is
//! laid out with a force-directed algorithm and styled by a small CSS subset.

pub mod emotion;
pub mod fixed;
pub mod graph;
pub mod ingest;
pub mod layout;
pub mod session;
pub mod style;

pub use emotion::{final_emotion, score_text, tokenize, EmotionLabel, EmotionScores, Lexicon};
pub use graph::{GraphEvent, GraphSnapshot, GraphWriter};
pub use ingest::{TopicId, TopicQuery, Tweet};
pub use layout::{LayoutParams, LayoutState};
pub use session::{Session, SessionConfig, WireEvent};
pub use style::{ComputedStyle, StyleRule};
