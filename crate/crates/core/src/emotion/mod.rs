//! Five-mode emotion scoring.
//!
//! Text is tokenized, matched against a [`Lexicon`] and folded per emotion
//! with noisy-OR (`1 - Π(1 - w)`). A match is dropped when one of the two
//! tokens before it is a negator. The resulting [`EmotionScores`] are
//! independent confidences in `[0, 1]`; they do not sum to one.

mod lexicon;
mod tokenize;

pub use lexicon::{Lexicon, LexiconError, DEFAULT_LEXICON};
pub use tokenize::tokenize;

use std::fmt;
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::fixed::fixed_number;

/// Number of tokens before a match that are searched for negators.
pub const NEGATION_WINDOW: usize = 2;

/// One of the five basic emotion modes.
///
/// The declaration order is the canonical order used for serialization and
/// tie-breaking: anger < disgust < fear < joy < sadness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Anger,
    Disgust,
    Fear,
    Joy,
    Sadness,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 5] = [
        EmotionLabel::Anger,
        EmotionLabel::Disgust,
        EmotionLabel::Fear,
        EmotionLabel::Joy,
        EmotionLabel::Sadness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Anger => "anger",
            EmotionLabel::Disgust => "disgust",
            EmotionLabel::Fear => "fear",
            EmotionLabel::Joy => "joy",
            EmotionLabel::Sadness => "sadness",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown emotion `{0}`")]
pub struct UnknownEmotion(pub String);

impl FromStr for EmotionLabel {
    type Err = UnknownEmotion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::ALL
            .into_iter()
            .find(|label| label.as_str() == s)
            .ok_or_else(|| UnknownEmotion(s.to_string()))
    }
}

/// Relevance of each emotion mode for one text, every component in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmotionScores {
    pub anger: f64,
    pub disgust: f64,
    pub fear: f64,
    pub joy: f64,
    pub sadness: f64,
}

impl EmotionScores {
    pub fn from_array(values: [f64; 5]) -> Self {
        let [anger, disgust, fear, joy, sadness] = values;
        Self {
            anger,
            disgust,
            fear,
            joy,
            sadness,
        }
    }

    /// Components in canonical label order.
    pub fn to_array(&self) -> [f64; 5] {
        [self.anger, self.disgust, self.fear, self.joy, self.sadness]
    }

    pub fn get(&self, label: EmotionLabel) -> f64 {
        self.to_array()[label.index()]
    }

    pub fn is_all_zero(&self) -> bool {
        self.to_array().iter().all(|v| *v == 0.0)
    }

    /// Most relevant emotion; ties go to the earliest label in canonical order.
    pub fn final_emotion(&self) -> EmotionLabel {
        final_emotion(self)
    }
}

/// Serializes as the `docEmotions` object: five keys in canonical order, each
/// a JSON number with exactly six decimals.
impl Serialize for EmotionScores {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(5))?;
        for label in EmotionLabel::ALL {
            map.serialize_entry(label.as_str(), &fixed_number(self.get(label), 6))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for EmotionScores {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            anger: f64,
            disgust: f64,
            fear: f64,
            joy: f64,
            sadness: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        Ok(EmotionScores::from_array([
            raw.anger,
            raw.disgust,
            raw.fear,
            raw.joy,
            raw.sadness,
        ]))
    }
}

/// Scores `text` against every emotion mode of `lexicon`.
pub fn score_text(text: &str, lexicon: &Lexicon) -> EmotionScores {
    let tokens = tokenize(text);
    // Running Π(1 - w) per emotion.
    let mut remaining = [1.0f64; 5];
    for (pos, token) in tokens.iter().enumerate() {
        let Some(weights) = lexicon.weights(token) else {
            continue;
        };
        let window = pos.saturating_sub(NEGATION_WINDOW)..pos;
        if tokens[window].iter().any(|t| lexicon.is_negator(t)) {
            continue;
        }
        for (label, weight) in weights {
            remaining[label.index()] *= 1.0 - weight;
        }
    }
    EmotionScores::from_array(remaining.map(|r| 1.0 - r))
}

/// Argmax over the five components with canonical-order tie-breaking.
pub fn final_emotion(scores: &EmotionScores) -> EmotionLabel {
    let values = scores.to_array();
    let mut best = EmotionLabel::Anger;
    for label in EmotionLabel::ALL.into_iter().skip(1) {
        if values[label.index()] > values[best.index()] {
            best = label;
        }
    }
    best
}
