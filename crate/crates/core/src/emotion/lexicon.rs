use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use super::{tokenize, EmotionLabel};

/// The lexicon shipped with the crate.
pub const DEFAULT_LEXICON: &str = include_str!("../../data/emotion.lex");

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: weight {value} for `{token}` is outside (0, 1]")]
    OutOfRange { line: usize, token: String, value: f64 },
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Token → per-emotion weights, plus the set of negating tokens.
///
/// Immutable once loaded; share it behind an `Arc`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, Vec<(EmotionLabel, f64)>>,
    negators: HashSet<String>,
    name: String,
}

impl Lexicon {
    /// Parses the line-oriented lexicon format.
    ///
    /// ```text
    /// # comment
    /// love<TAB>joy:0.8
    /// betrayed<TAB>anger:0.6,sadness:0.6
    /// !negator<TAB>not
    /// ```
    ///
    /// Repeated tokens are merged by keeping the larger weight per emotion.
    pub fn parse(source: &str) -> Result<Self, LexiconError> {
        let mut merged: HashMap<String, BTreeMap<EmotionLabel, f64>> = HashMap::new();
        let mut negators = HashSet::new();

        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let text = raw.trim_end_matches('\r');
            if text.trim().is_empty() || text.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| LexiconError::Malformed {
                line,
                reason: reason.to_string(),
            };
            let (head, tail) = text
                .split_once('\t')
                .ok_or_else(|| malformed("expected `token<TAB>emotion:weight`"))?;

            if head == "!negator" {
                negators.insert(single_token(tail.trim()).map_err(|r| malformed(&r))?);
                continue;
            }

            let token = single_token(head.trim()).map_err(|r| malformed(&r))?;
            let weights = merged.entry(token.clone()).or_default();
            let tail = tail.trim();
            if tail.is_empty() {
                return Err(malformed("missing emotion weights"));
            }
            for pair in tail.split(',') {
                let (emotion, value) = pair
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| malformed(&format!("expected `emotion:weight`, found `{pair}`")))?;
                let label: EmotionLabel = emotion
                    .trim()
                    .parse()
                    .map_err(|e: super::UnknownEmotion| malformed(&e.to_string()))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| malformed(&format!("weight `{}` is not a number", value.trim())))?;
                if !(value > 0.0 && value <= 1.0) {
                    return Err(LexiconError::OutOfRange { line, token, value });
                }
                let slot = weights.entry(label).or_insert(value);
                *slot = slot.max(value);
            }
        }

        let entries = merged
            .into_iter()
            .map(|(token, weights)| (token, weights.into_iter().collect()))
            .collect();
        Ok(Self {
            entries,
            negators,
            name: String::new(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lexicon = Self::parse(&text)?;
        lexicon.name = path.display().to_string();
        Ok(lexicon)
    }

    pub fn bundled() -> Self {
        let mut lexicon = Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid");
        lexicon.name = "bundled".to_string();
        lexicon
    }

    pub fn weights(&self, token: &str) -> Option<&[(EmotionLabel, f64)]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Entries in token order, for inspection and tests.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &[(EmotionLabel, f64)])> {
        let sorted: BTreeMap<_, _> = self.entries.iter().collect();
        sorted.into_iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn negators(&self) -> BTreeSet<&str> {
        self.negators.iter().map(String::as_str).collect()
    }
}

/// Lexicon keys must be exactly one token after case folding, otherwise they
/// could never match tokenizer output.
fn single_token(raw: &str) -> Result<String, String> {
    if raw.is_empty() {
        return Err("empty token".to_string());
    }
    match tokenize(raw).as_slice() {
        [one] if one.chars().count() == raw.chars().count() => Ok(one.clone()),
        _ => Err(format!("`{raw}` is not a single token")),
    }
}
