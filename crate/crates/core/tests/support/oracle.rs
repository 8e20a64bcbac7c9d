//! Brute-force reference scorer, written without reusing any library code.
//!
//! It enumerates every (token position, lexicon entry) pair, drops matches
//! that have a negator among the two preceding tokens, and folds the
//! noisy-OR in token order so results can be compared bit for bit.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;

pub const EMOTIONS: [&str; 5] = ["anger", "disgust", "fear", "joy", "sadness"];

pub struct OracleLexicon {
    pub entries: Vec<(String, [f64; 5])>,
    pub negators: Vec<String>,
}

impl OracleLexicon {
    pub fn from_source(source: &str) -> Self {
        let mut entries: Vec<(String, [f64; 5])> = Vec::new();
        let mut negators = Vec::new();
        for line in source.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, tail) = line.split_once('\t').expect("tab separated");
            if head == "!negator" {
                negators.push(tail.trim().to_lowercase());
                continue;
            }
            let mut weights = [0.0; 5];
            for pair in tail.split(',') {
                let (name, w) = pair.trim().split_once(':').expect("emotion:weight");
                let slot = EMOTIONS.iter().position(|e| *e == name).expect("known emotion");
                weights[slot] = w.parse().expect("weight");
            }
            let token = head.to_lowercase();
            match entries.iter_mut().find(|(t, _)| *t == token) {
                Some((_, existing)) => {
                    for i in 0..5 {
                        existing[i] = existing[i].max(weights[i]);
                    }
                }
                None => entries.push((token, weights)),
            }
        }
        Self { entries, negators }
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c.is_numeric()
}

/// Index-based scan: find each maximal word run, then look one char back for
/// a `#` or `@` prefix.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !is_word_char(chars[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && is_word_char(chars[i]) {
            i += 1;
        }
        let mut token = String::new();
        if start > 0 && (chars[start - 1] == '#' || chars[start - 1] == '@') {
            token.push(chars[start - 1]);
        }
        for c in &chars[start..i] {
            token.extend(c.to_lowercase());
        }
        out.push(token);
    }
    out
}

pub fn oracle_score(text: &str, lexicon: &OracleLexicon) -> [f64; 5] {
    let tokens = oracle_tokens(text);
    let mut result = [0.0; 5];
    for (e, slot) in result.iter_mut().enumerate() {
        let mut product = 1.0f64;
        for pos in 0..tokens.len() {
            for (entry, weights) in &lexicon.entries {
                if tokens[pos] != *entry || weights[e] == 0.0 {
                    continue;
                }
                let negated = (1..=2)
                    .filter(|back| *back <= pos)
                    .any(|back| lexicon.negators.contains(&tokens[pos - back]));
                if !negated {
                    product *= 1.0 - weights[e];
                }
            }
        }
        *slot = 1.0 - product;
    }
    result
}

const FILLER: &[&str] = &[
    "I",
    "the",
    "snow",
    "Vancouver",
    "it",
    "do",
    "so",
    "much",
    "iPhone",
    "7",
    "today",
    "ça",
    "Straße",
    "x2",
];
const SEPARATORS: &[&str] = &[" ", "  ", ", ", "! ", "... ", "\n", "\t", " - ", "?"];

/// Random text mixing lexicon tokens (in varied case and with hashtag or
/// mention prefixes), negators, filler words and punctuation.
pub fn random_text<R: Rng>(rng: &mut R, lexicon: &OracleLexicon) -> String {
    let len = rng.random_range(0..=14);
    let mut text = String::new();
    for _ in 0..len {
        let roll = rng.random_range(0..10);
        let mut word = if roll < 4 && !lexicon.entries.is_empty() {
            lexicon.entries.choose(rng).unwrap().0.clone()
        } else if roll < 6 && !lexicon.negators.is_empty() {
            lexicon.negators.choose(rng).unwrap().clone()
        } else {
            FILLER.choose(rng).unwrap().to_string()
        };
        match rng.random_range(0..8) {
            0 => word = word.to_uppercase(),
            1 => word = format!("#{}", word.trim_start_matches('#')),
            2 => word = format!("@{word}"),
            _ => {}
        }
        text.push_str(&word);
        text.push_str(SEPARATORS.choose(rng).unwrap());
    }
    text
}
