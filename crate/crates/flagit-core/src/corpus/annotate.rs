//! Pluggable token-level annotation. Annotations come from lookup tables, not
//! from a learned model, so the output is deterministic and the crate carries
//! no NLP runtime dependency. Swap in a richer annotator by implementing
//! [`Annotator`].

use std::collections::HashSet;

use super::{whitespace_tokens, Token};

/// Supplies tokens plus optional POS/dependency/NER annotations for one
/// sentence. Implementations must be deterministic.
pub trait Annotator: Send + Sync {
    fn annotate(&self, raw: &str) -> Result<Vec<Token>, String>;

    fn name(&self) -> &'static str;
}

/// Whitespace tokens only; no tags.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullAnnotator;

impl Annotator for NullAnnotator {
    fn annotate(&self, raw: &str) -> Result<Vec<Token>, String> {
        Ok(whitespace_tokens(raw))
    }

    fn name(&self) -> &'static str {
        "null"
    }
}

const ADJECTIVES: &[&str] = &[
    "private", "discreet", "new", "cozy", "quiet", "clean", "safe", "upscale", "real",
    "independent", "young", "sweet", "busy", "luxury", "comfortable",
];

const NOUNS: &[&str] = &[
    "apartment", "studio", "place", "location", "condo", "house", "hotel", "motel", "room",
    "suite", "residence", "loft", "spot", "town", "city", "area", "incall", "outcall", "session",
    "friend", "friends", "girl", "girls", "ladies", "companion", "companions", "sister",
    "sisters", "duo", "party", "trip", "tour", "visit", "week", "weekend", "number", "bus",
    "train", "flight",
];

const VERBS: &[&str] = &[
    "visit", "visiting", "host", "hosting", "travel", "traveling", "touring", "arrive",
    "arriving", "leaving", "come", "call", "text", "book", "offer", "offering", "ask", "stay",
    "staying",
];

const PERSON_NAMES: &[&str] = &[
    "alice", "bella", "candy", "dakota", "emma", "gina", "jade", "kayla", "lola", "mia", "nina",
    "ruby", "sasha", "tiffany", "violet", "zoe",
];

const PLACE_NAMES: &[&str] = &[
    "ashford", "brookhaven", "cedarville", "dovermont", "eastbridge", "fairpoint", "glenrock",
    "harborview", "lakewood", "maplewood", "northgate", "oakdale", "pinecrest", "riverton",
    "springfield", "westfall",
];

/// Deterministic heuristic annotator backed by small lookup tables: an
/// adjective directly before a known noun gets `dep=amod`, capitalized tokens
/// found in the bundled name/place lists get `ner=PERSON`/`ner=GPE`, and
/// digit tokens get `pos=NUM`.
#[derive(Debug, Clone)]
pub struct HeuristicAnnotator {
    adjectives: HashSet<&'static str>,
    nouns: HashSet<&'static str>,
    verbs: HashSet<&'static str>,
    persons: HashSet<&'static str>,
    places: HashSet<&'static str>,
}

impl Default for HeuristicAnnotator {
    fn default() -> Self {
        HeuristicAnnotator {
            adjectives: ADJECTIVES.iter().copied().collect(),
            nouns: NOUNS.iter().copied().collect(),
            verbs: VERBS.iter().copied().collect(),
            persons: PERSON_NAMES.iter().copied().collect(),
            places: PLACE_NAMES.iter().copied().collect(),
        }
    }
}

impl HeuristicAnnotator {
    /// Lookup key for a token: lowercased with edge punctuation peeled off.
    fn key(lower: &str) -> &str {
        lower.trim_matches(|c: char| c.is_ascii_punctuation())
    }

    fn is_capitalized(text: &str) -> bool {
        let mut chars = text.chars();
        matches!(chars.next(), Some(c) if c.is_uppercase())
            && chars.all(|c| c.is_lowercase() || c.is_ascii_punctuation())
    }
}

impl Annotator for HeuristicAnnotator {
    fn annotate(&self, raw: &str) -> Result<Vec<Token>, String> {
        let mut tokens = whitespace_tokens(raw);
        let keys: Vec<String> = tokens
            .iter()
            .map(|t| Self::key(&t.lower).to_string())
            .collect();
        for i in 0..tokens.len() {
            let key = keys[i].as_str();
            if self.adjectives.contains(key) {
                tokens[i].pos = Some("ADJ".to_string());
                let next_is_noun = keys
                    .get(i + 1)
                    .map(|k| self.nouns.contains(k.as_str()))
                    .unwrap_or(false);
                if next_is_noun {
                    tokens[i].dep = Some("amod".to_string());
                }
            } else if self.nouns.contains(key) {
                tokens[i].pos = Some("NOUN".to_string());
            } else if self.verbs.contains(key) {
                tokens[i].pos = Some("VERB".to_string());
            } else if !key.is_empty() && key.chars().all(|c| c.is_ascii_digit()) {
                tokens[i].pos = Some("NUM".to_string());
            }
            if Self::is_capitalized(&tokens[i].text) {
                if self.persons.contains(key) {
                    tokens[i].ner = Some("PERSON".to_string());
                } else if self.places.contains(key) {
                    tokens[i].ner = Some("GPE".to_string());
                }
            }
        }
        Ok(tokens)
    }

    fn name(&self) -> &'static str {
        "heuristic"
    }
}

/// Resolves an annotator by name, as referenced from project config.
pub fn annotator_by_name(name: &str) -> Option<Box<dyn Annotator>> {
    match name {
        "null" => Some(Box::new(NullAnnotator)),
        "heuristic" => Some(Box::new(HeuristicAnnotator::default())),
        _ => None,
    }
}
