//! Corpus ingestion: markup stripping, sentence segmentation, normalization,
//! deduplication, and token-level annotation.

mod annotate;
mod markup;

pub use annotate::{Annotator, HeuristicAnnotator, NullAnnotator};
pub use markup::strip_markup;

use std::collections::HashSet;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A document as delivered by the (out of scope) content extractor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// One token of a sentence. `pos`/`dep`/`ner` stay absent unless the
/// annotator supplies them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub lower: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dep: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ner: Option<String>,
    #[serde(skip)]
    pub index: usize,
}

impl Token {
    pub fn plain(text: &str, index: usize) -> Self {
        Token {
            text: text.to_string(),
            lower: text.to_lowercase(),
            pos: None,
            dep: None,
            ner: None,
            index,
        }
    }
}

/// A normalized sentence. `raw` keeps the original casing because some rules
/// match against it; `lower` is the dedup key and the default match surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotatedSentence {
    pub sent_id: String,
    pub doc_id: String,
    pub raw: String,
    pub lower: String,
    pub tokens: Vec<Token>,
}

impl AnnotatedSentence {
    /// Restores the positional token indices after deserialization (the wire
    /// format carries order implicitly).
    fn reindex(&mut self) {
        for (i, tok) in self.tokens.iter_mut().enumerate() {
            tok.index = i;
        }
    }
}

/// Stable sentence id: truncated sha256 of the lowercased text, so ids
/// survive re-ingestion and key label joins.
pub fn sent_id_for(lower: &str) -> String {
    let digest = Sha256::digest(lower.as_bytes());
    let mut out = String::with_capacity(32);
    for byte in &digest[..16] {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Splits extracted text into sentence strings on newlines and on runs of
/// three or more whitespace characters. Empty and whitespace-only segments
/// are dropped.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let mut segments = Vec::new();
    for line in text.split(['\n', '\r']) {
        let mut current = String::new();
        let mut run = String::new();
        for ch in line.chars() {
            if ch.is_whitespace() {
                run.push(ch);
            } else {
                if !run.is_empty() {
                    if run.chars().count() >= 3 {
                        push_segment(&mut segments, &mut current);
                    } else {
                        current.push_str(&run);
                    }
                    run.clear();
                }
                current.push(ch);
            }
        }
        push_segment(&mut segments, &mut current);
    }
    segments
}

fn push_segment(segments: &mut Vec<String>, current: &mut String) {
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        segments.push(trimmed.to_string());
    }
    current.clear();
}

/// Lowercases and deduplicates sentences from one document, keeping the first
/// occurrence of each distinct lowercased form. Tokens are left empty; run an
/// [`Annotator`] afterwards.
pub fn normalize_and_dedup(sentences: &[String], doc_id: &str) -> Vec<AnnotatedSentence> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for raw in sentences {
        let lower = raw.to_lowercase();
        if !seen.insert(lower.clone()) {
            continue;
        }
        out.push(AnnotatedSentence {
            sent_id: sent_id_for(&lower),
            doc_id: doc_id.to_string(),
            raw: raw.clone(),
            lower,
            tokens: Vec::new(),
        });
    }
    out
}

/// Tokenizes and annotates a normalized sentence. If the annotator fails the
/// sentence is kept with plain whitespace tokens and a warning is logged.
pub fn annotate(sentence: &mut AnnotatedSentence, annotator: &dyn Annotator) {
    match annotator.annotate(&sentence.raw) {
        Ok(tokens) => sentence.tokens = tokens,
        Err(msg) => {
            log::warn!(
                "annotator failed on sentence {}: {msg}; falling back to whitespace tokens",
                sentence.sent_id
            );
            sentence.tokens = whitespace_tokens(&sentence.raw);
        }
    }
}

/// Plain whitespace tokenization; the minimum every annotator provides.
pub fn whitespace_tokens(raw: &str) -> Vec<Token> {
    raw.split_whitespace()
        .enumerate()
        .map(|(i, t)| Token::plain(t, i))
        .collect()
}

/// Ingestion counters reported by [`build_corpus`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IngestStats {
    pub documents: usize,
    pub segments: usize,
    pub sentences: usize,
    pub duplicates_dropped: usize,
}

impl IngestStats {
    pub fn dedup_ratio(&self) -> f64 {
        if self.segments == 0 {
            0.0
        } else {
            self.duplicates_dropped as f64 / self.segments as f64
        }
    }
}

/// Runs the whole preprocessing pipeline over a batch of documents:
/// strip markup, segment, normalize, deduplicate corpus-wide (first
/// occurrence wins), then annotate every kept sentence.
pub fn build_corpus(
    docs: &[RawDocument],
    annotator: &dyn Annotator,
) -> (Vec<AnnotatedSentence>, IngestStats) {
    let mut stats = IngestStats {
        documents: docs.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut corpus = Vec::new();
    for doc in docs {
        let text = strip_markup(&doc.body);
        let segments = segment_sentences(&text);
        stats.segments += segments.len();
        for sentence in normalize_and_dedup(&segments, &doc.doc_id) {
            if seen.insert(sentence.lower.clone()) {
                corpus.push(sentence);
            }
        }
    }
    stats.duplicates_dropped = stats.segments - corpus.len();
    stats.sentences = corpus.len();
    for sentence in &mut corpus {
        annotate(sentence, annotator);
    }
    (corpus, stats)
}

/// Reads documents from JSON Lines (`{"doc_id", "body", "source"?}`).
pub fn read_documents(path: &Path) -> Result<Vec<RawDocument>> {
    read_jsonl(path)
}

/// Reads an annotated corpus from JSON Lines, restoring token indices.
pub fn read_corpus(path: &Path) -> Result<Vec<AnnotatedSentence>> {
    let mut corpus: Vec<AnnotatedSentence> = read_jsonl(path)?;
    for sentence in &mut corpus {
        sentence.reindex();
    }
    Ok(corpus)
}

/// Writes an annotated corpus as JSON Lines, one sentence per line.
pub fn write_corpus(path: &Path, corpus: &[AnnotatedSentence]) -> Result<()> {
    write_jsonl(path, corpus.iter())
}

pub(crate) fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            line: idx + 1,
            source: e,
        })?;
        out.push(value);
    }
    Ok(out)
}

pub(crate) fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    items: impl Iterator<Item = &'a T>,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).expect("serializable item");
        writeln!(writer, "{line}").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
