//! The label store: an append-only journal of labeling decisions plus a
//! materialized latest-state view. Human labels always win over pseudo
//! labels; human relabeling is last-write-wins and stays auditable in the
//! journal.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Human,
    PseudoPositive,
    PseudoNegative,
}

/// One labeling decision for one (sentence, indicator) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub sent_id: String,
    pub indicator: String,
    pub label: bool,
    pub source: LabelSource,
    pub ts: u64,
}

/// What [`LabelStore::record`] did with a submission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordOutcome {
    Stored,
    /// A later human label replaced an earlier one (both stay journaled).
    OverwroteHuman,
    /// A pseudo label arrived for a sentence that already has a human label.
    IgnoredPseudo,
}

#[derive(Debug)]
pub struct LabelStore {
    path: Option<PathBuf>,
    journal: Vec<LabeledExample>,
    /// Latest resolved label per (sent_id, indicator); human beats pseudo.
    view: BTreeMap<(String, String), LabeledExample>,
    /// Known sentence ids; submissions outside it are rejected when set.
    universe: Option<BTreeSet<String>>,
}

impl LabelStore {
    /// Opens (or creates) the journal file and rebuilds the view.
    pub fn open(path: &Path) -> Result<Self> {
        let journal: Vec<LabeledExample> = if path.exists() {
            crate::corpus::read_jsonl(path)?
        } else {
            Vec::new()
        };
        let mut store = LabelStore {
            path: Some(path.to_path_buf()),
            journal: Vec::new(),
            view: BTreeMap::new(),
            universe: None,
        };
        for entry in journal {
            store.apply(entry);
        }
        Ok(store)
    }

    pub fn in_memory() -> Self {
        LabelStore {
            path: None,
            journal: Vec::new(),
            view: BTreeMap::new(),
            universe: None,
        }
    }

    /// Restricts future submissions to this id set.
    pub fn set_universe(&mut self, ids: impl IntoIterator<Item = String>) {
        self.universe = Some(ids.into_iter().collect());
    }

    pub fn record(
        &mut self,
        sent_id: &str,
        indicator: &str,
        label: bool,
        source: LabelSource,
    ) -> Result<RecordOutcome> {
        if let Some(universe) = &self.universe {
            if !universe.contains(sent_id) {
                return Err(Error::UnknownSentence {
                    sent_id: sent_id.to_string(),
                });
            }
        }
        let key = (sent_id.to_string(), indicator.to_string());
        let existing_human = self
            .view
            .get(&key)
            .map(|e| e.source == LabelSource::Human)
            .unwrap_or(false);
        if existing_human && source != LabelSource::Human {
            log::warn!(
                "ignoring pseudo label for {sent_id}/{indicator}: a human label exists"
            );
            return Ok(RecordOutcome::IgnoredPseudo);
        }
        let entry = LabeledExample {
            sent_id: sent_id.to_string(),
            indicator: indicator.to_string(),
            label,
            source,
            ts: now_millis(),
        };
        self.append_to_journal(&entry)?;
        let outcome = if existing_human && source == LabelSource::Human {
            RecordOutcome::OverwroteHuman
        } else {
            RecordOutcome::Stored
        };
        self.apply(entry);
        Ok(outcome)
    }

    fn apply(&mut self, entry: LabeledExample) {
        let key = (entry.sent_id.clone(), entry.indicator.clone());
        let keep = match self.view.get(&key) {
            Some(current) => {
                // human labels displace anything; pseudo only displaces pseudo
                entry.source == LabelSource::Human || current.source != LabelSource::Human
            }
            None => true,
        };
        if keep {
            self.view.insert(key, entry.clone());
        }
        self.journal.push(entry);
    }

    fn append_to_journal(&mut self, entry: &LabeledExample) -> Result<()> {
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            let line = serde_json::to_string(entry).expect("serializable label");
            writeln!(file, "{line}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    /// Latest resolved label for a pair, honoring human precedence.
    pub fn latest(&self, sent_id: &str, indicator: &str) -> Option<&LabeledExample> {
        self.view
            .get(&(sent_id.to_string(), indicator.to_string()))
    }

    /// All latest human labels for one indicator, sorted by sentence id.
    pub fn human_labels(&self, indicator: &str) -> Vec<LabeledExample> {
        self.view
            .values()
            .filter(|e| e.indicator == indicator && e.source == LabelSource::Human)
            .cloned()
            .collect()
    }

    pub fn human_labeled_ids(&self, indicator: &str) -> BTreeSet<String> {
        self.human_labels(indicator)
            .into_iter()
            .map(|e| e.sent_id)
            .collect()
    }

    pub fn journal(&self) -> &[LabeledExample] {
        &self.journal
    }
}

fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Stratified train/test split of human-labeled examples. Deterministic for a
/// fixed seed; pseudo-labeled input is ignored so the test side can never see
/// a pseudo label.
pub fn split_train_test(
    labeled: &[LabeledExample],
    ratio: f64,
    seed: u64,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio { ratio });
    }
    let mut pos: Vec<&LabeledExample> = labeled
        .iter()
        .filter(|e| e.source == LabelSource::Human && e.label)
        .collect();
    let mut neg: Vec<&LabeledExample> = labeled
        .iter()
        .filter(|e| e.source == LabelSource::Human && !e.label)
        .collect();
    for (name, class) in [("positive", &pos), ("negative", &neg)] {
        if class.len() < 2 {
            return Err(Error::InsufficientLabels {
                class: name.to_string(),
                count: class.len(),
                needed: 2,
            });
        }
    }
    pos.sort_by(|a, b| a.sent_id.cmp(&b.sent_id));
    neg.sort_by(|a, b| a.sent_id.cmp(&b.sent_id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [pos, neg] {
        let n = class.len();
        let want = (ratio * n as f64).round() as usize;
        let take = want.clamp(1, n - 1);
        for (i, example) in class.into_iter().enumerate() {
            if i < take {
                train.push(example.clone());
            } else {
                test.push(example.clone());
            }
        }
    }
    train.sort_by(|a, b| a.sent_id.cmp(&b.sent_id));
    test.sort_by(|a, b| a.sent_id.cmp(&b.sent_id));
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn human(sent_id: &str, label: bool) -> LabeledExample {
        LabeledExample {
            sent_id: sent_id.to_string(),
            indicator: "incall".to_string(),
            label,
            source: LabelSource::Human,
            ts: 0,
        }
    }

    #[test]
    fn record_and_resolve() {
        let mut store = LabelStore::in_memory();
        store.record("s1", "incall", true, LabelSource::Human).unwrap();
        assert_eq!(store.latest("s1", "incall").unwrap().label, true);
        assert!(store.latest("s1", "outcall").is_none());
    }

    #[test]
    fn human_relabel_overwrites_and_journals() {
        let mut store = LabelStore::in_memory();
        store.record("s1", "incall", true, LabelSource::Human).unwrap();
        let outcome = store
            .record("s1", "incall", false, LabelSource::Human)
            .unwrap();
        assert_eq!(outcome, RecordOutcome::OverwroteHuman);
        assert_eq!(store.latest("s1", "incall").unwrap().label, false);
        assert_eq!(store.journal().len(), 2);
    }

    #[test]
    fn pseudo_never_displaces_human() {
        let mut store = LabelStore::in_memory();
        store.record("s1", "incall", true, LabelSource::Human).unwrap();
        let outcome = store
            .record("s1", "incall", false, LabelSource::PseudoNegative)
            .unwrap();
        assert_eq!(outcome, RecordOutcome::IgnoredPseudo);
        assert_eq!(store.latest("s1", "incall").unwrap().label, true);
        // and the ignored pseudo is not journaled
        assert_eq!(store.journal().len(), 1);
    }

    #[test]
    fn human_displaces_pseudo() {
        let mut store = LabelStore::in_memory();
        store
            .record("s1", "incall", true, LabelSource::PseudoPositive)
            .unwrap();
        store.record("s1", "incall", false, LabelSource::Human).unwrap();
        assert_eq!(store.latest("s1", "incall").unwrap().label, false);
        assert_eq!(
            store.latest("s1", "incall").unwrap().source,
            LabelSource::Human
        );
    }

    #[test]
    fn unknown_sentence_rejected_when_universe_set() {
        let mut store = LabelStore::in_memory();
        store.set_universe(["s1".to_string()]);
        assert!(store.record("s2", "incall", true, LabelSource::Human).is_err());
        assert!(store.record("s1", "incall", true, LabelSource::Human).is_ok());
    }

    #[test]
    fn journal_survives_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        {
            let mut store = LabelStore::open(&path).unwrap();
            store.record("s1", "incall", true, LabelSource::Human).unwrap();
            store.record("s1", "incall", false, LabelSource::Human).unwrap();
        }
        let store = LabelStore::open(&path).unwrap();
        assert_eq!(store.journal().len(), 2);
        assert_eq!(store.latest("s1", "incall").unwrap().label, false);
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let mut examples = Vec::new();
        for i in 0..70 {
            examples.push(human(&format!("p{i:03}"), true));
            examples.push(human(&format!("n{i:03}"), false));
        }
        let (train, test) = split_train_test(&examples, 0.7, 42).unwrap();
        assert_eq!(train.len(), 98);
        assert_eq!(test.len(), 42);
        assert_eq!(train.iter().filter(|e| e.label).count(), 49);
        assert_eq!(test.iter().filter(|e| e.label).count(), 21);
        let (train2, test2) = split_train_test(&examples, 0.7, 42).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        let (train3, _) = split_train_test(&examples, 0.7, 43).unwrap();
        assert_ne!(train, train3);
        // disjoint
        let train_ids: BTreeSet<_> = train.iter().map(|e| &e.sent_id).collect();
        assert!(test.iter().all(|e| !train_ids.contains(&e.sent_id)));
    }

    #[test]
    fn invalid_ratio_and_thin_classes_error() {
        let examples = vec![human("a", true), human("b", false)];
        assert!(matches!(
            split_train_test(&examples, 1.0, 0),
            Err(Error::InvalidRatio { .. })
        ));
        let thin = vec![human("a", true), human("b", true), human("c", false)];
        assert!(matches!(
            split_train_test(&thin, 0.5, 0),
            Err(Error::InsufficientLabels { .. })
        ));
    }
}
