//! Rule matching over annotated sentences and the corpus partition built
//! from coverage signatures.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedSentence, Token};

use super::{
    assign_bin, Category, Constraint, CoverageSignature, Glossary, GlossaryRegistry,
    MatchSurface, PatternElement, Rule, RulesSetBin,
};

/// Inclusive token index range of one match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// Result of applying one rule to one sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub covered: bool,
    /// All maximal matches, ordered by (start, end).
    pub spans: Vec<Span>,
}

static WARNED_POS: AtomicBool = AtomicBool::new(false);
static WARNED_DEP: AtomicBool = AtomicBool::new(false);
static WARNED_NER: AtomicBool = AtomicBool::new(false);

fn warn_missing_field(field: &str, flag: &AtomicBool) {
    if !flag.swap(true, Ordering::Relaxed) {
        log::warn!(
            "a rule references `{field}` but the sentence tokens carry no such annotation; \
             treating the element as a no-match"
        );
    }
}

fn token_surface<'t>(token: &'t Token, surface: MatchSurface) -> &'t str {
    match surface {
        MatchSurface::Lower => &token.lower,
        MatchSurface::Raw => &token.text,
    }
}

fn constraint_holds(constraint: &Constraint, token: &Token, surface: MatchSurface) -> bool {
    match constraint {
        Constraint::Constant(c) => match surface {
            MatchSurface::Lower => token.lower == c.to_lowercase(),
            MatchSurface::Raw => &token.text == c,
        },
        Constraint::Regex(pattern) => pattern.is_match(token_surface(token, surface)),
        Constraint::Pos(tag) => match &token.pos {
            Some(v) => v == tag,
            None => {
                warn_missing_field("pos", &WARNED_POS);
                false
            }
        },
        Constraint::Dep(label) => match &token.dep {
            Some(v) => v == label,
            None => {
                warn_missing_field("dep", &WARNED_DEP);
                false
            }
        },
        Constraint::Ner(ty) => match &token.ner {
            Some(v) => v == ty,
            None => {
                warn_missing_field("ner", &WARNED_NER);
                false
            }
        },
        // glossaries are handled by element_advances
        Constraint::Glossary(_) => true,
    }
}

fn phrase_matches(entry: &[String], tokens: &[Token], pos: usize, case_sensitive: bool) -> bool {
    if pos + entry.len() > tokens.len() {
        return false;
    }
    entry.iter().enumerate().all(|(i, word)| {
        let token = &tokens[pos + i];
        if case_sensitive {
            &token.text == word
        } else {
            &token.lower == word
        }
    })
}

fn glossary_lengths_at(glossary: &Glossary, tokens: &[Token], pos: usize) -> BTreeSet<usize> {
    glossary
        .entries
        .iter()
        .filter(|entry| phrase_matches(entry, tokens, pos, glossary.case_sensitive))
        .map(|entry| entry.len())
        .collect()
}

/// Positions the cursor may advance to when `element` matches at `pos`.
/// Non-glossary elements consume exactly one token; glossary elements consume
/// one token per word of a matching entry. Every consumed token must satisfy
/// the element's remaining constraints.
fn element_advances(
    element: &PatternElement,
    tokens: &[Token],
    pos: usize,
    registry: &GlossaryRegistry,
) -> Vec<usize> {
    if pos >= tokens.len() {
        return Vec::new();
    }
    let glossary_names: Vec<&str> = element
        .constraints
        .iter()
        .filter_map(|c| match c {
            Constraint::Glossary(name) => Some(name.as_str()),
            _ => None,
        })
        .collect();
    let others: Vec<&Constraint> = element
        .constraints
        .iter()
        .filter(|c| !matches!(c, Constraint::Glossary(_)))
        .collect();

    if glossary_names.is_empty() {
        let ok = others
            .iter()
            .all(|c| constraint_holds(c, &tokens[pos], element.surface));
        return if ok { vec![pos + 1] } else { Vec::new() };
    }

    let mut glossaries = Vec::with_capacity(glossary_names.len());
    for name in &glossary_names {
        match registry.get(name) {
            Some(g) => glossaries.push(g),
            None => return Vec::new(),
        }
    }
    let mut lengths = glossary_lengths_at(glossaries[0], tokens, pos);
    for g in &glossaries[1..] {
        let other = glossary_lengths_at(g, tokens, pos);
        lengths = lengths.intersection(&other).copied().collect();
    }
    lengths
        .into_iter()
        .filter(|k| {
            (pos..pos + k).all(|i| {
                others
                    .iter()
                    .all(|c| constraint_holds(c, &tokens[i], element.surface))
            })
        })
        .map(|k| pos + k)
        .collect()
}

fn matches_from(
    elements: &[PatternElement],
    tokens: &[Token],
    pos: usize,
    registry: &GlossaryRegistry,
    ends: &mut BTreeSet<usize>,
) {
    match elements.split_first() {
        None => {
            ends.insert(pos);
        }
        Some((first, rest)) => {
            for next in element_advances(first, tokens, pos, registry) {
                matches_from(rest, tokens, next, registry, ends);
            }
        }
    }
}

/// Applies one rule to a sentence. `covered` is true iff some contiguous
/// token subsequence satisfies the rule's elements in order; `spans` lists
/// every maximal match.
pub fn match_rule(
    rule: &Rule,
    sentence: &AnnotatedSentence,
    registry: &GlossaryRegistry,
) -> RuleMatch {
    let tokens = &sentence.tokens;
    let mut all = Vec::new();
    for start in 0..tokens.len() {
        let mut ends = BTreeSet::new();
        matches_from(&rule.elements, tokens, start, registry, &mut ends);
        for end_pos in ends {
            debug_assert!(end_pos > start, "elements consume at least one token");
            all.push(Span {
                start,
                end: end_pos - 1,
            });
        }
    }
    let spans: Vec<Span> = all
        .iter()
        .copied()
        .filter(|s| {
            !all.iter()
                .any(|o| o != s && o.start <= s.start && s.end <= o.end)
        })
        .collect();
    RuleMatch {
        covered: !spans.is_empty(),
        spans,
    }
}

/// The categories with at least one covering rule.
pub fn coverage_signature(
    rules: &[Rule],
    sentence: &AnnotatedSentence,
    registry: &GlossaryRegistry,
) -> CoverageSignature {
    let mut sig = CoverageSignature::EMPTY;
    for rule in rules {
        if sig.contains(rule.category) {
            continue;
        }
        if match_rule(rule, sentence, registry).covered {
            sig.insert(rule.category);
        }
    }
    sig
}

/// Coverage, precedence reduction and bin assignment in one step.
pub fn assign_bin_for(
    rules: &[Rule],
    sentence: &AnnotatedSentence,
    registry: &GlossaryRegistry,
) -> RulesSetBin {
    assign_bin(coverage_signature(rules, sentence, registry))
}

/// A 7-way split of the corpus. Every bin key is always present, and the
/// sentence ids inside each bin are sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub bins: BTreeMap<RulesSetBin, Vec<String>>,
}

impl Partition {
    pub fn empty() -> Self {
        Partition {
            bins: RulesSetBin::ALL
                .iter()
                .map(|bin| (*bin, Vec::new()))
                .collect(),
        }
    }

    pub fn sizes(&self) -> BTreeMap<RulesSetBin, usize> {
        self.bins.iter().map(|(bin, ids)| (*bin, ids.len())).collect()
    }

    pub fn total(&self) -> usize {
        self.bins.values().map(Vec::len).sum()
    }

    pub fn bin_of(&self, sent_id: &str) -> Option<RulesSetBin> {
        self.bins
            .iter()
            .find(|(_, ids)| ids.binary_search(&sent_id.to_string()).is_ok())
            .map(|(bin, _)| *bin)
    }
}

/// Partitions the corpus into the seven bins. Matching fans out across
/// threads; the merge sorts each bin by sentence id so the result does not
/// depend on scheduling.
pub fn partition_corpus(
    rules: &[Rule],
    registry: &GlossaryRegistry,
    corpus: &[AnnotatedSentence],
) -> Partition {
    let assigned: Vec<(RulesSetBin, &str)> = corpus
        .par_iter()
        .map(|sentence| {
            (
                assign_bin_for(rules, sentence, registry),
                sentence.sent_id.as_str(),
            )
        })
        .collect();
    let mut partition = Partition::empty();
    for (bin, sent_id) in assigned {
        partition
            .bins
            .get_mut(&bin)
            .expect("all bins present")
            .push(sent_id.to_string());
    }
    for ids in partition.bins.values_mut() {
        ids.sort();
    }
    partition
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{annotate, normalize_and_dedup, HeuristicAnnotator, NullAnnotator};
    use crate::les::{parse_rule, Glossary};

    fn sentence(text: &str) -> AnnotatedSentence {
        let mut sents = normalize_and_dedup(&[text.to_string()], "doc");
        let mut s = sents.remove(0);
        annotate(&mut s, &HeuristicAnnotator::default());
        s
    }

    fn registry() -> GlossaryRegistry {
        let mut reg = GlossaryRegistry::new();
        reg.register(Glossary::new("priv", &["private", "discreet"], false));
        reg.register(Glossary::new("place", &["apartment", "studio"], false));
        reg.register(Glossary::new("phrases", &["new in town", "in town"], false));
        reg
    }

    #[test]
    fn amod_conjunction_matches_in_order() {
        let reg = registry();
        let rule = parse_rule(
            r#"SP: <glossary=priv & dep=amod>, <glossary=place>"#,
            1,
            &reg,
            "incall",
        )
        .unwrap();
        let m = match_rule(&rule, &sentence("private apartment available"), &reg);
        assert!(m.covered);
        assert_eq!(m.spans, vec![Span { start: 0, end: 1 }]);

        // reversed order does not match
        let m = match_rule(&rule, &sentence("apartment private"), &reg);
        assert!(!m.covered);
        assert!(m.spans.is_empty());
    }

    #[test]
    fn constant_rule_matches_anywhere() {
        let reg = registry();
        let rule = parse_rule(r#"P: "incall""#, 1, &reg, "incall").unwrap();
        let m = match_rule(&rule, &sentence("no incall today"), &reg);
        assert!(m.covered);
        assert_eq!(m.spans, vec![Span { start: 1, end: 1 }]);
    }

    #[test]
    fn multi_token_glossary_phrase_consumes_one_token_per_word() {
        let reg = registry();
        let rule = parse_rule(r#"P: <glossary=phrases>, "today""#, 1, &reg, "x").unwrap();
        let m = match_rule(&rule, &sentence("new in town today"), &reg);
        assert!(m.covered);
        // the three-word phrase is the maximal match; "in town today" is contained
        assert_eq!(m.spans, vec![Span { start: 0, end: 3 }]);
    }

    #[test]
    fn missing_annotation_field_is_no_match() {
        let reg = registry();
        let rule = parse_rule(r#"P: <pos=NOUN>"#, 1, &reg, "x").unwrap();
        let mut sents = normalize_and_dedup(&["apartment".to_string()], "doc");
        let mut s = sents.remove(0);
        annotate(&mut s, &NullAnnotator);
        let m = match_rule(&rule, &s, &reg);
        assert!(!m.covered);
    }

    #[test]
    fn raw_surface_regex_sees_capitalization() {
        let reg = registry();
        let rule = parse_rule(
            r#"P: <regex=^[A-Z][a-z]+$ & surface=raw>"#,
            1,
            &reg,
            "x",
        )
        .unwrap();
        assert!(match_rule(&rule, &sentence("Dakota visiting"), &reg).covered);
        assert!(!match_rule(&rule, &sentence("dakota visiting"), &reg).covered);
    }

    #[test]
    fn signature_collects_covering_categories() {
        let reg = registry();
        let rules = vec![
            parse_rule(r#"P: "incall""#, 1, &reg, "x").unwrap(),
            parse_rule(r#"SN: "outcall""#, 2, &reg, "x").unwrap(),
        ];
        let sig = coverage_signature(&rules, &sentence("incall and outcall"), &reg);
        assert!(sig.contains(Category::P) && sig.contains(Category::Sn));
        assert_eq!(
            assign_bin_for(&rules, &sentence("incall and outcall"), &reg),
            RulesSetBin::SnAndP
        );
        let sig = coverage_signature(&rules, &sentence("nothing here"), &reg);
        assert!(sig.is_empty());
    }

    #[test]
    fn adding_a_rule_only_adds_categories() {
        let reg = registry();
        let base = vec![parse_rule(r#"P: "incall""#, 1, &reg, "x").unwrap()];
        let mut extended = base.clone();
        extended.push(parse_rule(r#"N: "outcall""#, 2, &reg, "x").unwrap());
        let s = sentence("incall outcall");
        let sig_base = coverage_signature(&base, &s, &reg);
        let sig_ext = coverage_signature(&extended, &s, &reg);
        for cat in Category::ALL {
            if sig_base.contains(cat) {
                assert!(sig_ext.contains(cat));
            }
        }
    }

    #[test]
    fn partition_with_no_rules_is_all_null() {
        let reg = GlossaryRegistry::new();
        let corpus: Vec<AnnotatedSentence> = ["a", "b", "c"]
            .iter()
            .map(|t| sentence(t))
            .collect();
        let partition = partition_corpus(&[], &reg, &corpus);
        assert_eq!(partition.bins[&RulesSetBin::Null].len(), 3);
        assert_eq!(partition.total(), 3);
        assert_eq!(partition.bins.len(), 7);
    }

    #[test]
    fn partition_is_order_independent() {
        let reg = registry();
        let rules = vec![
            parse_rule(r#"P: "incall""#, 1, &reg, "x").unwrap(),
            parse_rule(r#"N: "outcall""#, 2, &reg, "x").unwrap(),
        ];
        let corpus: Vec<AnnotatedSentence> = [
            "incall here",
            "outcall there",
            "incall outcall both",
            "nothing",
        ]
        .iter()
        .map(|t| sentence(t))
        .collect();
        let forward = partition_corpus(&rules, &reg, &corpus);
        let mut reversed: Vec<AnnotatedSentence> = corpus.clone();
        reversed.reverse();
        let backward = partition_corpus(&rules, &reg, &reversed);
        assert_eq!(forward, backward);
    }
}
