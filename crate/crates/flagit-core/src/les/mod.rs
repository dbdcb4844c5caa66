//! The lightweight expert system (LES): categorized shallow pattern-matching
//! rules over annotated sentences, coverage signatures, precedence reduction,
//! and the seven-bin corpus partition the downstream sampler consumes.

mod matcher;
mod parser;
mod regex;

pub use matcher::{
    assign_bin_for, coverage_signature, match_rule, partition_corpus, Partition, RuleMatch, Span,
};
pub use parser::{load_glossary_dir, parse_glossary, parse_glossary_str, parse_rule, parse_rules_file};
pub use regex::TokenPattern;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// The four rule categories. `Sp`/`Sn` carry the expert's "strong" confidence
/// qualifier and take precedence over their weak counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    P,
    Sp,
    N,
    Sn,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::P, Category::Sp, Category::N, Category::Sn];

    fn bit(self) -> u8 {
        match self {
            Category::P => 1,
            Category::Sp => 2,
            Category::N => 4,
            Category::Sn => 8,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::P => write!(f, "P"),
            Category::Sp => write!(f, "Sp"),
            Category::N => write!(f, "N"),
            Category::Sn => write!(f, "Sn"),
        }
    }
}

/// Which categories have at least one covering rule for a sentence. A subset
/// of {P, Sp, N, Sn}; 16 raw values exist before precedence reduction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverageSignature(u8);

impl CoverageSignature {
    pub const EMPTY: CoverageSignature = CoverageSignature(0);

    pub fn from_categories(categories: &[Category]) -> Self {
        let mut sig = Self::EMPTY;
        for c in categories {
            sig.insert(*c);
        }
        sig
    }

    pub fn insert(&mut self, category: Category) {
        self.0 |= category.bit();
    }

    pub fn contains(&self, category: Category) -> bool {
        self.0 & category.bit() != 0
    }

    pub fn remove(&mut self, category: Category) {
        self.0 &= !category.bit();
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn categories(&self) -> Vec<Category> {
        Category::ALL
            .iter()
            .copied()
            .filter(|c| self.contains(*c))
            .collect()
    }

    /// All 16 raw signatures, for exhaustive enumeration.
    pub fn enumerate_all() -> Vec<CoverageSignature> {
        (0u8..16).map(CoverageSignature).collect()
    }
}

/// Precedence reduction: a strong category displaces its weak counterpart.
/// Idempotent.
pub fn reduce_signature(sig: CoverageSignature) -> CoverageSignature {
    let mut out = sig;
    if out.contains(Category::Sp) {
        out.remove(Category::P);
    }
    if out.contains(Category::Sn) {
        out.remove(Category::N);
    }
    out
}

/// The seven rules-set bins. Declaration order is the canonical order used
/// wherever the bins need a deterministic sequence (quota remainders,
/// reports, manifests).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum RulesSetBin {
    #[serde(rename = "P_OR_SP")]
    POrSp,
    #[serde(rename = "N_OR_SN")]
    NOrSn,
    #[serde(rename = "SP_AND_N")]
    SpAndN,
    #[serde(rename = "SN_AND_P")]
    SnAndP,
    #[serde(rename = "SP_AND_SN")]
    SpAndSn,
    #[serde(rename = "P_AND_N")]
    PAndN,
    #[serde(rename = "NULL")]
    Null,
}

impl RulesSetBin {
    pub const ALL: [RulesSetBin; 7] = [
        RulesSetBin::POrSp,
        RulesSetBin::NOrSn,
        RulesSetBin::SpAndN,
        RulesSetBin::SnAndP,
        RulesSetBin::SpAndSn,
        RulesSetBin::PAndN,
        RulesSetBin::Null,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RulesSetBin::POrSp => "P_OR_SP",
            RulesSetBin::NOrSn => "N_OR_SN",
            RulesSetBin::SpAndN => "SP_AND_N",
            RulesSetBin::SnAndP => "SN_AND_P",
            RulesSetBin::SpAndSn => "SP_AND_SN",
            RulesSetBin::PAndN => "P_AND_N",
            RulesSetBin::Null => "NULL",
        }
    }
}

impl fmt::Display for RulesSetBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl std::str::FromStr for RulesSetBin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RulesSetBin::ALL
            .iter()
            .copied()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| format!("unknown bin `{s}`"))
    }
}

/// Maps a reduced signature onto its unique bin. Reduces defensively, so the
/// composition over all 16 raw signatures is total.
pub fn assign_bin(sig: CoverageSignature) -> RulesSetBin {
    let sig = reduce_signature(sig);
    let p = sig.contains(Category::P);
    let sp = sig.contains(Category::Sp);
    let n = sig.contains(Category::N);
    let sn = sig.contains(Category::Sn);
    match (p, sp, n, sn) {
        (false, false, false, false) => RulesSetBin::Null,
        (true, false, false, false) | (false, true, false, false) => RulesSetBin::POrSp,
        (false, false, true, false) | (false, false, false, true) => RulesSetBin::NOrSn,
        (false, true, true, false) => RulesSetBin::SpAndN,
        (true, false, false, true) => RulesSetBin::SnAndP,
        (false, true, false, true) => RulesSetBin::SpAndSn,
        (true, false, true, false) => RulesSetBin::PAndN,
        // unreachable after reduction: P with Sp or N with Sn
        _ => unreachable!("signature not reduced"),
    }
}

/// A named token set. Entries may be multi-token phrases; matching folds case
/// unless the glossary was declared case sensitive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Glossary {
    pub name: String,
    /// Each entry split into its tokens.
    pub entries: Vec<Vec<String>>,
    pub case_sensitive: bool,
}

impl Glossary {
    pub fn new(name: &str, entries: &[&str], case_sensitive: bool) -> Self {
        let entries = entries
            .iter()
            .map(|e| {
                let folded = if case_sensitive {
                    e.to_string()
                } else {
                    e.to_lowercase()
                };
                folded.split_whitespace().map(str::to_string).collect()
            })
            .collect();
        Glossary {
            name: name.to_string(),
            entries,
            case_sensitive,
        }
    }
}

/// Glossaries available to rule parsing and matching, keyed by name.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GlossaryRegistry {
    glossaries: BTreeMap<String, Glossary>,
}

impl GlossaryRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, glossary: Glossary) {
        self.glossaries.insert(glossary.name.clone(), glossary);
    }

    pub fn get(&self, name: &str) -> Option<&Glossary> {
        self.glossaries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.glossaries.keys().map(String::as_str)
    }
}

/// Which sentence surface an element's constant/regex constraints see.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchSurface {
    #[default]
    Lower,
    Raw,
}

/// One constraint inside a pattern element.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Constraint {
    Constant(String),
    Glossary(String),
    Regex(TokenPattern),
    Pos(String),
    Dep(String),
    Ner(String),
}

/// A pattern element: a non-empty conjunction of constraints that one token
/// (or, for multi-token glossary phrases, one token per phrase word) must
/// satisfy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternElement {
    pub constraints: Vec<Constraint>,
    pub surface: MatchSurface,
}

impl PatternElement {
    /// Builds an element, enforcing the conjunction invariants.
    pub fn new(constraints: Vec<Constraint>, surface: MatchSurface) -> Result<Self, String> {
        if constraints.is_empty() {
            return Err("pattern element needs at least one constraint".to_string());
        }
        let has_constant = constraints
            .iter()
            .any(|c| matches!(c, Constraint::Constant(_)));
        let has_glossary = constraints
            .iter()
            .any(|c| matches!(c, Constraint::Glossary(_)));
        if has_constant && has_glossary {
            return Err("a constant constraint cannot be conjoined with a glossary".to_string());
        }
        Ok(PatternElement {
            constraints,
            surface,
        })
    }

    pub fn constant(token: &str) -> Self {
        PatternElement {
            constraints: vec![Constraint::Constant(token.to_string())],
            surface: MatchSurface::Lower,
        }
    }
}

/// One categorized pattern rule for one indicator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rule {
    pub rule_id: String,
    pub category: Category,
    pub elements: Vec<PatternElement>,
    pub indicator: String,
}

/// Everything the rule engine needs for one indicator: its rules and the
/// glossaries they reference.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicatorRules {
    pub indicator: String,
    pub rules: Vec<Rule>,
    pub glossaries: GlossaryRegistry,
}

impl IndicatorRules {
    /// Loads an indicator configuration directory: `rules.flagit` plus
    /// `glossaries/*.txt`. A missing glossaries directory is fine for rules
    /// that only use constants and regexes.
    pub fn load_dir(dir: &std::path::Path, indicator: &str) -> crate::error::Result<Self> {
        let glossary_dir = dir.join("glossaries");
        let glossaries = if glossary_dir.is_dir() {
            parser::load_glossary_dir(&glossary_dir)?
        } else {
            GlossaryRegistry::new()
        };
        let rules = parse_rules_file(&dir.join("rules.flagit"), &glossaries, indicator)?;
        Ok(IndicatorRules {
            indicator: indicator.to_string(),
            rules,
            glossaries,
        })
    }

    pub fn empty(indicator: &str) -> Self {
        IndicatorRules {
            indicator: indicator.to_string(),
            rules: Vec::new(),
            glossaries: GlossaryRegistry::new(),
        }
    }

    pub fn signature(&self, sentence: &crate::corpus::AnnotatedSentence) -> CoverageSignature {
        coverage_signature(&self.rules, sentence, &self.glossaries)
    }

    pub fn bin(&self, sentence: &crate::corpus::AnnotatedSentence) -> RulesSetBin {
        assign_bin_for(&self.rules, sentence, &self.glossaries)
    }

    pub fn partition(&self, corpus: &[crate::corpus::AnnotatedSentence]) -> Partition {
        partition_corpus(&self.rules, &self.glossaries, corpus)
    }

    /// All maximal spans matched by any of the indicator's rules, annotated
    /// with the rule that produced them. Used for highlighting.
    pub fn spans(&self, sentence: &crate::corpus::AnnotatedSentence) -> Vec<MatchedSpan> {
        let mut out = Vec::new();
        for rule in &self.rules {
            let m = match_rule(rule, sentence, &self.glossaries);
            for span in m.spans {
                out.push(MatchedSpan {
                    start: span.start,
                    end: span.end,
                    category: rule.category,
                    rule_id: rule.rule_id.clone(),
                });
            }
        }
        out.sort_by(|a, b| {
            (a.start, a.end, a.category, &a.rule_id).cmp(&(b.start, b.end, b.category, &b.rule_id))
        });
        out
    }
}

/// A rule match span enriched with its provenance, as served to review UIs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedSpan {
    pub start: usize,
    pub end: usize,
    pub category: Category,
    pub rule_id: String,
}
