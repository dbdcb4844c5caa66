//! Token-local limited regular expressions. The grammar is deliberately
//! small: literals, `.`, character classes, `*`/`+`/`?`, grouping,
//! alternation, and whole-pattern anchors. Anything beyond that (counted
//! repetition, backreferences, lookaround) is a parse error. Patterns apply
//! to a single token, so matching works on its character vector with a
//! position-set simulation; no backtracking blowup is possible.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum ClassItem {
    Single(char),
    Range(char, char),
    Digit,
    Word,
    Space,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
enum Node {
    Char(char),
    Any,
    Class { negated: bool, items: Vec<ClassItem> },
    Group(Vec<Vec<Node>>),
    Star(Box<Node>),
    Plus(Box<Node>),
    Opt(Box<Node>),
}

/// A compiled limited regex. Serializes as its source pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPattern {
    source: String,
    anchored_start: bool,
    anchored_end: bool,
    branches: Vec<Vec<Node>>,
}

impl Serialize for TokenPattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for TokenPattern {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let source = String::deserialize(deserializer)?;
        TokenPattern::parse(&source).map_err(serde::de::Error::custom)
    }
}

impl TokenPattern {
    /// Compiles `pattern`, rejecting anything outside the limited grammar.
    /// Error messages carry a 1-based column into the pattern.
    pub fn parse(pattern: &str) -> Result<TokenPattern, String> {
        let chars: Vec<char> = pattern.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        let anchored_start = chars.first() == Some(&'^');
        if anchored_start {
            start = 1;
        }
        let anchored_end = end > start && chars[end - 1] == '$' && !is_escaped(&chars, end - 1);
        if anchored_end {
            end -= 1;
        }
        let mut parser = Parser {
            chars: &chars[..end],
            pos: start,
        };
        let branches = parser.parse_alternation()?;
        if parser.pos != end {
            return Err(format!(
                "unexpected `{}` at column {}",
                parser.chars[parser.pos],
                parser.pos + 1
            ));
        }
        Ok(TokenPattern {
            source: pattern.to_string(),
            anchored_start,
            anchored_end,
            branches,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// True when the pattern matches somewhere in `token` (everywhere
    /// constrained by the anchors).
    pub fn is_match(&self, token: &str) -> bool {
        let chars: Vec<char> = token.chars().collect();
        let starts: Vec<usize> = if self.anchored_start {
            vec![0]
        } else {
            (0..=chars.len()).collect()
        };
        for start in starts {
            let mut ends = BTreeSet::new();
            branch_ends(&self.branches, &chars, start, &mut ends);
            if self.anchored_end {
                if ends.contains(&chars.len()) {
                    return true;
                }
            } else if !ends.is_empty() {
                return true;
            }
        }
        false
    }
}

fn is_escaped(chars: &[char], idx: usize) -> bool {
    let mut backslashes = 0;
    let mut i = idx;
    while i > 0 && chars[i - 1] == '\\' {
        backslashes += 1;
        i -= 1;
    }
    backslashes % 2 == 1
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn parse_alternation(&mut self) -> Result<Vec<Vec<Node>>, String> {
        let mut branches = vec![self.parse_sequence()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.parse_sequence()?);
        }
        Ok(branches)
    }

    fn parse_sequence(&mut self) -> Result<Vec<Node>, String> {
        let mut seq = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let node = self.parse_atom()?;
            let node = match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    Node::Star(Box::new(node))
                }
                Some('+') => {
                    self.pos += 1;
                    Node::Plus(Box::new(node))
                }
                Some('?') => {
                    self.pos += 1;
                    Node::Opt(Box::new(node))
                }
                _ => node,
            };
            seq.push(node);
        }
        Ok(seq)
    }

    fn parse_atom(&mut self) -> Result<Node, String> {
        let col = self.pos + 1;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                if self.peek() == Some('?') {
                    return Err(format!("group modifiers are not supported (column {col})"));
                }
                let branches = self.parse_alternation()?;
                if self.peek() != Some(')') {
                    return Err(format!("unclosed group opened at column {col}"));
                }
                self.pos += 1;
                Ok(Node::Group(branches))
            }
            Some('[') => self.parse_class(),
            Some('.') => {
                self.pos += 1;
                Ok(Node::Any)
            }
            Some('\\') => {
                self.pos += 1;
                let c = self
                    .peek()
                    .ok_or_else(|| format!("dangling escape at column {col}"))?;
                self.pos += 1;
                match c {
                    'd' => Ok(Node::Class {
                        negated: false,
                        items: vec![ClassItem::Digit],
                    }),
                    'w' => Ok(Node::Class {
                        negated: false,
                        items: vec![ClassItem::Word],
                    }),
                    's' => Ok(Node::Class {
                        negated: false,
                        items: vec![ClassItem::Space],
                    }),
                    c if "\\.*+?()[]|^$-".contains(c) => Ok(Node::Char(c)),
                    other => Err(format!("unsupported escape `\\{other}` at column {col}")),
                }
            }
            Some(c @ ('{' | '}')) => Err(format!(
                "counted repetition `{c}` is not supported (column {col})"
            )),
            Some(c @ ('*' | '+' | '?')) => {
                Err(format!("`{c}` has nothing to repeat (column {col})"))
            }
            Some(c @ ('^' | '$')) => Err(format!(
                "anchor `{c}` only allowed at the pattern edge (column {col})"
            )),
            Some(c) => {
                self.pos += 1;
                Ok(Node::Char(c))
            }
            None => Err("empty atom at end of pattern".to_string()),
        }
    }

    fn parse_class(&mut self) -> Result<Node, String> {
        let col = self.pos + 1;
        self.pos += 1; // consume '['
        let negated = self.peek() == Some('^');
        if negated {
            self.pos += 1;
        }
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None => return Err(format!("unclosed character class opened at column {col}")),
                Some(']') if !items.is_empty() => {
                    self.pos += 1;
                    return Ok(Node::Class { negated, items });
                }
                Some(']') => return Err(format!("empty character class at column {col}")),
                Some('\\') => {
                    self.pos += 1;
                    let c = self
                        .peek()
                        .ok_or_else(|| format!("dangling escape in class at column {col}"))?;
                    self.pos += 1;
                    match c {
                        'd' => items.push(ClassItem::Digit),
                        'w' => items.push(ClassItem::Word),
                        's' => items.push(ClassItem::Space),
                        c => items.push(ClassItem::Single(c)),
                    }
                }
                Some(lo) => {
                    self.pos += 1;
                    if self.peek() == Some('-')
                        && self.chars.get(self.pos + 1).is_some_and(|c| *c != ']')
                    {
                        self.pos += 1;
                        let hi = self.chars[self.pos];
                        self.pos += 1;
                        if hi < lo {
                            return Err(format!(
                                "invalid range `{lo}-{hi}` in class at column {col}"
                            ));
                        }
                        items.push(ClassItem::Range(lo, hi));
                    } else {
                        items.push(ClassItem::Single(lo));
                    }
                }
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }
}

fn class_matches(negated: bool, items: &[ClassItem], c: char) -> bool {
    let hit = items.iter().any(|item| match item {
        ClassItem::Single(x) => c == *x,
        ClassItem::Range(lo, hi) => *lo <= c && c <= *hi,
        ClassItem::Digit => c.is_ascii_digit(),
        ClassItem::Word => c.is_alphanumeric() || c == '_',
        ClassItem::Space => c.is_whitespace(),
    });
    hit != negated
}

/// Adds every position reachable by matching `node` once starting at `pos`.
fn node_ends(node: &Node, chars: &[char], pos: usize, out: &mut BTreeSet<usize>) {
    match node {
        Node::Char(c) => {
            if chars.get(pos) == Some(c) {
                out.insert(pos + 1);
            }
        }
        Node::Any => {
            if pos < chars.len() {
                out.insert(pos + 1);
            }
        }
        Node::Class { negated, items } => {
            if let Some(c) = chars.get(pos) {
                if class_matches(*negated, items, *c) {
                    out.insert(pos + 1);
                }
            }
        }
        Node::Group(branches) => branch_ends(branches, chars, pos, out),
        Node::Opt(inner) => {
            out.insert(pos);
            node_ends(inner, chars, pos, out);
        }
        Node::Star(inner) => {
            closure_ends(inner, chars, pos, out, true);
        }
        Node::Plus(inner) => {
            closure_ends(inner, chars, pos, out, false);
        }
    }
}

/// Transitive closure of repeated `inner` matches from `pos`; with
/// `include_zero` this is the `*` semantics, otherwise `+`.
fn closure_ends(
    inner: &Node,
    chars: &[char],
    pos: usize,
    out: &mut BTreeSet<usize>,
    include_zero: bool,
) {
    let mut frontier = BTreeSet::from([pos]);
    let mut reached = BTreeSet::new();
    if include_zero {
        reached.insert(pos);
    }
    let mut visited = BTreeSet::from([pos]);
    while !frontier.is_empty() {
        let mut next = BTreeSet::new();
        for p in &frontier {
            node_ends(inner, chars, *p, &mut next);
        }
        reached.extend(next.iter().copied());
        frontier = next
            .into_iter()
            .filter(|p| visited.insert(*p))
            .collect();
    }
    out.extend(reached);
}

fn seq_ends(seq: &[Node], chars: &[char], pos: usize, out: &mut BTreeSet<usize>) {
    let mut current = BTreeSet::from([pos]);
    for node in seq {
        let mut next = BTreeSet::new();
        for p in &current {
            node_ends(node, chars, *p, &mut next);
        }
        if next.is_empty() {
            return;
        }
        current = next;
    }
    out.extend(current);
}

fn branch_ends(branches: &[Vec<Node>], chars: &[char], pos: usize, out: &mut BTreeSet<usize>) {
    for branch in branches {
        seq_ends(branch, chars, pos, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(p: &str) -> TokenPattern {
        TokenPattern::parse(p).unwrap()
    }

    #[test]
    fn capitalization_check() {
        let p = pat("^[A-Z][a-z]+$");
        assert!(p.is_match("Dakota"));
        assert!(!p.is_match("dakota"));
        assert!(!p.is_match("DAKOTA"));
        assert!(!p.is_match("D"));
        assert!(!p.is_match("Dakota7"));
    }

    #[test]
    fn unanchored_is_substring_search() {
        let p = pat("call");
        assert!(p.is_match("incalls"));
        assert!(!p.is_match("inca"));
    }

    #[test]
    fn alternation_and_groups() {
        let p = pat("^(in|out)call$");
        assert!(p.is_match("incall"));
        assert!(p.is_match("outcall"));
        assert!(!p.is_match("call"));
    }

    #[test]
    fn star_plus_opt() {
        assert!(pat("^ab*$").is_match("a"));
        assert!(pat("^ab*$").is_match("abbb"));
        assert!(!pat("^ab+$").is_match("a"));
        assert!(pat("^ab?c$").is_match("ac"));
        assert!(pat("^ab?c$").is_match("abc"));
        assert!(!pat("^ab?c$").is_match("abbc"));
    }

    #[test]
    fn classes_and_shorthands() {
        assert!(pat(r"^\d+$").is_match("2026"));
        assert!(!pat(r"^\d+$").is_match("20a6"));
        assert!(pat("^[^a-z]+$").is_match("XYZ"));
        assert!(pat(r"^[\d-]+$").is_match("555-0100"));
    }

    #[test]
    fn empty_inner_repeat_terminates() {
        // (a?)* can match zero width; the closure must not loop forever
        assert!(pat("^(a?)*$").is_match(""));
        assert!(pat("^(a?)*$").is_match("aaa"));
    }

    #[test]
    fn unsupported_constructs_are_rejected() {
        assert!(TokenPattern::parse("a{2,3}").is_err());
        assert!(TokenPattern::parse("(?=x)").is_err());
        assert!(TokenPattern::parse("[z-a]").is_err());
        assert!(TokenPattern::parse("(unclosed").is_err());
        assert!(TokenPattern::parse("a^b").is_err());
        assert!(TokenPattern::parse("*a").is_err());
    }

    #[test]
    fn escaped_metachars_are_literal() {
        assert!(pat(r"^a\.b$").is_match("a.b"));
        assert!(!pat(r"^a\.b$").is_match("axb"));
        assert!(pat(r"^\$\d+$").is_match("$70"));
    }

    #[test]
    fn serde_roundtrips_through_source() {
        let p = pat("^[A-Z][a-z]+$");
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"^[A-Z][a-z]+$\"");
        let back: TokenPattern = serde_json::from_str(&json).unwrap();
        assert!(back.is_match("Ruby"));
    }
}
