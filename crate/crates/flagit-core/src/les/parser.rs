//! Parsing for the two rule-engine input formats: glossary files (one entry
//! per line) and the rules DSL (one categorized rule per line).
//!
//! ```text
//! rule     := CATEGORY ":" element ("," element)*
//! CATEGORY := "P" | "SP" | "N" | "SN"
//! element  := '"' token '"' | "<" spec ("&" spec)* ">"
//! spec     := "glossary=" name | "regex=" pattern | "pos=" tag
//!           | "dep=" label | "ner=" type | "surface=raw"
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

use super::{
    Category, Constraint, Glossary, GlossaryRegistry, MatchSurface, PatternElement, Rule,
    TokenPattern,
};

/// Parses a glossary file: UTF-8, one entry per line, `#` lines are comments,
/// and an optional first-line `#case_sensitive` directive. The glossary name
/// is the file stem.
pub fn parse_glossary(path: &Path) -> Result<Glossary> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "glossary".to_string());
    parse_glossary_str(&name, &content)
}

/// Same as [`parse_glossary`] over in-memory content.
pub fn parse_glossary_str(name: &str, content: &str) -> Result<Glossary> {
    let mut case_sensitive = false;
    let mut entries: Vec<Vec<String>> = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if idx == 0 && trimmed == "#case_sensitive" {
            case_sensitive = true;
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let folded = if case_sensitive {
            trimmed.to_string()
        } else {
            trimmed.to_lowercase()
        };
        if !seen.insert(folded.clone()) {
            log::warn!("glossary `{name}`: duplicate entry `{trimmed}` at line {} dropped", idx + 1);
            continue;
        }
        entries.push(folded.split_whitespace().map(str::to_string).collect());
    }
    if entries.is_empty() {
        return Err(Error::EmptyGlossary {
            name: name.to_string(),
        });
    }
    Ok(Glossary {
        name: name.to_string(),
        entries,
        case_sensitive,
    })
}

/// Loads every `*.txt` glossary under `dir` into a registry.
pub fn load_glossary_dir(dir: &Path) -> Result<GlossaryRegistry> {
    let mut registry = GlossaryRegistry::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    paths.sort();
    for path in paths {
        registry.register(parse_glossary(&path)?);
    }
    Ok(registry)
}

/// Parses one rule line. `line_no` is used for error reporting and for the
/// generated rule id (`indicator:line`).
pub fn parse_rule(
    line: &str,
    line_no: usize,
    registry: &GlossaryRegistry,
    indicator: &str,
) -> Result<Rule> {
    let mut p = LineParser {
        chars: line.chars().collect(),
        pos: 0,
        line: line_no,
    };
    p.skip_ws();
    let cat_start = p.pos;
    let cat: String = p.take_while(|c| c.is_ascii_alphanumeric());
    let category = match cat.as_str() {
        "P" => Category::P,
        "SP" => Category::Sp,
        "N" => Category::N,
        "SN" => Category::Sn,
        other => {
            return Err(p.err_at(
                cat_start,
                format!("unknown category `{other}`; expected P, SP, N or SN"),
            ))
        }
    };
    p.skip_ws();
    p.expect(':')?;
    let mut elements = Vec::new();
    loop {
        p.skip_ws();
        elements.push(p.parse_element(registry)?);
        p.skip_ws();
        match p.peek() {
            Some(',') => {
                p.pos += 1;
            }
            None => break,
            Some(c) => return Err(p.err_here(format!("expected `,` or end of line, found `{c}`"))),
        }
    }
    Ok(Rule {
        rule_id: format!("{indicator}:{line_no}"),
        category,
        elements,
        indicator: indicator.to_string(),
    })
}

/// Parses a whole rules file, skipping blank lines and `#` comments.
pub fn parse_rules_file(
    path: &Path,
    registry: &GlossaryRegistry,
    indicator: &str,
) -> Result<Vec<Rule>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rules = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        rules.push(parse_rule(trimmed, idx + 1, registry, indicator)?);
    }
    Ok(rules)
}

struct LineParser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl LineParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.pos += 1;
        }
        out
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!(
                "expected `{c}`, found `{}`",
                self.peek().map(String::from).unwrap_or_else(|| "end of line".into())
            )))
        }
    }

    fn err_here(&self, msg: String) -> Error {
        self.err_at(self.pos, msg)
    }

    fn err_at(&self, pos: usize, msg: String) -> Error {
        Error::Parse {
            line: self.line,
            col: pos + 1,
            msg,
        }
    }

    fn parse_element(&mut self, registry: &GlossaryRegistry) -> Result<PatternElement> {
        match self.peek() {
            Some('"') => {
                let start = self.pos;
                self.pos += 1;
                let token = self.take_while(|c| c != '"');
                if self.peek() != Some('"') {
                    return Err(self.err_at(start, "unterminated constant".to_string()));
                }
                self.pos += 1;
                if token.is_empty() {
                    return Err(self.err_at(start, "empty constant".to_string()));
                }
                if token.chars().any(char::is_whitespace) {
                    return Err(self.err_at(
                        start,
                        format!("constant `{token}` must be a single token"),
                    ));
                }
                Ok(PatternElement::constant(&token))
            }
            Some('<') => {
                let start = self.pos;
                self.pos += 1;
                let mut constraints = Vec::new();
                let mut surface = MatchSurface::Lower;
                loop {
                    self.skip_ws();
                    self.parse_spec(registry, &mut constraints, &mut surface)?;
                    self.skip_ws();
                    match self.peek() {
                        Some('&') => {
                            self.pos += 1;
                        }
                        Some('>') => {
                            self.pos += 1;
                            break;
                        }
                        _ => {
                            return Err(self.err_here("expected `&` or `>`".to_string()));
                        }
                    }
                }
                PatternElement::new(constraints, surface)
                    .map_err(|msg| self.err_at(start, msg))
            }
            _ => Err(self.err_here("expected `\"` or `<` to start an element".to_string())),
        }
    }

    fn parse_spec(
        &mut self,
        registry: &GlossaryRegistry,
        constraints: &mut Vec<Constraint>,
        surface: &mut MatchSurface,
    ) -> Result<()> {
        let key_start = self.pos;
        let key = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        self.skip_ws();
        self.expect('=')?;
        let value_start = self.pos;
        let value = self.take_spec_value();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(self.err_at(value_start, format!("empty value for `{key}`")));
        }
        match key.as_str() {
            "glossary" => {
                if registry.get(&value).is_none() {
                    return Err(Error::UnknownGlossary {
                        name: value,
                        line: self.line,
                        col: value_start + 1,
                    });
                }
                constraints.push(Constraint::Glossary(value));
            }
            "regex" => {
                let pattern = TokenPattern::parse(&value)
                    .map_err(|msg| self.err_at(value_start, format!("malformed regex: {msg}")))?;
                constraints.push(Constraint::Regex(pattern));
            }
            "pos" => constraints.push(Constraint::Pos(value)),
            "dep" => constraints.push(Constraint::Dep(value)),
            "ner" => constraints.push(Constraint::Ner(value)),
            "surface" => match value.as_str() {
                "raw" => *surface = MatchSurface::Raw,
                "lower" => *surface = MatchSurface::Lower,
                other => {
                    return Err(
                        self.err_at(value_start, format!("unknown surface `{other}`"))
                    )
                }
            },
            other => {
                return Err(self.err_at(key_start, format!("unknown spec key `{other}`")));
            }
        }
        Ok(())
    }

    /// Reads a spec value up to the next top-level `&` or `>`. Characters
    /// inside `[...]` never terminate, so regex classes may contain both.
    fn take_spec_value(&mut self) -> String {
        let mut out = String::new();
        let mut in_class = false;
        while let Some(c) = self.peek() {
            match c {
                '[' => in_class = true,
                ']' => in_class = false,
                '&' | '>' if !in_class => break,
                _ => {}
            }
            out.push(c);
            self.pos += 1;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::les::Category;

    fn registry() -> GlossaryRegistry {
        let mut reg = GlossaryRegistry::new();
        reg.register(Glossary::new("priv", &["private", "discreet"], false));
        reg.register(Glossary::new("place", &["apartment", "studio"], false));
        reg
    }

    #[test]
    fn glossary_entries_parse_and_dedup() {
        let g = parse_glossary_str("place", "apartment\nstudio\n").unwrap();
        assert_eq!(g.entries.len(), 2);
        let g = parse_glossary_str("priv", "private\ndiscreet\nPRIVATE\n").unwrap();
        assert_eq!(g.entries.len(), 2);
    }

    #[test]
    fn empty_glossary_is_an_error() {
        assert!(matches!(
            parse_glossary_str("empty", "# only a comment\n"),
            Err(Error::EmptyGlossary { .. })
        ));
    }

    #[test]
    fn case_sensitive_directive() {
        let g = parse_glossary_str("names", "#case_sensitive\nMia\nRuby\n").unwrap();
        assert!(g.case_sensitive);
        assert_eq!(g.entries[0], vec!["Mia".to_string()]);
    }

    #[test]
    fn strong_positive_rule_with_conjunction() {
        let rule = parse_rule(
            r#"SP: <glossary=priv & dep=amod>, <glossary=place>"#,
            1,
            &registry(),
            "incall",
        )
        .unwrap();
        assert_eq!(rule.category, Category::Sp);
        assert_eq!(rule.elements.len(), 2);
        assert_eq!(rule.elements[0].constraints.len(), 2);
    }

    #[test]
    fn single_constant_rule() {
        let rule = parse_rule(r#"P: "incall""#, 3, &registry(), "incall").unwrap();
        assert_eq!(rule.category, Category::P);
        assert_eq!(rule.elements.len(), 1);
        assert_eq!(rule.rule_id, "incall:3");
    }

    #[test]
    fn invalid_category_is_rejected_with_position() {
        let err = parse_rule(r#"X: "foo""#, 2, &registry(), "incall").unwrap_err();
        match err {
            Error::Parse { line, col, msg } => {
                assert_eq!(line, 2);
                assert_eq!(col, 1);
                assert!(msg.contains("unknown category"));
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn unknown_glossary_is_rejected() {
        let err = parse_rule(r#"P: <glossary=nope>"#, 1, &registry(), "x").unwrap_err();
        assert!(matches!(err, Error::UnknownGlossary { .. }));
    }

    #[test]
    fn malformed_regex_is_rejected() {
        let err = parse_rule(r#"P: <regex=a{2}>"#, 1, &registry(), "x").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn surface_raw_and_regex_value_with_class() {
        let rule = parse_rule(
            r#"P: <regex=^[A-Z][a-z]+$ & surface=raw>"#,
            1,
            &registry(),
            "x",
        )
        .unwrap();
        assert_eq!(rule.elements[0].surface, MatchSurface::Raw);
    }

    #[test]
    fn rules_file_skips_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rules.flagit");
        std::fs::write(&path, "# header\n\nP: \"incall\"\nSN: \"outcall\"\n").unwrap();
        let rules = parse_rules_file(&path, &registry(), "incall").unwrap();
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[1].category, Category::Sn);
        assert_eq!(rules[1].rule_id, "incall:4");
    }
}
