//! Best-effort tag stripping for documents that still carry markup. Stands in
//! for a proper content extractor upstream; plain text passes through
//! unchanged.

const BLOCK_TAGS: &[&str] = &[
    "p", "div", "br", "li", "ul", "ol", "tr", "td", "th", "table", "h1", "h2", "h3", "h4", "h5",
    "h6", "blockquote", "pre", "section", "article", "header", "footer", "hr", "form",
];

/// Removes markup tags from `body`. Block-level tags become newlines so that
/// downstream segmentation treats their contents as separate segments; inline
/// tags vanish. Contents of `<script>`/`<style>` and comments are dropped.
pub fn strip_markup(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            if body[i..].starts_with("<!--") {
                match body[i..].find("-->") {
                    Some(end) => {
                        i += end + 3;
                        continue;
                    }
                    None => break,
                }
            }
            match body[i..].find('>') {
                Some(rel_end) => {
                    let inner = &body[i + 1..i + rel_end];
                    let name = tag_name(inner);
                    if name == "script" || name == "style" {
                        let close = format!("</{name}");
                        match body[i..].to_lowercase().find(&close) {
                            Some(rel_close) => {
                                let after = i + rel_close;
                                i = match body[after..].find('>') {
                                    Some(e) => after + e + 1,
                                    None => bytes.len(),
                                };
                                continue;
                            }
                            None => break,
                        }
                    }
                    if BLOCK_TAGS.contains(&name.as_str()) && !out.ends_with('\n') && !out.is_empty()
                    {
                        out.push('\n');
                    }
                    i += rel_end + 1;
                }
                // unterminated tag: keep the rest as text
                None => {
                    out.push_str(&body[i..]);
                    break;
                }
            }
        } else if bytes[i] == b'&' {
            let (decoded, consumed) = decode_entity(&body[i..]);
            out.push_str(decoded);
            i += consumed;
        } else {
            let ch = body[i..].chars().next().unwrap();
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    while out.ends_with('\n') {
        out.pop();
    }
    out
}

fn tag_name(inner: &str) -> String {
    inner
        .trim_start_matches('/')
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_lowercase()
}

fn decode_entity(rest: &str) -> (&'static str, usize) {
    const ENTITIES: &[(&str, &str)] = &[
        ("&amp;", "&"),
        ("&lt;", "<"),
        ("&gt;", ">"),
        ("&quot;", "\""),
        ("&apos;", "'"),
        ("&#39;", "'"),
        ("&nbsp;", " "),
    ];
    for (pat, repl) in ENTITIES {
        if rest.starts_with(pat) {
            return (repl, pat.len());
        }
    }
    ("&", 1)
}
