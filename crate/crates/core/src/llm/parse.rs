//! Lenient parsing of model responses.
//!
//! Responses arrive as plain text, markdown (`**Title**:`) or LaTeX
//! (`\textbf{Title}:`). Markup is stripped first; the summary parser then
//! looks for `title:`, `subtitle:` and `content:` markers case-insensitively,
//! either one per line or `subtitle: ...; content: ...` on one line.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSummary {
    pub title: Option<String>,
    pub sections: Vec<(String, String)>,
}

/// Removes `\textbf{..}`-style commands, markdown emphasis and headings.
pub fn strip_markup(text: &str) -> String {
    let mut s = text.to_string();
    for cmd in ["\\textbf{", "\\textit{", "\\emph{", "\\underline{"] {
        while let Some(start) = s.find(cmd) {
            let inner_start = start + cmd.len();
            match s[inner_start..].find('}') {
                Some(rel) => {
                    let inner = s[inner_start..inner_start + rel].to_string();
                    s.replace_range(start..inner_start + rel + 1, &inner);
                }
                None => {
                    s.replace_range(start..inner_start, "");
                }
            }
        }
    }
    s = s.replace("**", "").replace("__", "");
    s.lines()
        .map(|l| l.trim_start().trim_start_matches('#').trim_start())
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    Title,
    Subtitle,
    Content,
}

/// Finds markers: a keyword at a word boundary, optionally followed by a
/// number, then a colon. Returns (marker, start, end-of-colon).
fn find_markers(text: &str) -> Vec<(Marker, usize, usize)> {
    let lower = text.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let boundary = i == 0 || !(bytes[i - 1].is_ascii_alphanumeric());
        let mut matched = None;
        if boundary {
            for (word, m) in [("subtitle", Marker::Subtitle), ("title", Marker::Title), ("content", Marker::Content)] {
                if lower[i..].starts_with(word) {
                    let mut j = i + word.len();
                    while j < bytes.len() && (bytes[j] == b' ' || bytes[j].is_ascii_digit()) {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j] == b':' {
                        matched = Some((m, i, j + 1));
                    }
                    break;
                }
            }
        }
        match matched {
            Some(found) => {
                out.push(found);
                i = found.2;
            }
            None => i += 1,
        }
    }
    out
}

/// True for a bare list marker such as `1.`, `2)`, `-` or `*`.
fn is_enumerator(line: &str) -> bool {
    let l = line.trim();
    if matches!(l, "-" | "*" | "•") {
        return true;
    }
    let digits = l.trim_end_matches(['.', ')']);
    !digits.is_empty() && digits.len() < l.len() && digits.chars().all(|c| c.is_ascii_digit())
}

fn clean_field(s: &str, strip_period: bool) -> String {
    // The next marker's list numbering ends up at the tail of this field.
    let mut lines: Vec<&str> = s.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty() || is_enumerator(l)) {
        lines.pop();
    }
    let mut t = lines.join(" ").split_whitespace().collect::<Vec<_>>().join(" ");
    while t.ends_with(';') || t.ends_with(',') {
        t.pop();
    }
    let mut t = t.trim().to_string();
    if strip_period {
        while t.ends_with('.') {
            t.pop();
        }
    }
    let t = t.trim_matches(|c| c == '"' || c == '\u{201c}' || c == '\u{201d}');
    t.trim().to_string()
}

/// Returns `None` when no `subtitle:` section is found.
pub fn parse_summary(response: &str) -> Option<ParsedSummary> {
    let text = strip_markup(response);
    let markers = find_markers(&text);
    let mut title = None;
    let mut sections: Vec<(String, String)> = Vec::new();
    for (n, &(marker, _, body_start)) in markers.iter().enumerate() {
        let body_end = markers.get(n + 1).map_or(text.len(), |m| m.1);
        let raw = &text[body_start..body_end];
        match marker {
            Marker::Title => {
                if title.is_none() {
                    title = Some(clean_field(raw, true));
                }
            }
            Marker::Subtitle => sections.push((clean_field(raw, true), String::new())),
            Marker::Content => {
                if let Some(last) = sections.last_mut() {
                    let c = clean_field(raw, false);
                    if last.1.is_empty() {
                        last.1 = c;
                    } else if !c.is_empty() {
                        last.1 = format!("{} {}", last.1, c);
                    }
                }
            }
        }
    }
    sections.retain(|(s, _)| !s.is_empty());
    if sections.is_empty() {
        return None;
    }
    Some(ParsedSummary { title: title.filter(|t| !t.is_empty()), sections })
}

fn strip_question_prefix(line: &str) -> &str {
    let l = line.trim().trim_start_matches(['-', '*', '•']).trim();
    let lower = l.to_ascii_lowercase();
    for word in ["question", "q"] {
        if lower.starts_with(word) {
            let rest = &l[word.len()..];
            let digits = rest.trim_start_matches(|c: char| c.is_ascii_digit() || c == ' ');
            if let Some(after) = digits.strip_prefix([':', '.', ')']) {
                if rest.len() != digits.len() || word == "question" {
                    return after.trim();
                }
            }
        }
    }
    let digits = l.trim_start_matches(|c: char| c.is_ascii_digit());
    if digits.len() != l.len() {
        if let Some(after) = digits.strip_prefix(['.', ')', ':']) {
            return after.trim();
        }
    }
    l
}

/// Extracts up to three questions, preferring lines that end in `?`.
pub fn parse_questions(response: &str) -> Vec<String> {
    let text = strip_markup(response);
    let candidates: Vec<String> = text
        .lines()
        .map(strip_question_prefix)
        .filter(|l| l.chars().count() > 3)
        .map(str::to_string)
        .collect();
    let asked: Vec<String> = candidates.iter().filter(|l| l.contains('?')).cloned().collect();
    let mut chosen = if asked.is_empty() { candidates } else { asked };
    chosen.dedup();
    chosen.truncate(3);
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_line_format() {
        let p = parse_summary("Title: Sleep.\nsubtitle: Patience with Diagnosis; content: The patience with Diagnosis").unwrap();
        assert_eq!(p.title.as_deref(), Some("Sleep"));
        assert_eq!(p.sections, vec![("Patience with Diagnosis".into(), "The patience with Diagnosis".into())]);
    }

    #[test]
    fn markdown_numbered() {
        let r = "# **Title**: Coping\n1. **Subtitle 1**: Music\n   **Content**: Play lofi.\n2. **Subtitle 2**: Tea\n   **Content**: Drink chamomile.";
        let p = parse_summary(r).unwrap();
        assert_eq!(p.title.as_deref(), Some("Coping"));
        assert_eq!(p.sections.len(), 2);
        assert_eq!(p.sections[1], ("Tea".into(), "Drink chamomile.".into()));
    }

    #[test]
    fn words_containing_markers_are_not_markers() {
        let p = parse_summary("Subtitle: A\nContent: the subtitles and contents: kept").unwrap();
        assert_eq!(p.sections[0].1, "the subtitles and contents: kept");
    }

    #[test]
    fn bullets_between_sections() {
        let p = parse_summary("Title: T\n- Subtitle: A\n- Content: a\n2) Subtitle: B\nContent: b").unwrap();
        assert_eq!(p.title.as_deref(), Some("T"));
        assert_eq!(p.sections, vec![("A".into(), "a".into()), ("B".into(), "b".into())]);
    }

    #[test]
    fn unparseable() {
        assert_eq!(parse_summary("I cannot help with that."), None);
        assert_eq!(parse_summary(""), None);
    }

    #[test]
    fn question_prefixes() {
        let q = parse_questions("**Question1**: What is it?\n\nQuestion 2: Why?? now\n3) How do I start?\nextra line");
        assert_eq!(q, vec!["What is it?", "Why?? now", "How do I start?"]);
        assert_eq!(parse_questions("Q1: What helps?"), vec!["What helps?"]);
    }
}
