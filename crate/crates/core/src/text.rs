//! Tokenization shared by the search index, topic model and vectorizer.
//!
//! The scheme is fixed so that index files, topic models and similarity
//! vectors built on different machines agree: lowercase, split on anything
//! that is not alphanumeric, drop tokens shorter than two characters, drop
//! stopwords from the bundled list.

use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_TXT
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Splits `text` into lowercase alphanumeric words without any filtering.
///
/// Apostrophes are dropped rather than treated as separators so that
/// "don't" becomes "dont".
pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if ch == '\'' || ch == '\u{2019}' {
            continue;
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Index tokens: [`words`] minus short tokens and stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    words(text)
        .into_iter()
        .filter(|w| w.chars().count() >= 2 && !is_stopword(w))
        .collect()
}
