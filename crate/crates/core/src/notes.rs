//! Color-keyed highlights anchored to character ranges of post and comment
//! bodies, grouped into one folder per palette color.
//!
//! Offsets count Unicode scalar values, not bytes. Highlights of the same
//! color on the same target are kept in a normal form where no two overlap
//! or touch: adding or recoloring a highlight merges it with every such
//! neighbour into one spanning highlight that keeps the id and creation
//! time of the oldest member. Highlights of different colors may overlap.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;

pub const DEFAULT_PALETTE: [&str; 3] = ["yellow", "green", "red"];
pub const MAX_PALETTE: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NotesError {
    #[error("anchor text mismatch: expected {expected:?}, found {found:?}")]
    AnchorMismatch { expected: String, found: String },
    #[error("anchor range {start}..{end} is empty or outside a body of {len} characters")]
    BadRange { start: usize, end: usize, len: usize },
    #[error("color {0:?} is not in the palette")]
    InvalidColor(String),
    #[error("palette must have 1 to {MAX_PALETTE} distinct colors")]
    BadPalette,
    #[error("highlight not found: {0}")]
    NotFound(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette(Vec<String>);

impl Default for Palette {
    fn default() -> Self {
        Palette(DEFAULT_PALETTE.iter().map(|s| s.to_string()).collect())
    }
}

impl Palette {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(colors: I) -> Result<Palette, NotesError> {
        let colors: Vec<String> = colors.into_iter().map(|c| c.into().to_ascii_lowercase()).collect();
        let mut dedup = colors.clone();
        dedup.sort();
        dedup.dedup();
        if colors.is_empty() || colors.len() > MAX_PALETTE || dedup.len() != colors.len() {
            return Err(NotesError::BadPalette);
        }
        Ok(Palette(colors))
    }

    pub fn colors(&self) -> &[String] {
        &self.0
    }

    pub fn check(&self, color: &str) -> Result<(), NotesError> {
        if self.0.iter().any(|c| c == color) {
            Ok(())
        } else {
            Err(NotesError::InvalidColor(color.to_string()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    Post,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Target {
    pub kind: TargetKind,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub target: Target,
    pub char_start: usize,
    pub char_end: usize,
    pub exact_text: String,
}

/// `body[start..end]` in characters, or `None` if out of range.
pub fn char_slice(body: &str, start: usize, end: usize) -> Option<String> {
    if start > end {
        return None;
    }
    let mut it = body.char_indices().map(|(i, _)| i).chain(std::iter::once(body.len()));
    let b0 = it.nth(start)?;
    let b1 = if end == start { b0 } else { it.nth(end - start - 1)? };
    Some(body[b0..b1].to_string())
}

/// The text anchors on `target` index into: a post's body (without its
/// title) or a comment's body.
pub fn target_body<'a>(corpus: &'a Corpus, target: &Target) -> Option<&'a str> {
    match target.kind {
        TargetKind::Post => corpus.post(&target.id).map(|p| p.body.as_str()),
        TargetKind::Comment => corpus.comment(&target.id).map(|c| c.body.as_str()),
    }
}

impl Anchor {
    /// Checks the anchor against the current body of its target.
    pub fn validate(&self, body: &str) -> Result<(), NotesError> {
        let len = body.chars().count();
        if self.char_start >= self.char_end || self.char_end > len {
            return Err(NotesError::BadRange { start: self.char_start, end: self.char_end, len });
        }
        let found = char_slice(body, self.char_start, self.char_end).unwrap_or_default();
        if found != self.exact_text {
            return Err(NotesError::AnchorMismatch { expected: self.exact_text.clone(), found });
        }
        Ok(())
    }

    fn touches(&self, other: &Anchor) -> bool {
        self.target == other.target && self.char_start <= other.char_end && other.char_start <= self.char_end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub id: String,
    pub anchor: Anchor,
    pub color: String,
    /// Unix milliseconds.
    pub created_at: u64,
    /// Creation order within the notebook.
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edited_text: Option<String>,
}

impl Highlight {
    /// Text shown in the collection: the user's edit if any, else the span.
    pub fn display_text(&self) -> &str {
        self.edited_text.as_deref().unwrap_or(&self.anchor.exact_text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Folder {
    pub color: String,
    pub entries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub target: Target,
    pub char_start: usize,
    pub char_end: usize,
}

/// All highlights of one session.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notebook {
    palette: Palette,
    highlights: BTreeMap<String, Highlight>,
    next_seq: u64,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Concatenates the texts of connected anchors on one target.
fn union_anchor(parts: &[&Anchor]) -> Anchor {
    let start = parts.iter().map(|a| a.char_start).min().unwrap();
    let end = parts.iter().map(|a| a.char_end).max().unwrap();
    let mut chars: Vec<Option<char>> = vec![None; end - start];
    for a in parts {
        for (i, ch) in a.exact_text.chars().enumerate() {
            chars[a.char_start - start + i] = Some(ch);
        }
    }
    Anchor {
        target: parts[0].target.clone(),
        char_start: start,
        char_end: end,
        exact_text: chars.into_iter().map(|c| c.expect("connected spans cover the union")).collect(),
    }
}

impl Notebook {
    pub fn new(palette: Palette) -> Notebook {
        Notebook { palette, highlights: BTreeMap::new(), next_seq: 0 }
    }

    pub fn palette(&self) -> &Palette {
        &self.palette
    }

    pub fn len(&self) -> usize {
        self.highlights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.highlights.is_empty()
    }

    pub fn get(&self, id: &str) -> Result<&Highlight, NotesError> {
        self.highlights.get(id).ok_or_else(|| NotesError::NotFound(id.to_string()))
    }

    pub fn highlights(&self) -> impl Iterator<Item = &Highlight> {
        self.highlights.values()
    }

    /// Validates `anchor` against `body` and stores the highlight, merging
    /// it with touching same-color highlights on the same target.
    pub fn add_highlight(&mut self, anchor: Anchor, color: &str, body: &str) -> Result<Highlight, NotesError> {
        self.palette.check(color)?;
        anchor.validate(body)?;
        let seq = self.next_seq;
        self.next_seq += 1;
        let h = Highlight {
            id: format!("h{seq}"),
            anchor,
            color: color.to_string(),
            created_at: now_ms(),
            seq,
            edited_text: None,
        };
        let id = self.insert_normalized(h);
        Ok(self.highlights[&id].clone())
    }

    /// Inserts `h` and merges it with its same-color neighbours. Returns
    /// the id the merged highlight ends up with.
    fn insert_normalized(&mut self, h: Highlight) -> String {
        let mut group: Vec<Highlight> = vec![h];
        loop {
            let joined: Vec<String> = self
                .highlights
                .values()
                .filter(|o| {
                    !group.iter().any(|g| g.id == o.id)
                        && group.iter().any(|g| g.color == o.color && g.anchor.touches(&o.anchor))
                })
                .map(|o| o.id.clone())
                .collect();
            if joined.is_empty() {
                break;
            }
            for id in joined {
                group.push(self.highlights.remove(&id).expect("listed above"));
            }
        }
        group.sort_by_key(|g| g.seq);
        let anchors: Vec<&Anchor> = group.iter().map(|g| &g.anchor).collect();
        let merged_anchor = union_anchor(&anchors);
        let mut keep = group[0].clone();
        if group.len() > 1 {
            // The span changed; an edit of the old span no longer applies.
            keep.edited_text = None;
        }
        for g in &group {
            self.highlights.remove(&g.id);
        }
        keep.anchor = merged_anchor;
        let id = keep.id.clone();
        self.highlights.insert(id.clone(), keep);
        id
    }

    /// Moves a highlight to another color's folder. Recoloring to the same
    /// color is a no-op. Returns the resulting highlight, which may have
    /// merged into an older one of the new color.
    pub fn recolor(&mut self, id: &str, color: &str) -> Result<Highlight, NotesError> {
        self.palette.check(color)?;
        let mut h = self.get(id)?.clone();
        if h.color == color {
            return Ok(h);
        }
        self.highlights.remove(id);
        h.color = color.to_string();
        let id = self.insert_normalized(h);
        Ok(self.highlights[&id].clone())
    }

    pub fn clear(&mut self, id: &str) -> Result<Highlight, NotesError> {
        self.highlights.remove(id).ok_or_else(|| NotesError::NotFound(id.to_string()))
    }

    pub fn navigate(&self, id: &str) -> Result<Location, NotesError> {
        let a = &self.get(id)?.anchor;
        Ok(Location { target: a.target.clone(), char_start: a.char_start, char_end: a.char_end })
    }

    /// Sets the user's copy of the entry text. The anchor is untouched.
    pub fn edit_entry(&mut self, id: &str, text: &str) -> Result<Highlight, NotesError> {
        let h = self.highlights.get_mut(id).ok_or_else(|| NotesError::NotFound(id.to_string()))?;
        h.edited_text = Some(text.to_string());
        Ok(h.clone())
    }

    pub fn folder(&self, color: &str) -> Result<Folder, NotesError> {
        self.palette.check(color)?;
        let mut entries: Vec<&Highlight> = self.highlights.values().filter(|h| h.color == color).collect();
        entries.sort_by_key(|h| h.seq);
        Ok(Folder { color: color.to_string(), entries: entries.into_iter().map(|h| h.id.clone()).collect() })
    }

    /// Entries of a folder in order.
    pub fn folder_highlights(&self, color: &str) -> Result<Vec<&Highlight>, NotesError> {
        let f = self.folder(color)?;
        Ok(f.entries.iter().map(|id| &self.highlights[id]).collect())
    }

    pub fn folders(&self) -> Vec<Folder> {
        self.palette.colors().iter().map(|c| self.folder(c).expect("palette color")).collect()
    }

    /// Highlights on one target, for overlays in the post detail.
    pub fn on_target(&self, target: &Target) -> Vec<&Highlight> {
        self.highlights.values().filter(|h| &h.anchor.target == target).collect()
    }
}
