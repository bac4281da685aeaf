//! The persistent part of an exploration session: view state, notes,
//! summaries, mind maps and question boards. Used for export/import and
//! for the server's session directory.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::labeling::SupportLabel;
use crate::llm::{MindMap, QuestionBoard, SummaryDoc};
use crate::notes::{target_body, Folder, Notebook, NotesError, TargetKind};

pub const SESSION_FORMAT: &str = "omhc-session";
pub const SESSION_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("not a session document (format {0:?})")]
    Format(String),
    #[error("unsupported session version {0}")]
    Version(u32),
    #[error("highlight {id}: {source}")]
    Highlight { id: String, source: NotesError },
    #[error("highlight {id} targets unknown {kind:?} {target}")]
    UnknownTarget { id: String, kind: TargetKind, target: String },
    #[error("color {0:?} in summaries or mind maps is not in the palette")]
    UnknownColor(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionDocument {
    pub format: String,
    pub version: u32,
    pub session_id: String,
    /// Unix milliseconds.
    pub created_at: u64,
    #[serde(default)]
    pub query: Option<String>,
    #[serde(default)]
    pub filter: Vec<SupportLabel>,
    #[serde(default)]
    pub path: Vec<String>,
    #[serde(default)]
    pub view_version: u64,
    pub notebook: Notebook,
    /// Derived from `notebook`; ignored on import.
    #[serde(default)]
    pub folders: Vec<Folder>,
    #[serde(default)]
    pub summaries: BTreeMap<String, SummaryDoc>,
    #[serde(default)]
    pub mindmaps: BTreeMap<String, MindMap>,
    #[serde(default)]
    pub boards: BTreeMap<String, QuestionBoard>,
    #[serde(default)]
    pub next_board: u64,
}

impl SessionDocument {
    pub fn new(session_id: impl Into<String>, notebook: Notebook, created_at: u64) -> SessionDocument {
        SessionDocument {
            format: SESSION_FORMAT.to_string(),
            version: SESSION_VERSION,
            session_id: session_id.into(),
            created_at,
            query: None,
            filter: Vec::new(),
            path: Vec::new(),
            view_version: 0,
            folders: notebook.folders(),
            notebook,
            summaries: BTreeMap::new(),
            mindmaps: BTreeMap::new(),
            boards: BTreeMap::new(),
            next_board: 0,
        }
    }

    /// Recomputes the derived folder listing.
    pub fn refresh_folders(&mut self) {
        self.folders = self.notebook.folders();
    }

    /// Checks format, version and, when a corpus is given, that every
    /// anchor still resolves to its exact text.
    pub fn validate(&self, corpus: Option<&Corpus>) -> Result<(), SessionError> {
        if self.format != SESSION_FORMAT {
            return Err(SessionError::Format(self.format.clone()));
        }
        if self.version != SESSION_VERSION {
            return Err(SessionError::Version(self.version));
        }
        let palette = self.notebook.palette();
        for color in self.summaries.keys().chain(self.mindmaps.keys()) {
            palette.check(color).map_err(|_| SessionError::UnknownColor(color.clone()))?;
        }
        for h in self.notebook.highlights() {
            palette
                .check(&h.color)
                .map_err(|source| SessionError::Highlight { id: h.id.clone(), source })?;
            let Some(corpus) = corpus else { continue };
            let t = &h.anchor.target;
            let body = target_body(corpus, t).ok_or_else(|| SessionError::UnknownTarget {
                id: h.id.clone(),
                kind: t.kind,
                target: t.id.clone(),
            })?;
            h.anchor
                .validate(body)
                .map_err(|source| SessionError::Highlight { id: h.id.clone(), source })?;
        }
        Ok(())
    }
}
