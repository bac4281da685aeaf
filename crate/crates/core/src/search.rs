//! Inverted index with TF-IDF ranking.
//!
//! Score of document `d` for a query is the sum over the distinct query
//! terms `t` of `(1 + ln tf(t, d)) * ln(N / df(t))`. Every document that
//! contains at least one query term is a hit, even when its score is zero.
//! Hits are ordered by descending score, then ascending post id.
//!
//! # Index file layout
//!
//! All integers are little-endian `u32`; strings are a `u32` byte length
//! followed by UTF-8 bytes.
//!
//! ```text
//! magic      8 bytes  "OMHCIDX\0"
//! version    u32      currently 1
//! n_docs     u32
//! doc ids    n_docs strings, ascending
//! n_terms    u32
//! per term, ascending by term:
//!   term       string
//!   n_entries  u32
//!   entries    n_entries × (doc_index u32, term_frequency u32), ascending doc_index
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::text::tokenize;

pub const INDEX_FILE: &str = "index.bin";
pub const DEFAULT_N_TOP: usize = 150;
const MAGIC: &[u8; 8] = b"OMHCIDX\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad index file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Posting {
    doc: u32,
    tf: u32,
}

/// Postings for one term, resolved to post ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostingList {
    pub term: String,
    pub entries: Vec<(String, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub post_id: String,
    pub score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_top: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { n_top: DEFAULT_N_TOP }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStatus {
    Ok,
    EmptyQuery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: QueryStatus,
    pub results: Vec<SearchResult>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchIndex {
    doc_ids: Vec<String>,
    terms: BTreeMap<String, Vec<Posting>>,
}

impl SearchIndex {
    pub fn build(corpus: &Corpus) -> SearchIndex {
        Self::build_from_docs(corpus.posts().map(|p| (p.id.clone(), p.full_text())))
    }

    /// Builds from `(post_id, text)` pairs. Duplicate ids keep the first text.
    pub fn build_from_docs<I>(docs: I) -> SearchIndex
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut by_id: BTreeMap<String, String> = BTreeMap::new();
        for (id, text) in docs {
            by_id.entry(id).or_insert(text);
        }
        let mut terms: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_ids = Vec::with_capacity(by_id.len());
        for (doc, (id, text)) in by_id.into_iter().enumerate() {
            let mut counts: BTreeMap<String, u32> = BTreeMap::new();
            for tok in tokenize(&text) {
                *counts.entry(tok).or_insert(0) += 1;
            }
            for (term, tf) in counts {
                terms.entry(term).or_default().push(Posting { doc: doc as u32, tf });
            }
            doc_ids.push(id);
        }
        SearchIndex { doc_ids, terms }
    }

    pub fn n_docs(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.terms.get(term).map_or(0, Vec::len)
    }

    pub fn posting(&self, term: &str) -> Option<PostingList> {
        self.terms.get(term).map(|entries| PostingList {
            term: term.to_string(),
            entries: entries
                .iter()
                .map(|p| (self.doc_ids[p.doc as usize].clone(), p.tf))
                .collect(),
        })
    }

    pub fn idf(&self, term: &str) -> f64 {
        let df = self.document_frequency(term);
        if df == 0 {
            0.0
        } else {
            (self.n_docs() as f64 / df as f64).ln()
        }
    }

    pub fn search(&self, query: &str, config: &SearchConfig) -> SearchOutcome {
        let query_terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        if query_terms.is_empty() {
            return SearchOutcome { status: QueryStatus::EmptyQuery, results: Vec::new() };
        }
        let mut scores: HashMap<u32, f64> = HashMap::new();
        for term in &query_terms {
            let Some(postings) = self.terms.get(term) else { continue };
            let idf = self.idf(term);
            for p in postings {
                *scores.entry(p.doc).or_insert(0.0) += (1.0 + (p.tf as f64).ln()) * idf;
            }
        }
        let mut hits: Vec<(u32, f64)> = scores.into_iter().collect();
        // doc indices are in ascending id order, so the index is the id tie-break
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        hits.truncate(config.n_top.max(1));
        let results = hits
            .into_iter()
            .enumerate()
            .map(|(i, (doc, score))| SearchResult {
                post_id: self.doc_ids[doc as usize].clone(),
                score,
                rank: i + 1,
            })
            .collect();
        SearchOutcome { status: QueryStatus::Ok, results }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, FORMAT_VERSION);
        put_u32(&mut out, self.doc_ids.len() as u32);
        for id in &self.doc_ids {
            put_str(&mut out, id);
        }
        put_u32(&mut out, self.terms.len() as u32);
        for (term, postings) in &self.terms {
            put_str(&mut out, term);
            put_u32(&mut out, postings.len() as u32);
            for p in postings {
                put_u32(&mut out, p.doc);
                put_u32(&mut out, p.tf);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SearchIndex, IndexError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(IndexError::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(IndexError::Format(format!("unsupported version {version}")));
        }
        let n_docs = r.u32()? as usize;
        let mut doc_ids = Vec::with_capacity(n_docs.min(1 << 20));
        for _ in 0..n_docs {
            doc_ids.push(r.string()?);
        }
        let n_terms = r.u32()? as usize;
        let mut terms = BTreeMap::new();
        for _ in 0..n_terms {
            let term = r.string()?;
            let n = r.u32()? as usize;
            let mut postings = Vec::with_capacity(n.min(1 << 20));
            for _ in 0..n {
                let doc = r.u32()?;
                let tf = r.u32()?;
                if doc as usize >= n_docs || tf == 0 {
                    return Err(IndexError::Format(format!("bad posting for term {term:?}")));
                }
                postings.push(Posting { doc, tf });
            }
            terms.insert(term, postings);
        }
        if r.pos != bytes.len() {
            return Err(IndexError::Format("trailing bytes".into()));
        }
        Ok(SearchIndex { doc_ids, terms })
    }

    pub fn save(&self, dir: &Path) -> Result<(), IndexError> {
        fs::create_dir_all(dir).map_err(|source| IndexError::Write { path: dir.to_path_buf(), source })?;
        let path = dir.join(INDEX_FILE);
        crate::corpus::write_atomic(&path, &self.to_bytes()).map_err(|source| IndexError::Write { path, source })
    }

    pub fn load(dir: &Path) -> Result<SearchIndex, IndexError> {
        let path = dir.join(INDEX_FILE);
        let bytes = fs::read(&path).map_err(|source| IndexError::Read { path, source })?;
        Self::from_bytes(&bytes)
    }
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IndexError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| IndexError::Format("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self) -> Result<String, IndexError> {
        let n = self.u32()? as usize;
        let b = self.take(n)?;
        String::from_utf8(b.to_vec()).map_err(|_| IndexError::Format("invalid utf-8".into()))
    }
}
