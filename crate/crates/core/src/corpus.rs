//! Ingestion of Pushshift-style dumps into the canonical post/comment store.
//!
//! A dump is newline-delimited JSON, one record per line. Posts have no
//! `parent_id`; comments do. Two tombstone rules are applied in order:
//! records whose id (or parent id) is a tombstone are dropped first, then
//! records whose body is a tombstone. Comments whose parent chain does not
//! reach a surviving post are dropped as orphans.
//!
//! The store on disk is a directory holding `corpus.json` (every record keyed
//! by id, serialized in key order so that re-ingesting the same dump yields
//! identical bytes) and a `stats.json` sidecar.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOMBSTONES: [&str; 2] = ["[deleted]", "[removed]"];
pub const CORPUS_FILE: &str = "corpus.json";
pub const STATS_FILE: &str = "stats.json";
const STORE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
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
    #[error("corrupt store file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("post not found: {0}")]
    PostNotFound(String),
}

/// One line of a dump after lenient decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub id: String,
    pub parent_id: Option<String>,
    pub title: Option<String>,
    pub body: String,
    pub created_utc: i64,
}

impl RawRecord {
    pub fn is_comment(&self) -> bool {
        self.parent_id.is_some()
    }

    /// Decodes one dump line. Accepts `selftext` as an alias of `body`,
    /// numeric or string timestamps, and strips the `t1_`/`t3_` fullname
    /// prefixes Reddit uses in `parent_id`.
    pub fn from_json_line(line: &str) -> Option<RawRecord> {
        let v: Value = serde_json::from_str(line).ok()?;
        let obj = v.as_object()?;
        let id = match obj.get("id")? {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return None,
        };
        if id.is_empty() {
            return None;
        }
        let parent_id = match obj.get("parent_id") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s.is_empty() => None,
            Some(Value::String(s)) => Some(strip_fullname(s).to_string()),
            Some(_) => return None,
        };
        let title = match obj.get("title") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return None,
        };
        let body = match obj.get("body").or_else(|| obj.get("selftext")) {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return None,
        };
        let created_utc = match obj.get("created_utc") {
            Some(Value::Number(n)) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64))?,
            Some(Value::String(s)) => s.trim().parse::<f64>().ok()? as i64,
            _ => return None,
        };
        Some(RawRecord { id, parent_id, title, body, created_utc })
    }
}

fn strip_fullname(s: &str) -> &str {
    for prefix in ["t1_", "t3_"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            return rest;
        }
    }
    s
}

fn is_tombstone(s: &str) -> bool {
    TOMBSTONES.contains(&s.trim())
}

fn clean_text(s: &str) -> String {
    s.replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .trim()
        .to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub title: String,
    pub body: String,
    pub created_utc: i64,
    pub comment_ids: Vec<String>,
}

impl Post {
    /// Title and body joined, as indexed and vectorized.
    pub fn full_text(&self) -> String {
        if self.body.is_empty() {
            self.title.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub post_id: String,
    pub body: String,
    pub created_utc: i64,
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_raw: u64,
    pub n_posts: u64,
    pub n_comments: u64,
    pub n_dropped_tombstone_id: u64,
    pub n_dropped_tombstone_body: u64,
    pub n_dropped_empty: u64,
    pub n_dropped_orphan: u64,
    pub n_duplicate: u64,
    pub n_malformed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostWithComments {
    pub post: Post,
    pub comments: Vec<Comment>,
}

/// The immutable post/comment store.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    version: u32,
    posts: BTreeMap<String, Post>,
    comments: BTreeMap<String, Comment>,
}

impl Corpus {
    pub fn posts(&self) -> impl ExactSizeIterator<Item = &Post> {
        self.posts.values()
    }

    pub fn comments(&self) -> impl ExactSizeIterator<Item = &Comment> {
        self.comments.values()
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.posts.get(id)
    }

    pub fn comment(&self, id: &str) -> Option<&Comment> {
        self.comments.get(id)
    }

    pub fn len_posts(&self) -> usize {
        self.posts.len()
    }

    pub fn len_comments(&self) -> usize {
        self.comments.len()
    }

    /// Comments of a post in stored (thread pre-order) order.
    pub fn comments_of<'a>(&'a self, post: &'a Post) -> impl Iterator<Item = &'a Comment> + 'a {
        post.comment_ids.iter().filter_map(move |id| self.comments.get(id))
    }

    pub fn get_post(&self, id: &str) -> Result<PostWithComments, CorpusError> {
        let post = self
            .posts
            .get(id)
            .ok_or_else(|| CorpusError::PostNotFound(id.to_string()))?;
        Ok(PostWithComments {
            post: post.clone(),
            comments: self.comments_of(post).cloned().collect(),
        })
    }

    /// Builds the store from decoded records, applying the cleaning rules.
    /// `stats.n_raw` and `stats.n_malformed` must be filled in by the caller
    /// when decoding happened elsewhere.
    pub fn from_records(records: Vec<RawRecord>) -> (Corpus, CorpusStats) {
        let mut stats = CorpusStats::default();
        let mut seen = HashSet::new();
        let mut posts: BTreeMap<String, Post> = BTreeMap::new();
        // id -> (parent id, body, created)
        let mut pending: HashMap<String, (String, String, i64)> = HashMap::new();

        for rec in records {
            if !seen.insert(rec.id.clone()) {
                stats.n_duplicate += 1;
                continue;
            }
            if is_tombstone(&rec.id) || rec.parent_id.as_deref().is_some_and(is_tombstone) {
                stats.n_dropped_tombstone_id += 1;
                continue;
            }
            if is_tombstone(&rec.body) {
                stats.n_dropped_tombstone_body += 1;
                continue;
            }
            let body = clean_text(&rec.body);
            match rec.parent_id {
                None => {
                    let title = clean_text(rec.title.as_deref().unwrap_or(""));
                    if title.is_empty() && body.is_empty() {
                        stats.n_dropped_empty += 1;
                        continue;
                    }
                    posts.insert(
                        rec.id.clone(),
                        Post { id: rec.id, title, body, created_utc: rec.created_utc, comment_ids: Vec::new() },
                    );
                }
                Some(parent) => {
                    if body.is_empty() {
                        stats.n_dropped_empty += 1;
                        continue;
                    }
                    pending.insert(rec.id, (parent, body, rec.created_utc));
                }
            }
        }

        // Resolve every surviving comment to its root post through surviving
        // ancestors only.
        let mut resolved: HashMap<String, Option<(String, u32)>> = HashMap::new();
        let ids: Vec<String> = pending.keys().cloned().collect();
        for id in &ids {
            resolve_root(id, &pending, &posts, &mut resolved);
        }

        let mut children: HashMap<String, Vec<(i64, String)>> = HashMap::new();
        let mut comments = BTreeMap::new();
        for (id, (parent, body, created)) in pending {
            match resolved.get(&id).cloned().flatten() {
                Some((post_id, depth)) => {
                    children.entry(parent).or_default().push((created, id.clone()));
                    comments.insert(
                        id.clone(),
                        Comment { id, post_id, body, created_utc: created, depth },
                    );
                }
                None => stats.n_dropped_orphan += 1,
            }
        }
        for kids in children.values_mut() {
            kids.sort();
        }
        for post in posts.values_mut() {
            let mut order = Vec::new();
            let mut stack: Vec<&str> = children
                .get(&post.id)
                .map(|k| k.iter().rev().map(|(_, id)| id.as_str()).collect())
                .unwrap_or_default();
            while let Some(id) = stack.pop() {
                order.push(id.to_string());
                if let Some(k) = children.get(id) {
                    stack.extend(k.iter().rev().map(|(_, id)| id.as_str()));
                }
            }
            post.comment_ids = order;
        }

        stats.n_posts = posts.len() as u64;
        stats.n_comments = comments.len() as u64;
        (Corpus { version: STORE_VERSION, posts, comments }, stats)
    }

    /// Reads a dump and builds the store. Malformed lines are counted, not
    /// fatal; an unreadable file is.
    pub fn ingest_file(dump: &Path) -> Result<(Corpus, CorpusStats), CorpusError> {
        let text = fs::read_to_string(dump)
            .map_err(|source| CorpusError::Read { path: dump.to_path_buf(), source })?;
        Ok(Self::ingest_str(&text))
    }

    pub fn ingest_str(text: &str) -> (Corpus, CorpusStats) {
        let mut records = Vec::new();
        let mut n_raw = 0;
        let mut n_malformed = 0;
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            n_raw += 1;
            match RawRecord::from_json_line(line) {
                Some(r) => records.push(r),
                None => n_malformed += 1,
            }
        }
        let (corpus, mut stats) = Self::from_records(records);
        stats.n_raw = n_raw;
        stats.n_malformed = n_malformed;
        (corpus, stats)
    }

    pub fn save(&self, stats: &CorpusStats, dir: &Path) -> Result<(), CorpusError> {
        fs::create_dir_all(dir).map_err(|source| CorpusError::Write { path: dir.to_path_buf(), source })?;
        write_json(&dir.join(CORPUS_FILE), self)?;
        write_json(&dir.join(STATS_FILE), stats)
    }

    pub fn load(dir: &Path) -> Result<Corpus, CorpusError> {
        read_json(&dir.join(CORPUS_FILE))
    }

    pub fn load_stats(dir: &Path) -> Result<CorpusStats, CorpusError> {
        read_json(&dir.join(STATS_FILE))
    }
}

fn resolve_root(
    id: &str,
    pending: &HashMap<String, (String, String, i64)>,
    posts: &BTreeMap<String, Post>,
    resolved: &mut HashMap<String, Option<(String, u32)>>,
) -> Option<(String, u32)> {
    // Walk up iteratively; remember the chain so every visited comment gets
    // its answer without recursion.
    let mut chain = Vec::new();
    let mut cur = id.to_string();
    let root = loop {
        if let Some(r) = resolved.get(&cur) {
            break r.clone().map(|(post, depth)| (post, depth + 1));
        }
        let Some((parent, _, _)) = pending.get(&cur) else {
            break None;
        };
        if chain.contains(&cur) {
            break None;
        }
        chain.push(cur.clone());
        if posts.contains_key(parent) {
            break Some((parent.clone(), 0));
        }
        cur = parent.clone();
    };
    // `root` carries the depth of the last element pushed to `chain`.
    let mut answer = root;
    for c in chain.iter().rev() {
        resolved.insert(c.clone(), answer.clone());
        answer = answer.map(|(p, d)| (p, d + 1));
    }
    resolved.get(id).cloned().flatten()
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let bytes = serde_json::to_vec(value).map_err(|e| CorpusError::Corrupt {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    write_atomic(path, &bytes).map_err(|source| CorpusError::Write { path: path.to_path_buf(), source })
}

/// Writes to a sibling temp file and renames it over `path`, so readers
/// never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    static SEQ: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
    let n = SEQ.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{}.{n}.tmp", std::process::id()));
    let tmp = path.with_file_name(name);
    fs::write(&tmp, bytes).and_then(|()| fs::rename(&tmp, path)).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_slice(&bytes).map_err(|e| CorpusError::Corrupt {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
