//! Social-support labels: sought support on posts, provided support on
//! comments, each as a high/medium/low level for the emotional and the
//! informational kind.
//!
//! Labels come from a [`LabelProvider`]. The default [`HeuristicProvider`]
//! scores marker-phrase density against lexicons kept in a data file; the
//! [`ImportedProvider`] answers from an externally produced CSV and falls
//! back to the heuristic for ids it does not know.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{read_json, write_json, Comment, Corpus, CorpusError, Post};
use crate::text::words;

pub const LABELS_FILE: &str = "labels.json";
const DEFAULT_LEXICONS: &str = include_str!("../data/lexicons.toml");

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("bad lexicon file: {0}")]
    Lexicon(String),
    #[error(transparent)]
    Store(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Seeking,
    Providing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportKind {
    Emotional,
    Informational,
}

impl SupportKind {
    pub const ALL: [SupportKind; 2] = [SupportKind::Emotional, SupportKind::Informational];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportLevel {
    High,
    Medium,
    Low,
}

impl SupportLevel {
    pub const ALL: [SupportLevel; 3] = [SupportLevel::High, SupportLevel::Medium, SupportLevel::Low];

    pub fn index(self) -> usize {
        match self {
            SupportLevel::High => 0,
            SupportLevel::Medium => 1,
            SupportLevel::Low => 2,
        }
    }
}

macro_rules! parse_ci {
    ($ty:ty, $what:literal, $($name:literal => $val:expr),+) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok($val),)+
                    other => Err(format!(concat!("unknown ", $what, " {:?}"), other)),
                }
            }
        }
    };
}

parse_ci!(Direction, "direction", "seeking" => Direction::Seeking, "providing" => Direction::Providing);
parse_ci!(SupportKind, "kind", "emotional" => SupportKind::Emotional, "informational" => SupportKind::Informational);
parse_ci!(SupportLevel, "level", "high" => SupportLevel::High, "medium" => SupportLevel::Medium, "low" => SupportLevel::Low);

impl fmt::Display for SupportLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupportLevel::High => "high",
            SupportLevel::Medium => "medium",
            SupportLevel::Low => "low",
        })
    }
}

/// One filterable unit of social support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupportLabel {
    pub direction: Direction,
    pub kind: SupportKind,
    pub level: SupportLevel,
}

/// The two per-kind levels of a single post or comment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportLevels {
    pub emotional: SupportLevel,
    pub informational: SupportLevel,
}

impl SupportLevels {
    pub const LOW: SupportLevels =
        SupportLevels { emotional: SupportLevel::Low, informational: SupportLevel::Low };

    pub fn get(&self, kind: SupportKind) -> SupportLevel {
        match kind {
            SupportKind::Emotional => self.emotional,
            SupportKind::Informational => self.informational,
        }
    }

    fn set(&mut self, kind: SupportKind, level: SupportLevel) {
        match kind {
            SupportKind::Emotional => self.emotional = level,
            SupportKind::Informational => self.informational = level,
        }
    }

    pub fn labels(&self, direction: Direction) -> [SupportLabel; 2] {
        [SupportKind::Emotional, SupportKind::Informational]
            .map(|kind| SupportLabel { direction, kind, level: self.get(kind) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Heuristic,
    Imported,
}

/// Assigns support levels. Implementations must be deterministic.
pub trait LabelProvider: Send + Sync {
    fn name(&self) -> &str;
    fn kind(&self) -> ProviderKind;
    fn label_post(&self, post: &Post) -> SupportLevels;
    fn label_comment(&self, comment: &Comment) -> SupportLevels;
}

#[derive(Debug, Clone, Deserialize)]
struct LexiconFile {
    length_scale: f64,
    medium: f64,
    high: f64,
    seeking: KindLexicons,
    providing: KindLexicons,
    /// Per-kind overrides of `medium`/`high`.
    #[serde(default)]
    thresholds: BTreeMap<SupportKind, Thresholds>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct Thresholds {
    medium: f64,
    high: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct KindLexicons {
    emotional: Vec<String>,
    informational: Vec<String>,
}

type Marker = Vec<String>;

/// Lexicon-and-threshold scorer.
#[derive(Debug, Clone)]
pub struct HeuristicProvider {
    length_scale: f64,
    // [kind]
    thresholds: [Thresholds; 2],
    // [direction][kind]
    markers: [[Vec<Marker>; 2]; 2],
}

impl Default for HeuristicProvider {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_LEXICONS).expect("bundled lexicons parse")
    }
}

impl HeuristicProvider {
    pub fn from_toml_str(s: &str) -> Result<Self, LabelError> {
        let f: LexiconFile = toml::from_str(s).map_err(|e| LabelError::Lexicon(e.to_string()))?;
        let base = Thresholds { medium: f.medium, high: f.high };
        let thresholds = SupportKind::ALL.map(|k| f.thresholds.get(&k).copied().unwrap_or(base));
        if !(f.length_scale > 0.0 && thresholds.iter().all(|t| t.medium > 0.0 && t.high >= t.medium)) {
            return Err(LabelError::Lexicon(
                "need length_scale > 0 and 0 < medium <= high".into(),
            ));
        }
        let compile = |v: &[String]| -> Vec<Marker> {
            v.iter().map(|m| words(m)).filter(|w| !w.is_empty()).collect()
        };
        Ok(HeuristicProvider {
            length_scale: f.length_scale,
            thresholds,
            markers: [
                [compile(&f.seeking.emotional), compile(&f.seeking.informational)],
                [compile(&f.providing.emotional), compile(&f.providing.informational)],
            ],
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, LabelError> {
        let s = std::fs::read_to_string(path)
            .map_err(|source| LabelError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&s)
    }

    /// Length-damped marker count for one direction and kind.
    pub fn score(&self, text: &str, direction: Direction, kind: SupportKind) -> f64 {
        let w = words(text);
        let markers = &self.markers[direction as usize][kind as usize];
        let hits: usize = markers.iter().map(|m| count_phrase(&w, m)).sum();
        hits as f64 / (1.0 + w.len() as f64 / self.length_scale)
    }

    fn level(&self, kind: SupportKind, score: f64) -> SupportLevel {
        let t = self.thresholds[kind as usize];
        if score >= t.high {
            SupportLevel::High
        } else if score >= t.medium {
            SupportLevel::Medium
        } else {
            SupportLevel::Low
        }
    }

    pub fn label_text(&self, text: &str, direction: Direction) -> SupportLevels {
        SupportLevels {
            emotional: self.level(SupportKind::Emotional, self.score(text, direction, SupportKind::Emotional)),
            informational: self.level(
                SupportKind::Informational,
                self.score(text, direction, SupportKind::Informational),
            ),
        }
    }
}

fn count_phrase(words: &[String], phrase: &[String]) -> usize {
    if phrase.is_empty() || words.len() < phrase.len() {
        return 0;
    }
    words.windows(phrase.len()).filter(|w| *w == phrase).count()
}

impl LabelProvider for HeuristicProvider {
    fn name(&self) -> &str {
        "heuristic"
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Heuristic
    }

    fn label_post(&self, post: &Post) -> SupportLevels {
        self.label_text(&post.full_text(), Direction::Seeking)
    }

    fn label_comment(&self, comment: &Comment) -> SupportLevels {
        self.label_text(&comment.body, Direction::Providing)
    }
}

/// Answers from an imported `(id, direction, kind, level)` table.
#[derive(Debug, Clone)]
pub struct ImportedProvider {
    table: HashMap<(String, Direction, SupportKind), SupportLevel>,
    fallback: HeuristicProvider,
}

impl ImportedProvider {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    fn lookup(&self, id: &str, direction: Direction, computed: impl FnOnce() -> SupportLevels) -> SupportLevels {
        let mut out: Option<SupportLevels> = None;
        for kind in SupportKind::ALL {
            if let Some(level) = self.table.get(&(id.to_string(), direction, kind)) {
                out.get_or_insert_with(|| SupportLevels::LOW).set(kind, *level);
            }
        }
        match out {
            None => computed(),
            Some(mut partial) => {
                // Only consult the heuristic for kinds the table lacks.
                let missing: Vec<_> = SupportKind::ALL
                    .into_iter()
                    .filter(|k| !self.table.contains_key(&(id.to_string(), direction, *k)))
                    .collect();
                if !missing.is_empty() {
                    let c = computed();
                    for k in missing {
                        partial.set(k, c.get(k));
                    }
                }
                partial
            }
        }
    }
}

impl LabelProvider for ImportedProvider {
    fn name(&self) -> &str {
        "file"
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::Imported
    }

    fn label_post(&self, post: &Post) -> SupportLevels {
        self.lookup(&post.id, Direction::Seeking, || self.fallback.label_post(post))
    }

    fn label_comment(&self, comment: &Comment) -> SupportLevels {
        self.lookup(&comment.id, Direction::Providing, || self.fallback.label_comment(comment))
    }
}

/// Parses a label CSV. Rows are `id,direction,kind,level`; a header row
/// starting with `id` is skipped. Tokens are case-insensitive.
pub fn import_labels_str(csv_text: &str, fallback: HeuristicProvider) -> Result<ImportedProvider, LabelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let mut table = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| LabelError::Row {
            line: e.position().map_or(i as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && row.get(0).is_some_and(|f| f.eq_ignore_ascii_case("id")) {
            continue;
        }
        if row.len() == 1 && row.get(0).is_some_and(str::is_empty) {
            continue;
        }
        if row.len() != 4 {
            return Err(LabelError::Row { line, message: format!("expected 4 fields, found {}", row.len()) });
        }
        let err = |message: String| LabelError::Row { line, message };
        let id = row[0].to_string();
        if id.is_empty() {
            return Err(err("empty id".into()));
        }
        let direction: Direction = row[1].parse().map_err(err)?;
        let kind: SupportKind = row[2].parse().map_err(err)?;
        let level: SupportLevel = row[3].parse().map_err(err)?;
        table.insert((id, direction, kind), level);
    }
    Ok(ImportedProvider { table, fallback })
}

pub fn import_labels(path: &Path) -> Result<ImportedProvider, LabelError> {
    let s = std::fs::read_to_string(path)
        .map_err(|source| LabelError::Read { path: path.to_path_buf(), source })?;
    import_labels_str(&s, HeuristicProvider::default())
}

/// Labels for every stored post and comment, as persisted next to the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTable {
    pub provider: String,
    pub posts: BTreeMap<String, SupportLevels>,
    pub comments: BTreeMap<String, SupportLevels>,
}

impl LabelTable {
    pub fn label_corpus(corpus: &Corpus, provider: &dyn LabelProvider) -> LabelTable {
        LabelTable {
            provider: provider.name().to_string(),
            posts: corpus.posts().map(|p| (p.id.clone(), provider.label_post(p))).collect(),
            comments: corpus.comments().map(|c| (c.id.clone(), provider.label_comment(c))).collect(),
        }
    }

    pub fn post(&self, id: &str) -> SupportLevels {
        self.posts.get(id).copied().unwrap_or(SupportLevels::LOW)
    }

    pub fn comment(&self, id: &str) -> SupportLevels {
        self.comments.get(id).copied().unwrap_or(SupportLevels::LOW)
    }

    pub fn save(&self, store_dir: &Path) -> Result<(), LabelError> {
        Ok(write_json(&store_dir.join(LABELS_FILE), self)?)
    }

    pub fn load(store_dir: &Path) -> Result<LabelTable, LabelError> {
        Ok(read_json(&store_dir.join(LABELS_FILE))?)
    }
}
