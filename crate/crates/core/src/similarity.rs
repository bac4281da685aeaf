//! Document vectors and the set of similar post pairs.
//!
//! Pairs are computed once over the whole corpus by brute force and stored;
//! at render time a post's neighbours are intersected with the cluster it is
//! shown in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{read_json, write_json, Corpus, CorpusError};
use crate::text::tokenize;

pub const PAIRS_FILE: &str = "pairs.json";
pub const DEFAULT_THRESHOLD: f64 = 0.6;
pub const EMBED_URL_ENV: &str = "EMBED_URL";
pub const BUILTIN_PROVIDER: &str = "builtin-tfidf-vector";
pub const EXTERNAL_PROVIDER: &str = "external-http";
/// Slack on the threshold comparison so that `cos(v, v)` clears `θ = 1`.
const COSINE_SLACK: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum SimilarityError {
    #[error("embedding provider {provider} failed: {message}")]
    Provider { provider: String, message: String },
    #[error("threshold must be in (0, 1], got {0}")]
    Threshold(f64),
    #[error("post not found: {0}")]
    NotFound(String),
    #[error(transparent)]
    Store(#[from] CorpusError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocVector {
    pub post_id: String,
    pub vector: Vec<f64>,
    pub norm: f64,
}

impl DocVector {
    pub fn new(post_id: impl Into<String>, vector: Vec<f64>) -> DocVector {
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        DocVector { post_id: post_id.into(), vector, norm }
    }

    /// Zero vectors (empty documents) take no part in pairing.
    pub fn is_embeddable(&self) -> bool {
        self.norm > 0.0 && self.norm.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub post_a: String,
    pub post_b: String,
    pub similarity: f64,
}

pub fn cosine(a: &DocVector, b: &DocVector) -> f64 {
    if !a.is_embeddable() || !b.is_embeddable() {
        return 0.0;
    }
    let dot: f64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x * y).sum();
    (dot / (a.norm * b.norm)).clamp(-1.0, 1.0)
}

/// Log-tf × smoothed-idf vectorizer over the shared tokenizer.
///
/// Weight of term `t` in a document is `(1 + ln tf) * (ln((1 + N) / (1 + df)) + 1)`.
/// The smoothing keeps terms that occur in every document from vanishing,
/// unlike the ranking idf used by search.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfVectorizer {
    vocab: BTreeMap<String, usize>,
    idf: Vec<f64>,
}

impl TfidfVectorizer {
    pub fn fit<'a, I: IntoIterator<Item = &'a str>>(docs: I) -> TfidfVectorizer {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n = 0usize;
        for d in docs {
            n += 1;
            for t in tokenize(d).into_iter().collect::<BTreeSet<_>>() {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let mut vocab = BTreeMap::new();
        let mut idf = Vec::with_capacity(df.len());
        for (i, (term, count)) in df.into_iter().enumerate() {
            vocab.insert(term, i);
            idf.push(((1.0 + n as f64) / (1.0 + count as f64)).ln() + 1.0);
        }
        TfidfVectorizer { vocab, idf }
    }

    pub fn dimension(&self) -> usize {
        self.idf.len()
    }

    pub fn embed(&self, post_id: &str, text: &str) -> DocVector {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for t in tokenize(text) {
            if let Some(&i) = self.vocab.get(&t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let mut v = vec![0.0; self.dimension()];
        for (i, tf) in counts {
            v[i] = (1.0 + (tf as f64).ln()) * self.idf[i];
        }
        DocVector::new(post_id, v)
    }
}

/// Embeds every post of the corpus with the builtin vectorizer.
pub fn embed_corpus(corpus: &Corpus) -> Vec<DocVector> {
    let texts: Vec<(String, String)> = corpus.posts().map(|p| (p.id.clone(), p.full_text())).collect();
    let vectorizer = TfidfVectorizer::fit(texts.iter().map(|(_, t)| t.as_str()));
    texts.par_iter().map(|(id, t)| vectorizer.embed(id, t)).collect()
}

#[derive(Serialize)]
struct EmbedRequestItem<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponseItem {
    id: String,
    vector: Vec<f64>,
}

/// Client for an external embedding service: POST `[{id, text}]`, receive
/// `[{id, vector}]`.
#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    url: String,
    client: reqwest::Client,
}

impl HttpEmbedder {
    pub fn new(url: impl Into<String>) -> HttpEmbedder {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .expect("http client");
        HttpEmbedder { url: url.into(), client }
    }

    pub fn from_env() -> Option<HttpEmbedder> {
        std::env::var(EMBED_URL_ENV).ok().filter(|u| !u.is_empty()).map(HttpEmbedder::new)
    }

    fn err(message: impl ToString) -> SimilarityError {
        SimilarityError::Provider { provider: EXTERNAL_PROVIDER.into(), message: message.to_string() }
    }

    pub async fn embed_batch(&self, docs: &[(String, String)]) -> Result<Vec<DocVector>, SimilarityError> {
        let body: Vec<EmbedRequestItem> =
            docs.iter().map(|(id, text)| EmbedRequestItem { id, text }).collect();
        let resp = self.client.post(&self.url).json(&body).send().await.map_err(Self::err)?;
        if !resp.status().is_success() {
            return Err(Self::err(format!("HTTP {}", resp.status())));
        }
        let items: Vec<EmbedResponseItem> = resp.json().await.map_err(Self::err)?;
        let mut by_id: HashMap<String, Vec<f64>> = items.into_iter().map(|i| (i.id, i.vector)).collect();
        let mut out = Vec::with_capacity(docs.len());
        let mut dim = None;
        for (id, _) in docs {
            let v = by_id.remove(id).ok_or_else(|| Self::err(format!("no vector for {id}")))?;
            if *dim.get_or_insert(v.len()) != v.len() {
                return Err(Self::err(format!("vector for {id} has dimension {}", v.len())));
            }
            out.push(DocVector::new(id.clone(), v));
        }
        Ok(out)
    }
}

/// All pairs with cosine similarity at least `threshold`, each listed once
/// with `post_a < post_b`, sorted by `(post_a, post_b)`.
pub fn similar_pairs(vectors: &[DocVector], threshold: f64) -> Result<Vec<SimilarPair>, SimilarityError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SimilarityError::Threshold(threshold));
    }
    let mut usable: Vec<&DocVector> = vectors.iter().filter(|v| v.is_embeddable()).collect();
    usable.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    usable.dedup_by(|a, b| a.post_id == b.post_id);
    let pairs = (0..usable.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = usable[i];
            usable[i + 1..].iter().filter_map(move |b| {
                let s = cosine(a, b);
                (s + COSINE_SLACK >= threshold).then(|| SimilarPair {
                    post_a: a.post_id.clone(),
                    post_b: b.post_id.clone(),
                    similarity: s,
                })
            })
        })
        .collect();
    Ok(pairs)
}

/// The stored pair set with its neighbour lookup.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairSet {
    pub threshold: f64,
    pub provider: String,
    /// Every post that was considered, embeddable or not.
    pub posts: BTreeSet<String>,
    pub pairs: Vec<SimilarPair>,
    #[serde(skip)]
    adjacency: HashMap<String, BTreeSet<String>>,
}

impl PairSet {
    pub fn new(threshold: f64, provider: impl Into<String>, posts: BTreeSet<String>, pairs: Vec<SimilarPair>) -> PairSet {
        let mut set = PairSet { threshold, provider: provider.into(), posts, pairs, adjacency: HashMap::new() };
        set.rebuild_adjacency();
        set
    }

    pub fn compute(vectors: &[DocVector], threshold: f64, provider: &str) -> Result<PairSet, SimilarityError> {
        let pairs = similar_pairs(vectors, threshold)?;
        let posts = vectors.iter().map(|v| v.post_id.clone()).collect();
        Ok(PairSet::new(threshold, provider, posts, pairs))
    }

    fn rebuild_adjacency(&mut self) {
        self.adjacency.clear();
        for p in &self.pairs {
            self.adjacency.entry(p.post_a.clone()).or_default().insert(p.post_b.clone());
            self.adjacency.entry(p.post_b.clone()).or_default().insert(p.post_a.clone());
        }
    }

    /// The subset at a stricter threshold. A looser one needs the vectors
    /// again, so it yields `None`.
    pub fn at_threshold(&self, threshold: f64) -> Option<PairSet> {
        if threshold + 1e-12 < self.threshold {
            return None;
        }
        let pairs = self.pairs.iter().filter(|p| p.similarity + 1e-12 >= threshold).cloned().collect();
        Some(PairSet::new(threshold, self.provider.clone(), self.posts.clone(), pairs))
    }

    /// Similar posts of `post_id` restricted to `scope`.
    pub fn neighbors(&self, post_id: &str, scope: &BTreeSet<String>) -> Result<BTreeSet<String>, SimilarityError> {
        if !self.posts.contains(post_id) {
            return Err(SimilarityError::NotFound(post_id.to_string()));
        }
        Ok(self
            .adjacency
            .get(post_id)
            .map(|n| n.intersection(scope).cloned().collect())
            .unwrap_or_default())
    }

    pub fn save(&self, dir: &Path) -> Result<(), SimilarityError> {
        std::fs::create_dir_all(dir).map_err(|source| CorpusError::Write { path: dir.to_path_buf(), source })?;
        Ok(write_json(&dir.join(PAIRS_FILE), self)?)
    }

    pub fn load(dir: &Path) -> Result<PairSet, SimilarityError> {
        let mut set: PairSet = read_json(&dir.join(PAIRS_FILE))?;
        set.rebuild_adjacency();
        Ok(set)
    }
}
