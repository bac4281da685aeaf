//! Per-query topic clustering with LDA fitted by collapsed Gibbs sampling.
//!
//! The serving path fits one model per search over the top hits and assigns
//! every hit to the argmax topic of its inferred mixture. Document mixtures
//! for assignment are inferred with the topic-word distributions held fixed,
//! by fixed-point iteration of the per-token topic responsibilities, so
//! assignment itself consumes no randomness.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::text::{is_stopword, tokenize};

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_ITERATIONS: usize = 500;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_KEYWORDS: usize = 5;
const FOLD_IN_ITERATIONS: usize = 50;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TopicError {
    #[error("only {found} non-empty documents for k = {k}; lower k")]
    TooFewDocuments { found: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroTopics,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    /// Symmetric document-topic prior; `None` means `50 / k`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig { k: DEFAULT_K, alpha: None, beta: DEFAULT_BETA, iterations: DEFAULT_ITERATIONS, seed: 42 }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub vocab: Vec<String>,
    /// k × V word counts from the final sampler state.
    pub topic_word_counts: Vec<Vec<u32>>,
    pub topic_totals: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicAssignment {
    pub post_id: String,
    pub topic_id: usize,
    pub proportion: f64,
    /// Set when the post had no in-vocabulary tokens.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub topic_id: usize,
    pub keywords: Vec<String>,
}

impl TopicModel {
    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn word_index(&self) -> HashMap<&str, usize> {
        self.vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect()
    }

    /// Smoothed topic-word probability.
    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        let v = self.vocab.len() as f64;
        (self.topic_word_counts[topic][word] as f64 + self.beta)
            / (self.topic_totals[topic] as f64 + v * self.beta)
    }

    pub fn topic_word_distribution(&self, topic: usize) -> Vec<f64> {
        (0..self.vocab.len()).map(|w| self.phi(topic, w)).collect()
    }

    /// Words of one topic ordered by descending probability, ties by term.
    fn ranked_words(&self, topic: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vocab.len()).collect();
        idx.sort_by(|&a, &b| {
            self.topic_word_counts[topic][b]
                .cmp(&self.topic_word_counts[topic][a])
                .then_with(|| self.vocab[a].cmp(&self.vocab[b]))
        });
        idx
    }

    /// Inferred topic mixture for a token list, or `None` if no token is in
    /// the vocabulary.
    pub fn infer(&self, tokens: &[String]) -> Option<Vec<f64>> {
        let index = self.word_index();
        let ids: Vec<usize> = tokens.iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
        if ids.is_empty() {
            return None;
        }
        let k = self.k;
        let phis: Vec<Vec<f64>> = ids.iter().map(|&w| (0..k).map(|t| self.phi(t, w)).collect()).collect();
        let mut theta = vec![1.0 / k as f64; k];
        let n = ids.len() as f64;
        for _ in 0..FOLD_IN_ITERATIONS {
            let mut expected = vec![0.0; k];
            for phi_w in &phis {
                let norm: f64 = (0..k).map(|t| theta[t] * phi_w[t]).sum();
                for t in 0..k {
                    expected[t] += theta[t] * phi_w[t] / norm;
                }
            }
            for t in 0..k {
                theta[t] = (expected[t] + self.alpha) / (n + k as f64 * self.alpha);
            }
        }
        Some(theta)
    }
}

/// Fits LDA over `(post_id, text)` documents.
pub fn fit_lda(docs: &[(String, String)], config: &LdaConfig) -> Result<TopicModel, TopicError> {
    let tokenized: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t)).collect();
    fit_tokenized(&tokenized, config)
}

pub fn fit_tokenized(docs: &[Vec<String>], config: &LdaConfig) -> Result<TopicModel, TopicError> {
    let k = config.k;
    if k == 0 {
        return Err(TopicError::ZeroTopics);
    }
    let non_empty = docs.iter().filter(|d| !d.is_empty()).count();
    if non_empty < k {
        return Err(TopicError::TooFewDocuments { found: non_empty, k });
    }
    let vocab: Vec<String> = docs.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let words: Vec<Vec<usize>> = docs
        .iter()
        .filter(|d| !d.is_empty())
        .map(|d| d.iter().map(|w| index[w.as_str()]).collect())
        .collect();

    let v = vocab.len();
    let alpha = config.alpha();
    let beta = config.beta;
    let v_beta = v as f64 * beta;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut doc_topic = vec![vec![0u32; k]; words.len()];
    let mut topic_word = vec![vec![0u32; v]; k];
    let mut topic_totals = vec![0u64; k];
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(words.len());
    for (d, doc) in words.iter().enumerate() {
        let mut zd = Vec::with_capacity(doc.len());
        for &w in doc {
            let t = rng.random_range(0..k);
            doc_topic[d][t] += 1;
            topic_word[t][w] += 1;
            topic_totals[t] += 1;
            zd.push(t);
        }
        z.push(zd);
    }

    let mut weights = vec![0.0f64; k];
    for _ in 0..config.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                doc_topic[d][old] -= 1;
                topic_word[old][w] -= 1;
                topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let p = (doc_topic[d][t] as f64 + alpha) * (topic_word[t][w] as f64 + beta)
                        / (topic_totals[t] as f64 + v_beta);
                    total += p;
                    weights[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                z[d][i] = new;
                doc_topic[d][new] += 1;
                topic_word[new][w] += 1;
                topic_totals[new] += 1;
            }
        }
    }

    Ok(TopicModel {
        k,
        alpha,
        beta,
        seed: config.seed,
        iterations: config.iterations,
        vocab,
        topic_word_counts: topic_word,
        topic_totals,
    })
}

/// Assigns every document to its argmax topic. Documents with no
/// in-vocabulary tokens get topic 0 with proportion `1/k` and are flagged.
pub fn assign_topics(model: &TopicModel, docs: &[(String, String)]) -> Vec<TopicAssignment> {
    docs.iter()
        .map(|(id, text)| match model.infer(&tokenize(text)) {
            None => TopicAssignment {
                post_id: id.clone(),
                topic_id: 0,
                proportion: 1.0 / model.k as f64,
                empty: true,
            },
            Some(theta) => {
                let (topic_id, proportion) = theta
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (t, p)| if p > best.1 { (t, p) } else { best });
                TopicAssignment { post_id: id.clone(), topic_id, proportion, empty: false }
            }
        })
        .collect()
}

/// The `m` most probable non-stopword terms of each topic.
pub fn topic_keywords(model: &TopicModel, m: usize) -> Vec<KeywordSet> {
    (0..model.k)
        .map(|t| KeywordSet {
            topic_id: t,
            keywords: model
                .ranked_words(t)
                .into_iter()
                .map(|w| &model.vocab[w])
                .filter(|w| !is_stopword(w))
                .take(m)
                .cloned()
                .collect(),
        })
        .collect()
}

/// Mean UMass coherence over topics, using each topic's `top_n` words and
/// document co-occurrence counts from `docs`.
pub fn umass_coherence(model: &TopicModel, docs: &[Vec<String>], top_n: usize) -> f64 {
    let doc_sets: Vec<BTreeSet<&str>> = docs.iter().map(|d| d.iter().map(String::as_str).collect()).collect();
    let df = |w: &str| doc_sets.iter().filter(|s| s.contains(w)).count() as f64;
    let co = |a: &str, b: &str| doc_sets.iter().filter(|s| s.contains(a) && s.contains(b)).count() as f64;
    let mut sum = 0.0;
    for t in 0..model.k {
        let top: Vec<&str> = model.ranked_words(t).into_iter().take(top_n).map(|w| model.vocab[w].as_str()).collect();
        let mut c = 0.0;
        for m in 1..top.len() {
            for l in 0..m {
                let d_l = df(top[l]);
                if d_l > 0.0 {
                    c += ((co(top[m], top[l]) + 1.0) / d_l).ln();
                }
            }
        }
        sum += c;
    }
    sum / model.k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherencePoint {
    pub k: usize,
    pub coherence: f64,
}

/// Fits one model per `k` and reports UMass coherence for each. Values of
/// `k` larger than the number of non-empty documents are skipped.
pub fn sweep_k(docs: &[(String, String)], ks: impl IntoIterator<Item = usize>, base: &LdaConfig) -> Vec<CoherencePoint> {
    let tokenized: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t)).collect();
    ks.into_iter()
        .filter_map(|k| {
            let cfg = LdaConfig { k, ..*base };
            let model = fit_tokenized(&tokenized, &cfg).ok()?;
            Some(CoherencePoint { k, coherence: umass_coherence(&model, &tokenized, 10) })
        })
        .collect()
}
