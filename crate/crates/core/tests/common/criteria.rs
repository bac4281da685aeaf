//! Acceptance criteria as plain functions: independent oracles plus seeded
//! case generators. Shared by the core integration tests and the workspace
//! acceptance target, which includes this file by path.
//!
//! Every `criterion_*` returns a one-line detail on success.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use omhc_core::corpus::Corpus;
use omhc_core::explorer::{apply_filter, pack, CircleNode, LayoutCircle, NodeLevel, SupportFilter};
use omhc_core::labeling::{Direction, SupportKind, SupportLabel, SupportLevel, SupportLevels};
use omhc_core::llm::prompts::{ANSWER, QUESTIONS, SUMMARY};
use omhc_core::notes::{target_body, Anchor, Notebook, Palette, Target, TargetKind, DEFAULT_PALETTE};
use omhc_core::search::{QueryStatus, SearchConfig, SearchIndex};
use omhc_core::similarity::{similar_pairs, DocVector, PairSet, TfidfVectorizer};
use omhc_core::topics::{assign_topics, fit_lda, LdaConfig};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");
pub const DESK_DUMP: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/desk/dump.jsonl");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- ingest

const TOMBSTONES: [&str; 2] = ["[deleted]", "[removed]"];

pub fn criterion_ingest() -> Check {
    let text = std::fs::read_to_string(format!("{FIXTURES}/six_records.jsonl")).map_err(|e| e.to_string())?;
    let (corpus, stats) = Corpus::ingest_str(&text);
    // Hand count: p1 and p2 survive; c1 and c2 survive; c3 has a tombstone
    // body; the last record has a tombstone id.
    ensure!(stats.n_raw == 6, "n_raw {}", stats.n_raw);
    ensure!(corpus.len_posts() == 2 && stats.n_posts == 2, "posts {}", corpus.len_posts());
    ensure!(corpus.len_comments() == 2 && stats.n_comments == 2, "comments {}", corpus.len_comments());
    ensure!(stats.n_dropped_tombstone_body == 1, "tombstone bodies {}", stats.n_dropped_tombstone_body);
    ensure!(stats.n_dropped_tombstone_id == 1, "tombstone ids {}", stats.n_dropped_tombstone_id);
    let ids: BTreeSet<&str> = corpus.posts().map(|p| p.id.as_str()).chain(corpus.comments().map(|c| c.id.as_str())).collect();
    ensure!(ids == BTreeSet::from(["p1", "p2", "c1", "c2"]), "stored ids {ids:?}");
    no_tombstones(&corpus)?;

    let mut r = rng(11);
    let mut stored = 0;
    for _ in 0..200 {
        let dump = random_dump(&mut r, 40);
        let (c, _) = Corpus::ingest_str(&dump);
        no_tombstones(&c)?;
        stored += c.len_posts() + c.len_comments();
    }
    let desk = std::fs::read_to_string(DESK_DUMP).map_err(|e| e.to_string())?;
    let (c, s) = Corpus::ingest_str(&desk);
    no_tombstones(&c)?;
    Ok(format!(
        "6-record fixture 2 posts/2 comments; 200 random dumps ({stored} items) and desk dump ({} posts) free of tombstones",
        s.n_posts
    ))
}

pub fn no_tombstones(c: &Corpus) -> Result<(), String> {
    for p in c.posts() {
        ensure!(!TOMBSTONES.contains(&p.body.trim()), "post {} body is a tombstone", p.id);
        ensure!(!TOMBSTONES.contains(&p.title.trim()) || !p.body.is_empty(), "post {} is a tombstone", p.id);
    }
    for cm in c.comments() {
        ensure!(!TOMBSTONES.contains(&cm.body.trim()), "comment {} body is a tombstone", cm.id);
    }
    Ok(())
}

/// A dump of posts and threaded comments with tombstones sprinkled into
/// ids, parents and bodies.
pub fn random_dump(r: &mut ChaCha8Rng, n: usize) -> String {
    let bodies = ["I feel anxious", "try tea", "[deleted]", "[removed]", " [deleted] ", "", "hang in there"];
    let mut ids: Vec<String> = Vec::new();
    let mut out = String::new();
    for i in 0..n {
        let id = if r.random_bool(0.08) { TOMBSTONES.choose(r).unwrap().to_string() } else { format!("x{i}") };
        let body = bodies.choose(r).unwrap();
        let line = if ids.is_empty() || r.random_bool(0.3) {
            serde_json::json!({"id": id, "title": "t", "selftext": body, "created_utc": i})
        } else {
            let parent = if r.random_bool(0.05) { "[deleted]".to_string() } else { ids.choose(r).unwrap().clone() };
            serde_json::json!({"id": id, "parent_id": format!("t1_{parent}"), "body": body, "created_utc": i})
        };
        ids.push(id);
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- search

pub const SEARCH_VOCAB: [&str; 8] = ["anxiety", "sleep", "exam", "panic", "tea", "music", "breathe", "therapy"];

/// Brute-force TF-IDF: every document containing a query term is a hit,
/// scored by summing `(1 + ln tf) * ln(N / df)` over distinct query terms.
pub fn search_oracle(docs: &[(String, String)], query: &[&str]) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let tf: Vec<HashMap<&str, usize>> = docs
        .iter()
        .map(|(_, t)| {
            let mut m = HashMap::new();
            for w in t.split_whitespace() {
                *m.entry(w).or_insert(0) += 1;
            }
            m
        })
        .collect();
    let terms: BTreeSet<&str> = query.iter().copied().collect();
    let mut hits = Vec::new();
    for (i, (id, _)) in docs.iter().enumerate() {
        let mut score = 0.0;
        let mut hit = false;
        for t in &terms {
            if let Some(&f) = tf[i].get(t) {
                let df = tf.iter().filter(|m| m.contains_key(t)).count() as f64;
                score += (1.0 + (f as f64).ln()) * (n / df).ln();
                hit = true;
            }
        }
        if hit {
            hits.push((id.clone(), score));
        }
    }
    hits
}

pub fn check_search_case(docs: &[(String, String)], query: &[&str], n_top: usize) -> Result<(), String> {
    let index = SearchIndex::build_from_docs(docs.iter().cloned());
    let out = index.search(&query.join(" "), &SearchConfig { n_top });
    if query.is_empty() {
        ensure!(out.status == QueryStatus::EmptyQuery && out.results.is_empty(), "empty query returned results");
        return Ok(());
    }
    let oracle: BTreeMap<String, f64> = search_oracle(docs, query).into_iter().collect();
    ensure!(out.results.len() <= n_top, "{} results exceed n_top {n_top}", out.results.len());
    ensure!(out.results.len() == oracle.len().min(n_top), "got {} results, oracle {}", out.results.len(), oracle.len());
    for (i, res) in out.results.iter().enumerate() {
        ensure!(res.rank == i + 1, "rank {} at position {i}", res.rank);
        let Some(&want) = oracle.get(&res.post_id) else { return Err(format!("{} is not a hit", res.post_id)) };
        ensure!((res.score - want).abs() <= 1e-9, "{} score {} vs oracle {}", res.post_id, res.score, want);
        if i > 0 {
            let prev = &out.results[i - 1];
            let tie = (prev.score - res.score).abs() <= 1e-9;
            ensure!(prev.score > res.score || (tie && prev.post_id < res.post_id), "order broken at {i}");
        }
    }
    // Truncation keeps the best: nothing left out outranks the last kept.
    if let Some(last) = out.results.last() {
        let kept: BTreeSet<&str> = out.results.iter().map(|r| r.post_id.as_str()).collect();
        for (id, s) in &oracle {
            if !kept.contains(id.as_str()) {
                ensure!(*s <= last.score + 1e-9, "{id} ({s}) dropped above {}", last.score);
            }
        }
    }
    Ok(())
}

pub fn random_docs(r: &mut ChaCha8Rng, n: usize, max_len: usize) -> Vec<(String, String)> {
    (0..n)
        .map(|i| {
            let len = r.random_range(0..=max_len);
            let words: Vec<&str> = (0..len).map(|_| *SEARCH_VOCAB.choose(r).unwrap()).collect();
            (format!("d{i:02}"), words.join(" "))
        })
        .collect()
}

pub fn criterion_search() -> Check {
    let mut r = rng(3);
    let mut cases = 0;
    for _ in 0..2000 {
        let n = r.random_range(1..=10);
        let docs = random_docs(&mut r, n, 12);
        let q_len = r.random_range(0..=4);
        let query: Vec<&str> = (0..q_len).map(|_| *SEARCH_VOCAB.choose(&mut r).unwrap()).collect();
        check_search_case(&docs, &query, 150).map_err(|e| format!("{e}; docs {docs:?} query {query:?}"))?;
        cases += 1;
    }
    // Result count cap on a corpus larger than n_top.
    let big: Vec<(String, String)> = (0..400).map(|i| (format!("b{i:03}"), format!("anxiety {}", SEARCH_VOCAB[i % 8]))).collect();
    check_search_case(&big, &["anxiety", "tea"], 150)?;
    let n = SearchIndex::build_from_docs(big).search("anxiety", &SearchConfig::default()).results.len();
    ensure!(n == 150, "400 hits returned {n}");
    Ok(format!("{cases} random corpora of at most 10 docs match the oracle within 1e-9; 400-hit query capped at 150"))
}

// ---------------------------------------------------------------- topics

pub const VOCAB_A: [&str; 10] =
    ["piano", "guitar", "violin", "melody", "rhythm", "chorus", "concert", "drummer", "lyrics", "tempo"];
pub const VOCAB_B: [&str; 10] =
    ["carrot", "potato", "garlic", "onion", "pepper", "lettuce", "spinach", "tomato", "celery", "radish"];

pub fn two_vocab_corpus(seed: u64) -> Vec<(String, String, usize)> {
    let mut r = rng(seed);
    (0..40)
        .map(|i| {
            let class = i % 2;
            let vocab = if class == 0 { &VOCAB_A } else { &VOCAB_B };
            let words: Vec<&str> = (0..30).map(|_| *vocab.choose(&mut r).unwrap()).collect();
            (format!("doc{i:02}"), words.join(" "), class)
        })
        .collect()
}

pub fn purity(assigned: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut counts = vec![[0usize; 2]; k];
    for (&a, &t) in assigned.iter().zip(truth) {
        counts[a][t] += 1;
    }
    counts.iter().map(|c| c[0].max(c[1])).sum::<usize>() as f64 / assigned.len() as f64
}

pub fn criterion_lda() -> Check {
    let corpus = two_vocab_corpus(5);
    let docs: Vec<(String, String)> = corpus.iter().map(|(i, t, _)| (i.clone(), t.clone())).collect();
    let truth: Vec<usize> = corpus.iter().map(|c| c.2).collect();
    let config = LdaConfig { k: 2, seed: 42, ..LdaConfig::default() };
    let run = || -> Result<(String, Vec<usize>), String> {
        let model = fit_lda(&docs, &config).map_err(|e| e.to_string())?;
        let assign = assign_topics(&model, &docs);
        let bytes = serde_json::to_string(&(&model, &assign)).map_err(|e| e.to_string())?;
        Ok((bytes, assign.iter().map(|a| a.topic_id).collect()))
    };
    let (first, topics) = run()?;
    let (second, _) = run()?;
    let p = purity(&topics, &truth, 2);
    ensure!(p >= 0.9, "purity {p:.3} < 0.9");
    ensure!(first == second, "same-seed reruns differ");
    Ok(format!("purity {p:.3} at k=2, seed 42, {} iterations; reruns byte-identical", config.iterations))
}

// ---------------------------------------------------------------- similarity

pub fn oracle_cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// All unordered pairs at or above `theta`, by exhaustive comparison.
pub fn pair_oracle(vectors: &[DocVector], theta: f64) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for (i, a) in vectors.iter().enumerate() {
        for b in &vectors[i + 1..] {
            if oracle_cos(&a.vector, &b.vector) >= theta - 1e-12 {
                let (x, y) = if a.post_id < b.post_id { (&a.post_id, &b.post_id) } else { (&b.post_id, &a.post_id) };
                out.insert((x.clone(), y.clone()));
            }
        }
    }
    out
}

pub fn pair_ids(pairs: &PairSet) -> BTreeSet<(String, String)> {
    pairs.pairs.iter().map(|p| (p.post_a.clone(), p.post_b.clone())).collect()
}

pub fn check_similarity_case(vectors: &[DocVector]) -> Result<(), String> {
    let sets: Vec<BTreeSet<(String, String)>> = [0.4, 0.6, 0.8]
        .iter()
        .map(|&t| PairSet::compute(vectors, t, "test").map(|p| pair_ids(&p)).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    for (set, theta) in sets.iter().zip([0.4, 0.6, 0.8]) {
        let want = pair_oracle(vectors, theta);
        ensure!(*set == want, "theta {theta}: {} pairs vs oracle {}", set.len(), want.len());
    }
    ensure!(sets[2].is_subset(&sets[1]) && sets[1].is_subset(&sets[0]), "threshold monotonicity broken");
    let loose = PairSet::compute(vectors, 0.4, "test").map_err(|e| e.to_string())?;
    let tightened = loose.at_threshold(0.6).ok_or("at_threshold refused a stricter threshold")?;
    ensure!(pair_ids(&tightened) == sets[1], "tightened 0.4 -> 0.6 differs from direct 0.6");
    Ok(())
}

pub fn random_vectors(r: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<DocVector> {
    (0..n)
        .map(|i| {
            let v: Vec<f64> = (0..dim)
                .map(|_| if r.random_bool(0.4) { 0.0 } else { r.random_range(0.0..1.0) })
                .collect();
            DocVector::new(format!("v{i:02}"), v)
        })
        .collect()
}

pub fn criterion_similarity() -> Check {
    let mut r = rng(8);
    let mut total = 0;
    for _ in 0..200 {
        let n = r.random_range(0..=50);
        let dim = r.random_range(1..=6);
        let vectors = random_vectors(&mut r, n, dim);
        check_similarity_case(&vectors)?;
        total += pair_oracle(&vectors, 0.6).len();
    }
    for _ in 0..100 {
        let n = r.random_range(0..=50);
        let docs = random_docs(&mut r, n, 6);
        let vz = TfidfVectorizer::fit(docs.iter().map(|(_, t)| t.as_str()));
        let vectors: Vec<DocVector> = docs.iter().map(|(id, t)| vz.embed(id, t)).collect();
        check_similarity_case(&vectors)?;
    }
    ensure!(similar_pairs(&[], 0.0).is_err(), "theta 0 accepted");
    Ok(format!("300 corpora of at most 50 docs equal the O(n^2) oracle at 0.4/0.6/0.8 ({total} pairs at 0.6); nested across thresholds"))
}

// ---------------------------------------------------------------- packing

fn node(level: NodeLevel, id: String, children: Vec<CircleNode>) -> CircleNode {
    let weight = if level == NodeLevel::Comment { 1 } else { children.len() as u32 };
    CircleNode { level, ref_id: id, weight, children, labels: Vec::new(), keywords: None, title: None, score: None }
}

/// Root, topics, posts, comments; at most `max_nodes` nodes in total.
pub fn random_tree(r: &mut ChaCha8Rng, max_nodes: usize) -> CircleNode {
    let mut budget = max_nodes - 1;
    let mut topics = Vec::new();
    let n_topics = r.random_range(1..=12);
    for t in 0..n_topics {
        if budget == 0 {
            break;
        }
        budget -= 1;
        let mut posts = Vec::new();
        for p in 0..r.random_range(0..=25) {
            if budget == 0 {
                break;
            }
            budget -= 1;
            let want = r.random_range(0..=12);
            let n_c = want.min(budget);
            budget -= n_c;
            let comments = (0..n_c).map(|c| node(NodeLevel::Comment, format!("c{t}-{p}-{c}"), vec![])).collect();
            posts.push(node(NodeLevel::Post, format!("p{t}-{p}"), comments));
        }
        topics.push(node(NodeLevel::Topic, format!("topic-{t}"), posts));
    }
    node(NodeLevel::Root, "root".into(), topics)
}

fn dist(a: &LayoutCircle, b: &LayoutCircle) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Pairwise geometric checks over the whole layout.
pub fn check_layout(tree: &CircleNode, layout: &LayoutCircle) -> Result<(), String> {
    ensure!(tree.ref_id == layout.ref_id && tree.children.len() == layout.children.len(), "shape mismatch at {}", tree.ref_id);
    ensure!(layout.r > 0.0 && layout.r.is_finite(), "{} radius {}", layout.ref_id, layout.r);
    let by_id: HashMap<&str, &CircleNode> = tree.children.iter().map(|c| (c.ref_id.as_str(), c)).collect();
    for (i, a) in layout.children.iter().enumerate() {
        let d = dist(a, layout);
        ensure!(d + a.r <= layout.r + 1e-6, "{} leaks out of {} by {}", a.ref_id, layout.ref_id, d + a.r - layout.r);
        for b in &layout.children[i + 1..] {
            let overlap = a.r + b.r - dist(a, b);
            ensure!(overlap <= 1e-6, "{} and {} overlap by {overlap}", a.ref_id, b.ref_id);
            let (wa, wb) = (by_id[a.ref_id.as_str()].weight, by_id[b.ref_id.as_str()].weight);
            if wa > wb {
                ensure!(a.r > b.r, "{} (w {wa}) not larger than {} (w {wb})", a.ref_id, b.ref_id);
            } else if wb > wa {
                ensure!(b.r > a.r, "{} (w {wb}) not larger than {} (w {wa})", b.ref_id, a.ref_id);
            }
        }
        check_layout(by_id[a.ref_id.as_str()], a)?;
    }
    Ok(())
}

pub fn criterion_packing() -> Check {
    let mut r = rng(21);
    let mut nodes = 0;
    let mut largest = 0;
    for _ in 0..1000 {
        let max = r.random_range(2..=500);
        let tree = random_tree(&mut r, max);
        let n = tree.count();
        ensure!(n <= 500, "generator made {n} nodes");
        let layout = pack(&tree);
        ensure!(layout.x - layout.r >= -1e-9 && layout.x + layout.r <= 1.0 + 1e-9, "root outside the unit square");
        check_layout(&tree, &layout)?;
        nodes += n;
        largest = largest.max(n);
    }
    Ok(format!("1000 trees ({nodes} nodes, largest {largest}): no overlap or containment violation beyond 1e-6, radius increases with weight"))
}

// ---------------------------------------------------------------- filter

pub fn all_labels() -> Vec<SupportLabel> {
    let mut out = Vec::new();
    for direction in [Direction::Seeking, Direction::Providing] {
        for kind in SupportKind::ALL {
            for level in SupportLevel::ALL {
                out.push(SupportLabel { direction, kind, level });
            }
        }
    }
    out
}

fn random_levels(r: &mut ChaCha8Rng) -> SupportLevels {
    SupportLevels { emotional: *SupportLevel::ALL.choose(r).unwrap(), informational: *SupportLevel::ALL.choose(r).unwrap() }
}

/// A labeled tree whose topics all hold at least one post.
pub fn random_labeled_tree(r: &mut ChaCha8Rng) -> CircleNode {
    let mut topics = Vec::new();
    for t in 0..r.random_range(1..=5) {
        let mut posts = Vec::new();
        for p in 0..r.random_range(1..=6) {
            let comments = (0..r.random_range(0..=5))
                .map(|c| {
                    let mut n = node(NodeLevel::Comment, format!("c{t}-{p}-{c}"), vec![]);
                    n.labels = random_levels(r).labels(Direction::Providing).to_vec();
                    n
                })
                .collect();
            let mut post = node(NodeLevel::Post, format!("p{t}-{p}"), comments);
            post.labels = random_levels(r).labels(Direction::Seeking).to_vec();
            posts.push(post);
        }
        topics.push(node(NodeLevel::Topic, format!("topic-{t}"), posts));
    }
    node(NodeLevel::Root, "root".into(), topics)
}

fn admitted(selections: &BTreeSet<SupportLabel>, n: &CircleNode, direction: Direction) -> bool {
    SupportKind::ALL.iter().all(|&kind| {
        let chosen: Vec<SupportLevel> =
            selections.iter().filter(|s| s.direction == direction && s.kind == kind).map(|s| s.level).collect();
        let own = n.labels.iter().find(|l| l.direction == direction && l.kind == kind).map(|l| l.level);
        chosen.is_empty() || own.is_some_and(|l| chosen.contains(&l))
    })
}

/// Post and comment ids that survive `selections`, computed from the
/// definition: union within a kind, intersection across kinds.
pub fn filter_oracle(tree: &CircleNode, selections: &BTreeSet<SupportLabel>) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut posts = BTreeSet::new();
    let mut comments = BTreeSet::new();
    for t in &tree.children {
        for p in &t.children {
            if admitted(selections, p, Direction::Seeking) {
                posts.insert(p.ref_id.clone());
                for c in &p.children {
                    if admitted(selections, c, Direction::Providing) {
                        comments.insert(c.ref_id.clone());
                    }
                }
            }
        }
    }
    (posts, comments)
}

fn ids_at(tree: &CircleNode, level: NodeLevel) -> BTreeSet<String> {
    tree.walk().into_iter().filter(|n| n.level == level).map(|n| n.ref_id.clone()).collect()
}

pub fn check_filter_case(tree: &CircleNode, selections: &BTreeSet<SupportLabel>) -> Result<(), String> {
    let f = SupportFilter { selections: selections.clone() };
    let once = apply_filter(tree, &f);
    ensure!(apply_filter(&once, &f) == once, "not idempotent for {selections:?}");
    let (posts, comments) = filter_oracle(tree, selections);
    ensure!(ids_at(&once, NodeLevel::Post) == posts, "posts differ from oracle for {selections:?}");
    ensure!(ids_at(&once, NodeLevel::Comment) == comments, "comments differ from oracle for {selections:?}");
    for n in once.walk() {
        ensure!(n.level != NodeLevel::Topic || !n.children.is_empty(), "empty topic {} kept", n.ref_id);
        let w = if n.level == NodeLevel::Comment { 1 } else { n.children.len() as u32 };
        ensure!(n.weight == w, "{} weight {} after filtering, expected {w}", n.ref_id, n.weight);
    }
    Ok(())
}

pub fn criterion_filter() -> Check {
    let mut r = rng(13);
    let labels = all_labels();
    for _ in 0..500 {
        let tree = random_labeled_tree(&mut r);
        ensure!(apply_filter(&tree, &SupportFilter::default()) == tree, "empty selection changed the tree");
        for direction in [Direction::Seeking, Direction::Providing] {
            for kind in SupportKind::ALL {
                let full = SupportFilter::new(SupportLevel::ALL.map(|level| SupportLabel { direction, kind, level }));
                ensure!(apply_filter(&tree, &full) == tree, "full union of {direction:?}/{kind:?} is not identity");
            }
        }
        let sel: BTreeSet<SupportLabel> = labels.iter().copied().filter(|_| r.random_bool(0.25)).collect();
        check_filter_case(&tree, &sel)?;
        // Both "high" bars at the comment level keep only doubly-high comments.
        let both = SupportFilter::new(SupportKind::ALL.map(|kind| SupportLabel {
            direction: Direction::Providing,
            kind,
            level: SupportLevel::High,
        }));
        let kept = ids_at(&apply_filter(&tree, &both), NodeLevel::Comment);
        let doubly: BTreeSet<String> = tree
            .walk()
            .into_iter()
            .filter(|n| n.level == NodeLevel::Comment && n.labels.iter().all(|l| l.level == SupportLevel::High))
            .map(|n| n.ref_id.clone())
            .collect();
        ensure!(kept == doubly, "double-high kept {kept:?}, expected {doubly:?}");
    }
    Ok("500 labeled trees: idempotent, empty and full selections are identity, matches union/intersection oracle, double-high keeps only doubly-high comments".into())
}

// ---------------------------------------------------------------- highlights

pub fn desk_corpus() -> Corpus {
    Corpus::ingest_file(std::path::Path::new(DESK_DUMP)).expect("desk fixture").0
}

pub fn targets(corpus: &Corpus) -> Vec<Target> {
    corpus
        .posts()
        .filter(|p| !p.body.is_empty())
        .map(|p| Target { kind: TargetKind::Post, id: p.id.clone() })
        .chain(corpus.comments().map(|c| Target { kind: TargetKind::Comment, id: c.id.clone() }))
        .collect()
}

pub fn oracle_slice(body: &str, start: usize, end: usize) -> String {
    body.chars().skip(start).take(end - start).collect()
}

pub fn random_anchor(r: &mut ChaCha8Rng, target: &Target, body: &str) -> Anchor {
    let len = body.chars().count();
    let start = r.random_range(0..len);
    let end = r.random_range(start + 1..=len.min(start + 60));
    Anchor { target: target.clone(), char_start: start, char_end: end, exact_text: oracle_slice(body, start, end) }
}

/// Closed-interval union: spans that overlap or touch become one.
pub fn interval_union(mut spans: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    spans.sort();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (s, e) in spans {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

fn notebook() -> Notebook {
    Notebook::new(Palette::new(DEFAULT_PALETTE).expect("default palette"))
}

pub fn check_partition(nb: &Notebook, corpus: &Corpus) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    for folder in nb.folders() {
        let mut last_seq = None;
        for id in &folder.entries {
            let h = nb.get(id).map_err(|e| e.to_string())?;
            ensure!(h.color == folder.color, "{id} ({}) filed under {}", h.color, folder.color);
            ensure!(seen.insert(id.clone()), "{id} is in two folders");
            ensure!(last_seq < Some(h.seq), "folder {} out of order", folder.color);
            last_seq = Some(h.seq);
        }
    }
    let all: BTreeSet<String> = nb.highlights().map(|h| h.id.clone()).collect();
    ensure!(all == seen, "{} highlights, {} filed", all.len(), seen.len());
    let hs: Vec<_> = nb.highlights().collect();
    for (i, a) in hs.iter().enumerate() {
        let body = target_body(corpus, &a.anchor.target).ok_or("unknown target")?;
        ensure!(oracle_slice(body, a.anchor.char_start, a.anchor.char_end) == a.anchor.exact_text, "{} drifted", a.id);
        for b in &hs[i + 1..] {
            let touching = a.anchor.target == b.anchor.target
                && a.anchor.char_start <= b.anchor.char_end
                && b.anchor.char_start <= a.anchor.char_end;
            ensure!(!(a.color == b.color && touching), "{} and {} should have merged", a.id, b.id);
        }
    }
    Ok(())
}

pub fn criterion_highlights() -> Check {
    let corpus = desk_corpus();
    let targets = targets(&corpus);
    let mut r = rng(17);

    // Round-trip.
    for i in 0..1000 {
        let t = targets.choose(&mut r).unwrap();
        let body = target_body(&corpus, t).unwrap();
        let a = random_anchor(&mut r, t, body);
        let mut nb = notebook();
        let color = DEFAULT_PALETTE[i % 3];
        let h = nb.add_highlight(a.clone(), color, body).map_err(|e| format!("{e} for {a:?}"))?;
        let loc = nb.navigate(&h.id).map_err(|e| e.to_string())?;
        ensure!(loc.target == a.target, "navigate lost the target");
        let resolved = oracle_slice(target_body(&corpus, &loc.target).unwrap(), loc.char_start, loc.char_end);
        ensure!(resolved == a.exact_text && h.anchor == a, "anchor {a:?} resolved to {resolved:?}");
    }

    // Same-color merge against the interval union, per color.
    let long: Vec<&Target> = targets.iter().filter(|t| target_body(&corpus, t).unwrap().chars().count() >= 40).collect();
    for _ in 0..300 {
        let t = *long.choose(&mut r).unwrap();
        let body = target_body(&corpus, t).unwrap();
        let mut nb = notebook();
        let mut spans: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
        for _ in 0..r.random_range(1..=8) {
            let a = random_anchor(&mut r, t, body);
            let color = *["yellow", "green"].choose(&mut r).unwrap();
            spans.entry(color).or_default().push((a.char_start, a.char_end));
            nb.add_highlight(a, color, body).map_err(|e| e.to_string())?;
        }
        for (color, s) in spans {
            let want = interval_union(s);
            let mut got: Vec<(usize, usize)> = nb
                .highlights()
                .filter(|h| h.color == color)
                .map(|h| (h.anchor.char_start, h.anchor.char_end))
                .collect();
            got.sort();
            ensure!(got == want, "{color}: merged {got:?}, union {want:?}");
        }
        check_partition(&nb, &corpus)?;
    }

    // Folder partition under random operation sequences.
    let mut ops = 0;
    for _ in 0..100 {
        let mut nb = notebook();
        let pool: Vec<&Target> = (0..3).map(|_| *long.choose(&mut r).unwrap()).collect();
        for _ in 0..40 {
            let ids: Vec<String> = nb.highlights().map(|h| h.id.clone()).collect();
            let color = *DEFAULT_PALETTE.choose(&mut r).unwrap();
            match (r.random_range(0..10), ids.choose(&mut r)) {
                (0..=4, _) | (_, None) => {
                    let t = *pool.choose(&mut r).unwrap();
                    let body = target_body(&corpus, t).unwrap();
                    nb.add_highlight(random_anchor(&mut r, t, body), color, body).map_err(|e| e.to_string())?;
                }
                (5..=6, Some(id)) => {
                    nb.recolor(id, color).map_err(|e| e.to_string())?;
                }
                (7..=8, Some(id)) => {
                    nb.clear(id).map_err(|e| e.to_string())?;
                }
                (_, Some(id)) => {
                    nb.edit_entry(id, "edited").map_err(|e| e.to_string())?;
                }
            }
            ops += 1;
            check_partition(&nb, &corpus)?;
        }
    }
    Ok(format!("1000 anchors round-trip over {} targets; 300 merge cases equal the interval union; partition holds over {ops} random ops", targets.len()))
}

// ---------------------------------------------------------------- prompts

/// Typeset template to plain text: bold placeholders become `{name}`, TeX
/// quotes become straight double quotes.
pub fn detex(s: &str) -> String {
    let open = "\\textbf{\\{";
    let mut out = s.trim_end_matches('\n').to_string();
    while let Some(start) = out.find(open) {
        let rest = &out[start + open.len()..];
        let end = rest.find("\\}}").expect("unterminated placeholder");
        let name = rest[..end].to_string();
        out.replace_range(start..start + open.len() + end + 3, &format!("{{{name}}}"));
    }
    out.replace("``", "\"").replace("''", "\"")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{FIXTURES}/{name}")).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn check_templates() -> Result<(), String> {
    ensure!(SUMMARY.text == detex(&fixture("summary_prompt.tex")), "summary template differs");
    ensure!(QUESTIONS.text == detex(&fixture("questions_prompt.tex")), "questions template differs");
    ensure!(ANSWER.text == detex(&fixture("answer_prompt.tex")), "answer template differs");
    Ok(())
}

pub fn criterion_prompts() -> Check {
    use omhc_core::llm::{answer, derive_mindmap, parse_summary, recommend_questions, summarize, StubProvider, SummaryDoc};

    check_templates()?;
    let rendered = SUMMARY.render(&[("suggestions", "Drink some tea.")]);
    ensure!(rendered == detex(&fixture("summary_prompt.tex")).replace("{suggestions}", "Drink some tea."), "render differs");

    let parsed = parse_summary(&fixture("summary_response.tex")).ok_or("example summary did not parse")?;
    ensure!(
        parsed.title.as_deref() == Some("Strategies for Relaxation and Better Sleep"),
        "title {:?}",
        parsed.title
    );
    ensure!(parsed.sections.len() == 4, "{} subtitles", parsed.sections.len());
    let map = derive_mindmap(&SummaryDoc::from_parsed(parsed, "yellow"), None);
    ensure!(map.root.children.len() == 4, "{} first-level nodes", map.root.children.len());

    let rt = tokio::runtime::Builder::new_current_thread().build().map_err(|e| e.to_string())?;
    let entries = vec!["Drink some Chamomille tea.".to_string(), "Adding ambient music helps too.".to_string()];
    let runs: Vec<String> = (0..3)
        .map(|_| {
            rt.block_on(async {
                let s = summarize(&StubProvider, &entries, "yellow", None).await.map_err(|e| e.error.to_string())?;
                let m = derive_mindmap(&s, None);
                let q = recommend_questions(&StubProvider, &entries[0], None).await.map_err(|e| e.to_string())?;
                let a = answer(&StubProvider, &q.questions[0], &entries[0]).await.map_err(|e| e.to_string())?;
                serde_json::to_string(&(s, m, q, a)).map_err(|e| e.to_string())
            })
        })
        .collect::<Result<_, String>>()?;
    ensure!(runs.windows(2).all(|w| w[0] == w[1]), "stub pipeline differs between runs");
    Ok("templates byte-match modulo placeholders; example parses to 4 subtitles and 4 map nodes; stub pipeline identical over 3 runs".into())
}
