//! The topic → post → comment hierarchy behind the zoomable circle view,
//! with support filtering, histograms, packing and zoom.

mod pack;
mod view;

pub use pack::{pack, pack_siblings, smallest_enclosing_circle, Circle, LayoutCircle, MIN_WEIGHT};
pub use view::{view_payload, zoom, PostListItem, ViewNode, ViewPayload, ZoomView, VIEW_SCHEMA_VERSION};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::labeling::{Direction, LabelTable, SupportKind, SupportLabel, SupportLevel, SupportLevels};
use crate::search::{QueryStatus, SearchConfig, SearchIndex, SearchResult};
use crate::text::tokenize;
use crate::topics::{assign_topics, fit_tokenized, topic_keywords, KeywordSet, LdaConfig, TopicAssignment, TopicModel};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExplorerError {
    #[error("no topic assignment for post {0}")]
    MissingAssignment(String),
    #[error("post {0} is not in the store")]
    UnknownPost(String),
    #[error("view path {0:?} no longer resolves; refresh the view")]
    StalePath(Vec<String>),
    #[error("filter selects {direction:?} labels, which are not shown at the {level:?} level")]
    FilterDirection { direction: Direction, level: ViewLevel },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeLevel {
    Root,
    Topic,
    Post,
    Comment,
}

/// The zoom stratum, named after the circles that fill the view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewLevel {
    Topic,
    Post,
    Comment,
}

impl ViewLevel {
    /// Histogram direction shown at this level.
    pub fn direction(self) -> Direction {
        match self {
            ViewLevel::Topic | ViewLevel::Post => Direction::Seeking,
            ViewLevel::Comment => Direction::Providing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleNode {
    pub level: NodeLevel,
    pub ref_id: String,
    pub weight: u32,
    pub children: Vec<CircleNode>,
    pub labels: Vec<SupportLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keywords: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl CircleNode {
    fn new(level: NodeLevel, ref_id: impl Into<String>) -> CircleNode {
        CircleNode {
            level,
            ref_id: ref_id.into(),
            weight: 0,
            children: Vec::new(),
            labels: Vec::new(),
            keywords: None,
            title: None,
            score: None,
        }
    }

    pub fn child(&self, ref_id: &str) -> Option<&CircleNode> {
        self.children.iter().find(|c| c.ref_id == ref_id)
    }

    pub fn level_of(&self, direction: Direction, kind: SupportKind) -> Option<SupportLevel> {
        self.labels
            .iter()
            .find(|l| l.direction == direction && l.kind == kind)
            .map(|l| l.level)
    }

    /// Depth-first pre-order walk.
    pub fn walk(&self) -> Vec<&CircleNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// Post nodes in this subtree, in display order.
    pub fn posts(&self) -> Vec<&CircleNode> {
        self.walk().into_iter().filter(|n| n.level == NodeLevel::Post).collect()
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(CircleNode::count).sum::<usize>()
    }

    fn refresh_weight(&mut self) {
        self.weight = match self.level {
            NodeLevel::Comment => 1,
            _ => self.children.len() as u32,
        };
    }
}

pub fn topic_ref(topic_id: usize) -> String {
    format!("topic-{topic_id}")
}

/// Builds the root → topic → post → comment tree for one search.
///
/// Topics appear in topic-id order and are omitted when empty; posts keep
/// their search rank order; comments keep stored thread order.
pub fn build_hierarchy(
    results: &[SearchResult],
    assignments: &[TopicAssignment],
    keywords: &[KeywordSet],
    labels: &LabelTable,
    corpus: &Corpus,
) -> Result<CircleNode, ExplorerError> {
    let topic_of: HashMap<&str, usize> =
        assignments.iter().map(|a| (a.post_id.as_str(), a.topic_id)).collect();
    let keywords_of: HashMap<usize, &Vec<String>> = keywords.iter().map(|k| (k.topic_id, &k.keywords)).collect();

    let mut topics: Vec<(usize, Vec<CircleNode>)> = Vec::new();
    for r in results {
        let &topic = topic_of
            .get(r.post_id.as_str())
            .ok_or_else(|| ExplorerError::MissingAssignment(r.post_id.clone()))?;
        let post = corpus.post(&r.post_id).ok_or_else(|| ExplorerError::UnknownPost(r.post_id.clone()))?;
        let mut node = CircleNode::new(NodeLevel::Post, &post.id);
        node.title = Some(post.title.clone());
        node.score = Some(r.score);
        node.labels = labels.post(&post.id).labels(Direction::Seeking).to_vec();
        for c in corpus.comments_of(post) {
            let mut cn = CircleNode::new(NodeLevel::Comment, &c.id);
            cn.labels = labels.comment(&c.id).labels(Direction::Providing).to_vec();
            cn.refresh_weight();
            node.children.push(cn);
        }
        node.refresh_weight();
        match topics.iter_mut().find(|(t, _)| *t == topic) {
            Some((_, posts)) => posts.push(node),
            None => topics.push((topic, vec![node])),
        }
    }
    topics.sort_by_key(|(t, _)| *t);

    let mut root = CircleNode::new(NodeLevel::Root, "root");
    for (t, posts) in topics {
        let mut tn = CircleNode::new(NodeLevel::Topic, topic_ref(t));
        tn.keywords = Some(keywords_of.get(&t).map(|k| (*k).clone()).unwrap_or_default());
        tn.children = posts;
        tn.refresh_weight();
        root.children.push(tn);
    }
    root.refresh_weight();
    Ok(root)
}

/// Everything one query produces: ranked hits, the per-query topic model
/// and the unfiltered hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub query: String,
    pub status: QueryStatus,
    pub results: Vec<SearchResult>,
    pub model: Option<TopicModel>,
    pub assignments: Vec<TopicAssignment>,
    pub keywords: Vec<KeywordSet>,
    pub root: CircleNode,
}

/// Search, fit LDA over the hits and build the hierarchy.
///
/// When fewer hits have text than `lda.k`, k drops to that count; with no
/// usable text at all every hit lands in topic 0 without keywords.
pub fn explore(
    query: &str,
    index: &SearchIndex,
    corpus: &Corpus,
    labels: &LabelTable,
    search: &SearchConfig,
    lda: &LdaConfig,
    n_keywords: usize,
) -> Result<Exploration, ExplorerError> {
    let outcome = index.search(query, search);
    let mut docs = Vec::with_capacity(outcome.results.len());
    for r in &outcome.results {
        let post = corpus.post(&r.post_id).ok_or_else(|| ExplorerError::UnknownPost(r.post_id.clone()))?;
        docs.push((post.id.clone(), post.full_text()));
    }
    let tokenized: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t)).collect();
    let usable = tokenized.iter().filter(|d| !d.is_empty()).count();
    let k = lda.k.min(usable);
    let (model, assignments, keywords) = if k == 0 {
        let assignments = docs
            .iter()
            .map(|(id, _)| TopicAssignment { post_id: id.clone(), topic_id: 0, proportion: 1.0, empty: true })
            .collect();
        (None, assignments, vec![KeywordSet { topic_id: 0, keywords: Vec::new() }])
    } else {
        let model = fit_tokenized(&tokenized, &LdaConfig { k, ..*lda }).expect("k bounded by usable documents");
        let assignments = assign_topics(&model, &docs);
        let keywords = topic_keywords(&model, n_keywords);
        (Some(model), assignments, keywords)
    };
    let root = build_hierarchy(&outcome.results, &assignments, &keywords, labels, corpus)?;
    Ok(Exploration {
        query: query.to_string(),
        status: outcome.status,
        results: outcome.results,
        model,
        assignments,
        keywords,
        root,
    })
}

/// Active histogram bars.
///
/// Within one (direction, kind) the selected levels are a union; across kinds
/// the constraints intersect. A kind with no selected level is
/// unconstrained.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportFilter {
    pub selections: BTreeSet<SupportLabel>,
}

impl SupportFilter {
    pub fn new<I: IntoIterator<Item = SupportLabel>>(selections: I) -> SupportFilter {
        SupportFilter { selections: selections.into_iter().collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.selections.is_empty()
    }

    fn selected(&self, direction: Direction, kind: SupportKind) -> impl Iterator<Item = SupportLevel> + '_ {
        self.selections
            .iter()
            .filter(move |s| s.direction == direction && s.kind == kind)
            .map(|s| s.level)
    }

    /// Whether an item with these levels survives the selections of
    /// `direction`.
    pub fn admits(&self, direction: Direction, levels: &SupportLevels) -> bool {
        SupportKind::ALL.into_iter().all(|kind| {
            let mut sel = self.selected(direction, kind).peekable();
            sel.peek().is_none() || sel.any(|l| l == levels.get(kind))
        })
    }

    fn admits_node(&self, node: &CircleNode) -> bool {
        let direction = match node.level {
            NodeLevel::Post => Direction::Seeking,
            NodeLevel::Comment => Direction::Providing,
            _ => return true,
        };
        let levels = SupportLevels {
            emotional: node.level_of(direction, SupportKind::Emotional).unwrap_or(SupportLevel::Low),
            informational: node.level_of(direction, SupportKind::Informational).unwrap_or(SupportLevel::Low),
        };
        self.admits(direction, &levels)
    }

    pub fn directions(&self) -> BTreeSet<Direction> {
        self.selections.iter().map(|s| s.direction).collect()
    }

    /// Rejects selections whose direction is not the one shown at `level`.
    pub fn check_level(&self, level: ViewLevel) -> Result<(), ExplorerError> {
        match self.directions().into_iter().find(|d| *d != level.direction()) {
            Some(direction) => Err(ExplorerError::FilterDirection { direction, level }),
            None => Ok(()),
        }
    }
}

/// Prunes posts by the seeking selections and comments by the providing
/// selections; topics left without posts are dropped and weights follow
/// the surviving children.
pub fn apply_filter(node: &CircleNode, filter: &SupportFilter) -> CircleNode {
    let mut out = node.clone();
    if !filter.is_empty() {
        prune(&mut out, filter);
    }
    out
}

fn prune(node: &mut CircleNode, filter: &SupportFilter) {
    for c in &mut node.children {
        prune(c, filter);
    }
    node.children.retain(|c| {
        filter.admits_node(c) && !(c.level == NodeLevel::Topic && c.children.is_empty())
    });
    node.refresh_weight();
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportHistogram {
    pub direction: Direction,
    /// Counts indexed high, medium, low.
    pub emotional: [u32; 3],
    pub informational: [u32; 3],
    pub total: u32,
}

impl SupportHistogram {
    pub fn bars(&self, kind: SupportKind) -> [u32; 3] {
        match kind {
            SupportKind::Emotional => self.emotional,
            SupportKind::Informational => self.informational,
        }
    }
}

/// Level counts over the visible posts (seeking) or comments (providing)
/// in `node`'s subtree.
pub fn histogram(node: &CircleNode, direction: Direction) -> SupportHistogram {
    let item_level = match direction {
        Direction::Seeking => NodeLevel::Post,
        Direction::Providing => NodeLevel::Comment,
    };
    let mut h = SupportHistogram { direction, emotional: [0; 3], informational: [0; 3], total: 0 };
    for n in node.walk().into_iter().filter(|n| n.level == item_level) {
        h.total += 1;
        let e = n.level_of(direction, SupportKind::Emotional).unwrap_or(SupportLevel::Low);
        let i = n.level_of(direction, SupportKind::Informational).unwrap_or(SupportLevel::Low);
        h.emotional[e.index()] += 1;
        h.informational[i.index()] += 1;
    }
    h
}
