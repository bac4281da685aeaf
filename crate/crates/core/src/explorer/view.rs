//! Zoom resolution and the serialized view payload.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::{histogram, pack, CircleNode, ExplorerError, LayoutCircle, NodeLevel, SupportFilter, SupportHistogram, ViewLevel};
use crate::labeling::SupportLabel;
use crate::similarity::PairSet;

pub const VIEW_SCHEMA_VERSION: u32 = 1;

/// The subtree addressed by a zoom path, with its histogram and post list.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoomView {
    pub level: ViewLevel,
    pub path: Vec<String>,
    pub node: CircleNode,
    pub histogram: SupportHistogram,
    pub post_ids: Vec<String>,
}

/// Resolves `path` (topic ref, then post id) against a filtered tree.
///
/// `[]` is the topic level, `[topic]` the post level inside one topic and
/// `[topic, post]` the comment level of one post. A path that does not
/// resolve, typically because a filter removed part of it, is stale.
pub fn zoom(root: &CircleNode, path: &[String]) -> Result<ZoomView, ExplorerError> {
    let stale = || ExplorerError::StalePath(path.to_vec());
    if path.len() > 2 {
        return Err(stale());
    }
    let mut node = root;
    for (depth, id) in path.iter().enumerate() {
        let next = node.child(id).ok_or_else(stale)?;
        let expected = if depth == 0 { NodeLevel::Topic } else { NodeLevel::Post };
        if next.level != expected {
            return Err(stale());
        }
        node = next;
    }
    let level = match path.len() {
        0 => ViewLevel::Topic,
        1 => ViewLevel::Post,
        _ => ViewLevel::Comment,
    };
    Ok(ZoomView {
        level,
        path: path.to_vec(),
        histogram: histogram(node, level.direction()),
        post_ids: node.posts().iter().map(|p| p.ref_id.clone()).collect(),
        node: node.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewNode {
    pub ref_id: String,
    pub level: NodeLevel,
    pub x: f64,
    pub y: f64,
    pub r: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keywords: Option<Vec<String>>,
    pub labels: Vec<SupportLabel>,
    pub similar_ids: Vec<String>,
    pub children: Vec<ViewNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostListItem {
    pub id: String,
    pub title: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewPayload {
    pub schema_version: u32,
    pub view_version: u64,
    pub level: ViewLevel,
    pub path: Vec<String>,
    pub filter: Vec<SupportLabel>,
    pub root: ViewNode,
    pub histogram: SupportHistogram,
    pub post_list: Vec<PostListItem>,
}

/// Lays out the zoomed subtree and attaches titles, keywords and the
/// similar posts of each post circle within its own cluster of
/// `filtered_root`.
pub fn view_payload(
    filtered_root: &CircleNode,
    zoomed: &ZoomView,
    filter: &SupportFilter,
    pairs: &PairSet,
    view_version: u64,
) -> ViewPayload {
    let mut cluster_of: HashMap<&str, BTreeSet<String>> = HashMap::new();
    for topic in &filtered_root.children {
        let scope: BTreeSet<String> = topic.children.iter().map(|p| p.ref_id.clone()).collect();
        for p in &topic.children {
            cluster_of.insert(p.ref_id.as_str(), scope.clone());
        }
    }
    let layout = pack(&zoomed.node);
    let root = to_view_node(&zoomed.node, &layout, &cluster_of, pairs);
    let post_list = zoomed
        .node
        .posts()
        .into_iter()
        .map(|p| PostListItem { id: p.ref_id.clone(), title: p.title.clone().unwrap_or_default(), score: p.score })
        .collect();
    ViewPayload {
        schema_version: VIEW_SCHEMA_VERSION,
        view_version,
        level: zoomed.level,
        path: zoomed.path.clone(),
        filter: filter.selections.iter().copied().collect(),
        root,
        histogram: zoomed.histogram,
        post_list,
    }
}

fn to_view_node(
    node: &CircleNode,
    layout: &LayoutCircle,
    cluster_of: &HashMap<&str, BTreeSet<String>>,
    pairs: &PairSet,
) -> ViewNode {
    let by_id: HashMap<&str, &CircleNode> = node.children.iter().map(|c| (c.ref_id.as_str(), c)).collect();
    let similar_ids = if node.level == NodeLevel::Post {
        cluster_of
            .get(node.ref_id.as_str())
            .and_then(|scope| pairs.neighbors(&node.ref_id, scope).ok())
            .map(|s| s.into_iter().collect())
            .unwrap_or_default()
    } else {
        Vec::new()
    };
    ViewNode {
        ref_id: node.ref_id.clone(),
        level: node.level,
        x: layout.x,
        y: layout.y,
        r: layout.r,
        title: node.title.clone(),
        keywords: node.keywords.clone(),
        labels: node.labels.clone(),
        similar_ids,
        children: layout
            .children
            .iter()
            .map(|lc| to_view_node(by_id[lc.ref_id.as_str()], lc, cluster_of, pairs))
            .collect(),
    }
}
