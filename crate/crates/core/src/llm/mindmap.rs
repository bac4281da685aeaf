//! Mind maps derived from summaries.
//!
//! The machine-derived part is the summary title as root and one
//! first-level node per section subtitle. Nodes the user added survive
//! regeneration: user children of a subtitle that still exists stay under
//! it; everything else user-made is re-attached to the root, in the order
//! it appeared in the previous map.

use serde::{Deserialize, Serialize};

use super::SummaryDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeOrigin {
    Machine,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MindNode {
    pub label: String,
    pub origin: NodeOrigin,
    pub children: Vec<MindNode>,
}

impl MindNode {
    fn machine(label: impl Into<String>) -> MindNode {
        MindNode { label: label.into(), origin: NodeOrigin::Machine, children: Vec::new() }
    }

    fn user(label: impl Into<String>) -> MindNode {
        MindNode { label: label.into(), origin: NodeOrigin::User, children: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MindMap {
    pub root: MindNode,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MindMapError {
    #[error("no node at path {0:?}")]
    NoSuchNode(Vec<String>),
    #[error("empty label")]
    EmptyLabel,
}

impl MindMap {
    /// Machine-derived first-level labels, in order.
    pub fn subtitles(&self) -> Vec<&str> {
        self.root
            .children
            .iter()
            .filter(|c| c.origin == NodeOrigin::Machine)
            .map(|c| c.label.as_str())
            .collect()
    }

    /// Adds a user node under the node reached by following `path` labels
    /// from the root (empty path = root).
    pub fn add_user_node(&mut self, path: &[String], label: &str) -> Result<(), MindMapError> {
        if label.trim().is_empty() {
            return Err(MindMapError::EmptyLabel);
        }
        let mut node = &mut self.root;
        for step in path {
            node = node
                .children
                .iter_mut()
                .find(|c| &c.label == step)
                .ok_or_else(|| MindMapError::NoSuchNode(path.to_vec()))?;
        }
        node.children.push(MindNode::user(label.trim()));
        Ok(())
    }
}

fn user_subtrees(node: &MindNode, out: &mut Vec<MindNode>) {
    for c in &node.children {
        if c.origin == NodeOrigin::User {
            out.push(c.clone());
        } else {
            user_subtrees(c, out);
        }
    }
}

pub fn derive_mindmap(summary: &SummaryDoc, previous: Option<&MindMap>) -> MindMap {
    let mut root = MindNode::machine(summary.title.clone());
    root.children = summary.sections.iter().map(|s| MindNode::machine(s.subtitle.clone())).collect();

    if let Some(prev) = previous {
        let mut orphans = Vec::new();
        for old in &prev.root.children {
            match old.origin {
                NodeOrigin::User => orphans.push(old.clone()),
                NodeOrigin::Machine => {
                    let mut kept = Vec::new();
                    user_subtrees(old, &mut kept);
                    match root.children.iter_mut().find(|n| n.label == old.label) {
                        Some(n) => n.children.extend(kept),
                        None => orphans.extend(kept),
                    }
                }
            }
        }
        root.children.extend(orphans);
    }
    MindMap { root }
}
