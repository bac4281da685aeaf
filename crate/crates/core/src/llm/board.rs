//! Question boards: a branching tree of question/answer nodes rooted at a
//! selected span.

use serde::{Deserialize, Serialize};

use crate::notes::Target;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BoardError {
    #[error("selected text is empty")]
    EmptySelection,
    #[error("question is empty")]
    EmptyQuestion,
    #[error("question node not found: {0}")]
    NodeNotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionOrigin {
    Recommended,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionNode {
    pub id: String,
    pub question: String,
    #[serde(default)]
    pub answer: Option<String>,
    #[serde(default)]
    pub answer_edited: bool,
    pub origin: QuestionOrigin,
    pub children: Vec<QuestionNode>,
    /// Follow-up questions suggested from this node's answer.
    #[serde(default)]
    pub recommendations: Vec<String>,
    #[serde(default)]
    pub recommendations_stale: bool,
    #[serde(default)]
    pub degraded: bool,
    /// Last provider failure; the node can be asked again.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QuestionNode {
    fn walk<'a>(&'a self, out: &mut Vec<&'a QuestionNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionBoard {
    pub id: String,
    pub selected_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    pub threads: Vec<QuestionNode>,
    pub collapsed: bool,
    /// The first three questions recommended for the selection.
    pub recommendations: Vec<String>,
    #[serde(default)]
    pub degraded: bool,
    next_node: u64,
}

fn find_mut<'a>(nodes: &'a mut [QuestionNode], id: &str) -> Option<&'a mut QuestionNode> {
    for n in nodes {
        if n.id == id {
            return Some(n);
        }
        if let Some(found) = find_mut(&mut n.children, id) {
            return Some(found);
        }
    }
    None
}

impl QuestionBoard {
    pub fn new(id: impl Into<String>, selected_text: &str, target: Option<Target>) -> Result<QuestionBoard, BoardError> {
        if selected_text.trim().is_empty() {
            return Err(BoardError::EmptySelection);
        }
        Ok(QuestionBoard {
            id: id.into(),
            selected_text: selected_text.to_string(),
            target,
            threads: Vec::new(),
            collapsed: false,
            recommendations: Vec::new(),
            degraded: false,
            next_node: 0,
        })
    }

    pub fn nodes(&self) -> Vec<&QuestionNode> {
        let mut out = Vec::new();
        for t in &self.threads {
            t.walk(&mut out);
        }
        out
    }

    pub fn node(&self, id: &str) -> Result<&QuestionNode, BoardError> {
        self.nodes()
            .into_iter()
            .find(|n| n.id == id)
            .ok_or_else(|| BoardError::NodeNotFound(id.to_string()))
    }

    pub fn node_mut(&mut self, id: &str) -> Result<&mut QuestionNode, BoardError> {
        find_mut(&mut self.threads, id).ok_or_else(|| BoardError::NodeNotFound(id.to_string()))
    }

    /// Adds a question under `parent`, or as a new parallel thread when
    /// `parent` is `None`.
    pub fn branch(&mut self, parent: Option<&str>, question: &str, origin: QuestionOrigin) -> Result<QuestionNode, BoardError> {
        if question.trim().is_empty() {
            return Err(BoardError::EmptyQuestion);
        }
        if let Some(p) = parent {
            self.node(p)?;
        }
        let node = QuestionNode {
            id: format!("q{}", self.next_node),
            question: question.trim().to_string(),
            answer: None,
            answer_edited: false,
            origin,
            children: Vec::new(),
            recommendations: Vec::new(),
            recommendations_stale: false,
            degraded: false,
            error: None,
        };
        self.next_node += 1;
        match parent {
            None => self.threads.push(node.clone()),
            Some(p) => self.node_mut(p)?.children.push(node.clone()),
        }
        Ok(node)
    }

    /// Stores a provider answer; follow-up recommendations become stale.
    pub fn set_answer(&mut self, id: &str, answer: &str) -> Result<(), BoardError> {
        let n = self.node_mut(id)?;
        n.answer = Some(answer.to_string());
        n.answer_edited = false;
        n.error = None;
        n.recommendations_stale = true;
        Ok(())
    }

    /// A user edit of an answer. The edited text becomes the context for
    /// the next recommendations.
    pub fn edit_answer(&mut self, id: &str, answer: &str) -> Result<(), BoardError> {
        let n = self.node_mut(id)?;
        n.answer = Some(answer.to_string());
        n.answer_edited = true;
        n.recommendations_stale = true;
        Ok(())
    }

    pub fn set_error(&mut self, id: &str, message: &str) -> Result<(), BoardError> {
        self.node_mut(id)?.error = Some(message.to_string());
        Ok(())
    }

    pub fn set_recommendations(&mut self, id: Option<&str>, questions: Vec<String>, degraded: bool) -> Result<(), BoardError> {
        match id {
            None => {
                self.recommendations = questions;
                self.degraded = degraded;
            }
            Some(id) => {
                let n = self.node_mut(id)?;
                n.recommendations = questions;
                n.degraded = degraded;
                n.recommendations_stale = false;
            }
        }
        Ok(())
    }

    pub fn set_collapsed(&mut self, collapsed: bool) {
        self.collapsed = collapsed;
    }
}
