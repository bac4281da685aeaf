//! Request and response bodies of the HTTP API, shared by the server and
//! the client. Every response body carries `schema_version`.

use serde::{Deserialize, Serialize};

use crate::corpus::{Comment, Post};
use crate::explorer::ViewPayload;
use crate::labeling::{SupportLabel, SupportLevels};
use crate::llm::{MindMap, QuestionBoard, QuestionOrigin, SummaryDoc};
use crate::notes::{Anchor, Folder, Highlight, Location, Target};
use crate::search::QueryStatus;

pub const API_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    UpstreamLlm,
    StaleView,
    Internal,
}

impl ErrorCode {
    pub fn http_status(self) -> u16 {
        match self {
            ErrorCode::BadRequest => 400,
            ErrorCode::NotFound => 404,
            ErrorCode::UpstreamLlm => 502,
            ErrorCode::StaleView => 409,
            ErrorCode::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{code:?}: {message}")]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default)]
    pub detail: serde_json::Value,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> ApiError {
        ApiError { code, message: message.into(), detail: serde_json::Value::Null }
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> ApiError {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(ErrorCode::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> ApiError {
        ApiError::new(ErrorCode::NotFound, message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub schema_version: u32,
    pub session_id: String,
    pub palette: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicInfo {
    pub ref_id: String,
    pub keywords: Vec<String>,
    pub n_posts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub schema_version: u32,
    pub query: String,
    pub status: QueryStatus,
    pub n_results: usize,
    pub topics: Vec<TopicInfo>,
    pub view: ViewPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoomRequest {
    pub path: Vec<String>,
    /// The view version the client last rendered; a mismatch is stale.
    #[serde(default)]
    pub view_version: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRequest {
    pub selections: Vec<SupportLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewResponse {
    pub schema_version: u32,
    pub view: ViewPayload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentDetail {
    pub comment: Comment,
    pub labels: SupportLevels,
    pub highlights: Vec<Highlight>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostDetail {
    pub schema_version: u32,
    pub post: Post,
    pub labels: SupportLevels,
    pub highlights: Vec<Highlight>,
    pub comments: Vec<CommentDetail>,
    pub similar_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightRequest {
    pub anchor: Anchor,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecolorRequest {
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditTextRequest {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightResponse {
    pub schema_version: u32,
    pub highlight: Highlight,
    pub folders: Vec<Folder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NavigateResponse {
    pub schema_version: u32,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolderEntry {
    pub highlight_id: String,
    pub text: String,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolderResponse {
    pub schema_version: u32,
    pub color: String,
    pub entries: Vec<FolderEntry>,
    #[serde(default)]
    pub summary: Option<SummaryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldersResponse {
    pub schema_version: u32,
    pub folders: Vec<Folder>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MindMapResponse {
    pub schema_version: u32,
    pub color: String,
    #[serde(default)]
    pub mindmap: Option<MindMap>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MindNodeRequest {
    /// Labels from the root's children down to the parent; empty = root.
    pub path: Vec<String>,
    pub label: String,
}

/// Result of a summarize job or a summary edit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResult {
    pub schema_version: u32,
    pub summary: SummaryDoc,
    pub mindmap: MindMap,
}

/// Result of a recommend job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResult {
    pub schema_version: u32,
    pub board: String,
    #[serde(default)]
    pub node: Option<String>,
    pub questions: Vec<String>,
    pub degraded: bool,
}

/// Result of an answer job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerResult {
    pub schema_version: u32,
    pub board: String,
    pub node: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEdit {
    pub summary: SummaryDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardRequest {
    pub selected_text: String,
    #[serde(default)]
    pub target: Option<Target>,
}

/// Either re-asks an existing `node` (e.g. after a provider error) or adds
/// `question` under `parent` and asks it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AskRequest {
    #[serde(default)]
    pub question: Option<String>,
    /// Parent node; `None` starts a parallel thread.
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default)]
    pub node: Option<String>,
    #[serde(default = "default_origin")]
    pub origin: QuestionOrigin,
}

fn default_origin() -> QuestionOrigin {
    QuestionOrigin::User
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRequest {
    pub question: String,
    #[serde(default)]
    pub parent: Option<String>,
    #[serde(default = "default_origin")]
    pub origin: QuestionOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerEdit {
    pub node: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendRequest {
    /// Node whose answer is the context; `None` recommends for the selection.
    #[serde(default)]
    pub node: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseRequest {
    pub collapsed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardResponse {
    pub schema_version: u32,
    pub board: QuestionBoard,
    #[serde(default)]
    pub job: Option<JobTicket>,
    /// The node created by this request, if any.
    #[serde(default)]
    pub node: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobTicket {
    pub job_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub schema_version: u32,
    pub job_id: String,
    pub state: JobState,
    #[serde(default)]
    pub result: Option<serde_json::Value>,
    #[serde(default)]
    pub error: Option<ApiError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub schema_version: u32,
    pub n_posts: usize,
    pub n_comments: usize,
    pub llm_provider: String,
}
