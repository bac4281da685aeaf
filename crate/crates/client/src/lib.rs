//! Typed client for the omhc HTTP API.
//!
//! A [`Client`] is bound to one server; most calls also take the session
//! id. LLM operations return a [`JobTicket`]; [`Client::wait_job`] polls it.

use std::time::Duration;

use omhc_core::api::*;
use omhc_core::labeling::SupportLabel;
use omhc_core::llm::{QuestionOrigin, SummaryDoc};
use omhc_core::notes::{Anchor, Target};
use omhc_core::session::SessionDocument;
use reqwest::{Method, RequestBuilder};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("server returned {status}: {error}")]
    Api { status: u16, error: ApiError },
    #[error("HTTP error: {0}")]
    Http(#[from] reqwest::Error),
    #[error("unexpected response ({status}): {body}")]
    Decode { status: u16, body: String },
    #[error("job {0} did not finish in time")]
    JobTimeout(String),
}

impl ClientError {
    pub fn code(&self) -> Option<ErrorCode> {
        match self {
            ClientError::Api { error, .. } => Some(error.code),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

#[derive(Serialize)]
struct S<'a> {
    session: &'a str,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Client {
        Client { base: base_url.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn req(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{}", self.base, path))
    }

    async fn send<T: DeserializeOwned>(&self, rb: RequestBuilder) -> Result<T> {
        let resp = rb.send().await?;
        let status = resp.status().as_u16();
        let bytes = resp.bytes().await?;
        if !(200..300).contains(&status) {
            return Err(match serde_json::from_slice::<ApiError>(&bytes) {
                Ok(error) => ClientError::Api { status, error },
                Err(_) => ClientError::Decode { status, body: String::from_utf8_lossy(&bytes).into_owned() },
            });
        }
        serde_json::from_slice(&bytes)
            .map_err(|_| ClientError::Decode { status, body: String::from_utf8_lossy(&bytes).into_owned() })
    }

    /// Raw JSON GET, for schema checks and debugging.
    pub async fn get_json(&self, path_and_query: &str) -> Result<serde_json::Value> {
        self.send(self.req(Method::GET, path_and_query)).await
    }

    pub async fn health(&self) -> Result<Health> {
        self.send(self.req(Method::GET, "/api/health")).await
    }

    pub async fn create_session(&self) -> Result<SessionCreated> {
        self.send(self.req(Method::POST, "/api/session")).await
    }

    pub async fn export_session(&self, session: &str) -> Result<SessionDocument> {
        self.send(self.req(Method::GET, "/api/session/export").query(&S { session })).await
    }

    pub async fn import_session(&self, doc: &SessionDocument) -> Result<SessionCreated> {
        self.send(self.req(Method::POST, "/api/session/import").json(doc)).await
    }

    pub async fn search(&self, session: &str, q: &str) -> Result<SearchResponse> {
        self.send(self.req(Method::GET, "/api/search").query(&[("q", q), ("session", session)])).await
    }

    pub async fn zoom(&self, session: &str, path: &[String], view_version: Option<u64>) -> Result<ViewResponse> {
        let body = ZoomRequest { path: path.to_vec(), view_version };
        self.send(self.req(Method::POST, "/api/zoom").query(&S { session }).json(&body)).await
    }

    pub async fn filter(&self, session: &str, selections: &[SupportLabel]) -> Result<ViewResponse> {
        let body = FilterRequest { selections: selections.to_vec() };
        self.send(self.req(Method::POST, "/api/filter").query(&S { session }).json(&body)).await
    }

    pub async fn post(&self, session: &str, post_id: &str) -> Result<PostDetail> {
        self.send(self.req(Method::GET, &format!("/api/post/{post_id}")).query(&S { session })).await
    }

    pub async fn add_highlight(&self, session: &str, anchor: Anchor, color: &str) -> Result<HighlightResponse> {
        let body = HighlightRequest { anchor, color: color.to_string() };
        self.send(self.req(Method::POST, "/api/highlight").query(&S { session }).json(&body)).await
    }

    pub async fn recolor(&self, session: &str, id: &str, color: &str) -> Result<HighlightResponse> {
        let body = RecolorRequest { color: color.to_string() };
        let path = format!("/api/highlight/{id}/recolor");
        self.send(self.req(Method::POST, &path).query(&S { session }).json(&body)).await
    }

    pub async fn clear_highlight(&self, session: &str, id: &str) -> Result<HighlightResponse> {
        self.send(self.req(Method::DELETE, &format!("/api/highlight/{id}")).query(&S { session })).await
    }

    pub async fn edit_entry(&self, session: &str, id: &str, text: &str) -> Result<HighlightResponse> {
        let body = EditTextRequest { text: text.to_string() };
        let path = format!("/api/highlight/{id}/text");
        self.send(self.req(Method::PUT, &path).query(&S { session }).json(&body)).await
    }

    pub async fn navigate(&self, session: &str, id: &str) -> Result<NavigateResponse> {
        self.send(self.req(Method::GET, &format!("/api/highlight/{id}/navigate")).query(&S { session })).await
    }

    pub async fn folders(&self, session: &str) -> Result<FoldersResponse> {
        self.send(self.req(Method::GET, "/api/folders").query(&S { session })).await
    }

    pub async fn folder(&self, session: &str, color: &str) -> Result<FolderResponse> {
        self.send(self.req(Method::GET, &format!("/api/folder/{color}")).query(&S { session })).await
    }

    pub async fn summarize(&self, session: &str, color: &str) -> Result<JobTicket> {
        self.send(self.req(Method::POST, &format!("/api/folder/{color}/summarize")).query(&S { session })).await
    }

    pub async fn edit_summary(&self, session: &str, color: &str, summary: SummaryDoc) -> Result<SummaryResult> {
        let path = format!("/api/folder/{color}/summary");
        self.send(self.req(Method::PUT, &path).query(&S { session }).json(&SummaryEdit { summary })).await
    }

    pub async fn mindmap(&self, session: &str, color: &str) -> Result<MindMapResponse> {
        self.send(self.req(Method::GET, &format!("/api/mindmap/{color}")).query(&S { session })).await
    }

    pub async fn add_mind_node(&self, session: &str, color: &str, path: &[String], label: &str) -> Result<MindMapResponse> {
        let body = MindNodeRequest { path: path.to_vec(), label: label.to_string() };
        let url = format!("/api/mindmap/{color}/node");
        self.send(self.req(Method::POST, &url).query(&S { session }).json(&body)).await
    }

    pub async fn create_board(&self, session: &str, selected_text: &str, target: Option<Target>) -> Result<BoardResponse> {
        let body = BoardRequest { selected_text: selected_text.to_string(), target };
        self.send(self.req(Method::POST, "/api/board").query(&S { session }).json(&body)).await
    }

    pub async fn board(&self, session: &str, board: &str) -> Result<BoardResponse> {
        self.send(self.req(Method::GET, &format!("/api/board/{board}")).query(&S { session })).await
    }

    /// Adds `question` under `parent` (or as a new thread) and asks it.
    pub async fn ask(&self, session: &str, board: &str, question: &str, parent: Option<&str>) -> Result<BoardResponse> {
        let body = AskRequest {
            question: Some(question.to_string()),
            parent: parent.map(str::to_string),
            node: None,
            origin: QuestionOrigin::User,
        };
        self.ask_with(session, board, &body).await
    }

    pub async fn ask_with(&self, session: &str, board: &str, body: &AskRequest) -> Result<BoardResponse> {
        let path = format!("/api/board/{board}/ask");
        self.send(self.req(Method::POST, &path).query(&S { session }).json(body)).await
    }

    pub async fn branch(&self, session: &str, board: &str, question: &str, parent: Option<&str>) -> Result<BoardResponse> {
        let body = BranchRequest {
            question: question.to_string(),
            parent: parent.map(str::to_string),
            origin: QuestionOrigin::User,
        };
        let path = format!("/api/board/{board}/branch");
        self.send(self.req(Method::POST, &path).query(&S { session }).json(&body)).await
    }

    pub async fn edit_answer(&self, session: &str, board: &str, node: &str, text: &str) -> Result<BoardResponse> {
        let body = AnswerEdit { node: node.to_string(), text: text.to_string() };
        let path = format!("/api/board/{board}/answer");
        self.send(self.req(Method::PUT, &path).query(&S { session }).json(&body)).await
    }

    pub async fn recommend(&self, session: &str, board: &str, node: Option<&str>) -> Result<BoardResponse> {
        let body = RecommendRequest { node: node.map(str::to_string) };
        let path = format!("/api/board/{board}/recommend");
        self.send(self.req(Method::POST, &path).query(&S { session }).json(&body)).await
    }

    pub async fn collapse(&self, session: &str, board: &str, collapsed: bool) -> Result<BoardResponse> {
        let path = format!("/api/board/{board}/collapse");
        self.send(self.req(Method::POST, &path).query(&S { session }).json(&CollapseRequest { collapsed })).await
    }

    pub async fn job(&self, session: &str, job_id: &str) -> Result<JobStatus> {
        self.send(self.req(Method::GET, &format!("/api/job/{job_id}")).query(&S { session })).await
    }

    /// Polls a job until it settles or `timeout` passes.
    pub async fn wait_job(&self, session: &str, job_id: &str, timeout: Duration) -> Result<JobStatus> {
        let deadline = tokio::time::Instant::now() + timeout;
        let mut delay = Duration::from_millis(5);
        loop {
            let status = self.job(session, job_id).await?;
            if status.state != JobState::Pending {
                return Ok(status);
            }
            if tokio::time::Instant::now() >= deadline {
                return Err(ClientError::JobTimeout(job_id.to_string()));
            }
            tokio::time::sleep(delay).await;
            delay = (delay * 2).min(Duration::from_millis(250));
        }
    }
}
