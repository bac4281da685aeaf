//! Chat-completion orchestration: folder summaries, recommended questions
//! and answers, plus the mind maps and question boards built from them.
//!
//! Any OpenAI-compatible `/chat/completions` endpoint can serve as the
//! provider. Setting `LLM_BASE_URL=stub:` selects [`StubProvider`], which
//! answers every prompt with fixed text so whole pipelines are reproducible
//! offline.

mod board;
mod mindmap;
mod parse;
pub mod prompts;

pub use board::{BoardError, QuestionBoard, QuestionNode, QuestionOrigin};
pub use mindmap::{derive_mindmap, MindMap, MindMapError, MindNode, NodeOrigin};
pub use parse::{parse_questions, parse_summary, strip_markup, ParsedSummary};

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

pub const ENV_BASE_URL: &str = "LLM_BASE_URL";
pub const ENV_API_KEY: &str = "LLM_API_KEY";
pub const ENV_MODEL: &str = "LLM_MODEL";
pub const STUB_URL: &str = "stub:";
pub const PROVIDER_TIMEOUT: Duration = Duration::from_secs(30);

/// Used to pad question lists when a response yields fewer than three.
pub const FALLBACK_QUESTIONS: [&str; 3] = [
    "What does this suggestion involve in practice?",
    "Why might this help someone dealing with anxiety?",
    "How can I start doing this safely?",
];

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum LlmError {
    #[error("provider {provider} request failed: {message}")]
    Request { provider: String, message: String },
    #[error("provider {provider} timed out")]
    Timeout { provider: String },
    #[error("could not parse the {what} response: {response:?}")]
    Unparseable { what: &'static str, response: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> ChatMessage {
        ChatMessage { role, content: content.into() }
    }
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    fn name(&self) -> &str;
    async fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError>;
}

pub const STUB_SUMMARY: &str = "Title: Practical Ways to Ease Anxiety\n\
Subtitle: Calming Routines\n\
Content: Build small calming habits such as quiet music, a warm drink or a regular bedtime.\n\
Subtitle: Reaching Out\n\
Content: Share how you feel with someone you trust or with a mental health professional.";

pub const STUB_QUESTIONS: &str = "Question1: What does this suggestion involve day to day?\n\
Question2: Why could this ease my anxiety?\n\
Question3: How do I get started with it?";

pub const STUB_ANSWER: &str = "Start small and practise it regularly, noticing how your body responds each time. If your symptoms continue or get worse, talk to a mental health professional.";

/// Offline provider with canned responses keyed on the prompt template.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubProvider;

#[async_trait]
impl ChatProvider for StubProvider {
    fn name(&self) -> &str {
        "stub"
    }

    async fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let first = messages.first().map(|m| m.content.as_str()).unwrap_or("");
        let summary_head = prompts::SUMMARY_TEMPLATE.split('{').next().unwrap_or_default();
        let questions_head = prompts::QUESTIONS_TEMPLATE.split('{').next().unwrap_or_default();
        Ok(if first.starts_with(summary_head) {
            STUB_SUMMARY
        } else if first.starts_with(questions_head) {
            STUB_QUESTIONS
        } else if first == prompts::ANSWER_TEMPLATE {
            STUB_ANSWER
        } else {
            "OK"
        }
        .to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f32,
    pub max_tokens: u32,
    pub timeout: Duration,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            base_url: STUB_URL.to_string(),
            api_key: None,
            model: "gpt-4o-mini".to_string(),
            temperature: 0.0,
            max_tokens: 800,
            timeout: PROVIDER_TIMEOUT,
        }
    }
}

impl LlmConfig {
    /// Reads `LLM_BASE_URL`, `LLM_API_KEY` and `LLM_MODEL`. An unset base
    /// URL selects the stub.
    pub fn from_env() -> LlmConfig {
        let mut cfg = LlmConfig::default();
        if let Ok(url) = std::env::var(ENV_BASE_URL) {
            if !url.trim().is_empty() {
                cfg.base_url = url.trim().to_string();
            }
        }
        cfg.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        if let Ok(model) = std::env::var(ENV_MODEL) {
            if !model.trim().is_empty() {
                cfg.model = model.trim().to_string();
            }
        }
        cfg
    }

    pub fn is_stub(&self) -> bool {
        self.base_url.starts_with(STUB_URL)
    }

    pub fn provider(&self) -> std::sync::Arc<dyn ChatProvider> {
        if self.is_stub() {
            std::sync::Arc::new(StubProvider)
        } else {
            std::sync::Arc::new(HttpChatProvider::new(self.clone()))
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f32,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: CompletionMessage,
}

#[derive(Deserialize)]
struct CompletionMessage {
    content: Option<String>,
}

/// OpenAI-compatible chat-completion client.
#[derive(Debug, Clone)]
pub struct HttpChatProvider {
    config: LlmConfig,
    client: reqwest::Client,
}

impl HttpChatProvider {
    pub fn new(config: LlmConfig) -> HttpChatProvider {
        let client = reqwest::Client::builder().timeout(config.timeout).build().expect("http client");
        HttpChatProvider { config, client }
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }
}

#[async_trait]
impl ChatProvider for HttpChatProvider {
    fn name(&self) -> &str {
        &self.config.base_url
    }

    async fn complete(&self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        let provider = self.name().to_string();
        let body = CompletionRequest {
            model: &self.config.model,
            messages,
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
        };
        let mut req = self.client.post(self.endpoint()).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().await.map_err(|e| {
            if e.is_timeout() {
                LlmError::Timeout { provider: provider.clone() }
            } else {
                LlmError::Request { provider: provider.clone(), message: e.to_string() }
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            let text = resp.text().await.unwrap_or_default();
            return Err(LlmError::Request { provider, message: format!("HTTP {status}: {text}") });
        }
        let parsed: CompletionResponse = resp
            .json()
            .await
            .map_err(|e| LlmError::Request { provider: provider.clone(), message: e.to_string() })?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or(LlmError::Request { provider, message: "response has no content".into() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub subtitle: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub title: String,
    pub sections: Vec<Section>,
    pub source_color: String,
    pub stale: bool,
}

impl SummaryDoc {
    pub fn empty(color: &str) -> SummaryDoc {
        SummaryDoc { title: String::new(), sections: Vec::new(), source_color: color.to_string(), stale: false }
    }

    pub fn from_parsed(parsed: ParsedSummary, color: &str) -> SummaryDoc {
        SummaryDoc {
            title: parsed.title.unwrap_or_else(|| "Summary".to_string()),
            sections: parsed
                .sections
                .into_iter()
                .map(|(subtitle, content)| Section { subtitle, content })
                .collect(),
            source_color: color.to_string(),
            stale: false,
        }
    }
}

/// A failed summary: the previous one, if any, flagged stale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryFailure {
    pub kept: Option<SummaryDoc>,
    pub error: LlmError,
}

/// Summarizes folder entries (display texts, in folder order).
///
/// An empty folder makes no call. An unparseable response is retried once
/// with a restatement request.
pub async fn summarize(
    provider: &dyn ChatProvider,
    entries: &[String],
    color: &str,
    previous: Option<&SummaryDoc>,
) -> Result<SummaryDoc, SummaryFailure> {
    let suggestions = prompts::join_suggestions(entries.iter().map(String::as_str));
    if suggestions.is_empty() {
        return Ok(SummaryDoc::empty(color));
    }
    let fail = |error: LlmError| SummaryFailure {
        kept: previous.map(|p| SummaryDoc { stale: true, ..p.clone() }),
        error,
    };
    let mut last = String::new();
    for restate in [false, true] {
        let response = provider.complete(&prompts::summary_messages(&suggestions, restate)).await.map_err(fail)?;
        if let Some(parsed) = parse_summary(&response) {
            return Ok(SummaryDoc::from_parsed(parsed, color));
        }
        last = response;
    }
    Err(fail(LlmError::Unparseable { what: "summary", response: last }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub questions: Vec<String>,
    /// Set when fallback questions had to fill in.
    pub degraded: bool,
}

/// Three questions about `selected_text`, building on `context` (a prior
/// answer, possibly user-edited) when given.
pub async fn recommend_questions(
    provider: &dyn ChatProvider,
    selected_text: &str,
    context: Option<&str>,
) -> Result<Recommendation, LlmError> {
    if selected_text.trim().is_empty() {
        return Err(LlmError::Invalid("selected text is empty".into()));
    }
    let response = provider.complete(&prompts::questions_messages(selected_text, context)).await?;
    let mut questions = parse_questions(&response);
    let degraded = questions.len() < 3;
    for fallback in FALLBACK_QUESTIONS {
        if questions.len() >= 3 {
            break;
        }
        if !questions.iter().any(|q| q == fallback) {
            questions.push(fallback.to_string());
        }
    }
    Ok(Recommendation { questions, degraded })
}

pub async fn answer(provider: &dyn ChatProvider, question: &str, selected_text: &str) -> Result<String, LlmError> {
    if question.trim().is_empty() {
        return Err(LlmError::Invalid("question is empty".into()));
    }
    let response = provider.complete(&prompts::answer_messages(question, selected_text)).await?;
    Ok(response.trim().to_string())
}
