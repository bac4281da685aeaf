use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use omhc_core::api::*;
use omhc_core::explorer::{view_payload, zoom, SupportFilter, ViewPayload};
use omhc_core::labeling::SupportLabel;
use omhc_core::llm::{self, derive_mindmap, QuestionBoard, SummaryDoc};
use omhc_core::notes::{target_body, Target, TargetKind};
use omhc_core::session::SessionDocument;
use serde::Deserialize;
use serde_json::json;
use tokio::sync::Mutex;

use crate::error::{llm_error, ApiJson, ApiPath, ApiQuery, ApiResult, Failure};
use crate::state::{Session, SharedState};

pub fn router(state: SharedState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/session", post(create_session))
        .route("/api/session/export", get(export_session))
        .route("/api/session/import", post(import_session))
        .route("/api/search", get(search))
        .route("/api/zoom", post(zoom_view))
        .route("/api/filter", post(filter_view))
        .route("/api/post/{id}", get(post_detail))
        .route("/api/highlight", post(add_highlight))
        .route("/api/highlight/{id}", axum::routing::delete(clear_highlight))
        .route("/api/highlight/{id}/recolor", post(recolor_highlight))
        .route("/api/highlight/{id}/text", put(edit_highlight))
        .route("/api/highlight/{id}/navigate", get(navigate_highlight))
        .route("/api/folders", get(list_folders))
        .route("/api/folder/{color}", get(folder))
        .route("/api/folder/{color}/summarize", post(summarize))
        .route("/api/folder/{color}/summary", put(edit_summary))
        .route("/api/mindmap/{color}", get(mindmap))
        .route("/api/mindmap/{color}/node", post(add_mind_node))
        .route("/api/board", post(create_board))
        .route("/api/board/{id}", get(get_board))
        .route("/api/board/{id}/ask", post(ask))
        .route("/api/board/{id}/branch", post(branch))
        .route("/api/board/{id}/answer", put(edit_answer))
        .route("/api/board/{id}/recommend", post(recommend))
        .route("/api/board/{id}/collapse", post(collapse))
        .route("/api/job/{id}", get(job))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state)
}

async fn not_found() -> Failure {
    Failure(ApiError::not_found("no such endpoint"))
}

async fn method_not_allowed() -> Failure {
    Failure(ApiError::bad_request("method not allowed on this endpoint"))
}

#[derive(Deserialize)]
struct SessionParam {
    session: String,
}

#[derive(Deserialize)]
struct SearchParams {
    q: String,
    session: String,
}

const V: u32 = API_SCHEMA_VERSION;

fn current_view(state: &SharedState, session: &Session) -> Result<ViewPayload, Failure> {
    let root = session
        .filtered
        .as_ref()
        .ok_or_else(|| Failure(ApiError::bad_request("no search in this session yet; call /api/search first")))?;
    let zoomed = zoom(root, &session.doc.path)?;
    Ok(view_payload(root, &zoomed, &session.filter(), &state.store.pairs, session.doc.view_version))
}

fn stale(session: &Session, message: impl Into<String>) -> Failure {
    Failure(
        ApiError::new(ErrorCode::StaleView, message)
            .with_detail(json!({ "view_version": session.doc.view_version, "path": session.doc.path })),
    )
}

async fn health(State(state): State<SharedState>) -> Json<Health> {
    Json(Health {
        schema_version: V,
        n_posts: state.store.corpus.len_posts(),
        n_comments: state.store.corpus.len_comments(),
        llm_provider: state.llm.name().to_string(),
    })
}

async fn create_session(State(state): State<SharedState>) -> ApiResult<SessionCreated> {
    let (session_id, palette) = state.create_session().await?;
    Ok(Json(SessionCreated { schema_version: V, session_id, palette }))
}

async fn export_session(
    State(state): State<SharedState>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<SessionDocument> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    s.doc.refresh_folders();
    Ok(Json(s.doc.clone()))
}

/// Imports a document as a new session with a fresh id.
async fn import_session(
    State(state): State<SharedState>,
    ApiJson(mut doc): ApiJson<SessionDocument>,
) -> ApiResult<SessionCreated> {
    doc.validate(Some(&state.store.corpus))?;
    doc.session_id = crate::state::AppState::new_session_id();
    let palette = doc.notebook.palette().colors().to_vec();
    let st = state.clone();
    let session = tokio::task::spawn_blocking(move || st.restore(doc))
        .await
        .map_err(|e| Failure::internal(e.to_string()))?;
    let session_id = state.insert_session(session).await;
    Ok(Json(SessionCreated { schema_version: V, session_id, palette }))
}

/// Runs search, LDA and hierarchy construction; resets filter and zoom.
async fn search(State(state): State<SharedState>, ApiQuery(p): ApiQuery<SearchParams>) -> ApiResult<SearchResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let st = state.clone();
    let q = p.q.clone();
    let exploration =
        tokio::task::spawn_blocking(move || st.explore(&q)).await.map_err(|e| Failure::internal(e.to_string()))??;
    let topics = exploration
        .root
        .children
        .iter()
        .map(|t| TopicInfo {
            ref_id: t.ref_id.clone(),
            keywords: t.keywords.clone().unwrap_or_default(),
            n_posts: t.children.len(),
        })
        .collect();
    let status = exploration.status;
    let n_results = exploration.results.len();
    s.doc.query = Some(p.q.clone());
    s.doc.filter.clear();
    s.doc.path.clear();
    s.doc.view_version += 1;
    s.exploration = Some(exploration);
    s.refilter();
    let view = current_view(&state, &s)?;
    state.persist(&s).await;
    Ok(Json(SearchResponse { schema_version: V, query: p.q, status, n_results, topics, view }))
}

async fn zoom_view(
    State(state): State<SharedState>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<ZoomRequest>,
) -> ApiResult<ViewResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    if let Some(v) = req.view_version {
        if v != s.doc.view_version {
            return Err(stale(&s, format!("view version {v} is out of date")));
        }
    }
    let root = s
        .filtered
        .as_ref()
        .ok_or_else(|| Failure(ApiError::bad_request("no search in this session yet; call /api/search first")))?;
    if let Err(e) = zoom(root, &req.path) {
        return Err(stale(&s, e.to_string()));
    }
    s.doc.path = req.path;
    let view = current_view(&state, &s)?;
    state.persist(&s).await;
    Ok(Json(ViewResponse { schema_version: V, view }))
}

/// Replaces the selections of the direction shown at the current level;
/// selections of the other direction are kept.
async fn filter_view(
    State(state): State<SharedState>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<FilterRequest>,
) -> ApiResult<ViewResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    if s.exploration.is_none() {
        return Err(Failure(ApiError::bad_request("no search in this session yet; call /api/search first")));
    }
    let level = s.level();
    SupportFilter::new(req.selections.iter().copied()).check_level(level)?;
    let direction = level.direction();
    let mut merged: Vec<SupportLabel> = s.doc.filter.iter().copied().filter(|l| l.direction != direction).collect();
    merged.extend(req.selections);
    merged.sort();
    merged.dedup();
    s.doc.filter = merged;
    s.doc.view_version += 1;
    s.refilter();
    s.clamp_path();
    let view = current_view(&state, &s)?;
    state.persist(&s).await;
    Ok(Json(ViewResponse { schema_version: V, view }))
}

async fn post_detail(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<PostDetail> {
    let s = state.session(&p.session).await?;
    let s = s.lock().await;
    let store = &state.store;
    let pwc = store.corpus.get_post(&id).map_err(|e| Failure(ApiError::not_found(e.to_string())))?;
    let notebook = &s.doc.notebook;
    let overlays = |kind: TargetKind, id: &str| {
        notebook.on_target(&Target { kind, id: id.to_string() }).into_iter().cloned().collect::<Vec<_>>()
    };
    let comments = pwc
        .comments
        .iter()
        .map(|c| CommentDetail {
            comment: c.clone(),
            labels: store.labels.comment(&c.id),
            highlights: overlays(TargetKind::Comment, &c.id),
        })
        .collect();
    let similar_ids = store.pairs.neighbors(&id, &s.cluster_of(&id)).unwrap_or_default().into_iter().collect();
    Ok(Json(PostDetail {
        schema_version: V,
        labels: store.labels.post(&id),
        highlights: overlays(TargetKind::Post, &id),
        post: pwc.post,
        comments,
        similar_ids,
    }))
}

fn highlight_response(s: &Session, highlight: omhc_core::notes::Highlight) -> Json<HighlightResponse> {
    Json(HighlightResponse { schema_version: V, highlight, folders: s.doc.notebook.folders() })
}

async fn add_highlight(
    State(state): State<SharedState>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<HighlightRequest>,
) -> ApiResult<HighlightResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let body = target_body(&state.store.corpus, &req.anchor.target).ok_or_else(|| {
        Failure(ApiError::not_found(format!("{:?} {} is not in the store", req.anchor.target.kind, req.anchor.target.id)))
    })?;
    let h = s.doc.notebook.add_highlight(req.anchor, &req.color, body)?;
    s.folder_changed(&h.color);
    state.persist(&s).await;
    Ok(highlight_response(&s, h))
}

async fn recolor_highlight(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<RecolorRequest>,
) -> ApiResult<HighlightResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let old = s.doc.notebook.get(&id)?.color.clone();
    let h = s.doc.notebook.recolor(&id, &req.color)?;
    s.folder_changed(&old);
    s.folder_changed(&h.color);
    state.persist(&s).await;
    Ok(highlight_response(&s, h))
}

async fn clear_highlight(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<HighlightResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let h = s.doc.notebook.clear(&id)?;
    s.folder_changed(&h.color);
    state.persist(&s).await;
    Ok(highlight_response(&s, h))
}

async fn edit_highlight(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<EditTextRequest>,
) -> ApiResult<HighlightResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let h = s.doc.notebook.edit_entry(&id, &req.text)?;
    s.folder_changed(&h.color);
    state.persist(&s).await;
    Ok(highlight_response(&s, h))
}

async fn navigate_highlight(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<NavigateResponse> {
    let s = state.session(&p.session).await?;
    let s = s.lock().await;
    Ok(Json(NavigateResponse { schema_version: V, location: s.doc.notebook.navigate(&id)? }))
}

async fn list_folders(
    State(state): State<SharedState>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<FoldersResponse> {
    let s = state.session(&p.session).await?;
    let s = s.lock().await;
    Ok(Json(FoldersResponse { schema_version: V, folders: s.doc.notebook.folders() }))
}

fn folder_texts(s: &Session, color: &str) -> Result<Vec<String>, Failure> {
    Ok(s.doc.notebook.folder_highlights(color)?.iter().map(|h| h.display_text().to_string()).collect())
}

async fn folder(
    State(state): State<SharedState>,
    ApiPath(color): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<FolderResponse> {
    let s = state.session(&p.session).await?;
    let s = s.lock().await;
    let entries = s
        .doc
        .notebook
        .folder_highlights(&color)?
        .into_iter()
        .map(|h| FolderEntry {
            highlight_id: h.id.clone(),
            text: h.display_text().to_string(),
            target: h.anchor.target.clone(),
        })
        .collect();
    Ok(Json(FolderResponse { schema_version: V, summary: s.doc.summaries.get(&color).cloned(), color, entries }))
}

fn store_summary(s: &mut Session, color: &str, summary: SummaryDoc) -> SummaryResult {
    let mindmap = derive_mindmap(&summary, s.doc.mindmaps.get(color));
    s.doc.summaries.insert(color.to_string(), summary.clone());
    s.doc.mindmaps.insert(color.to_string(), mindmap.clone());
    SummaryResult { schema_version: V, summary, mindmap }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, ApiError> {
    serde_json::to_value(v).map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))
}

/// Starts (or joins) the summary job of one folder.
async fn summarize(
    State(state): State<SharedState>,
    ApiPath(color): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<JobTicket> {
    let arc = state.session(&p.session).await?;
    let mut s = arc.lock().await;
    let entries = folder_texts(&s, &color)?;
    if let Some(job_id) = s.summarizing.get(&color) {
        return Ok(Json(JobTicket { job_id: job_id.clone() }));
    }
    let previous = s.doc.summaries.get(&color).cloned();
    let (st, session, c) = (state.clone(), Arc::clone(&arc), color.clone());
    let job_id = state
        .submit(&p.session, async move {
            let outcome = llm::summarize(st.llm.as_ref(), &entries, &c, previous.as_ref()).await;
            let mut s = session.lock().await;
            s.summarizing.remove(&c);
            let changed = folder_texts(&s, &c).map(|now| now != entries).unwrap_or(true);
            let result = match outcome {
                Ok(mut summary) => {
                    summary.stale = changed;
                    Ok(store_summary(&mut s, &c, summary))
                }
                Err(failure) => {
                    if let Some(kept) = failure.kept {
                        s.doc.summaries.insert(c.clone(), kept);
                    }
                    Err(llm_error(&failure.error))
                }
            };
            st.persist(&s).await;
            to_value(&result?)
        })
        .await;
    s.summarizing.insert(color, job_id.clone());
    Ok(Json(JobTicket { job_id }))
}

async fn edit_summary(
    State(state): State<SharedState>,
    ApiPath(color): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<SummaryEdit>,
) -> ApiResult<SummaryResult> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    s.doc.notebook.palette().check(&color)?;
    let summary = SummaryDoc { source_color: color.clone(), ..req.summary };
    let result = store_summary(&mut s, &color, summary);
    state.persist(&s).await;
    Ok(Json(result))
}

async fn mindmap(
    State(state): State<SharedState>,
    ApiPath(color): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<MindMapResponse> {
    let s = state.session(&p.session).await?;
    let s = s.lock().await;
    s.doc.notebook.palette().check(&color)?;
    Ok(Json(MindMapResponse { schema_version: V, mindmap: s.doc.mindmaps.get(&color).cloned(), color }))
}

async fn add_mind_node(
    State(state): State<SharedState>,
    ApiPath(color): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<MindNodeRequest>,
) -> ApiResult<MindMapResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    s.doc.notebook.palette().check(&color)?;
    let map = s
        .doc
        .mindmaps
        .get_mut(&color)
        .ok_or_else(|| Failure(ApiError::not_found(format!("folder {color} has no mind map yet; summarize it first"))))?;
    map.add_user_node(&req.path, &req.label)?;
    let mindmap = Some(map.clone());
    state.persist(&s).await;
    Ok(Json(MindMapResponse { schema_version: V, color, mindmap }))
}

fn board<'a>(s: &'a Session, id: &str) -> Result<&'a QuestionBoard, Failure> {
    s.doc.boards.get(id).ok_or_else(|| Failure(ApiError::not_found(format!("unknown board {id:?}"))))
}

fn board_mut<'a>(s: &'a mut Session, id: &str) -> Result<&'a mut QuestionBoard, Failure> {
    s.doc.boards.get_mut(id).ok_or_else(|| Failure(ApiError::not_found(format!("unknown board {id:?}"))))
}

/// Submits a recommendation job for the board selection (`node` = None) or
/// for the follow-ups of one answered node.
async fn submit_recommend(
    state: &SharedState,
    session_id: &str,
    arc: &Arc<Mutex<Session>>,
    s: &Session,
    board_id: &str,
    node: Option<String>,
) -> Result<String, Failure> {
    let b = board(s, board_id)?;
    let context = match &node {
        Some(n) => {
            let answer = b.node(n)?.answer.clone();
            Some(answer.ok_or_else(|| Failure(ApiError::bad_request(format!("node {n} has no answer yet"))))?)
        }
        None => None,
    };
    let selected = b.selected_text.clone();
    let (st, session, bid) = (state.clone(), Arc::clone(arc), board_id.to_string());
    Ok(state
        .submit(session_id, async move {
            let rec = llm::recommend_questions(st.llm.as_ref(), &selected, context.as_deref())
                .await
                .map_err(|e| llm_error(&e))?;
            let mut s = session.lock().await;
            let b = s
                .doc
                .boards
                .get_mut(&bid)
                .ok_or_else(|| ApiError::not_found(format!("board {bid} disappeared")))?;
            b.set_recommendations(node.as_deref(), rec.questions.clone(), rec.degraded)
                .map_err(|e| ApiError::not_found(e.to_string()))?;
            st.persist(&s).await;
            to_value(&RecommendResult {
                schema_version: V,
                board: bid,
                node,
                questions: rec.questions,
                degraded: rec.degraded,
            })
        })
        .await)
}

async fn create_board(
    State(state): State<SharedState>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<BoardRequest>,
) -> ApiResult<BoardResponse> {
    let arc = state.session(&p.session).await?;
    let mut s = arc.lock().await;
    let id = format!("b{}", s.doc.next_board);
    let b = QuestionBoard::new(id.clone(), &req.selected_text, req.target)?;
    s.doc.next_board += 1;
    s.doc.boards.insert(id.clone(), b);
    let job_id = submit_recommend(&state, &p.session, &arc, &s, &id, None).await?;
    state.persist(&s).await;
    Ok(Json(BoardResponse {
        schema_version: V,
        board: board(&s, &id)?.clone(),
        job: Some(JobTicket { job_id }),
        node: None,
    }))
}

async fn get_board(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> ApiResult<BoardResponse> {
    let s = state.session(&p.session).await?;
    let s = s.lock().await;
    Ok(Json(BoardResponse { schema_version: V, board: board(&s, &id)?.clone(), job: None, node: None }))
}

async fn ask(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<AskRequest>,
) -> ApiResult<BoardResponse> {
    let arc = state.session(&p.session).await?;
    let mut s = arc.lock().await;
    let b = board_mut(&mut s, &id)?;
    let node = match (&req.node, &req.question) {
        (Some(n), None) => b.node(n)?.clone(),
        (None, Some(q)) => b.branch(req.parent.as_deref(), q, req.origin)?,
        _ => return Err(Failure(ApiError::bad_request("give exactly one of `node` or `question`"))),
    };
    let selected = b.selected_text.clone();
    let (st, session, bid, nid, question) = (state.clone(), Arc::clone(&arc), id.clone(), node.id.clone(), node.question);
    let job_id = state
        .submit(&p.session, async move {
            let outcome = llm::answer(st.llm.as_ref(), &question, &selected).await;
            let mut s = session.lock().await;
            let b = s
                .doc
                .boards
                .get_mut(&bid)
                .ok_or_else(|| ApiError::not_found(format!("board {bid} disappeared")))?;
            let result = match outcome {
                Ok(answer) => {
                    b.set_answer(&nid, &answer).map_err(|e| ApiError::not_found(e.to_string()))?;
                    Ok(AnswerResult { schema_version: V, board: bid, node: nid, answer })
                }
                Err(e) => {
                    let err = llm_error(&e);
                    b.set_error(&nid, &err.message).map_err(|e| ApiError::not_found(e.to_string()))?;
                    Err(err)
                }
            };
            st.persist(&s).await;
            to_value(&result?)
        })
        .await;
    state.persist(&s).await;
    Ok(Json(BoardResponse {
        schema_version: V,
        board: board(&s, &id)?.clone(),
        job: Some(JobTicket { job_id }),
        node: Some(node.id),
    }))
}

async fn branch(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<BranchRequest>,
) -> ApiResult<BoardResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let b = board_mut(&mut s, &id)?;
    let node = b.branch(req.parent.as_deref(), &req.question, req.origin)?;
    let board = b.clone();
    state.persist(&s).await;
    Ok(Json(BoardResponse { schema_version: V, board, job: None, node: Some(node.id) }))
}

async fn edit_answer(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<AnswerEdit>,
) -> ApiResult<BoardResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let b = board_mut(&mut s, &id)?;
    b.edit_answer(&req.node, &req.text)?;
    let board = b.clone();
    state.persist(&s).await;
    Ok(Json(BoardResponse { schema_version: V, board, job: None, node: Some(req.node) }))
}

async fn recommend(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<RecommendRequest>,
) -> ApiResult<BoardResponse> {
    let arc = state.session(&p.session).await?;
    let s = arc.lock().await;
    let job_id = submit_recommend(&state, &p.session, &arc, &s, &id, req.node.clone()).await?;
    Ok(Json(BoardResponse {
        schema_version: V,
        board: board(&s, &id)?.clone(),
        job: Some(JobTicket { job_id }),
        node: req.node,
    }))
}

async fn collapse(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
    ApiJson(req): ApiJson<CollapseRequest>,
) -> ApiResult<BoardResponse> {
    let s = state.session(&p.session).await?;
    let mut s = s.lock().await;
    let b = board_mut(&mut s, &id)?;
    b.set_collapsed(req.collapsed);
    let board = b.clone();
    state.persist(&s).await;
    Ok(Json(BoardResponse { schema_version: V, board, job: None, node: None }))
}

async fn job(
    State(state): State<SharedState>,
    ApiPath(id): ApiPath<String>,
    ApiQuery(p): ApiQuery<SessionParam>,
) -> Result<(StatusCode, Json<JobStatus>), Failure> {
    state.session(&p.session).await?;
    Ok((StatusCode::OK, Json(state.job(&p.session, &id).await?)))
}
