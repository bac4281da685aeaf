use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use omhc_core::corpus::Corpus;
use omhc_core::labeling::{HeuristicProvider, LabelTable};
use omhc_core::llm::{ChatMessage, ChatProvider, LlmError, StubProvider};
use omhc_core::search::SearchIndex;
use omhc_core::similarity::{embed_corpus, PairSet, BUILTIN_PROVIDER};
use omhc_server::{router, AppState, ServerConfig, Store};
use serde_json::{json, Value};
use tower::ServiceExt;

const DESK: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/desk/dump.jsonl");

fn store() -> Store {
    let (corpus, _) = Corpus::ingest_file(std::path::Path::new(DESK)).unwrap();
    let index = SearchIndex::build(&corpus);
    let labels = LabelTable::label_corpus(&corpus, &HeuristicProvider::default());
    let pairs = PairSet::compute(&embed_corpus(&corpus), 0.6, BUILTIN_PROVIDER).unwrap();
    Store { corpus, index, labels, pairs }
}

fn config() -> ServerConfig {
    ServerConfig { iterations: 60, ..ServerConfig::default() }
}

fn app_with(llm: Arc<dyn ChatProvider>, config: ServerConfig) -> Router {
    router(Arc::new(AppState::new(store(), config, llm).unwrap()))
}

fn app() -> Router {
    app_with(Arc::new(StubProvider), config())
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into())) };
    (status, v)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

async fn session(app: &Router) -> String {
    let (st, v) = call(app, Method::POST, "/api/session", None).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

async fn wait_job(app: &Router, s: &str, job: &str) -> Value {
    for _ in 0..400 {
        let (st, v) = get(app, &format!("/api/job/{job}?session={s}")).await;
        assert_eq!(st, StatusCode::OK, "{v}");
        if v["state"] != "pending" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job {job} never settled");
}

fn anchor(kind: &str, id: &str, body: &str, start: usize, end: usize) -> Value {
    let text: String = body.chars().skip(start).take(end - start).collect();
    json!({"target": {"kind": kind, "id": id}, "char_start": start, "char_end": end, "exact_text": text})
}

async fn first_comment(app: &Router, s: &str, post_id: &str) -> (String, String) {
    let (_, d) = get(app, &format!("/api/post/{post_id}?session={s}")).await;
    let c = &d["comments"][0]["comment"];
    (c["id"].as_str().unwrap().to_string(), c["body"].as_str().unwrap().to_string())
}

#[tokio::test]
async fn error_codes_map_to_statuses() {
    let app = app();
    let (st, v) = get(&app, "/api/nope").await;
    assert_eq!((st, v["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));

    let (st, v) = get(&app, "/api/folders?session=missing").await;
    assert_eq!((st, v["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));

    let (st, v) = get(&app, "/api/folders").await;
    assert_eq!((st, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));

    let s = session(&app).await;
    let req = Request::post(format!("/api/zoom?session={s}"))
        .header("content-type", "application/json")
        .body(Body::from("{not json"))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);

    let (st, v) = call(&app, Method::DELETE, "/api/health", None).await;
    assert_eq!((st, v["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));

    // Zoom before any search.
    let (st, _) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": []})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);

    let (st, v) = get(&app, &format!("/api/post/nope?session={s}")).await;
    assert_eq!((st, v["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));

    let (st, v) = get(&app, &format!("/api/folder/purple?session={s}")).await;
    assert_eq!(st, StatusCode::BAD_REQUEST, "{v}");
}

#[tokio::test]
async fn stale_view_on_old_version_or_vanished_path() {
    let app = app();
    let s = session(&app).await;
    let (st, r) = get(&app, &format!("/api/search?q=exam%20sleep&session={s}")).await;
    assert_eq!(st, StatusCode::OK, "{r}");
    let v0 = r["view"]["view_version"].as_u64().unwrap();
    let topic = r["topics"][0]["ref_id"].as_str().unwrap().to_string();

    let (st, z) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": [topic], "view_version": v0})).await;
    assert_eq!(st, StatusCode::OK, "{z}");
    assert_eq!(z["view"]["level"], "post");
    assert_eq!(z["view"]["view_version"].as_u64(), Some(v0), "zoom must not bump the version");

    // Filtering bumps the version; the old one is now stale.
    let sel = json!({"selections": [{"direction": "seeking", "kind": "emotional", "level": "high"}]});
    let (st, f) = post(&app, &format!("/api/filter?session={s}"), sel).await;
    assert_eq!(st, StatusCode::OK, "{f}");
    let v1 = f["view"]["view_version"].as_u64().unwrap();
    assert!(v1 > v0);
    let (st, e) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": [], "view_version": v0})).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(e["code"], "stale_view");
    assert_eq!(e["detail"]["view_version"].as_u64(), Some(v1));
    assert!(e["detail"]["path"].is_array());

    let (st, e) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": ["topic-99"]})).await;
    assert_eq!((st, e["code"].as_str()), (StatusCode::CONFLICT, Some("stale_view")));

    // A providing selection is rejected at the post level.
    let bad = json!({"selections": [{"direction": "providing", "kind": "emotional", "level": "high"}]});
    let (st, _) = post(&app, &format!("/api/filter?session={s}"), bad).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn filter_keeps_the_other_direction() {
    let app = app();
    let s = session(&app).await;
    let (_, r) = get(&app, &format!("/api/search?q=panic&session={s}")).await;
    let seek = json!({"selections": [{"direction": "seeking", "kind": "informational", "level": "low"}]});
    let (_, f) = post(&app, &format!("/api/filter?session={s}"), seek).await;
    let topic = f["view"]["root"]["children"][0]["ref_id"].as_str().unwrap().to_string();
    let (_, z) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": [topic]})).await;
    let post_id = z["view"]["root"]["children"][0]["ref_id"].as_str().unwrap().to_string();
    let (st, z) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": [topic, post_id]})).await;
    assert_eq!(st, StatusCode::OK, "{z}");
    assert_eq!(z["view"]["level"], "comment");
    let prov = json!({"selections": [
        {"direction": "providing", "kind": "emotional", "level": "high"},
        {"direction": "providing", "kind": "informational", "level": "high"}
    ]});
    let (st, f) = post(&app, &format!("/api/filter?session={s}"), prov).await;
    assert_eq!(st, StatusCode::OK, "{f}");
    let filter = f["view"]["filter"].as_array().unwrap();
    assert_eq!(filter.len(), 3);
    assert!(filter.iter().any(|l| l["direction"] == "seeking"));
    for c in f["view"]["root"]["children"].as_array().unwrap() {
        assert!(c["labels"].as_array().unwrap().iter().all(|l| l["level"] == "high"), "{c}");
    }
    assert!(r["n_results"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app();
    let a = session(&app).await;
    let b = session(&app).await;
    assert_ne!(a, b);
    let (_, r) = get(&app, &format!("/api/search?q=exam&session={a}")).await;
    let post_id = r["view"]["post_list"][0]["id"].as_str().unwrap().to_string();
    let (cid, body) = first_comment(&app, &a, &post_id).await;
    let (st, h) = post(&app, &format!("/api/highlight?session={a}"), json!({"anchor": anchor("comment", &cid, &body, 0, 5), "color": "yellow"})).await;
    assert_eq!(st, StatusCode::OK, "{h}");

    let (_, fa) = get(&app, &format!("/api/folders?session={a}")).await;
    let (_, fb) = get(&app, &format!("/api/folders?session={b}")).await;
    assert_eq!(fa["folders"][0]["entries"].as_array().unwrap().len(), 1);
    assert!(fb["folders"].as_array().unwrap().iter().all(|f| f["entries"].as_array().unwrap().is_empty()));

    // b has not searched; a's view is not visible there.
    let (st, _) = post(&app, &format!("/api/zoom?session={b}"), json!({"path": []})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let hid = h["highlight"]["id"].as_str().unwrap();
    let (st, _) = get(&app, &format!("/api/highlight/{hid}/navigate?session={b}")).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    let (st, _) = get(&app, &format!("/api/highlight/{hid}/navigate?session={a}")).await;
    assert_eq!(st, StatusCode::OK);
}

#[tokio::test]
async fn highlight_lifecycle_and_anchor_checks() {
    let app = app();
    let s = session(&app).await;
    let (_, r) = get(&app, &format!("/api/search?q=sleep&session={s}")).await;
    let post_id = r["view"]["post_list"][0]["id"].as_str().unwrap().to_string();
    let (cid, body) = first_comment(&app, &s, &post_id).await;

    let mut bad = anchor("comment", &cid, &body, 0, 5);
    bad["exact_text"] = json!("zzzzz");
    let (st, _) = post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": bad, "color": "yellow"})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);

    let (_, h1) = post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": anchor("comment", &cid, &body, 0, 4), "color": "yellow"})).await;
    let (_, h2) = post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": anchor("comment", &cid, &body, 4, 9), "color": "yellow"})).await;
    assert_eq!(h1["highlight"]["id"], h2["highlight"]["id"], "touching spans merge");
    assert_eq!(h2["highlight"]["anchor"]["char_end"], 9);
    let id = h2["highlight"]["id"].as_str().unwrap().to_string();

    let (st, e) = call(&app, Method::PUT, &format!("/api/highlight/{id}/text?session={s}"), Some(json!({"text": "my note"}))).await;
    assert_eq!(st, StatusCode::OK, "{e}");
    let (_, f) = get(&app, &format!("/api/folder/yellow?session={s}")).await;
    assert_eq!(f["entries"][0]["text"], "my note");

    let (_, rc) = post(&app, &format!("/api/highlight/{id}/recolor?session={s}"), json!({"color": "green"})).await;
    assert_eq!(rc["highlight"]["color"], "green");
    let (_, f) = get(&app, &format!("/api/folders?session={s}")).await;
    assert!(f["folders"][0]["entries"].as_array().unwrap().is_empty());
    assert_eq!(f["folders"][1]["entries"][0], json!(id));

    let (st, _) = call(&app, Method::DELETE, &format!("/api/highlight/{id}?session={s}"), None).await;
    assert_eq!(st, StatusCode::OK);
    let (st, _) = call(&app, Method::DELETE, &format!("/api/highlight/{id}?session={s}"), None).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn summarize_board_and_ask_with_stub() {
    let app = app();
    let s = session(&app).await;
    let (_, r) = get(&app, &format!("/api/search?q=sleep&session={s}")).await;
    let post_id = r["view"]["post_list"][0]["id"].as_str().unwrap().to_string();
    let (cid, body) = first_comment(&app, &s, &post_id).await;
    post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": anchor("comment", &cid, &body, 0, 10), "color": "yellow"})).await;

    let (st, t) = post(&app, &format!("/api/folder/yellow/summarize?session={s}"), json!(null)).await;
    assert_eq!(st, StatusCode::OK, "{t}");
    let job = wait_job(&app, &s, t["job_id"].as_str().unwrap()).await;
    assert_eq!(job["state"], "done", "{job}");
    assert_eq!(job["result"]["summary"]["sections"].as_array().unwrap().len(), 2);
    assert_eq!(job["result"]["mindmap"]["root"]["children"].as_array().unwrap().len(), 2);
    let (_, m) = get(&app, &format!("/api/mindmap/yellow?session={s}")).await;
    assert_eq!(m["mindmap"], job["result"]["mindmap"]);

    // Changing the folder marks the stored summary stale.
    post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": anchor("comment", &cid, &body, 12, 14), "color": "yellow"})).await;
    let (_, f) = get(&app, &format!("/api/folder/yellow?session={s}")).await;
    assert_eq!(f["summary"]["stale"], true);

    let (st, b) = post(&app, &format!("/api/board?session={s}"), json!({"selected_text": "Drink some chamomile tea."})).await;
    assert_eq!(st, StatusCode::OK, "{b}");
    let board = b["board"]["id"].as_str().unwrap().to_string();
    let rec = wait_job(&app, &s, b["job"]["job_id"].as_str().unwrap()).await;
    assert_eq!(rec["result"]["questions"].as_array().unwrap().len(), 3);
    let q = rec["result"]["questions"][0].as_str().unwrap();

    let (st, a) = post(&app, &format!("/api/board/{board}/ask?session={s}"), json!({"question": q, "origin": "recommended"})).await;
    assert_eq!(st, StatusCode::OK, "{a}");
    let node = a["node"].as_str().unwrap().to_string();
    let ans = wait_job(&app, &s, a["job"]["job_id"].as_str().unwrap()).await;
    assert_eq!(ans["state"], "done");
    let (_, g) = get(&app, &format!("/api/board/{board}?session={s}")).await;
    assert_eq!(g["board"]["threads"][0]["id"], json!(node));
    assert_eq!(g["board"]["threads"][0]["answer"], ans["result"]["answer"]);

    let (st, _) = post(&app, &format!("/api/board/{board}/ask?session={s}"), json!({})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);

    // Jobs belong to their session.
    let other = session(&app).await;
    let (st, _) = get(&app, &format!("/api/job/{}?session={other}", t["job_id"].as_str().unwrap())).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

struct Down;

#[async_trait]
impl ChatProvider for Down {
    fn name(&self) -> &str {
        "down"
    }
    async fn complete(&self, _: &[ChatMessage]) -> Result<String, LlmError> {
        Err(LlmError::Request { provider: "down".into(), message: "connection refused".into() })
    }
}

#[tokio::test]
async fn provider_failure_is_upstream_llm() {
    let app = app_with(Arc::new(Down), config());
    let s = session(&app).await;
    let (_, b) = post(&app, &format!("/api/board?session={s}"), json!({"selected_text": "Go for a walk."})).await;
    let job = wait_job(&app, &s, b["job"]["job_id"].as_str().unwrap()).await;
    assert_eq!(job["state"], "failed");
    assert_eq!(job["error"]["code"], "upstream_llm");
}

#[tokio::test]
async fn export_then_import_restores_folders() {
    let app = app();
    let s = session(&app).await;
    let (_, r) = get(&app, &format!("/api/search?q=exam&session={s}")).await;
    let post_id = r["view"]["post_list"][0]["id"].as_str().unwrap().to_string();
    let (cid, body) = first_comment(&app, &s, &post_id).await;
    post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": anchor("comment", &cid, &body, 0, 6), "color": "red"})).await;
    post(&app, &format!("/api/highlight?session={s}"), json!({"anchor": anchor("comment", &cid, &body, 8, 12), "color": "green"})).await;

    let (st, doc) = get(&app, &format!("/api/session/export?session={s}")).await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(doc["format"], "omhc-session");
    let (st, created) = post(&app, "/api/session/import", doc.clone()).await;
    assert_eq!(st, StatusCode::OK, "{created}");
    let t = created["session_id"].as_str().unwrap();
    assert_ne!(t, s);
    let (_, fa) = get(&app, &format!("/api/folders?session={s}")).await;
    let (_, fb) = get(&app, &format!("/api/folders?session={t}")).await;
    assert_eq!(fa["folders"], fb["folders"]);
    let (_, va) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": []})).await;
    let (_, vb) = post(&app, &format!("/api/zoom?session={t}"), json!({"path": []})).await;
    assert_eq!(va["view"], vb["view"]);

    let mut broken = doc.clone();
    broken["version"] = json!(99);
    let (st, _) = post(&app, "/api/session/import", broken).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn sessions_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServerConfig { session_dir: Some(dir.path().to_path_buf()), ..config() };
    let app = app_with(Arc::new(StubProvider), cfg.clone());
    let s = session(&app).await;
    get(&app, &format!("/api/search?q=panic&session={s}")).await;
    drop(app);
    let app = app_with(Arc::new(StubProvider), cfg);
    let (st, v) = post(&app, &format!("/api/zoom?session={s}"), json!({"path": []})).await;
    assert_eq!(st, StatusCode::OK, "{v}");
}
