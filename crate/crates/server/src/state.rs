//! Shared server state: the immutable store, sessions and LLM jobs.

use std::collections::{BTreeSet, HashMap};
use std::future::Future;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use omhc_core::api::{ApiError, JobState, JobStatus, API_SCHEMA_VERSION};
use omhc_core::corpus::{write_atomic, Corpus, CorpusError};
use omhc_core::explorer::{apply_filter, explore, zoom, CircleNode, Exploration, SupportFilter, ViewLevel};
use omhc_core::labeling::{LabelError, LabelTable};
use omhc_core::llm::ChatProvider;
use omhc_core::notes::Notebook;
use omhc_core::search::{IndexError, SearchIndex};
use omhc_core::session::SessionDocument;
use omhc_core::similarity::{PairSet, SimilarityError};
use tokio::sync::{Mutex, RwLock};

use crate::config::ServerConfig;
use crate::error::Failure;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{0}; run `omhc ingest` first")]
    Corpus(#[source] CorpusError),
    #[error("{0}; run `omhc index` first")]
    Index(#[source] IndexError),
    #[error("{0}; run `omhc label` first")]
    Labels(#[source] LabelError),
    #[error("{0}; run `omhc pairs` first")]
    Pairs(#[source] SimilarityError),
    #[error("theta {theta} is below the stored pair threshold {stored}; rerun `omhc pairs --theta {theta}`")]
    Theta { theta: f64, stored: f64 },
    #[error("cannot use session directory {path}: {source}")]
    Sessions { path: PathBuf, source: std::io::Error },
}

/// Everything computed offline. Read-only while serving.
#[derive(Debug)]
pub struct Store {
    pub corpus: Corpus,
    pub index: SearchIndex,
    pub labels: LabelTable,
    pub pairs: PairSet,
}

impl Store {
    /// Loads corpus, labels and pairs from `store_dir` and the index from
    /// `index_dir`.
    pub fn load(store_dir: &Path, index_dir: &Path) -> Result<Store, StoreError> {
        Ok(Store {
            corpus: Corpus::load(store_dir).map_err(StoreError::Corpus)?,
            index: SearchIndex::load(index_dir).map_err(StoreError::Index)?,
            labels: LabelTable::load(store_dir).map_err(StoreError::Labels)?,
            pairs: PairSet::load(store_dir).map_err(StoreError::Pairs)?,
        })
    }

    /// Applies the configured threshold to the stored pairs.
    pub fn with_theta(mut self, theta: f64) -> Result<Store, StoreError> {
        if (theta - self.pairs.threshold).abs() > 1e-12 {
            self.pairs = self
                .pairs
                .at_threshold(theta)
                .ok_or(StoreError::Theta { theta, stored: self.pairs.threshold })?;
        }
        Ok(self)
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Per-session state: the persistent document plus caches derived from it.
#[derive(Debug)]
pub struct Session {
    pub doc: SessionDocument,
    pub exploration: Option<Exploration>,
    pub filtered: Option<CircleNode>,
    /// Colors with a summary job in flight, with its job id.
    pub summarizing: HashMap<String, String>,
}

impl Session {
    pub fn new(doc: SessionDocument) -> Session {
        Session { doc, exploration: None, filtered: None, summarizing: HashMap::new() }
    }

    pub fn filter(&self) -> SupportFilter {
        SupportFilter::new(self.doc.filter.iter().copied())
    }

    pub fn level(&self) -> ViewLevel {
        match self.doc.path.len() {
            0 => ViewLevel::Topic,
            1 => ViewLevel::Post,
            _ => ViewLevel::Comment,
        }
    }

    pub fn refilter(&mut self) {
        let filter = self.filter();
        self.filtered = self.exploration.as_ref().map(|e| apply_filter(&e.root, &filter));
    }

    /// Shortens the stored path until it resolves in the filtered tree.
    pub fn clamp_path(&mut self) {
        if let Some(root) = &self.filtered {
            while zoom(root, &self.doc.path).is_err() && !self.doc.path.is_empty() {
                self.doc.path.pop();
            }
        }
    }

    /// Posts in the same topic cluster as `post_id` in the filtered tree.
    pub fn cluster_of(&self, post_id: &str) -> BTreeSet<String> {
        self.filtered
            .iter()
            .flat_map(|r| r.children.iter())
            .find(|t| t.children.iter().any(|p| p.ref_id == post_id))
            .map(|t| t.children.iter().map(|p| p.ref_id.clone()).collect())
            .unwrap_or_default()
    }

    /// Marks the summary of `color` as out of date.
    pub fn folder_changed(&mut self, color: &str) {
        if let Some(s) = self.doc.summaries.get_mut(color) {
            s.stale = true;
        }
        self.doc.refresh_folders();
    }
}

#[derive(Debug, Clone)]
struct Job {
    session_id: String,
    status: JobStatus,
}

pub struct AppState {
    pub store: Arc<Store>,
    pub config: ServerConfig,
    pub llm: Arc<dyn ChatProvider>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    jobs: Mutex<HashMap<String, Job>>,
}

pub type SharedState = Arc<AppState>;

impl AppState {
    pub fn new(store: Store, config: ServerConfig, llm: Arc<dyn ChatProvider>) -> Result<AppState, StoreError> {
        let state = AppState {
            store: Arc::new(store),
            config,
            llm,
            sessions: RwLock::new(HashMap::new()),
            jobs: Mutex::new(HashMap::new()),
        };
        if let Some(dir) = &state.config.session_dir {
            std::fs::create_dir_all(dir).map_err(|source| StoreError::Sessions { path: dir.clone(), source })?;
            let sessions = state.load_sessions(dir)?;
            *state.sessions.try_write().expect("no other users yet") = sessions;
        }
        Ok(state)
    }

    fn load_sessions(&self, dir: &Path) -> Result<HashMap<String, Arc<Mutex<Session>>>, StoreError> {
        let mut out = HashMap::new();
        let entries = std::fs::read_dir(dir).map_err(|source| StoreError::Sessions { path: dir.to_path_buf(), source })?;
        for entry in entries.flatten() {
            let path = entry.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let parsed = std::fs::read_to_string(&path)
                .ok()
                .and_then(|t| serde_json::from_str::<SessionDocument>(&t).ok())
                .filter(|d| d.validate(Some(&self.store.corpus)).is_ok());
            match parsed {
                Some(doc) => {
                    let id = doc.session_id.clone();
                    let session = self.restore(doc);
                    out.insert(id, Arc::new(Mutex::new(session)));
                }
                None => tracing::warn!("skipping unreadable session file {}", path.display()),
            }
        }
        Ok(out)
    }

    pub fn new_session_id() -> String {
        uuid::Uuid::new_v4().simple().to_string()
    }

    pub async fn create_session(&self) -> Result<(String, Vec<String>), Failure> {
        let palette = self.config.palette().map_err(|e| Failure::internal(e.to_string()))?;
        let colors = palette.colors().to_vec();
        let id = Self::new_session_id();
        let doc = SessionDocument::new(id.clone(), Notebook::new(palette), now_ms());
        let session = Session::new(doc);
        self.persist(&session).await;
        self.sessions.write().await.insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok((id, colors))
    }

    /// Rebuilds caches for an imported or reloaded document.
    pub fn restore(&self, doc: SessionDocument) -> Session {
        let mut session = Session::new(doc);
        if let Some(q) = session.doc.query.clone() {
            session.exploration = self.explore(&q).ok();
            session.refilter();
            session.clamp_path();
        }
        session.doc.refresh_folders();
        session
    }

    pub async fn insert_session(&self, session: Session) -> String {
        let id = session.doc.session_id.clone();
        self.persist(&session).await;
        self.sessions.write().await.insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    pub async fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, Failure> {
        self.sessions
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| Failure(ApiError::not_found(format!("unknown session {id:?}"))))
    }

    pub fn explore(&self, query: &str) -> Result<Exploration, Failure> {
        let cfg = &self.config;
        explore(
            query,
            &self.store.index,
            &self.store.corpus,
            &self.store.labels,
            &cfg.search(),
            &cfg.lda(),
            cfg.keywords,
        )
        .map_err(Failure::from)
    }

    /// Writes the session document when a session directory is configured.
    pub async fn persist(&self, session: &Session) {
        let Some(dir) = &self.config.session_dir else { return };
        let path = dir.join(format!("{}.json", session.doc.session_id));
        let result = serde_json::to_vec_pretty(&session.doc)
            .map_err(std::io::Error::other)
            .map(|bytes| (path.clone(), bytes));
        let written = match result {
            Ok((p, bytes)) => tokio::task::spawn_blocking(move || write_atomic(&p, &bytes))
                .await
                .unwrap_or_else(|e| Err(std::io::Error::other(e))),
            Err(e) => Err(e),
        };
        if let Err(e) = written {
            tracing::warn!("cannot persist session to {}: {e}", path.display());
        }
    }

    /// Registers a pending job and runs `work` in the background. The work
    /// itself stores its effects; its output becomes the job result.
    pub async fn submit<F>(self: &Arc<Self>, session_id: &str, work: F) -> String
    where
        F: Future<Output = Result<serde_json::Value, ApiError>> + Send + 'static,
    {
        let job_id = uuid::Uuid::new_v4().simple().to_string();
        let status = JobStatus {
            schema_version: API_SCHEMA_VERSION,
            job_id: job_id.clone(),
            state: JobState::Pending,
            result: None,
            error: None,
        };
        self.jobs
            .lock()
            .await
            .insert(job_id.clone(), Job { session_id: session_id.to_string(), status });
        let state = Arc::clone(self);
        let id = job_id.clone();
        tokio::spawn(async move {
            // A panic inside the work must still settle the job.
            let outcome = tokio::spawn(work).await.unwrap_or_else(|e| {
                Err(ApiError::new(omhc_core::api::ErrorCode::Internal, format!("job panicked: {e}")))
            });
            let mut jobs = state.jobs.lock().await;
            if let Some(job) = jobs.get_mut(&id) {
                match outcome {
                    Ok(v) => {
                        job.status.state = JobState::Done;
                        job.status.result = Some(v);
                    }
                    Err(e) => {
                        job.status.state = JobState::Failed;
                        job.status.error = Some(e);
                    }
                }
            }
        });
        job_id
    }

    pub async fn job(&self, session_id: &str, job_id: &str) -> Result<JobStatus, Failure> {
        self.jobs
            .lock()
            .await
            .get(job_id)
            .filter(|j| j.session_id == session_id)
            .map(|j| j.status.clone())
            .ok_or_else(|| Failure(ApiError::not_found(format!("unknown job {job_id:?}"))))
    }
}
