//! HTTP/JSON service over the core modules.
//!
//! All state except sessions and jobs is loaded once at startup and is
//! read-only. Each session sits behind its own mutex, so requests within a
//! session are serialized while sessions proceed in parallel. LLM work runs
//! as background jobs polled through `GET /api/job/{id}`.

pub mod config;
pub mod error;
pub mod routes;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

pub use config::ServerConfig;
pub use routes::router;
pub use state::{AppState, SharedState, Store, StoreError};

/// Binds `addr` and serves until the process is stopped. Returns the bound
/// address through `on_bound` before serving (useful with port 0).
pub async fn serve(
    state: AppState,
    addr: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(Arc::new(state))).await
}
