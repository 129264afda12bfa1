//! HTTP service for interactive search sessions.
//!
//! Each session runs warm-up and evolution on a blocking worker thread and
//! moves through `initializing -> awaiting_selection <-> evolving`, with
//! `failed` as a terminal state. Mutating requests made in the wrong state are
//! answered with 409.

pub mod api;
pub mod error;
pub mod state;

use std::net::SocketAddr;
use std::sync::Arc;

pub use api::{router, AppState};
pub use error::ApiError;
pub use state::{Registry, Status};

pub fn app() -> axum::Router {
    router(Arc::new(Registry::default()))
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app()).await
}
