//! HTTP play service: a client plays the man against a live lion strategy.
//!
//! Endpoints (JSON bodies, points as `{"x": .., "y": ..}`):
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/games` | [`CreateGame`] | 201 [`SessionSummary`] |
//! | POST | `/games/{id}/man-move` | [`MoveRequest`] | [`MoveOutcome`] |
//! | POST | `/games/{id}/preview` | [`MoveRequest`] | [`MoveOutcome`], session unchanged |
//! | GET | `/games/{id}` | | [`SessionView`] |
//! | DELETE | `/games/{id}` | | 204 |
//!
//! Errors carry `{"reason": .., "message": ..}` with a [`Reason`] code.
//! Sessions live in memory only and are dropped after an idle timeout.

mod http;
mod store;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::{Duration, Instant};

pub use http::{router, ApiError, ErrorBody};
pub use store::{
    CreateGame, MoveOutcome, MoveRequest, Reason, ServiceError, Session, SessionStatus, SessionStore, SessionSummary,
    SessionView, StepView, DEFAULT_IDLE_TIMEOUT,
};

/// How often idle sessions are swept.
pub const EVICTION_INTERVAL: Duration = Duration::from_secs(60);

/// Serves until the process is stopped.
pub async fn serve(addr: SocketAddr, store: Arc<SessionStore>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let sweeper = Arc::clone(&store);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(EVICTION_INTERVAL);
        loop {
            tick.tick().await;
            sweeper.evict_idle(Instant::now());
        }
    });
    axum::serve(listener, router(store)).await
}
