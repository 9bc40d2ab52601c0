//! HTTP service for live sessions: a person plays the user, choosing one
//! option per round while the agent recommends and updates its belief.
//!
//! Routes: `POST /sessions`, `POST /sessions/{id}/choice`,
//! `GET /sessions/{id}`, `GET /healthz`. Indices in payloads are 1-based.

pub mod api;
pub mod error;
pub mod session;
pub mod store;

pub use api::{cors, router};
pub use error::ApiError;
pub use session::{Backends, ChoiceRequest, CreateSessionRequest, Session, SessionSnapshot, SessionView};
pub use store::{SessionStore, DEFAULT_TTL};
