use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::error::ApiError;
use crate::session::{ChoiceRequest, CreateSessionRequest, SessionView};
use crate::store::SessionStore;

type AppState = Arc<SessionStore>;

/// Parses a JSON body, naming the offending field on failure. An empty body
/// is read as `{}`.
fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    let bytes = if bytes.iter().all(u8::is_ascii_whitespace) {
        b"{}"
    } else {
        bytes
    };
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|err| {
        let path = err.path().to_string();
        let message = err.inner().to_string();
        let field = match path.as_str() {
            "." => unknown_field(&message).unwrap_or("body").to_string(),
            _ => path,
        };
        ApiError::bad_request(field, message)
    })
}

fn unknown_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

/// Runs blocking session work (sampling may hit the network) off the
/// async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

async fn create_session(
    State(store): State<AppState>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let request: CreateSessionRequest = parse_body(&body)?;
    let view = blocking(move || store.create(request)).await?;
    log::info!("created session {}", view.session_id);
    Ok((StatusCode::CREATED, Json(view)))
}

async fn submit_choice(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ApiError> {
    let ChoiceRequest { choice } = parse_body(&body)?;
    Ok(Json(blocking(move || store.choose(&id, choice)).await?))
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    Ok(Json(blocking(move || store.view(&id)).await?))
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    sessions: usize,
}

async fn healthz(State(store): State<AppState>) -> Json<Health> {
    Json(Health {
        status: "ok",
        sessions: store.len(),
    })
}

/// `*` allows any origin; otherwise an explicit list.
pub fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([axum::http::header::CONTENT_TYPE]);
    if origins.iter().any(|o| o == "*") {
        return layer.allow_origin(Any);
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    layer.allow_origin(AllowOrigin::list(list))
}

pub fn router(store: Arc<SessionStore>, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/choice", post(submit_choice))
        .layer(cors(cors_origins))
        .with_state(store)
}
