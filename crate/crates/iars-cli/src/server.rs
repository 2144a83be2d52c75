//! JSON HTTP service for reveal sessions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use iars_core::{action_relation, fixtures, Budget, Relation, RevealSession, SessionView};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const DEFAULT_TTL: Duration = Duration::from_secs(3600);

struct Entry {
    graph_id: String,
    session: RevealSession,
    touched: Instant,
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, Arc<Mutex<Entry>>>>>,
    ttl: Duration,
    budget: Budget,
}

impl AppState {
    pub fn new(ttl: Duration, budget: Budget) -> AppState {
        AppState { sessions: Arc::default(), ttl, budget }
    }

    /// Looks a session up, dropping every session idle for longer than the TTL.
    fn session(&self, sid: &str) -> Option<Arc<Mutex<Entry>>> {
        let mut map = self.sessions.lock().expect("session map lock");
        let now = Instant::now();
        map.retain(|_, e| now.duration_since(e.lock().expect("session lock").touched) <= self.ttl);
        map.get(sid).cloned()
    }

    fn insert(&self, entry: Entry) -> String {
        let sid = uuid::Uuid::new_v4().to_string();
        self.sessions.lock().expect("session map lock").insert(sid.clone(), Arc::new(Mutex::new(entry)));
        sid
    }
}

pub struct ApiError {
    status: StatusCode,
    error: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> ApiError {
        ApiError { status, error, detail: detail.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.error, "detail": self.detail }))).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "bad_request", r.body_text())
    }
}

fn core_error(e: iars_core::Error) -> ApiError {
    use iars_core::Error as E;
    match e {
        E::UnknownAttribute(a) => ApiError::new(StatusCode::BAD_REQUEST, "unknown_attribute", a),
        E::Duplicate(a) => ApiError::new(StatusCode::CONFLICT, "duplicate_attribute", a),
        E::Budget { .. } | E::TooLarge { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "too_large", e.to_string()),
        other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", other.to_string()),
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

#[derive(Serialize)]
struct GraphEntry {
    id: &'static str,
    kind: &'static str,
}

#[derive(Deserialize)]
pub struct StartRequest {
    graph_id: String,
}

#[derive(Deserialize)]
pub struct RevealRequest {
    attribute: String,
}

#[derive(Serialize)]
struct SessionBody {
    session_id: String,
    graph_id: String,
    #[serde(flatten)]
    view: SessionView,
}

fn lookup_relation(id: &str, budget: Budget) -> ApiResult<Relation> {
    if fixtures::GRAPHS.iter().any(|f| f.id == id) {
        let g = fixtures::graph(id).map_err(core_error)?;
        return action_relation(&g, budget).map_err(core_error);
    }
    if fixtures::RELATIONS.iter().any(|f| f.id == id) {
        return fixtures::relation(id).map_err(core_error);
    }
    Err(ApiError::new(StatusCode::NOT_FOUND, "unknown_graph", id))
}

fn relation_json(id: &str, rel: &Relation) -> Value {
    let rows: Vec<Value> = rel
        .rows()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            json!({
                "key": rel.individuals()[i],
                "attributes": rel.attribute_ids(r),
                "goal": rel.goals().map(|g| g[i].clone()),
            })
        })
        .collect();
    json!({ "id": id, "attributes": rel.attributes(), "rows": rows })
}

async fn list_graphs() -> Json<Vec<GraphEntry>> {
    let graphs = fixtures::GRAPHS.iter().map(|f| GraphEntry { id: f.id, kind: "graph" });
    let relations = fixtures::RELATIONS.iter().map(|f| GraphEntry { id: f.id, kind: "relation" });
    Json(graphs.chain(relations).collect())
}

async fn get_relation(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let rel = lookup_relation(&id, st.budget)?;
    Ok(Json(relation_json(&id, &rel)))
}

async fn start_session(
    State(st): State<AppState>,
    body: std::result::Result<Json<StartRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<SessionBody>)> {
    let Json(req) = body?;
    let rel = lookup_relation(&req.graph_id, st.budget)?;
    let session = RevealSession::start(rel);
    let view = session.view();
    let sid = st.insert(Entry { graph_id: req.graph_id.clone(), session, touched: Instant::now() });
    Ok((StatusCode::CREATED, Json(SessionBody { session_id: sid, graph_id: req.graph_id, view })))
}

fn missing(sid: &str) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "unknown_session", sid)
}

async fn reveal(
    State(st): State<AppState>,
    Path(sid): Path<String>,
    body: std::result::Result<Json<RevealRequest>, JsonRejection>,
) -> ApiResult<Json<SessionBody>> {
    let Json(req) = body?;
    let entry = st.session(&sid).ok_or_else(|| missing(&sid))?;
    let mut e = entry.lock().expect("session lock");
    e.touched = Instant::now();
    e.session.reveal(&req.attribute).map_err(core_error)?;
    Ok(Json(SessionBody { session_id: sid, graph_id: e.graph_id.clone(), view: e.session.view() }))
}

async fn get_session(State(st): State<AppState>, Path(sid): Path<String>) -> ApiResult<Json<SessionBody>> {
    let entry = st.session(&sid).ok_or_else(|| missing(&sid))?;
    let mut e = entry.lock().expect("session lock");
    e.touched = Instant::now();
    Ok(Json(SessionBody { session_id: sid, graph_id: e.graph_id.clone(), view: e.session.view() }))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route")
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/graphs", get(list_graphs))
        .route("/api/graphs/{id}/relation", get(get_relation))
        .route("/api/sessions", post(start_session))
        .route("/api/sessions/{sid}", get(get_session))
        .route("/api/sessions/{sid}/reveal", post(reveal))
        .fallback(not_found)
        .with_state(state)
}

pub async fn serve(host: &str, port: u16, state: AppState) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
