//! JSON session API over HTTP.

use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use ontogrow::insertion::{Answer, InsertionError, Method, SessionContext};
use ontogrow::nlu::EntityType;
use ontogrow::service::{Engine, ServiceError, SessionView};

pub type Shared = Arc<Mutex<Engine>>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

pub struct ApiError(StatusCode, ErrorBody);

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl ToString) -> Self {
        ApiError(
            status,
            ErrorBody {
                error: code.to_string(),
                message: message.to_string(),
            },
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        let status = match &e {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::Insertion(
                InsertionError::StaleRevision { .. } | InsertionError::SessionFinished | InsertionError::NotInserted,
            ) => StatusCode::CONFLICT,
            ServiceError::Insertion(_) | ServiceError::Ontology(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Tree(_) | ServiceError::Journal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.code(), &e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "illegal-input", e.body_text())
    }
}

fn lock(state: &Shared) -> MutexGuard<'_, Engine> {
    state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NewSession {
    pub concept: String,
    pub method: u8,
    #[serde(default)]
    pub entity_type: Option<String>,
    #[serde(default)]
    pub user_sentence: Option<String>,
}

async fn create_session(
    State(state): State<Shared>,
    body: Result<Json<NewSession>, JsonRejection>,
) -> Result<(StatusCode, Json<SessionView>), ApiError> {
    let Json(req) = body?;
    let method = Method::try_from(req.method).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.code(), &e))?;
    let entity_type = req
        .entity_type
        .as_deref()
        .map(str::parse::<EntityType>)
        .transpose()
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "illegal-input", e))?;
    let ctx = SessionContext {
        entity_type,
        user_sentence: req.user_sentence,
    };
    let mut engine = lock(&state);
    let session = engine.create_session(&req.concept, method, &ctx)?;
    Ok((StatusCode::CREATED, Json(SessionView::from(session))))
}

async fn get_session(State(state): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ApiError> {
    let engine = lock(&state);
    let session = engine
        .session(&id)
        .ok_or_else(|| ApiError::from(ServiceError::UnknownSession(id.clone())))?;
    Ok(Json(SessionView::from(session)))
}

async fn answer_session(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<Answer>, JsonRejection>,
) -> Result<Json<SessionView>, ApiError> {
    let mut engine = lock(&state);
    if engine.session(&id).is_none() {
        return Err(ServiceError::UnknownSession(id).into());
    }
    let Json(answer) = body.map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "illegal-answer", e.body_text()))?;
    let session = engine.answer_session(&id, answer)?;
    Ok(Json(SessionView::from(session)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TurnRequest {
    pub sentence: String,
}

async fn turn(
    State(state): State<Shared>,
    body: Result<Json<TurnRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let result = lock(&state).handle_user_turn(&req.sentence);
    Ok(Json(result).into_response())
}

async fn tree(State(state): State<Shared>) -> Response {
    let body = lock(&state).tree().dump_json();
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClassRow {
    pub name: String,
    pub display_name: String,
    pub parent: Option<String>,
    pub depth: usize,
}

async fn classes(State(state): State<Shared>) -> Json<Vec<ClassRow>> {
    let engine = lock(&state);
    let onto = engine.ontology();
    Json(
        onto.classes()
            .map(|c| ClassRow {
                name: c.name.clone(),
                display_name: c.display_name.clone(),
                parent: c.parent.clone(),
                depth: onto.depth(&c.name),
            })
            .collect(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExtractRequest {
    pub text: String,
}

async fn extract(
    State(state): State<Shared>,
    body: Result<Json<ExtractRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(req) = body?;
    let result = lock(&state).extract(&req.text);
    Ok(Json(result).into_response())
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/answer", post(answer_session))
        .route("/turn", post(turn))
        .route("/tree", get(tree))
        .route("/ontology/classes", get(classes))
        .route("/extract", post(extract))
        .with_state(state)
}

/// Everything `serve` needs besides the NLU resources.
#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub port: u16,
    pub ontology: std::path::PathBuf,
    pub methods: Vec<u8>,
    pub user: String,
    pub journal: Option<std::path::PathBuf>,
}

/// Builds the engine, reporting every configuration problem at once.
pub fn engine_from_config(cfg: &ServeConfig, nlu: &crate::commands::NluArgs) -> Result<Engine, Vec<String>> {
    let mut problems = Vec::new();
    let mut methods = Vec::new();
    for &m in &cfg.methods {
        match Method::try_from(m) {
            Ok(m) => methods.push(m),
            Err(e) => problems.push(format!("--methods: {e}")),
        }
    }
    if cfg.methods.is_empty() {
        problems.push("--methods: at least one method is needed".to_string());
    }
    if cfg.user.trim().is_empty() {
        problems.push("--user: must not be empty".to_string());
    }
    let onto = crate::commands::load_ontology_file(&cfg.ontology)
        .map_err(|e| problems.push(format!("--ontology: {e:#}")))
        .ok();
    let provider = nlu.load().map_err(|e| problems.push(format!("nlu resources: {e:#}"))).ok();
    match (onto, provider) {
        (Some(onto), Some(provider)) if problems.is_empty() => {
            let config = ontogrow::service::EngineConfig {
                method_policy: methods,
                user: cfg.user.clone(),
                journal: cfg.journal.clone(),
            };
            Ok(Engine::new(onto, Box::new(provider), config))
        }
        _ => Err(problems),
    }
}

/// Serves until ctrl-c. Journal lines are written as answers arrive, so
/// nothing is left to flush on the way out.
pub async fn serve(listener: tokio::net::TcpListener, engine: Engine) -> std::io::Result<()> {
    let app = router(Arc::new(Mutex::new(engine)));
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
