//! HTTP JSON session service.
//!
//! Each session owns one problem and its mutable statement list. Mutations
//! within a session run one at a time; sampling runs on a background thread
//! and reports progress through atomics.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use hchoquet_core::dataio::{self, Problem, ProblemDocument};
use hchoquet_core::preference::NapRelation;
use hchoquet_core::smaa::{RunControl, SamplerConfig, SmaaResult};
use hchoquet_core::{NodeId, PreferenceStatement};

use crate::engine::{self, ConsistencyReport, EngineError, ErrorCode, ErrorRecord};

/// Environment variable read by `serve` when no bind flag is given.
pub const BIND_ENV: &str = "HCHOQUET_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

pub struct ApiError(EngineError);

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        Self(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self(EngineError::bad_request(e.body_text()))
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self(EngineError::bad_request(e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.code {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Unprocessable => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorRecord { error: self.0 })).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Lifecycle of the session's sampling job.
#[derive(Debug, Clone)]
enum JobState {
    Idle,
    Running,
    Done(Arc<SmaaResult>),
    Failed(EngineError),
    Cancelled,
}

struct Job {
    state: JobState,
    /// Bumped on every start and invalidation; a finishing run only publishes
    /// its result when the generation it started with is still current.
    generation: u64,
    cancel: Arc<AtomicBool>,
    done: Arc<AtomicUsize>,
    total: usize,
}

impl Job {
    fn new() -> Self {
        Self {
            state: JobState::Idle,
            generation: 0,
            cancel: Arc::new(AtomicBool::new(false)),
            done: Arc::new(AtomicUsize::new(0)),
            total: 0,
        }
    }

    /// Cancels any running sample and forgets the last result.
    fn invalidate(&mut self) {
        self.cancel.store(true, Ordering::Relaxed);
        self.generation += 1;
        self.state = JobState::Idle;
    }

    fn status(&self) -> JobStatus {
        let done = self.done.load(Ordering::Relaxed).min(self.total);
        let fraction = if self.total == 0 { 0.0 } else { done as f64 / self.total as f64 };
        match &self.state {
            JobState::Idle => JobStatus::Idle,
            JobState::Running => JobStatus::Running {
                done,
                total: self.total,
                fraction,
            },
            JobState::Done(r) => JobStatus::Done {
                sample_count: r.sample_count,
                fraction: 1.0,
            },
            JobState::Failed(e) => JobStatus::Failed { error: e.clone() },
            JobState::Cancelled => JobStatus::Cancelled { done, total: self.total },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum JobStatus {
    Idle,
    Running { done: usize, total: usize, fraction: f64 },
    Done { sample_count: usize, fraction: f64 },
    Failed { error: EngineError },
    Cancelled { done: usize, total: usize },
}

#[derive(Default)]
struct SessionData {
    problem: Option<Problem>,
    version: u64,
    consistency: Option<ConsistencyReport>,
    nap: HashMap<NodeId, NapRelation>,
}

impl SessionData {
    fn problem(&self) -> Result<&Problem, EngineError> {
        self.problem
            .as_ref()
            .ok_or_else(|| EngineError::conflict("no problem uploaded to this session"))
    }
}

struct Session {
    data: tokio::sync::Mutex<SessionData>,
    job: Arc<Mutex<Job>>,
}

impl Session {
    fn job(&self) -> std::sync::MutexGuard<'_, Job> {
        self.job.lock().unwrap_or_else(|p| p.into_inner())
    }
}

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    fn session(&self, id: &str) -> Result<Arc<Session>, EngineError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::not_found(format!("no session `{id}`")))
    }
}

type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/case-study", get(case_study_document))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_summary).delete(delete_session))
        .route("/sessions/{id}/problem", get(get_problem).put(put_problem))
        .route("/sessions/{id}/statements", get(list_statements).post(add_statement))
        .route("/sessions/{id}/statements/{index}", delete(remove_statement))
        .route("/sessions/{id}/consistency", get(get_consistency))
        .route("/sessions/{id}/diagnostic", get(get_consistency))
        .route("/sessions/{id}/dominance", get(get_dominance))
        .route("/sessions/{id}/nap", get(get_nap))
        .route("/sessions/{id}/smaa", post(start_smaa).get(smaa_status).delete(cancel_smaa))
        .route("/sessions/{id}/smaa/result", get(smaa_result))
        .route("/sessions/{id}/ranking", get(get_ranking))
        .route("/sessions/{id}/report", get(get_report))
        .fallback(|| async { ApiError(EngineError::not_found("no such endpoint")) })
        .with_state(state)
}

/// Serves on a bound listener until interrupted.
pub async fn serve(listener: tokio::net::TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::default()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Runs CPU-bound engine work off the async executor.
async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, EngineError> + Send + 'static,
) -> Result<T, EngineError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| EngineError::new(ErrorCode::Internal, e.to_string()))?
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn case_study_document() -> Json<ProblemDocument> {
    Json(dataio::case_study().to_document())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
}

async fn create_session(State(state): State<Shared>) -> (StatusCode, Json<Created>) {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Arc::new(Session {
        data: tokio::sync::Mutex::new(SessionData::default()),
        job: Arc::new(Mutex::new(Job::new())),
    });
    state
        .sessions
        .write()
        .unwrap_or_else(|p| p.into_inner())
        .insert(id.clone(), session);
    (StatusCode::CREATED, Json(Created { id }))
}

async fn delete_session(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    let removed = state.sessions.write().unwrap_or_else(|p| p.into_inner()).remove(&id);
    let session = removed.ok_or_else(|| EngineError::not_found(format!("no session `{id}`")))?;
    session.job().invalidate();
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub problem: Option<String>,
    pub version: u64,
    pub statements: usize,
    pub consistency: Option<ConsistencyReport>,
    pub job: JobStatus,
}

async fn session_summary(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    let session = state.session(&id)?;
    let data = session.data.lock().await;
    let job = session.job().status();
    Ok(Json(SessionSummary {
        id,
        problem: data.problem.as_ref().map(|p| p.name.clone()),
        version: data.version,
        statements: data.problem.as_ref().map_or(0, |p| p.statements.len()),
        consistency: data.consistency.clone(),
        job,
    }))
}

/// Statement list with the consistency of the current set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementsView {
    pub version: u64,
    pub statements: Vec<PreferenceStatement>,
    pub feasible: bool,
    pub eps_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<hchoquet_core::preference::Diagnostic>,
}

fn statements_view(data: &SessionData) -> Result<StatementsView, EngineError> {
    let problem = data.problem()?;
    let c = data
        .consistency
        .clone()
        .ok_or_else(|| EngineError::new(ErrorCode::Internal, "consistency not computed"))?;
    Ok(StatementsView {
        version: data.version,
        statements: problem.statements.clone(),
        feasible: c.feasible,
        eps_star: c.eps_star,
        diagnostic: c.diagnostic,
    })
}

/// Installs `problem`, recomputes consistency and drops every cached result.
async fn replace_problem(session: &Session, data: &mut SessionData, problem: Problem) -> Result<(), EngineError> {
    let probe = problem.clone();
    let report = blocking(move || engine::consistency(&probe)).await?;
    data.problem = Some(problem);
    data.consistency = Some(report);
    data.version += 1;
    data.nap.clear();
    session.job().invalidate();
    Ok(())
}

async fn put_problem(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<ProblemDocument>, JsonRejection>,
) -> ApiResult<Json<StatementsView>> {
    let session = state.session(&id)?;
    let Json(doc) = body?;
    if doc.table.csv.is_none() {
        return Err(EngineError::bad_request("the table must be embedded as `table.csv`").into());
    }
    let problem = dataio::load_problem(&doc, None).map_err(EngineError::from)?;
    let mut data = session.data.lock().await;
    replace_problem(&session, &mut data, problem).await?;
    Ok(Json(statements_view(&data)?))
}

async fn get_problem(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<ProblemDocument>> {
    let session = state.session(&id)?;
    let data = session.data.lock().await;
    Ok(Json(data.problem()?.to_document()))
}

async fn list_statements(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<StatementsView>> {
    let session = state.session(&id)?;
    let data = session.data.lock().await;
    Ok(Json(statements_view(&data)?))
}

async fn add_statement(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<PreferenceStatement>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<StatementsView>)> {
    let session = state.session(&id)?;
    let Json(statement) = body?;
    let mut data = session.data.lock().await;
    let problem = data.problem()?;
    let mut statements = problem.statements.clone();
    statements.push(statement);
    let updated = problem.with_statements(statements).map_err(EngineError::from)?;
    replace_problem(&session, &mut data, updated).await?;
    Ok((StatusCode::CREATED, Json(statements_view(&data)?)))
}

async fn remove_statement(
    State(state): State<Shared>,
    Path((id, index)): Path<(String, usize)>,
) -> ApiResult<Json<StatementsView>> {
    let session = state.session(&id)?;
    let mut data = session.data.lock().await;
    let problem = data.problem()?;
    if index >= problem.statements.len() {
        return Err(EngineError::not_found(format!("no statement at index {index}")).into());
    }
    let mut statements = problem.statements.clone();
    statements.remove(index);
    let updated = problem.with_statements(statements).map_err(EngineError::from)?;
    replace_problem(&session, &mut data, updated).await?;
    Ok(Json(statements_view(&data)?))
}

async fn get_consistency(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<ConsistencyReport>> {
    let session = state.session(&id)?;
    let data = session.data.lock().await;
    data.problem()?;
    let report = data
        .consistency
        .clone()
        .ok_or_else(|| EngineError::new(ErrorCode::Internal, "consistency not computed"))?;
    Ok(Json(report))
}

async fn get_dominance(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<engine::DominanceReport>> {
    let session = state.session(&id)?;
    let data = session.data.lock().await;
    Ok(Json(engine::dominance_report(data.problem()?)))
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct NodeQuery {
    pub node: Option<String>,
}

async fn get_nap(
    State(state): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<NodeQuery>, QueryRejection>,
) -> ApiResult<Json<NapRelation>> {
    let session = state.session(&id)?;
    let Query(query) = query?;
    let mut data = session.data.lock().await;
    let problem = data.problem()?.clone();
    let node = engine::resolve_nodes(&problem.hierarchy, &[query.node.unwrap_or_else(|| "root".into())])?.remove(0);
    if let Some(cached) = data.nap.get(&node) {
        return Ok(Json(cached.clone()));
    }
    let target = node.clone();
    let relation = blocking(move || engine::nap(&problem, &[target]).map(|mut v| v.remove(0))).await?;
    data.nap.insert(node, relation.clone());
    Ok(Json(relation))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SmaaRequest {
    pub config: SamplerConfig,
    /// Node names or paths; every internal node when empty.
    pub nodes: Vec<String>,
}

async fn start_smaa(
    State(state): State<Shared>,
    Path(id): Path<String>,
    body: Result<Json<SmaaRequest>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<JobStatus>)> {
    let session = state.session(&id)?;
    let Json(request) = body?;
    request.config.validate().map_err(EngineError::from)?;
    let data = session.data.lock().await;
    let problem = data.problem()?.clone();
    if !data.consistency.as_ref().is_some_and(|c| c.feasible) {
        return Err(EngineError::new(ErrorCode::Unprocessable, "the statements are inconsistent").into());
    }
    let nodes = engine::resolve_nodes(&problem.hierarchy, &request.nodes)?;
    let (generation, cancel, done) = {
        let mut job = session.job();
        if matches!(job.state, JobState::Running) {
            return Err(EngineError::conflict("a sampling job is already running").into());
        }
        job.generation += 1;
        job.cancel = Arc::new(AtomicBool::new(false));
        job.done = Arc::new(AtomicUsize::new(0));
        job.total = request.config.sample_count;
        job.state = JobState::Running;
        (job.generation, job.cancel.clone(), job.done.clone())
    };
    drop(data);
    let slot = session.job.clone();
    let cfg = request.config;
    std::thread::spawn(move || {
        let progress = |n: usize, _total: usize| {
            done.fetch_max(n, Ordering::Relaxed);
        };
        let control = RunControl {
            progress: Some(&progress),
            cancel: Some(&cancel),
        };
        let outcome = engine::smaa(&problem, &nodes, &cfg, control);
        let mut job = slot.lock().unwrap_or_else(|p| p.into_inner());
        if job.generation != generation {
            return;
        }
        job.state = match outcome {
            Ok(result) => {
                done.store(result.sample_count, Ordering::Relaxed);
                JobState::Done(Arc::new(result))
            }
            Err(_) if cancel.load(Ordering::Relaxed) => JobState::Cancelled,
            Err(e) => JobState::Failed(e),
        };
    });
    let status = session.job().status();
    Ok((StatusCode::ACCEPTED, Json(status)))
}

async fn smaa_status(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<JobStatus>> {
    let session = state.session(&id)?;
    let status = session.job().status();
    Ok(Json(status))
}

async fn cancel_smaa(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<JobStatus>> {
    let session = state.session(&id)?;
    let mut job = session.job();
    if matches!(job.state, JobState::Running) {
        job.cancel.store(true, Ordering::Relaxed);
        job.generation += 1;
        job.state = JobState::Cancelled;
    }
    Ok(Json(job.status()))
}

fn finished_result(session: &Session) -> Result<Arc<SmaaResult>, EngineError> {
    match &session.job().state {
        JobState::Done(r) => Ok(r.clone()),
        JobState::Running => Err(EngineError::conflict("the sampling job is still running")),
        JobState::Failed(e) => Err(e.clone()),
        JobState::Idle | JobState::Cancelled => Err(EngineError::not_found("no sampling result for the current statements")),
    }
}

async fn smaa_result(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<SmaaResult>> {
    let session = state.session(&id)?;
    Ok(Json((*finished_result(&session)?).clone()))
}

async fn get_ranking(
    State(state): State<Shared>,
    Path(id): Path<String>,
    query: Result<Query<NodeQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<hchoquet_core::smaa::NodeRanking>>> {
    let session = state.session(&id)?;
    let Query(query) = query?;
    let data = session.data.lock().await;
    let problem = data.problem()?;
    let result = finished_result(&session)?;
    let nodes = match query.node {
        Some(n) => engine::resolve_nodes(&problem.hierarchy, &[n])?,
        None => Vec::new(),
    };
    Ok(Json(engine::rankings(problem, &result, &nodes)?))
}

async fn get_report(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<engine::Report>> {
    let session = state.session(&id)?;
    let data = session.data.lock().await;
    let problem = data.problem()?;
    let result = finished_result(&session)?;
    let rankings = engine::rankings(problem, &result, &[])?;
    Ok(Json(engine::report(problem, &result, &rankings)))
}
