//! HTTP interface: project creation, descriptor upload, data upload (single
//! and bulk), schema and graph inspection.
//!
//! Every non-2xx response carries one [`ApiError`] as its body.

mod config;
mod error;

use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, FromRequestParts, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use schemagraph_core::descriptor::{MetaSchema, Role};
use schemagraph_core::graph::get_node;
use schemagraph_core::project::{ProjectManager, SharedProject, StoreConfig};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

pub use config::{Args, Config, FileConfig, DEFAULT_LISTEN};
pub use error::ApiError;

/// Largest accepted request body.
pub const BODY_LIMIT: usize = 256 * 1024 * 1024;

#[derive(Clone)]
pub struct AppState {
    pub manager: Arc<ProjectManager>,
}

impl AppState {
    pub fn new(manager: ProjectManager) -> Self {
        Self {
            manager: Arc::new(manager),
        }
    }

    fn project(&self, name: &str) -> Result<SharedProject, ApiError> {
        Ok(self.manager.get(name)?)
    }
}

/// Path parameters with an [`ApiError`] rejection.
pub struct Param<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for Param<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        let axum::extract::Path(value) =
            axum::extract::Path::<T>::from_request_parts(parts, state).await?;
        Ok(Param(value))
    }
}

/// Request body parsed as JSON regardless of the declared content type.
pub struct JsonBody(pub Value);

impl<S: Send + Sync> FromRequest<S> for JsonBody {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        let bytes = Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::new(e.status(), "unreadable_body", e.body_text()))?;
        serde_json::from_slice(&bytes)
            .map(JsonBody)
            .map_err(ApiError::malformed_json)
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

fn created(body: Value) -> Response {
    (StatusCode::CREATED, Json(body)).into_response()
}

fn json_bytes(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], bytes).into_response()
}

#[derive(Deserialize)]
struct NewProject {
    name: String,
}

async fn create_project(State(state): State<AppState>, JsonBody(body): JsonBody) -> ApiResult {
    let request: NewProject = serde_json::from_value(body).map_err(|e| {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_request",
            format!("expected {{\"name\": string}}: {e}"),
        )
        .at("/name")
    })?;
    let project = state.manager.create_project(&request.name)?;
    let summary = project.read().summary();
    Ok(created(json!(summary)))
}

async fn list_projects(State(state): State<AppState>) -> Json<Value> {
    Json(json!(state.manager.summaries()))
}

async fn project_summary(
    State(state): State<AppState>,
    Param(p): Param<String>,
) -> ApiResult<Json<Value>> {
    let project = state.project(&p)?;
    let summary = project.read().summary();
    Ok(Json(json!(summary)))
}

async fn upload_descriptor(
    State(state): State<AppState>,
    Param(p): Param<String>,
    JsonBody(body): JsonBody,
) -> ApiResult {
    let project = state.project(&p)?;
    let registration = project.write().register_descriptor(&body)?;
    Ok(created(json!(registration)))
}

async fn list_descriptors(
    State(state): State<AppState>,
    Param(p): Param<String>,
) -> ApiResult<Json<Value>> {
    let project = state.project(&p)?;
    let project = project.read();
    let ontology = project.ontology();
    let list: Vec<Value> = ontology
        .titles()
        .map(|t| {
            let entry = ontology.entry(t).expect("listed titles exist");
            json!({"title": t, "role": entry.descriptor.role(), "id": entry.descriptor.id, "bulk_id": entry.bulk_uri})
        })
        .collect();
    Ok(Json(Value::Array(list)))
}

fn unknown_descriptor(title: &str) -> ApiError {
    ApiError::new(
        StatusCode::NOT_FOUND,
        "unknown_descriptor",
        format!("no descriptor titled {title:?}"),
    )
}

async fn get_descriptor(
    State(state): State<AppState>,
    Param((p, title)): Param<(String, String)>,
) -> ApiResult<Json<Value>> {
    let project = state.project(&p)?;
    let project = project.read();
    let entry = project
        .ontology()
        .entry(&title)
        .ok_or_else(|| unknown_descriptor(&title))?;
    Ok(Json(entry.descriptor.body.clone()))
}

async fn get_bulk_descriptor(
    State(state): State<AppState>,
    Param((p, title)): Param<(String, String)>,
) -> ApiResult<Json<Value>> {
    let project = state.project(&p)?;
    let project = project.read();
    let entry = project
        .ontology()
        .entry(&title)
        .ok_or_else(|| unknown_descriptor(&title))?;
    Ok(Json(entry.bulk.clone()))
}

async fn get_schema(
    State(state): State<AppState>,
    Param(p): Param<String>,
) -> ApiResult<Json<Value>> {
    let project = state.project(&p)?;
    let graph = project.read().ontology().reachability_graph();
    Ok(Json(json!(graph)))
}

async fn upload_data(
    State(state): State<AppState>,
    Param((p, title)): Param<(String, String)>,
    JsonBody(body): JsonBody,
) -> ApiResult {
    let project = state.project(&p)?;
    let key = project.write().upload(&title, body)?;
    Ok(created(json!({"label": key.label, "id": key.id})))
}

async fn upload_bulk(
    State(state): State<AppState>,
    Param((p, title)): Param<(String, String)>,
    JsonBody(body): JsonBody,
) -> ApiResult {
    let project = state.project(&p)?;
    let inserted = project.write().upload_bulk(&title, body)?;
    Ok(created(json!({"inserted": inserted})))
}

async fn graph_node(
    State(state): State<AppState>,
    Param((p, label, id)): Param<(String, String, String)>,
) -> ApiResult<Json<Value>> {
    let project = state.project(&p)?;
    let project = project.read();
    if project.ontology().role(&label) == Some(Role::Edge) {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_label",
            format!("{label:?} is an edge label, not a node label"),
        ));
    }
    match get_node(project.graph(), project.ontology(), &label, &id)? {
        Some(view) => Ok(Json(json!(view))),
        None => Err(ApiError::new(
            StatusCode::NOT_FOUND,
            "unknown_node",
            format!("no {label} node with id {id:?}"),
        )),
    }
}

async fn graph_export(State(state): State<AppState>, Param(p): Param<String>) -> ApiResult {
    let project = state.project(&p)?;
    let bytes = project.read().graph().export().to_bytes();
    Ok(json_bytes(bytes))
}

async fn meta_schema(
    State(state): State<AppState>,
    Param((dir, file)): Param<(String, String)>,
) -> ApiResult {
    let meta: &MetaSchema = state.manager.meta();
    let path = format!("{dir}/{file}");
    meta.by_path(&path)
        .map(|doc| json_bytes(doc.source.as_bytes().to_vec()))
        .ok_or_else(|| ApiError::not_found(format!("no bundled schema at /schemas/{path}")))
}

async fn no_route(request: Request) -> ApiError {
    ApiError::not_found(format!(
        "no route for {} {}",
        request.method(),
        request.uri().path()
    ))
}

async fn wrong_method(request: Request) -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "method_not_allowed",
        format!(
            "{} is not supported on {}",
            request.method(),
            request.uri().path()
        ),
    )
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{p}", get(project_summary))
        .route(
            "/projects/{p}/descriptors",
            post(upload_descriptor).get(list_descriptors),
        )
        .route("/projects/{p}/descriptors/{title}", get(get_descriptor))
        .route(
            "/projects/{p}/descriptors/{title}/bulk",
            get(get_bulk_descriptor),
        )
        .route("/projects/{p}/schema", get(get_schema))
        .route("/projects/{p}/data/{title}", post(upload_data))
        .route("/projects/{p}/data/{title}/bulk", post(upload_bulk))
        .route("/projects/{p}/graph/nodes/{label}/{id}", get(graph_node))
        .route("/projects/{p}/graph/export", get(graph_export))
        .route("/schemas/{dir}/{file}", get(meta_schema))
        .fallback(no_route)
        .method_not_allowed_fallback(wrong_method)
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}

/// A server on its own thread and runtime, stopped on drop. Used by the
/// test suites and the benchmark harness.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl BackgroundServer {
    pub fn start(store: StoreConfig, listen: SocketAddr) -> anyhow::Result<Self> {
        let manager = ProjectManager::open(store)?;
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()?;
        let listener = runtime.block_on(TcpListener::bind(listen))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(serve(listener, AppState::new(manager), async {
                let _ = stopped.await;
            }))
        });
        Ok(Self {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    /// Ephemeral loopback port.
    pub fn start_local(store: StoreConfig) -> anyhow::Result<Self> {
        Self::start(store, SocketAddr::from(([127, 0, 0, 1], 0)))
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting, drains in-flight requests and waits for the thread.
    pub fn shutdown(mut self) -> anyhow::Result<()> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> anyhow::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(thread) = self.thread.take() {
            thread
                .join()
                .map_err(|_| anyhow::anyhow!("server thread panicked"))??;
        }
        Ok(())
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}
