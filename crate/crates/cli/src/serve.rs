//! HTTP API for interactive exploration of a template.
//!
//! All endpoints take and return JSON. Request bodies are parsed by hand so
//! that malformed or ill-typed payloads answer 400; requests that are well
//! formed but produce a degenerate pattern, a failed sample or an unusable
//! mesh answer 422.

use std::collections::VecDeque;
use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use indexmap::IndexMap;
use patternforge_core::drape::DrapeError;
use patternforge_core::geometry::{eval_edge, panel_self_intersects};
use patternforge_core::params::{sampled_template, Values, DEFAULT_MAX_RETRIES};
use patternforge_core::pipeline::{drape_pattern, pattern_for_values, SPEC_FILE};
use patternforge_core::{
    apply_all, sample_pattern, scan_detailed, serialize_template, validate, BodyModel, Diagnostic, GarmentMesh,
    PatternSpec, ScanConfig, SimConfig, TemplateSpec,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::cors::CorsLayer;

use crate::commands::CliError;

/// Draped meshes kept for `/scan` by id.
pub const MESH_CACHE_SIZE: usize = 16;
/// Points per edge in `/pattern` polylines.
pub const POLYLINE_POINTS: usize = 17;

pub struct AppState {
    pub template: TemplateSpec,
    pub body: BodyModel,
    pub resolution: f64,
    pub save_dir: PathBuf,
    save_lock: Mutex<()>,
    meshes: Mutex<VecDeque<(String, Arc<GarmentMesh>)>>,
}

impl AppState {
    pub fn new(template: TemplateSpec, body: BodyModel, resolution: f64, save_dir: PathBuf) -> Self {
        Self {
            template,
            body,
            resolution,
            save_dir,
            save_lock: Mutex::new(()),
            meshes: Mutex::new(VecDeque::new()),
        }
    }

    /// Current template values overridden by `given`.
    fn resolve_values(&self, given: &IndexMap<String, f64>) -> Result<Values, ApiError> {
        if let Some(name) = given.keys().find(|n| self.template.parameter(n).is_none()) {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "unknown_parameter", format!("no parameter named '{name}'")));
        }
        Ok(self
            .template
            .ordered_parameters()
            .map(|r| (r.name.clone(), given.get(&r.name).copied().unwrap_or(r.value)))
            .collect())
    }

    fn remember(&self, id: &str, mesh: Arc<GarmentMesh>) {
        let mut cache = self.meshes.lock().unwrap_or_else(|e| e.into_inner());
        if cache.iter().any(|(k, _)| k == id) {
            return;
        }
        if cache.len() == MESH_CACHE_SIZE {
            cache.pop_front();
        }
        cache.push_back((id.to_string(), mesh));
    }

    fn cached(&self, id: &str) -> Option<Arc<GarmentMesh>> {
        let cache = self.meshes.lock().unwrap_or_else(|e| e.into_inner());
        cache.iter().find(|(k, _)| k == id).map(|(_, m)| m.clone())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl Display) -> Self {
        Self { status, body: json!({ "error": kind, "message": message.to_string() }) }
    }

    fn with_diagnostics(mut self, diags: &[Diagnostic]) -> Self {
        self.body["diagnostics"] = json!(diags);
        self
    }

    fn internal(message: impl Display) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

/// An empty body counts as `{}`.
fn parse_body<T: DeserializeOwned + Default>(bytes: &Bytes) -> Result<T, ApiError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "schema", e))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ValuesRequest {
    values: IndexMap<String, f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SampleRequest {
    seed: u64,
    max_retries: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DrapeRequest {
    values: IndexMap<String, f64>,
    sim: SimConfig,
    resolution: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ScanRequest {
    mesh_id: Option<String>,
    mesh: Option<GarmentMesh>,
    threshold: Option<f64>,
    rays_per_face: Option<u32>,
    seed: u64,
    /// Include the body as an occluder.
    body: bool,
}

impl Default for ScanRequest {
    fn default() -> Self {
        Self { mesh_id: None, mesh: None, threshold: None, rays_per_face: None, seed: 0, body: true }
    }
}

fn unprocessable(kind: &str, message: impl Display) -> ApiError {
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, kind, message)
}

/// 2D outline of every edge, in panel coordinates.
fn polylines(p: &PatternSpec) -> Result<Value, ApiError> {
    let mut out = serde_json::Map::new();
    for panel in &p.panels {
        let mut edges = Vec::with_capacity(panel.edges.len());
        for e in 0..panel.edges.len() {
            let mut pts = Vec::with_capacity(POLYLINE_POINTS);
            for k in 0..POLYLINE_POINTS {
                let t = k as f64 / (POLYLINE_POINTS - 1) as f64;
                let v = eval_edge(panel, e, t).map_err(|err| unprocessable("geometry", err))?;
                pts.push([v.x, v.y]);
            }
            edges.push(pts);
        }
        out.insert(panel.name.clone(), json!(edges));
    }
    Ok(Value::Object(out))
}

fn self_intersecting(p: &PatternSpec) -> Vec<&str> {
    p.panels.iter().filter(|panel| panel_self_intersects(panel)).map(|panel| panel.name.as_str()).collect()
}

fn pattern_response(values: &Values, pattern: &PatternSpec) -> ApiResult {
    Ok(Json(json!({
        "values": values,
        "pattern": pattern,
        "polylines": polylines(pattern)?,
        "self_intersecting": self_intersecting(pattern),
    })))
}

async fn get_template(State(s): State<Arc<AppState>>) -> ApiResult {
    let doc = serde_json::from_str(&serialize_template(&s.template)).map_err(ApiError::internal)?;
    Ok(Json(doc))
}

async fn post_pattern(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: ValuesRequest = parse_body(&body)?;
    let values = s.resolve_values(&req.values)?;
    let applied = apply_all(&s.template, &values).map_err(|e| unprocessable("degenerate", e))?;
    let diags = validate(&applied.pattern);
    if patternforge_core::validate::has_errors(&diags) {
        return Err(unprocessable("invalid_pattern", "the parameter values produce an invalid pattern")
            .with_diagnostics(&diags));
    }
    pattern_response(&values, &applied.pattern)
}

async fn post_sample(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: SampleRequest = parse_body(&body)?;
    let retries = req.max_retries.unwrap_or(DEFAULT_MAX_RETRIES);
    let (pattern, record) =
        sample_pattern(&s.template, req.seed, retries).map_err(|e| unprocessable("sampling_failed", e))?;
    let Json(mut out) = pattern_response(&record.values, &pattern)?;
    out["seed"] = json!(req.seed);
    out["retries"] = json!(record.retries);
    Ok(Json(out))
}

fn mesh_id(values: &Values, sim: &SimConfig, resolution: f64) -> String {
    let key = json!({ "values": values, "sim": sim, "resolution": resolution }).to_string();
    hex::encode(&Sha256::digest(key.as_bytes())[..8])
}

async fn post_drape(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: DrapeRequest = parse_body(&body)?;
    let values = s.resolve_values(&req.values)?;
    req.sim.check().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "sim_config", e))?;
    let resolution = req.resolution.unwrap_or(s.resolution);
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "resolution", DrapeError::InvalidResolution(resolution)));
    }
    let (pattern, _) = pattern_for_values(&s.template, &values, 0).map_err(|e| unprocessable("degenerate", e))?;
    let id = mesh_id(&values, &req.sim, resolution);
    let state = s.clone();
    let sim = req.sim;
    let draped = tokio::task::spawn_blocking(move || drape_pattern(&pattern, &state.body, resolution, &sim))
        .await
        .map_err(ApiError::internal)?
        .map_err(|e| unprocessable("drape_failed", e))?;
    let mesh = Arc::new(draped.mesh);
    s.remember(&id, mesh.clone());
    let mut out = serde_json::to_value(&*mesh).map_err(ApiError::internal)?;
    out["mesh_id"] = json!(id);
    out["report"] = json!(draped.report);
    out["warnings"] = json!(draped.warnings);
    Ok(Json(out))
}

fn check_mesh(g: &GarmentMesh) -> Result<(), ApiError> {
    let bad = |m: String| Err(ApiError::new(StatusCode::BAD_REQUEST, "mesh", m));
    if g.labels.len() != g.vertices.len() {
        return bad(format!("{} labels for {} vertices", g.labels.len(), g.vertices.len()));
    }
    if let Some(t) = g.triangles.iter().find(|t| t.iter().any(|&i| i >= g.vertices.len())) {
        return bad(format!("triangle {t:?} references a missing vertex"));
    }
    if g.vertices.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
        return bad("non-finite vertex coordinate".into());
    }
    Ok(())
}

async fn post_scan(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: ScanRequest = parse_body(&body)?;
    let mesh = match (req.mesh_id, req.mesh) {
        (Some(id), None) => s
            .cached(&id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown_mesh", format!("no draped mesh with id '{id}'")))?,
        (None, Some(m)) => {
            check_mesh(&m)?;
            Arc::new(m)
        }
        _ => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "schema", "give exactly one of mesh_id and mesh"));
        }
    };
    let defaults = ScanConfig::default();
    let cfg = ScanConfig {
        rays_per_face: req.rays_per_face.unwrap_or(defaults.rays_per_face),
        visible_fraction_threshold: req.threshold.unwrap_or(defaults.visible_fraction_threshold),
        seed: req.seed,
    };
    cfg.check().map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "scan_config", e))?;
    let state = s.clone();
    let use_body = req.body;
    let input = mesh.clone();
    let r = tokio::task::spawn_blocking(move || {
        scan_detailed(&input, use_body.then_some(&state.body), &cfg)
    })
    .await
    .map_err(ApiError::internal)?
    .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "scan_config", e))?;
    let mut out = serde_json::to_value(&r.mesh).map_err(ApiError::internal)?;
    out["faces_in"] = json!(mesh.face_count());
    out["removed_faces"] = json!(r.removed_faces());
    Ok(Json(out))
}

async fn post_save(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let req: ValuesRequest = parse_body(&body)?;
    let values = s.resolve_values(&req.values)?;
    let (pattern, record) = pattern_for_values(&s.template, &values, 0).map_err(|e| unprocessable("degenerate", e))?;
    let doc = serialize_template(&sampled_template(&s.template, pattern, record));

    let _guard = s.save_lock.lock().unwrap_or_else(|e| e.into_inner());
    fs::create_dir_all(&s.save_dir).map_err(|e| ApiError::internal(format!("{}: {e}", s.save_dir.display())))?;
    let dir = (0u32..)
        .map(|n| s.save_dir.join(format!("sample_{n:05}")))
        .find(|d| !d.exists())
        .expect("free sample directory");
    fs::create_dir(&dir).map_err(|e| ApiError::internal(format!("{}: {e}", dir.display())))?;
    let path = dir.join(SPEC_FILE);
    fs::write(&path, doc).map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
    Ok(Json(json!({ "path": path, "directory": dir })))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/template", get(get_template))
        .route("/pattern", post(post_pattern))
        .route("/sample", post(post_sample))
        .route("/drape", post(post_drape))
        .route("/scan", post(post_scan))
        .route("/save", post(post_save))
        .with_state(state)
        .layer(CorsLayer::permissive())
}

/// Bind and serve until the process is stopped.
pub fn serve_blocking(host: &str, port: u16, state: AppState) -> Result<i32, CliError> {
    let addr = format!("{host}:{port}");
    let io = |source| CliError::Io { path: addr.clone(), source };
    let rt = tokio::runtime::Runtime::new().map_err(io)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(io)?;
        eprintln!("listening on http://{}", listener.local_addr().map_err(io)?);
        axum::serve(listener, router(Arc::new(state))).await.map_err(io)?;
        Ok(0)
    })
}
