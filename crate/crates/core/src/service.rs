//! Local HTTP JSON API over registered ensembles.
//!
//! Datasets are immutable once registered; every stripe, detail, or SVG
//! response is a pure function of the dataset and the query, so results are
//! memoized in a small LRU keyed by both.

use std::collections::{BTreeMap, HashMap};
use std::io::Cursor;
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lru::LruCache;
use serde::{Deserialize, Serialize};

use crate::binning::{self, BinningKind, BinningMethod, EdgeScope, Histogram};
use crate::compose::{
    build_scene, fallback_bandwidth, render_svg, row_curve, ColorMode, ComposeError, Composition, CurveScaling,
    Layout, Normalization, SceneModel, SceneRequest,
};
use crate::density::{quantile_sorted, DensityCurve};
use crate::ingest::{self, EnsembleDataset, IngestError};

pub const DEFAULT_PORT: u16 = 8787;
pub const PORT_ENV: &str = "ACCUSTRIPES_PORT";
const CACHE_SCENES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
    pub field: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status, message: message.into(), field: None }
    }

    fn bad_param(field: &str, message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, message: message.into(), field: Some(field.to_string()) }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        let status = match e.root() {
            IngestError::Io(_) => StatusCode::NOT_FOUND,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let field = match e.root() {
            IngestError::MissingColumn(c) => Some(c.clone()),
            _ => None,
        };
        Self { status, message: e.to_string(), field }
    }
}

impl From<ComposeError> for ApiError {
    fn from(e: ComposeError) -> Self {
        let field = match &e {
            ComposeError::Binning(binning::BinningError::InvalidRange(_)) => Some("range".to_string()),
            _ => None,
        };
        Self { status: StatusCode::BAD_REQUEST, message: e.to_string(), field }
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody { error: &self.message, field: self.field.as_deref() };
        (self.status, Json(body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowInfo {
    pub label: String,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetMeta {
    pub id: String,
    pub property: String,
    pub row_count: usize,
    pub global_min: f64,
    pub global_max: f64,
    pub rows: Vec<RowInfo>,
}

pub struct DatasetEntry {
    pub meta: DatasetMeta,
    pub ensemble: EnsembleDataset,
}

/// Insert-only map of immutable datasets.
#[derive(Default)]
pub struct Registry {
    next: AtomicU64,
    entries: RwLock<HashMap<String, Arc<DatasetEntry>>>,
}

impl Registry {
    pub fn insert(&self, ensemble: EnsembleDataset) -> Arc<DatasetEntry> {
        let id = format!("ds{}", self.next.fetch_add(1, Ordering::SeqCst) + 1);
        let (lo, hi) = ingest::global_range(&ensemble);
        let meta = DatasetMeta {
            id: id.clone(),
            property: ensemble.property.clone(),
            row_count: ensemble.len(),
            global_min: lo,
            global_max: hi,
            rows: ensemble
                .rows()
                .iter()
                .map(|r| RowInfo { label: r.label.clone(), n: r.samples.len() })
                .collect(),
        };
        let entry = Arc::new(DatasetEntry { meta, ensemble });
        self.entries.write().expect("registry lock").insert(id, entry.clone());
        entry
    }

    pub fn get(&self, id: &str) -> Option<Arc<DatasetEntry>> {
        self.entries.read().expect("registry lock").get(id).cloned()
    }

    pub fn list(&self) -> Vec<DatasetMeta> {
        let mut metas: Vec<DatasetMeta> =
            self.entries.read().expect("registry lock").values().map(|e| e.meta.clone()).collect();
        metas.sort_by_key(|m| m.id.trim_start_matches("ds").parse::<u64>().unwrap_or(u64::MAX));
        metas
    }
}

pub struct AppState {
    pub registry: Registry,
    cache: Mutex<LruCache<String, Arc<String>>>,
    ui_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(ui_dir: Option<PathBuf>) -> Self {
        Self {
            registry: Registry::default(),
            cache: Mutex::new(LruCache::new(NonZeroUsize::new(CACHE_SCENES).unwrap())),
            ui_dir,
        }
    }

    fn cached(&self, key: &str, compute: impl FnOnce() -> ApiResult<String>) -> ApiResult<Arc<String>> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(key) {
            return Ok(hit.clone());
        }
        let value = Arc::new(compute()?);
        self.cache.lock().expect("cache lock").put(key.to_string(), value.clone());
        Ok(value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InlineSource {
    pub label: String,
    #[serde(default)]
    pub path: Option<String>,
    /// CSV text, used instead of `path`.
    #[serde(default)]
    pub csv: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadRequest {
    #[serde(default)]
    pub manifest: Option<String>,
    #[serde(default)]
    pub sources: Option<Vec<InlineSource>>,
    pub property: String,
}

pub fn handle_load(state: &AppState, req: LoadRequest) -> ApiResult<DatasetMeta> {
    let ensemble = match (&req.manifest, &req.sources) {
        (Some(path), None) => {
            let path = Path::new(path);
            if !path.is_file() {
                return Err(ApiError::not_found(format!("manifest `{}` not found", path.display())));
            }
            ingest::load_manifest(path, &req.property)?
        }
        (None, Some(sources)) => {
            let mut readers: Vec<(String, Box<dyn std::io::Read + Send>)> = Vec::new();
            for s in sources {
                let reader: Box<dyn std::io::Read + Send> = match (&s.csv, &s.path) {
                    (Some(text), _) => Box::new(Cursor::new(text.clone().into_bytes())),
                    (None, Some(p)) => Box::new(std::io::BufReader::new(std::fs::File::open(p).map_err(|e| {
                        ApiError::not_found(format!("source `{}`: cannot open `{p}`: {e}", s.label))
                    })?)),
                    (None, None) => {
                        return Err(ApiError::bad_param("sources", format!("source `{}` has no path or csv", s.label)))
                    }
                };
                readers.push((s.label.clone(), reader));
            }
            ingest::load_ensemble(readers, &req.property)?
        }
        _ => return Err(ApiError::bad_param("manifest", "give exactly one of `manifest` or `sources`")),
    };
    Ok(state.registry.insert(ensemble).meta.clone())
}

fn parse_f64(q: &BTreeMap<String, String>, field: &str) -> ApiResult<Option<f64>> {
    q.get(field)
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| ApiError::bad_param(field, format!("`{v}` is not a finite number")))
        })
        .transpose()
}

fn parse_enum<T: Copy>(q: &BTreeMap<String, String>, field: &str, options: &[(&str, T)], default: T) -> ApiResult<T> {
    match q.get(field) {
        None => Ok(default),
        Some(v) => options.iter().find(|(name, _)| name == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            ApiError::bad_param(field, format!("`{v}` is not one of {}", names.join(", ")))
        }),
    }
}

fn parse_method(q: &BTreeMap<String, String>) -> ApiResult<BinningMethod> {
    let kind = parse_enum(
        q,
        "method",
        &[
            ("uniform", BinningKind::Uniform),
            ("ub", BinningKind::Uniform),
            ("bb", BinningKind::BayesianBlocks),
            ("bayesianBlocks", BinningKind::BayesianBlocks),
            ("nb", BinningKind::NaturalBreaks),
            ("naturalBreaks", BinningKind::NaturalBreaks),
        ],
        BinningKind::Uniform,
    )?;
    let mut m = match kind {
        BinningKind::Uniform => BinningMethod::uniform(),
        BinningKind::BayesianBlocks => BinningMethod::bayesian_blocks(),
        BinningKind::NaturalBreaks => BinningMethod::natural_breaks(),
    };
    if let Some(p0) = parse_f64(q, "p0")? {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(ApiError::bad_param("p0", "p0 must lie in (0, 1)"));
        }
        m.p0 = p0;
    }
    if let Some(k) = q.get("classes") {
        let k: usize = k
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| ApiError::bad_param("classes", "classes must be a positive integer"))?;
        m.class_count = Some(k);
    }
    m.scope = parse_enum(q, "scope", &[("perRow", EdgeScope::PerRow), ("pooled", EdgeScope::Pooled)], EdgeScope::PerRow)?;
    if parse_enum(q, "exact", &[("true", true), ("false", false)], false)? {
        m.max_groups = None;
    }
    Ok(m)
}

fn parse_range(q: &BTreeMap<String, String>) -> ApiResult<Option<(f64, f64)>> {
    match (parse_f64(q, "lo")?, parse_f64(q, "hi")?) {
        (None, None) => Ok(None),
        (Some(lo), Some(hi)) if lo < hi => Ok(Some((lo, hi))),
        (Some(_), Some(_)) => Err(ApiError::bad_param("range", "need lo < hi")),
        (None, Some(_)) => Err(ApiError::bad_param("lo", "lo and hi must be given together")),
        (Some(_), None) => Err(ApiError::bad_param("hi", "lo and hi must be given together")),
    }
}

/// Parses the stripe query string into a scene request.
pub fn parse_scene_request(q: &BTreeMap<String, String>) -> ApiResult<SceneRequest> {
    Ok(SceneRequest {
        method: parse_method(q)?,
        composition: parse_enum(
            q,
            "composition",
            &[
                ("colorOnly", Composition::ColorOnly),
                ("overlay", Composition::Overlay),
                ("filledCurve", Composition::FilledCurve),
            ],
            Composition::ColorOnly,
        )?,
        color_mode: parse_enum(q, "colorMode", &[("linear", ColorMode::Linear), ("log1p", ColorMode::Log1p)], ColorMode::Linear)?,
        normalization: parse_enum(
            q,
            "normalization",
            &[("global", Normalization::Global), ("perRow", Normalization::PerRow)],
            Normalization::Global,
        )?,
        curve_scaling: parse_enum(
            q,
            "curveScaling",
            &[("perRow", CurveScaling::PerRow), ("global", CurveScaling::Global)],
            CurveScaling::PerRow,
        )?,
        range: parse_range(q)?,
        layout: Layout::default(),
    })
}

fn dataset(state: &AppState, id: &str) -> ApiResult<Arc<DatasetEntry>> {
    state.registry.get(id).ok_or_else(|| ApiError::not_found(format!("unknown dataset `{id}`")))
}

fn cache_key(kind: &str, id: &str, req: &SceneRequest) -> String {
    format!("{kind}:{id}:{}", serde_json::to_string(req).expect("request serializes"))
}

/// Scene JSON for the dataset.
pub fn handle_stripes(state: &AppState, id: &str, q: &BTreeMap<String, String>) -> ApiResult<Arc<String>> {
    let entry = dataset(state, id)?;
    let req = parse_scene_request(q)?;
    state.cached(&cache_key("scene", id, &req), || {
        let scene = build_scene(&entry.ensemble, &req)?;
        Ok(serde_json::to_string(&scene).expect("scene serializes"))
    })
}

pub fn handle_render_svg(state: &AppState, id: &str, q: &BTreeMap<String, String>) -> ApiResult<Arc<String>> {
    let entry = dataset(state, id)?;
    let req = parse_scene_request(q)?;
    state.cached(&cache_key("svg", id, &req), || {
        let scene: SceneModel = build_scene(&entry.ensemble, &req)?;
        Ok(render_svg(&scene)?)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowStats {
    pub n: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

impl RowStats {
    pub fn of_sorted(sorted: &[f64]) -> Self {
        if sorted.is_empty() {
            return Self { n: 0, min: None, max: None, mean: None, median: None };
        }
        Self {
            n: sorted.len(),
            min: Some(sorted[0]),
            max: Some(sorted[sorted.len() - 1]),
            mean: Some(sorted.iter().sum::<f64>() / sorted.len() as f64),
            median: Some(quantile_sorted(sorted, 0.5)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDetail {
    pub label: String,
    pub histogram: Histogram,
    pub curve: DensityCurve,
    pub stats: RowStats,
}

/// Histogram, density, and summary of one row, binned in the context of the
/// whole ensemble so it matches the stripe view.
pub fn handle_row_detail(state: &AppState, id: &str, row: usize, q: &BTreeMap<String, String>) -> ApiResult<RowDetail> {
    let entry = dataset(state, id)?;
    let ens = &entry.ensemble;
    if row >= ens.len() {
        return Err(ApiError::not_found(format!("row {row} out of range (dataset has {} rows)", ens.len())));
    }
    let method = parse_method(q)?;
    let range = parse_range(q)?;
    let hists = binning::bin_ensemble(ens, &method, range).map_err(ComposeError::from)?;
    let histogram = hists[row].clone();
    let samples = binning::filtered_sorted(&ens.rows()[row].samples, range);
    let (lo, hi) = histogram.range();
    let curve = row_curve(&samples, lo, hi, fallback_bandwidth(ens.global_min(), ens.global_max()))?;
    Ok(RowDetail {
        label: ens.rows()[row].label.clone(),
        histogram,
        curve,
        stats: RowStats::of_sorted(&samples),
    })
}

type Shared = Arc<AppState>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
}

fn json_body(body: Arc<String>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body.as_str().to_owned()).into_response()
}

async fn post_dataset(State(state): State<Shared>, Json(req): Json<LoadRequest>) -> ApiResult<Json<DatasetMeta>> {
    blocking(move || handle_load(&state, req)).await.map(Json)
}

async fn list_datasets(State(state): State<Shared>) -> Json<Vec<DatasetMeta>> {
    Json(state.registry.list())
}

async fn get_stripes(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    blocking(move || handle_stripes(&state, &id, &q)).await.map(json_body)
}

async fn get_svg(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Response> {
    let svg = blocking(move || handle_render_svg(&state, &id, &q)).await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], svg.as_str().to_owned()).into_response())
}

async fn get_row(
    State(state): State<Shared>,
    UrlPath((id, row)): UrlPath<(String, String)>,
    Query(q): Query<BTreeMap<String, String>>,
) -> ApiResult<Json<RowDetail>> {
    let row: usize = row.parse().map_err(|_| ApiError::not_found(format!("row `{row}` not found")))?;
    blocking(move || handle_row_detail(&state, &id, row, &q)).await.map(Json)
}

const PLACEHOLDER_INDEX: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>AccuStripes</title></head>\n<body><h1>AccuStripes service</h1><p>No UI assets configured. API endpoints: <code>POST /datasets</code>, <code>GET /datasets</code>, <code>GET /datasets/{id}/stripes</code>, <code>GET /datasets/{id}/rows/{i}</code>, <code>GET /datasets/{id}/render.svg</code>.</p></body></html>\n";

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js") | Some("mjs") => "text/javascript",
        Some("css") => "text/css",
        Some("json") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        _ => "application/octet-stream",
    }
}

fn static_file(state: &AppState, rel: &str) -> Response {
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let Some(dir) = &state.ui_dir else {
        return if rel == "index.html" {
            ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], PLACEHOLDER_INDEX).into_response()
        } else {
            StatusCode::NOT_FOUND.into_response()
        };
    };
    let rel_path = Path::new(rel);
    if rel_path.components().any(|c| !matches!(c, Component::Normal(_))) {
        return StatusCode::NOT_FOUND.into_response();
    }
    let full = dir.join(rel_path);
    match std::fs::read(&full) {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&full))], bytes).into_response(),
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

async fn index(State(state): State<Shared>) -> Response {
    static_file(&state, "")
}

async fn assets(State(state): State<Shared>, UrlPath(rel): UrlPath<String>) -> Response {
    static_file(&state, &rel)
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/datasets", post(post_dataset).get(list_datasets))
        .route("/datasets/{id}/stripes", get(get_stripes))
        .route("/datasets/{id}/rows/{row}", get(get_row))
        .route("/datasets/{id}/render.svg", get(get_svg))
        .route("/{*path}", get(assets))
        .with_state(state)
}

/// Serves until the process is interrupted.
pub async fn serve(addr: SocketAddr, state: Shared) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parses_defaults_and_rejects_bad_fields() {
        let req = parse_scene_request(&q(&[])).unwrap();
        assert_eq!(req.method.kind, BinningKind::Uniform);
        assert_eq!(req.composition, Composition::ColorOnly);

        let err = parse_scene_request(&q(&[("method", "foo")])).unwrap_err();
        assert_eq!(err.status, StatusCode::BAD_REQUEST);
        assert_eq!(err.field.as_deref(), Some("method"));

        let err = parse_scene_request(&q(&[("lo", "5"), ("hi", "1")])).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("range"));
        let err = parse_scene_request(&q(&[("lo", "5")])).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("hi"));
        let err = parse_scene_request(&q(&[("p0", "2")])).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("p0"));
    }

    #[test]
    fn ids_are_distinct_per_load() {
        let state = AppState::new(None);
        let load = || LoadRequest {
            manifest: None,
            sources: Some(vec![InlineSource { label: "a".into(), path: None, csv: Some("v\n1\n2\n".into()) }]),
            property: "v".into(),
        };
        let a = handle_load(&state, load()).unwrap();
        let b = handle_load(&state, load()).unwrap();
        assert_ne!(a.id, b.id);
        assert_eq!(state.registry.list().len(), 2);
    }

    #[test]
    fn row_stats_of_empty_and_odd() {
        assert_eq!(RowStats::of_sorted(&[]).n, 0);
        let s = RowStats::of_sorted(&[1.0, 2.0, 6.0]);
        assert_eq!((s.min, s.max, s.mean, s.median), (Some(1.0), Some(6.0), Some(3.0), Some(2.0)));
    }
}
