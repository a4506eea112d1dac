//! Router, shared state and handlers.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::header::{CACHE_CONTROL, CONTENT_TYPE, ETAG, IF_NONE_MATCH};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use timeatlas_core::geo::{GeoBounds, TileAddress, MAX_ZOOM};
use timeatlas_core::georectify::{
    fit_transform, parse_transform_kind, residual_report, ControlPointPair, GeorectifyError, Transform2D,
};
use timeatlas_core::store::{Store, StoreError};
use timeatlas_core::tiling::{render_tile, TileConfig};
use timeatlas_core::Date;
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::config::ServiceConfig;
use crate::models::{ModelError, ModelMetadata, ModelRepo};
use crate::ServerError;

pub const MVT_CONTENT_TYPE: &str = "application/vnd.mapbox-vector-tile";
pub const GLB_CONTENT_TYPE: &str = "model/gltf-binary";
/// Cap on JSON request bodies (feature batches, warp fits).
pub const MAX_JSON_BYTES: usize = 64 * 1024 * 1024;

type TileKey = (TileAddress, Option<Date>);

/// Rendered tiles for one snapshot version, evicted oldest first.
#[derive(Default)]
struct TileCache {
    version: u64,
    tiles: HashMap<TileKey, Bytes>,
    order: VecDeque<TileKey>,
}

impl TileCache {
    fn get(&mut self, version: u64, key: &TileKey) -> Option<Bytes> {
        if self.version != version {
            self.tiles.clear();
            self.order.clear();
            self.version = version;
        }
        self.tiles.get(key).cloned()
    }

    fn put(&mut self, version: u64, key: TileKey, tile: Bytes, capacity: usize) {
        if self.version != version || capacity == 0 {
            return;
        }
        while self.tiles.len() >= capacity {
            match self.order.pop_front() {
                Some(old) => {
                    self.tiles.remove(&old);
                }
                None => break,
            }
        }
        if self.tiles.insert(key, tile).is_none() {
            self.order.push_back(key);
        }
    }
}

pub struct AppState {
    pub store: Arc<Store>,
    pub models: ModelRepo,
    pub config: ServiceConfig,
    cache: Mutex<TileCache>,
}

impl AppState {
    /// Opens the feature log and model repository under the data directory.
    pub fn open(config: ServiceConfig) -> Result<Self, ServerError> {
        config.ensure_data_dir()?;
        let store = Store::open(&config.data_dir.join("features.ndjson"))?;
        let models = ModelRepo::open(&config.data_dir.join("models"))?;
        Ok(Self::new(Arc::new(store), models, config))
    }

    pub fn new(store: Arc<Store>, models: ModelRepo, config: ServiceConfig) -> Self {
        Self {
            store,
            models,
            config,
            cache: Mutex::new(TileCache::default()),
        }
    }
}

/// JSON error body `{"error": message, ...details}` with a status.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl std::fmt::Display) -> Self {
        Self {
            status,
            body: json!({ "error": message.to_string() }),
        }
    }

    fn bad_request(message: impl std::fmt::Display) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match &e {
            StoreError::Validation(errors) => Self {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "error": "invalid features", "errors": errors }),
            },
            StoreError::NotFound(_) => Self::new(StatusCode::NOT_FOUND, e),
            StoreError::Kind { .. } => Self::new(StatusCode::UNPROCESSABLE_ENTITY, e),
            StoreError::Json(_) => Self::bad_request(e),
            _ => {
                log::error!("store failure: {e}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, e)
            }
        }
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        match &e {
            ModelError::InvalidGlb(_) => Self::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, e),
            ModelError::NotFound(_) => Self::new(StatusCode::NOT_FOUND, e),
            ModelError::Metadata(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, e),
            _ => {
                log::error!("model repository failure: {e}");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, e)
            }
        }
    }
}

impl From<GeorectifyError> for ApiError {
    fn from(e: GeorectifyError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, e)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let models_limit = state.config.max_model_bytes;
    let cors = cors_layer(&state.config.cors_origins);
    let router = Router::new()
        .route("/healthz", get(healthz))
        .route("/tiles/{z}/{x}/{y}", get(tile))
        .route("/features", get(query_features).post(ingest_features))
        .route(
            "/models",
            get(list_models).post(upload_model).layer(DefaultBodyLimit::max(models_limit)),
        )
        .route("/models/{id}", get(fetch_model))
        .route("/models/{id}/link", post(link_model))
        .route("/warp/fit", post(warp_fit))
        .route("/warp/residuals", post(warp_residuals))
        .layer(DefaultBodyLimit::max(MAX_JSON_BYTES))
        .with_state(state);
    match cors {
        Some(c) => router.layer(c),
        None => router,
    }
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    Some(
        CorsLayer::new()
            .allow_origin(AllowOrigin::list(list))
            .allow_methods([Method::GET, Method::POST])
            .allow_headers([CONTENT_TYPE, IF_NONE_MATCH])
            .expose_headers([ETAG]),
    )
}

async fn healthz(State(s): State<Arc<AppState>>) -> Json<Value> {
    let snap = s.store.snapshot();
    Json(json!({
        "status": "ok",
        "snapshot_version": snap.version(),
        "feature_count": snap.len(),
        "model_count": s.models.len(),
    }))
}

#[derive(Debug, Deserialize)]
struct TimeQuery {
    time: Option<String>,
}

fn parse_time(raw: Option<&str>) -> Result<Option<Date>, ApiError> {
    raw.map(|t| t.parse::<Date>().map_err(|e| ApiError::bad_request(format!("time: {e}"))))
        .transpose()
}

/// Parses `z`, `x` and `{y}.mvt`. Malformed parts are 400, out-of-range
/// columns or rows 404.
fn parse_address(z: &str, x: &str, y: &str) -> Result<TileAddress, ApiError> {
    let y = y
        .strip_suffix(".mvt")
        .ok_or_else(|| ApiError::bad_request("tile path must end in .mvt"))?;
    let malformed = || ApiError::bad_request(format!("malformed tile address {z}/{x}/{y}"));
    let z: u8 = z.parse().map_err(|_| malformed())?;
    let x: u32 = x.parse().map_err(|_| malformed())?;
    let y: u32 = y.parse().map_err(|_| malformed())?;
    if z > MAX_ZOOM {
        return Err(malformed());
    }
    TileAddress::new(z, x, y).map_err(|e| ApiError::new(StatusCode::NOT_FOUND, e))
}

fn etag_matches(headers: &HeaderMap, etag: &str) -> bool {
    headers
        .get_all(IF_NONE_MATCH)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(','))
        .any(|t| {
            let t = t.trim();
            t == "*" || t.trim_start_matches("W/") == etag
        })
}

async fn tile(
    State(s): State<Arc<AppState>>,
    Path((z, x, y)): Path<(String, String, String)>,
    Query(q): Query<TimeQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let address = parse_address(&z, &x, &y)?;
    let at = parse_time(q.time.as_deref())?;
    let snap = s.store.snapshot();
    let version = snap.version();
    let etag = format!(
        "\"v{version}-{}-{}-{}-{}\"",
        address.z,
        address.x,
        address.y,
        at.map_or_else(|| "all".to_string(), |d| d.to_string())
    );
    let mut resp_headers = HeaderMap::new();
    resp_headers.insert(ETAG, HeaderValue::from_str(&etag).expect("ascii etag"));
    resp_headers.insert(CACHE_CONTROL, HeaderValue::from_static("no-cache"));
    if etag_matches(&headers, &etag) {
        return Ok((StatusCode::NOT_MODIFIED, resp_headers).into_response());
    }

    let key = (address, at);
    let cached = s.cache.lock().expect("tile cache poisoned").get(version, &key);
    let body = match cached {
        Some(b) => b,
        None => {
            let config = TileConfig {
                window: s.config.clip_window(),
                at,
            };
            let bytes = render_tile(&snap, address, &config).map_err(|e| {
                log::error!("tile {address} failed: {e}");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e)
            })?;
            let bytes = Bytes::from(bytes);
            s.cache
                .lock()
                .expect("tile cache poisoned")
                .put(version, key, bytes.clone(), s.config.tile_cache_entries);
            bytes
        }
    };
    resp_headers.insert(CONTENT_TYPE, HeaderValue::from_static(MVT_CONTENT_TYPE));
    Ok((StatusCode::OK, resp_headers, body).into_response())
}

#[derive(Debug, Deserialize)]
struct FeatureQuery {
    bbox: Option<String>,
    time: Option<String>,
}

fn parse_bbox(raw: &str) -> Result<GeoBounds<f64>, ApiError> {
    let v: Vec<f64> = raw
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| ApiError::bad_request(format!("bbox {raw:?} must be four numbers")))?;
    if v.len() != 4 {
        return Err(ApiError::bad_request(format!("bbox {raw:?} must be four numbers")));
    }
    let b = GeoBounds::new(v[0], v[1], v[2], v[3]);
    if !b.is_valid() {
        return Err(ApiError::bad_request(format!("bbox {raw:?} is not a valid lon/lat box")));
    }
    Ok(b)
}

async fn query_features(State(s): State<Arc<AppState>>, Query(q): Query<FeatureQuery>) -> Result<Json<Value>, ApiError> {
    let bbox = match q.bbox.as_deref() {
        Some(b) => parse_bbox(b)?,
        None => GeoBounds::new(-180.0, -90.0, 180.0, 90.0),
    };
    let at = parse_time(q.time.as_deref())?;
    let snap = s.store.snapshot();
    let features: Vec<Value> = snap.query(&bbox, at).iter().map(|f| f.to_geojson()).collect();
    Ok(Json(json!({
        "type": "FeatureCollection",
        "snapshot_version": snap.version(),
        "features": features,
    })))
}

async fn ingest_features(State(s): State<Arc<AppState>>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let doc: Value = serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid JSON: {e}")))?;
    let store = s.store.clone();
    // the log write is blocking file i/o
    let ids = tokio::task::spawn_blocking(move || store.ingest_json(&doc))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))??;
    Ok(Json(json!({ "ids": ids, "snapshot_version": s.store.snapshot().version() })))
}

async fn upload_model(
    State(s): State<Arc<AppState>>,
    headers: HeaderMap,
    Query(metadata): Query<ModelMetadata>,
    body: Bytes,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    let content_type = headers.get(CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    let essence = content_type.split(';').next().unwrap_or("").trim();
    if !essence.is_empty() && essence != GLB_CONTENT_TYPE && essence != "application/octet-stream" {
        return Err(ApiError::new(
            StatusCode::UNSUPPORTED_MEDIA_TYPE,
            format!("expected {GLB_CONTENT_TYPE}, got {essence}"),
        ));
    }
    if let Some(fid) = metadata.feature_id {
        // check the link target before anything is stored
        let snap = s.store.snapshot();
        let f = snap.get(fid).ok_or(StoreError::NotFound(fid))?;
        if f.kind != timeatlas_core::store::FeatureKind::Building {
            return Err(StoreError::Kind { id: fid, kind: f.kind }.into());
        }
    }
    let rec = s.models.insert(&body, metadata)?;
    if let Some(fid) = rec.metadata.feature_id {
        s.store.link_model(fid, rec.model_id)?;
    }
    Ok((StatusCode::CREATED, Json(serde_json::to_value(&rec).expect("record serializes"))))
}

fn parse_id(raw: &str) -> Result<u64, ApiError> {
    raw.parse().map_err(|_| ApiError::bad_request(format!("malformed model id {raw:?}")))
}

async fn fetch_model(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let id = parse_id(&id)?;
    let rec = s.models.record(id).ok_or(ModelError::NotFound(id))?;
    let etag = format!("\"{}\"", rec.sha256);
    let mut out = HeaderMap::new();
    out.insert(ETAG, HeaderValue::from_str(&etag).expect("hex etag"));
    if etag_matches(&headers, &etag) {
        return Ok((StatusCode::NOT_MODIFIED, out).into_response());
    }
    let (_, blob) = s.models.get(id)?;
    out.insert(CONTENT_TYPE, HeaderValue::from_static(GLB_CONTENT_TYPE));
    Ok((StatusCode::OK, out, blob).into_response())
}

#[derive(Debug, Deserialize)]
struct ModelListQuery {
    feature_id: Option<u64>,
}

async fn list_models(State(s): State<Arc<AppState>>, Query(q): Query<ModelListQuery>) -> Json<Value> {
    Json(json!({ "models": s.models.list(q.feature_id) }))
}

#[derive(Debug, Deserialize)]
struct LinkBody {
    feature_id: u64,
}

async fn link_model(
    State(s): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<LinkBody>,
) -> Result<Json<Value>, ApiError> {
    let id = parse_id(&id)?;
    s.models.record(id).ok_or(ModelError::NotFound(id))?;
    let feature = s.store.link_model(body.feature_id, id)?;
    let rec = s.models.set_feature(id, body.feature_id)?;
    Ok(Json(json!({ "model": rec, "feature": feature.to_geojson() })))
}

#[derive(Debug, Deserialize)]
struct PairJson {
    px: f64,
    py: f64,
    lon: f64,
    lat: f64,
}

impl PairJson {
    fn pair(&self) -> ControlPointPair<f64> {
        ControlPointPair::new(self.px, self.py, self.lon, self.lat)
    }
}

#[derive(Debug, Deserialize)]
struct FitRequest {
    pairs: Vec<PairJson>,
    kind: Option<String>,
}

/// Fits pixel -> Mercator and reports residuals, as `warp fit` + `warp
/// report` would.
async fn warp_fit(State(s): State<Arc<AppState>>, Json(req): Json<FitRequest>) -> Result<Json<Value>, ApiError> {
    let (kind, degree) = match req.kind.as_deref() {
        Some(k) => parse_transform_kind(k)?,
        None => s.config.transform_kind().map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?,
    };
    let pairs: Vec<ControlPointPair<f64>> = req.pairs.iter().map(PairJson::pair).collect();
    let t = fit_transform(&pairs, kind, degree)?;
    let report = residual_report(&t, &pairs)?;
    Ok(Json(json!({ "transform": t, "residuals": report })))
}

#[derive(Debug, Deserialize)]
struct ResidualRequest {
    pairs: Vec<PairJson>,
    transform: Transform2D<f64>,
}

async fn warp_residuals(Json(req): Json<ResidualRequest>) -> Result<Json<Value>, ApiError> {
    let pairs: Vec<ControlPointPair<f64>> = req.pairs.iter().map(PairJson::pair).collect();
    Ok(Json(json!({ "residuals": residual_report(&req.transform, &pairs)? })))
}
