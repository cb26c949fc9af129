//! JSON service over an atomically swappable index snapshot.

use std::collections::BTreeMap;
use std::sync::Arc;

use arc_swap::ArcSwap;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::Mutex;

use crate::ontology::Lang;
use crate::recommender::{recommend, ProfileSet};
use crate::search::{aggregate, AggregateCriteria, Index, SemanticQuery};

use super::{
    build_from_config, document_rdf, formula_search, parse_rdf_format, parse_segment_type, segment_search,
    split_concepts, ApiError, FormulaQuery, IngestReport, ServiceConfig,
};

pub const BUILD_STAMP_HEADER: &str = "x-build-stamp";
const DEFAULT_K: usize = 10;
const DEFAULT_SUGGEST_LIMIT: usize = 10;
const DEFAULT_PROFILE: &str = "referee";

/// Shared service state. Handlers load the current snapshot once per
/// request; reloads swap in a fresh one.
pub struct AppState {
    index: ArcSwap<Index>,
    config: ServiceConfig,
    profiles: ProfileSet,
    reload: Mutex<()>,
}

impl AppState {
    pub fn new(index: Index, config: ServiceConfig, profiles: ProfileSet) -> Self {
        AppState {
            index: ArcSwap::from_pointee(index),
            config,
            profiles,
            reload: Mutex::new(()),
        }
    }

    /// Ingests the configured corpus and loads the profiles.
    pub fn from_config(config: ServiceConfig) -> Result<(Self, IngestReport), ApiError> {
        let profiles = match &config.profiles {
            Some(path) => ProfileSet::load(path)?,
            None => ProfileSet::default(),
        };
        let (index, report) = build_from_config(&config)?;
        Ok((AppState::new(index, config, profiles), report))
    }

    pub fn snapshot(&self) -> Arc<Index> {
        self.index.load_full()
    }

    /// Rebuilds from the configured inputs and swaps the result in. Reloads
    /// are serialized; readers keep whichever snapshot they loaded.
    pub async fn reload(self: &Arc<Self>) -> Result<IngestReport, ApiError> {
        let _guard = self.reload.lock().await;
        let state = Arc::clone(self);
        let (index, report) = tokio::task::spawn_blocking(move || build_from_config(&state.config))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??;
        self.index.store(Arc::new(index));
        Ok(report)
    }
}

/// Query parameters restricted to a known set of names.
struct Params(BTreeMap<String, String>);

impl Params {
    fn parse(uri: &Uri, allowed: &[&str]) -> Result<Params, ApiError> {
        let mut out = BTreeMap::new();
        let Some(query) = uri.query() else {
            return Ok(Params(out));
        };
        let pairs = axum::extract::Query::<Vec<(String, String)>>::try_from_uri(uri)
            .map_err(|e| ApiError::bad_request(format!("malformed query '{query}': {e}")))?
            .0;
        for (name, value) in pairs {
            if !allowed.contains(&name.as_str()) {
                return Err(ApiError::unknown_parameter(&name));
            }
            if out.insert(name.clone(), value).is_some() {
                return Err(ApiError::bad_request(format!("parameter '{name}' given twice")));
            }
        }
        Ok(Params(out))
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    fn require(&self, name: &str) -> Result<&str, ApiError> {
        self.get(name)
            .ok_or_else(|| ApiError::bad_request(format!("missing parameter '{name}'")))
    }

    fn number(&self, name: &str, default: usize) -> Result<usize, ApiError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                ApiError::bad_request(format!("parameter '{name}' must be a non-negative integer"))
            }),
        }
    }

    fn flag(&self, name: &str, default: bool) -> Result<bool, ApiError> {
        match self.get(name) {
            None => Ok(default),
            Some("true" | "1") => Ok(true),
            Some("false" | "0") => Ok(false),
            Some(v) => Err(ApiError::bad_request(format!(
                "parameter '{name}' must be true or false, got '{v}'"
            ))),
        }
    }
}

/// JSON body with the snapshot's build stamp merged in.
fn stamped(ix: &Index, body: impl Serialize) -> Response {
    let mut value = serde_json::to_value(body).unwrap_or_else(|e| json!({ "error": e.to_string() }));
    if let Some(map) = value.as_object_mut() {
        map.insert("buildStamp".into(), json!(ix.build_stamp()));
    }
    let mut response = Json(value).into_response();
    if let Ok(v) = HeaderValue::from_str(ix.build_stamp()) {
        response.headers_mut().insert(BUILD_STAMP_HEADER, v);
    }
    response
}

type Shared = State<Arc<AppState>>;

async fn healthz(State(state): Shared) -> Response {
    let ix = state.snapshot();
    stamped(&ix, json!({ "status": "ok", "documents": ix.len() }))
}

async fn search_formula(State(state): Shared, uri: Uri) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    let params = Params::parse(&uri, &["mode", "pattern", "concepts", "scope", "expand"])?;
    let query = match params.require("mode")? {
        "syntactic" => {
            for name in ["concepts", "scope", "expand"] {
                if params.get(name).is_some() {
                    return Err(ApiError::bad_request(format!(
                        "'{name}' applies to semantic mode only"
                    )));
                }
            }
            FormulaQuery::Syntactic(params.require("pattern")?.to_string())
        }
        "semantic" => {
            if params.get("pattern").is_some() {
                return Err(ApiError::bad_request("'pattern' applies to syntactic mode only"));
            }
            let mut q = SemanticQuery::new(split_concepts(params.require("concepts")?))
                .expand(params.flag("expand", true)?);
            if let Some(scope) = params.get("scope") {
                q = q.scope(parse_segment_type(scope)?);
            }
            FormulaQuery::Semantic(q)
        }
        other => return Err(ApiError::bad_request(format!("unknown mode '{other}'"))),
    };
    let hits = formula_search(&ix, &query)?;
    Ok(stamped(&ix, json!({ "hits": hits })))
}

async fn search_segments(State(state): Shared, uri: Uri) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    let params = Params::parse(&uri, &["type", "via", "target"])?;
    let hits = segment_search(
        &ix,
        params.require("type")?,
        params.require("via")?,
        params.require("target")?,
    )?;
    Ok(stamped(&ix, json!({ "hits": hits })))
}

async fn aggregate_objects(State(state): Shared, uri: Uri) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    let params = Params::parse(&uri, &["type", "area", "object"])?;
    let criteria = AggregateCriteria {
        segment_type: params.get("type").map(parse_segment_type).transpose()?,
        area: params.get("area").map(str::to_string),
        object: params.get("object").map(str::to_string),
    };
    let results = aggregate(&ix, &criteria)?;
    Ok(stamped(&ix, json!({ "results": results })))
}

async fn recommend_for(
    State(state): Shared,
    Path(doc_id): Path<String>,
    uri: Uri,
) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    let params = Params::parse(&uri, &["profile", "k"])?;
    let name = params.get("profile").unwrap_or(DEFAULT_PROFILE);
    let profile = state.profiles.get(name)?;
    let k = params.number("k", DEFAULT_K)?;
    if k == 0 {
        return Err(ApiError::bad_request("k must be positive"));
    }
    let recommendations = recommend(&ix, &doc_id, profile, k)?;
    Ok(stamped(
        &ix,
        json!({ "docId": doc_id, "profile": name, "recommendations": recommendations }),
    ))
}

async fn suggest(State(state): Shared, uri: Uri) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    let params = Params::parse(&uri, &["q", "lang", "limit"])?;
    let lang = match params.get("lang") {
        None => None,
        Some(code) => Some(
            Lang::from_code(code)
                .ok_or_else(|| ApiError::bad_request(format!("unknown language '{code}'")))?,
        ),
    };
    let limit = params.number("limit", DEFAULT_SUGGEST_LIMIT)?;
    let suggestions = ix.ontology().suggest(params.require("q")?, lang, limit);
    Ok(stamped(&ix, json!({ "suggestions": suggestions })))
}

async fn document(State(state): Shared, Path(doc_id): Path<String>, uri: Uri) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    Params::parse(&uri, &[])?;
    let entry = ix.require_document(&doc_id)?;
    Ok(stamped(
        &ix,
        json!({ "document": entry.doc, "annotations": entry.annotations }),
    ))
}

async fn document_rdf_handler(
    State(state): Shared,
    Path(doc_id): Path<String>,
    uri: Uri,
) -> Result<Response, ApiError> {
    let ix = state.snapshot();
    let params = Params::parse(&uri, &["format"])?;
    let format = parse_rdf_format(params.get("format").unwrap_or("nt"))?;
    let body = document_rdf(&ix, &doc_id, &state.config.base_iri, format)?;
    let mut response = (StatusCode::OK, body).into_response();
    let headers = response.headers_mut();
    headers.insert(
        header::CONTENT_TYPE,
        HeaderValue::from_static(format.content_type()),
    );
    if let Ok(v) = HeaderValue::from_str(ix.build_stamp()) {
        headers.insert(BUILD_STAMP_HEADER, v);
    }
    Ok(response)
}

async fn reload(State(state): Shared, uri: Uri) -> Result<Response, ApiError> {
    Params::parse(&uri, &[])?;
    let report = state.reload().await?;
    let ix = state.snapshot();
    Ok(stamped(&ix, json!({ "report": report })))
}

async fn not_found(uri: Uri) -> ApiError {
    ApiError::new(
        StatusCode::NOT_FOUND,
        "NOT_FOUND",
        format!("no route for {}", uri.path()),
    )
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/healthz", get(healthz))
        .route("/search/formula", get(search_formula))
        .route("/search/segments", get(search_segments))
        .route("/aggregate", get(aggregate_objects))
        .route("/recommend/{doc_id}", get(recommend_for))
        .route("/ontology/suggest", get(suggest))
        .route("/documents/{doc_id}", get(document))
        .route("/documents/{doc_id}/rdf", get(document_rdf_handler))
        .route("/admin/reload", post(reload))
        .fallback(not_found)
        .with_state(state)
}

/// Serves on an already bound listener until the future is dropped.
pub async fn serve_on(listener: TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

/// Ingests the configured corpus, then serves on the configured address.
pub async fn serve(config: ServiceConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    let addr = config.listen_addr()?;
    let (state, report) = tokio::task::spawn_blocking(move || AppState::from_config(config)).await??;
    eprint!("{report}");
    let listener = TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    serve_on(listener, Arc::new(state)).await?;
    Ok(())
}
