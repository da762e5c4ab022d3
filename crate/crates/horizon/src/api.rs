//! Local HTTP/JSON service over one session.
//!
//! Every response carries `X-Log-Position`, the number of logged operations
//! the request observed. Reals are sent as 17-significant-digit strings.

use std::collections::BTreeMap;
use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use horizon_core::{Error as CoreError, FusionRule, InfluenceMethod};
use serde::{Deserialize, Serialize};
use tokio::net::TcpListener;
use tokio::sync::RwLock;

use crate::engine::{EngineError, LogRecord, NodeId, NodeOp, Session};
use crate::kb::{FrameDoc, MassDoc, RelationDoc, SourceDoc};
use crate::wire::{Mass17, Text17};

pub const LOG_POSITION_HEADER: &str = "x-log-position";

pub type SharedSession = Arc<RwLock<Session>>;

/// Machine-readable error body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ApiErrorBody,
    position: Option<usize>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: String) -> ApiError {
        ApiError {
            status,
            body: ApiErrorBody {
                code: code.to_string(),
                message,
                detail: None,
            },
            position: None,
        }
    }

    fn at(mut self, position: usize) -> ApiError {
        self.position = Some(position);
        self
    }

    fn bad_body(e: serde_json::Error) -> ApiError {
        let mut err = ApiError::new(StatusCode::BAD_REQUEST, "invalid_body", e.to_string());
        err.body.detail = Some(serde_json::json!({"line": e.line(), "column": e.column()}));
        err
    }

    fn bad_node(text: &str) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_node_id", format!("not a node id: {text:?}"))
    }
}

/// HTTP status and error code for a core error.
pub fn core_error_code(e: &CoreError) -> (StatusCode, &'static str) {
    use StatusCode as S;
    match e {
        CoreError::EmptyFrameId | CoreError::EmptyFrame(_) | CoreError::EmptyLabel { .. } => {
            (S::UNPROCESSABLE_ENTITY, "invalid_frame")
        }
        CoreError::DuplicateLabel { .. } => (S::UNPROCESSABLE_ENTITY, "duplicate_label"),
        CoreError::UnknownLabel { .. } => (S::UNPROCESSABLE_ENTITY, "unknown_label"),
        CoreError::UnknownFrame(_) => (S::NOT_FOUND, "unknown_frame"),
        CoreError::DuplicateFrame(_) => (S::CONFLICT, "duplicate_frame"),
        CoreError::InvalidMass(_) => (S::UNPROCESSABLE_ENTITY, "invalid_mass"),
        CoreError::MassSumExceeded { .. } => (S::UNPROCESSABLE_ENTITY, "mass_sum_exceeded"),
        CoreError::EmptyFocalSet => (S::UNPROCESSABLE_ENTITY, "empty_focal_set"),
        CoreError::ForeignSet { .. } => (S::UNPROCESSABLE_ENTITY, "foreign_set"),
        CoreError::FrameMismatch { .. } => (S::UNPROCESSABLE_ENTITY, "frame_mismatch"),
        CoreError::WidthMismatch { .. } => (S::UNPROCESSABLE_ENTITY, "width_mismatch"),
        CoreError::OpenWorldInput => (S::UNPROCESSABLE_ENTITY, "open_world_input"),
        CoreError::InvalidRate(_) => (S::UNPROCESSABLE_ENTITY, "invalid_rate"),
        CoreError::TotalConflict => (S::CONFLICT, "total_conflict"),
        CoreError::TooFewInputs { .. } => (S::UNPROCESSABLE_ENTITY, "insufficient_inputs"),
        CoreError::ResourceLimit { .. } => (S::UNPROCESSABLE_ENTITY, "resource_limit"),
        CoreError::DuplicateRelation { .. } => (S::CONFLICT, "duplicate_relation"),
        CoreError::SelfRelation(_) => (S::UNPROCESSABLE_ENTITY, "self_relation"),
        CoreError::NoRelation { .. } => (S::NOT_FOUND, "no_relation"),
        CoreError::MissingPair { .. } => (S::UNPROCESSABLE_ENTITY, "missing_pair"),
        CoreError::UnreachableFrame { .. } => (S::CONFLICT, "unreachable_frame"),
        CoreError::FrameTooLarge { .. } => (S::UNPROCESSABLE_ENTITY, "frame_too_large"),
        CoreError::EmptyContributions => (S::UNPROCESSABLE_ENTITY, "empty_contributions"),
    }
}

/// HTTP status and error code for an engine error.
pub fn error_code(e: &EngineError) -> (StatusCode, &'static str) {
    use StatusCode as S;
    match e {
        EngineError::Core(c) => core_error_code(c),
        EngineError::UnknownNode(_) => (S::NOT_FOUND, "unknown_node"),
        EngineError::NodeDisabled(_) => (S::CONFLICT, "node_disabled"),
        EngineError::NotFused(_) => (S::UNPROCESSABLE_ENTITY, "not_fused"),
        EngineError::NotAnInput { .. } => (S::UNPROCESSABLE_ENTITY, "not_an_input"),
        EngineError::TooFewSurvivors { .. } => (S::UNPROCESSABLE_ENTITY, "too_few_survivors"),
        EngineError::InvalidSource(_) => (S::UNPROCESSABLE_ENTITY, "invalid_source"),
        EngineError::InvalidMargin(_) => (S::UNPROCESSABLE_ENTITY, "invalid_margin"),
        EngineError::Cancelled => (S::CONFLICT, "cancelled"),
        EngineError::Replay { .. } => (S::UNPROCESSABLE_ENTITY, "replay_mismatch"),
        EngineError::Format(_) => (S::UNPROCESSABLE_ENTITY, "invalid_session"),
        EngineError::Kb(_) => (S::UNPROCESSABLE_ENTITY, "invalid_kb"),
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> ApiError {
        let (status, code) = error_code(&e);
        ApiError::new(status, code, e.to_string())
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> ApiError {
        EngineError::Core(e).into()
    }
}

fn with_position(mut response: Response, position: Option<usize>) -> Response {
    if let Some(p) = position {
        response
            .headers_mut()
            .insert(LOG_POSITION_HEADER, HeaderValue::from(p as u64));
    }
    response
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        with_position((self.status, Json(self.body)).into_response(), self.position)
    }
}

fn reply<T: Serialize>(status: StatusCode, position: usize, body: &T) -> Response {
    with_position((status, Json(body)).into_response(), Some(position))
}

type ApiResult = Result<Response, ApiError>;

// Wire shapes.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameOut {
    pub id: String,
    pub label: String,
    pub propositions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassOut {
    pub set: Vec<String>,
    pub mass: Text17,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeOut {
    pub node_id: NodeId,
    pub boe_id: String,
    pub frame: String,
    pub kind: String,
    pub op: NodeOp,
    pub inputs: Vec<NodeId>,
    pub disabled: bool,
    pub source: SourceDoc,
    pub masses: Vec<MassOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreatedOut {
    pub node_id: NodeId,
    pub log_position: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowOut {
    pub statement: Vec<String>,
    pub label: String,
    pub support: Text17,
    pub uncertainty: Text17,
    pub against: Text17,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConclusionOut {
    pub node_id: NodeId,
    pub boe_id: String,
    pub frame: String,
    pub rows: Vec<RowOut>,
    pub conflict: Text17,
    pub unknown_mass: Text17,
    pub inconclusive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceOut {
    pub boe_id: String,
    pub node_id: NodeId,
    pub source: String,
    pub influence: Text17,
    pub share: Text17,
    pub leave_one_out: Text17,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationOut {
    pub node_id: NodeId,
    pub conclusion_id: String,
    pub method: String,
    pub exact: bool,
    pub entries: Vec<InfluenceOut>,
    pub most_influential: String,
    pub least_influential: String,
    pub most_influential_node: NodeId,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassIn {
    pub set: Vec<String>,
    pub mass: Text17,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitIn {
    pub frame: String,
    pub masses: Vec<MassIn>,
    pub source: SourceDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuseIn {
    pub node_ids: Vec<NodeId>,
    #[serde(default)]
    pub rule: Option<String>,
    #[serde(default)]
    pub target_frame: Option<String>,
    #[serde(default)]
    pub auto_discount: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscountIn {
    pub node_id: NodeId,
    pub rate: Text17,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslateIn {
    pub node_id: NodeId,
    pub target_frame: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfIn {
    pub node_id: NodeId,
    #[serde(default)]
    pub disable: Vec<NodeId>,
    #[serde(default)]
    pub rediscount: BTreeMap<NodeId, Text17>,
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(ApiError::bad_body)
}

fn parse_node(text: &str) -> Result<NodeId, ApiError> {
    text.parse().map_err(|_| ApiError::bad_node(text))
}

/// The record a request body stands for. Shared with tests that check the
/// API against direct engine calls.
pub fn submit_record(body: SubmitIn) -> LogRecord {
    LogRecord::Submit {
        frame: body.frame,
        masses: body
            .masses
            .into_iter()
            .map(|m| MassDoc {
                mass: Mass17(m.mass.0),
                set: m.set,
            })
            .collect(),
        source: body.source,
        result: None,
    }
}

pub fn fuse_record(body: FuseIn) -> Result<LogRecord, ApiError> {
    let rule = body
        .rule
        .map(|r| {
            r.parse::<FusionRule>().map_err(|_| {
                ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "unknown_rule",
                    format!("unknown fusion rule {r:?} (expected dempster, smets or dependent)"),
                )
            })
        })
        .transpose()?;
    Ok(LogRecord::Fuse {
        nodes: body.node_ids,
        rule,
        target: body.target_frame,
        auto_discount: body.auto_discount,
        result: None,
    })
}

pub fn node_out(session: &Session, id: NodeId) -> Result<NodeOut, EngineError> {
    let node = session.node(id)?;
    let doc = session.node_doc(node);
    Ok(NodeOut {
        node_id: id,
        boe_id: node.boe.id.clone(),
        frame: doc.frame,
        kind: doc.kind,
        op: doc.op,
        inputs: doc.inputs,
        disabled: doc.disabled,
        source: doc.source,
        masses: doc
            .masses
            .into_iter()
            .map(|m| MassOut {
                set: m.set,
                mass: Text17(m.mass.0),
            })
            .collect(),
    })
}

pub fn conclusion_out(session: &Session, id: NodeId) -> Result<ConclusionOut, EngineError> {
    let c = session.conclusion_of(id)?;
    let frame = session.kb().gallery.frame(&c.frame_id)?;
    let rows = c
        .report
        .rows
        .iter()
        .map(|r| RowOut {
            statement: frame
                .labels_of(&r.statement)
                .expect("rows fit their frame")
                .into_iter()
                .map(str::to_string)
                .collect(),
            label: frame.describe(&r.statement),
            support: Text17(r.support),
            uncertainty: Text17(r.uncertainty),
            against: Text17(r.against),
        })
        .collect();
    Ok(ConclusionOut {
        node_id: id,
        boe_id: c.report.boe_id.clone(),
        frame: c.frame_id,
        rows,
        conflict: Text17(c.report.conflict),
        unknown_mass: Text17(c.report.unknown_mass),
        inconclusive: c.inconclusive,
    })
}

pub fn explanation_out(session: &Session, id: NodeId) -> Result<ExplanationOut, EngineError> {
    let e = session.explanation_of(id)?;
    let node_of = |boe_id: &str| boe_id.parse::<NodeId>().expect("session BOE ids are node ids");
    let entries = e
        .report
        .entries
        .iter()
        .map(|x| {
            let node = node_of(&x.boe_id);
            let source = session.node(node).map(|n| n.boe.source.name.clone()).unwrap_or_default();
            InfluenceOut {
                boe_id: x.boe_id.clone(),
                node_id: node,
                source,
                influence: Text17(x.influence),
                share: Text17(x.share),
                leave_one_out: Text17(x.leave_one_out),
                vacuous: x.vacuous,
            }
        })
        .collect();
    Ok(ExplanationOut {
        node_id: id,
        conclusion_id: e.report.conclusion_id.clone(),
        method: match e.report.method {
            InfluenceMethod::Standalone => "standalone",
            InfluenceMethod::LeaveOneOut => "leave_one_out",
        }
        .to_string(),
        exact: e.report.exact,
        entries,
        most_influential_node: node_of(&e.report.most_influential),
        most_influential: e.report.most_influential,
        least_influential: e.report.least_influential,
        text: e.text,
    })
}

async fn list_frames(State(state): State<SharedSession>) -> ApiResult {
    let s = state.read().await;
    let frames: Vec<FrameOut> = s
        .kb()
        .to_doc()
        .frames
        .into_iter()
        .map(|f: FrameDoc| FrameOut {
            label: f.label.unwrap_or_else(|| f.id.clone()),
            id: f.id,
            propositions: f.propositions,
        })
        .collect();
    Ok(reply(StatusCode::OK, s.log_position(), &frames))
}

async fn list_relations(State(state): State<SharedSession>) -> ApiResult {
    let s = state.read().await;
    let relations: Vec<RelationDoc> = s.kb().to_doc().relations;
    Ok(reply(StatusCode::OK, s.log_position(), &relations))
}

async fn list_boes(State(state): State<SharedSession>) -> ApiResult {
    let s = state.read().await;
    let nodes = s
        .nodes()
        .map(|n| node_out(&s, n.id))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ApiError::from(e).at(s.log_position()))?;
    Ok(reply(StatusCode::OK, s.log_position(), &nodes))
}

async fn get_node(State(state): State<SharedSession>, Path(id): Path<String>) -> ApiResult {
    let id = parse_node(&id)?;
    let s = state.read().await;
    let out = node_out(&s, id).map_err(|e| ApiError::from(e).at(s.log_position()))?;
    Ok(reply(StatusCode::OK, s.log_position(), &out))
}

async fn get_conclusion(State(state): State<SharedSession>, Path(id): Path<String>) -> ApiResult {
    let id = parse_node(&id)?;
    let s = state.read().await;
    let out = conclusion_out(&s, id).map_err(|e| ApiError::from(e).at(s.log_position()))?;
    Ok(reply(StatusCode::OK, s.log_position(), &out))
}

async fn get_explanation(State(state): State<SharedSession>, Path(id): Path<String>) -> ApiResult {
    let id = parse_node(&id)?;
    let s = state.read().await;
    let out = explanation_out(&s, id).map_err(|e| ApiError::from(e).at(s.log_position()))?;
    Ok(reply(StatusCode::OK, s.log_position(), &out))
}

/// Applies a mutation under the write lock; mutations are serialized in
/// arrival order.
async fn mutate(state: &SharedSession, record: LogRecord) -> ApiResult {
    let mut s = state.write().await;
    let id = s
        .apply(record)
        .map_err(|e| ApiError::from(e).at(s.log_position()))?
        .expect("mutation produces a node");
    let out = CreatedOut {
        node_id: id,
        log_position: s.log_position(),
    };
    Ok(reply(StatusCode::CREATED, s.log_position(), &out))
}

async fn post_boe(State(state): State<SharedSession>, body: Bytes) -> ApiResult {
    let body: SubmitIn = parse(&body)?;
    mutate(&state, submit_record(body)).await
}

async fn post_fuse(State(state): State<SharedSession>, body: Bytes) -> ApiResult {
    let body: FuseIn = parse(&body)?;
    mutate(&state, fuse_record(body)?).await
}

async fn post_discount(State(state): State<SharedSession>, body: Bytes) -> ApiResult {
    let body: DiscountIn = parse(&body)?;
    let record = LogRecord::Discount {
        node: body.node_id,
        rate: body.rate.0,
        result: None,
    };
    mutate(&state, record).await
}

async fn post_translate(State(state): State<SharedSession>, body: Bytes) -> ApiResult {
    let body: TranslateIn = parse(&body)?;
    let record = LogRecord::Translate {
        node: body.node_id,
        target: body.target_frame,
        result: None,
    };
    mutate(&state, record).await
}

async fn post_whatif(State(state): State<SharedSession>, body: Bytes) -> ApiResult {
    let body: WhatIfIn = parse(&body)?;
    let record = LogRecord::WhatIf {
        node: body.node_id,
        disable: body.disable,
        rediscount: body.rediscount.into_iter().map(|(k, v)| (k, v.0)).collect(),
        result: None,
    };
    mutate(&state, record).await
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint".into())
}

pub fn router(state: SharedSession) -> Router {
    Router::new()
        .route("/api/v1/frames", get(list_frames))
        .route("/api/v1/relations", get(list_relations))
        .route("/api/v1/boes", get(list_boes).post(post_boe))
        .route("/api/v1/nodes/{id}", get(get_node))
        .route("/api/v1/nodes/{id}/conclusion", get(get_conclusion))
        .route("/api/v1/nodes/{id}/explanation", get(get_explanation))
        .route("/api/v1/ops/fuse", post(post_fuse))
        .route("/api/v1/ops/discount", post(post_discount))
        .route("/api/v1/ops/translate", post(post_translate))
        .route("/api/v1/whatif", post(post_whatif))
        .fallback(not_found)
        .with_state(state)
}

pub fn shared(session: Session) -> SharedSession {
    Arc::new(RwLock::new(session))
}

/// Serves `state` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    state: SharedSession,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
