use thiserror::Error;

use crate::similarity::EncodingKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced while loading, validating, or transforming trace sets.
#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read input: {0}")]
    Io(#[from] std::io::Error),

    /// The input is not valid JSON at all.
    #[error("malformed JSON: {0}")]
    MalformedJson(#[source] serde_json::Error),

    /// The input is valid JSON but does not match the trace-set schema
    /// (missing required field, wrong type, empty service name, ...).
    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("trace {trace_id}: duplicate span id {span_id:?}")]
    DuplicateSpanId { trace_id: String, span_id: String },

    #[error("trace {trace_id}: span {span_id:?} references missing parent {parent_span_id:?}")]
    DanglingParent {
        trace_id: String,
        span_id: String,
        parent_span_id: String,
    },

    #[error("trace {trace_id}: parent references form a cycle")]
    CycleDetected { trace_id: String },

    #[error("trace {trace_id} has no spans")]
    EmptyTrace { trace_id: String },

    #[error("duplicate trace id {trace_id:?}")]
    DuplicateTraceId { trace_id: String },

    #[error("service name must be non-empty")]
    InvalidServiceName,

    #[error("cannot compare a {left} encoding with a {right} encoding")]
    KindMismatch { left: EncodingKind, right: EncodingKind },

    #[error("index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid similarity edge: {0}")]
    InvalidEdge(String),

    #[error("group has no members")]
    EmptyGroup,

    #[error("trace set is empty")]
    EmptyTraceSet,

    #[error("unknown service {0:?}")]
    UnknownService(String),

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),
}
