//! The trace data model: spans, traces, trace sets, and the JSON input format.
//!
//! A trace is a forest of spans connected by parent references. Everything
//! downstream (filtering, encoding, grouping, aggregation) consumes the three
//! views derived here: the service set, the call-edge list, and the depth.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Name of a service in the traced system.
///
/// Non-empty after trimming; compared byte-exactly (no case folding, since
/// normalizing could merge genuinely distinct services).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ServiceName(String);

impl ServiceName {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::InvalidServiceName);
        }
        Ok(ServiceName(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ServiceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ServiceName {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A caller-service to callee-service pair derived from one parent-child
/// span relation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CallEdge {
    pub caller: ServiceName,
    pub callee: ServiceName,
}

impl CallEdge {
    pub fn new(caller: ServiceName, callee: ServiceName) -> Self {
        CallEdge { caller, callee }
    }
}

impl fmt::Display for CallEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.caller, self.callee)
    }
}

/// A single operation within a trace. `parent_span_id` is `None` for roots.
///
/// `start_time` and `duration` are accepted and preserved on round trips but
/// carry no semantics here.
#[derive(Clone, Debug, PartialEq)]
pub struct Span {
    pub span_id: String,
    pub parent_span_id: Option<String>,
    pub service: ServiceName,
    pub start_time: Option<f64>,
    pub duration: Option<f64>,
}

impl Span {
    pub fn new(
        span_id: impl Into<String>,
        parent_span_id: Option<String>,
        service: ServiceName,
    ) -> Self {
        Span {
            span_id: span_id.into(),
            parent_span_id,
            service,
            start_time: None,
            duration: None,
        }
    }

    /// A root span (no parent).
    pub fn root(span_id: impl Into<String>, service: ServiceName) -> Self {
        Span::new(span_id, None, service)
    }

    /// A span spawned by `parent_span_id`.
    pub fn child(
        span_id: impl Into<String>,
        parent_span_id: impl Into<String>,
        service: ServiceName,
    ) -> Self {
        Span::new(span_id, Some(parent_span_id.into()), service)
    }
}

/// One request's journey through the system: a validated forest of spans.
///
/// Invariants, enforced at construction: at least one span, span ids unique,
/// every parent reference resolves within the trace, and parent references
/// are acyclic (so there is at least one root).
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    trace_id: String,
    spans: Vec<Span>,
}

impl Trace {
    pub fn new(trace_id: impl Into<String>, spans: Vec<Span>) -> Result<Self> {
        let trace_id = trace_id.into();
        validate_spans(&trace_id, &spans)?;
        Ok(Trace { trace_id, spans })
    }

    pub fn trace_id(&self) -> &str {
        &self.trace_id
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    /// The deduplicated set of services named by this trace's spans.
    pub fn services(&self) -> BTreeSet<ServiceName> {
        self.spans.iter().map(|s| s.service.clone()).collect()
    }

    /// One call edge per parent-child span pair, in span-list order of the
    /// child. Repeated caller/callee pairs keep their multiplicity.
    pub fn edge_multiset(&self) -> Vec<CallEdge> {
        let by_id: HashMap<&str, &Span> =
            self.spans.iter().map(|s| (s.span_id.as_str(), s)).collect();
        self.spans
            .iter()
            .filter_map(|span| {
                let parent_id = span.parent_span_id.as_deref()?;
                let parent = by_id[parent_id];
                Some(CallEdge::new(parent.service.clone(), span.service.clone()))
            })
            .collect()
    }

    /// The deduplicated projection of [`Trace::edge_multiset`].
    pub fn edge_set(&self) -> BTreeSet<CallEdge> {
        self.edge_multiset().into_iter().collect()
    }

    /// Maximum number of spans on any root-to-leaf path; a single span has
    /// depth 1.
    pub fn depth(&self) -> usize {
        let index: HashMap<&str, usize> = self
            .spans
            .iter()
            .enumerate()
            .map(|(i, s)| (s.span_id.as_str(), i))
            .collect();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); self.spans.len()];
        let mut roots = Vec::new();
        for (i, span) in self.spans.iter().enumerate() {
            match span.parent_span_id.as_deref() {
                Some(p) => children[index[p]].push(i),
                None => roots.push(i),
            }
        }
        let mut max_depth = 0;
        let mut stack: Vec<(usize, usize)> = roots.into_iter().map(|r| (r, 1)).collect();
        while let Some((node, depth)) = stack.pop() {
            max_depth = max_depth.max(depth);
            for &c in &children[node] {
                stack.push((c, depth + 1));
            }
        }
        max_depth
    }
}

fn validate_spans(trace_id: &str, spans: &[Span]) -> Result<()> {
    if spans.is_empty() {
        return Err(Error::EmptyTrace {
            trace_id: trace_id.to_string(),
        });
    }
    let mut index: HashMap<&str, usize> = HashMap::with_capacity(spans.len());
    for (i, span) in spans.iter().enumerate() {
        if index.insert(span.span_id.as_str(), i).is_some() {
            return Err(Error::DuplicateSpanId {
                trace_id: trace_id.to_string(),
                span_id: span.span_id.clone(),
            });
        }
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); spans.len()];
    let mut roots = Vec::new();
    for (i, span) in spans.iter().enumerate() {
        match span.parent_span_id.as_deref() {
            Some(parent_id) => match index.get(parent_id) {
                Some(&p) => children[p].push(i),
                None => {
                    return Err(Error::DanglingParent {
                        trace_id: trace_id.to_string(),
                        span_id: span.span_id.clone(),
                        parent_span_id: parent_id.to_string(),
                    })
                }
            },
            None => roots.push(i),
        }
    }
    // Every span must be reachable from a root; anything unreached sits on a
    // cycle (including a span that is its own parent).
    let mut seen = vec![false; spans.len()];
    let mut stack = roots;
    let mut reached = 0;
    while let Some(node) = stack.pop() {
        if seen[node] {
            continue;
        }
        seen[node] = true;
        reached += 1;
        stack.extend(children[node].iter().copied());
    }
    if reached != spans.len() {
        return Err(Error::CycleDetected {
            trace_id: trace_id.to_string(),
        });
    }
    Ok(())
}

/// An ordered collection of traces with unique ids.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSet {
    traces: Vec<Trace>,
}

impl TraceSet {
    pub fn new(traces: Vec<Trace>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(traces.len());
        for trace in &traces {
            if !ids.insert(trace.trace_id.as_str()) {
                return Err(Error::DuplicateTraceId {
                    trace_id: trace.trace_id.clone(),
                });
            }
        }
        Ok(TraceSet { traces })
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Trace> {
        self.traces.get(index)
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trace> {
        self.traces.iter()
    }

    /// Position of the trace with the given id, if any.
    pub fn position_of_id(&self, trace_id: &str) -> Option<usize> {
        self.traces.iter().position(|t| t.trace_id == trace_id)
    }

    /// Parses and validates a trace set from a UTF-8 JSON stream.
    pub fn from_reader(mut reader: impl Read) -> Result<Self> {
        let mut buf = String::new();
        reader.read_to_string(&mut buf)?;
        Self::from_json_str(&buf)
    }

    /// Parses and validates a trace set from JSON text.
    ///
    /// The expected document is `{"traces": [...]}` where each trace carries
    /// an optional `traceId` and a `spans` array; each span has a required
    /// `spanId`, a required `parentSpanId` (string or `null`; `null` marks a
    /// root), a required `service`, and optional `startTime`/`duration`
    /// numbers. Unknown fields are ignored. A trace with no `traceId` gets
    /// its zero-based array index, rendered as decimal text.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(Error::MalformedJson)?;
        let doc: TraceSetDoc = serde_json::from_value(value)
            .map_err(|e| Error::SchemaViolation(e.to_string()))?;
        let mut traces = Vec::with_capacity(doc.traces.len());
        for (index, trace_doc) in doc.traces.into_iter().enumerate() {
            let trace_id = trace_doc.trace_id.unwrap_or_else(|| index.to_string());
            let mut spans = Vec::with_capacity(trace_doc.spans.len());
            for (span_index, span_doc) in trace_doc.spans.into_iter().enumerate() {
                let parent = span_doc.parent_span_id.ok_or_else(|| {
                    Error::SchemaViolation(format!(
                        "trace {trace_id}: spans[{span_index}] is missing parentSpanId \
                         (use null for a root span)"
                    ))
                })?;
                let service = ServiceName::new(span_doc.service).map_err(|_| {
                    Error::SchemaViolation(format!(
                        "trace {trace_id}: spans[{span_index}] has an empty service name"
                    ))
                })?;
                spans.push(Span {
                    span_id: span_doc.span_id,
                    parent_span_id: parent,
                    service,
                    start_time: span_doc.start_time,
                    duration: span_doc.duration,
                });
            }
            traces.push(Trace::new(trace_id, spans)?);
        }
        TraceSet::new(traces)
    }

    /// Serializes back to the input schema. `traceId` is always emitted
    /// (defaults have been materialized); optional span fields are emitted
    /// only when present.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&trace_set_out(self)).expect("trace set serializes")
    }
}

impl<'a> IntoIterator for &'a TraceSet {
    type Item = &'a Trace;
    type IntoIter = std::slice::Iter<'a, Trace>;

    fn into_iter(self) -> Self::IntoIter {
        self.traces.iter()
    }
}

// ---------------------------------------------------------------------------
// JSON schema types

#[derive(Deserialize)]
struct TraceSetDoc {
    traces: Vec<TraceDoc>,
}

#[derive(Deserialize)]
struct TraceDoc {
    #[serde(rename = "traceId")]
    trace_id: Option<String>,
    spans: Vec<SpanDoc>,
}

#[derive(Deserialize)]
struct SpanDoc {
    #[serde(rename = "spanId")]
    span_id: String,
    // Outer None = field missing (rejected later); Some(None) = explicit null.
    #[serde(
        rename = "parentSpanId",
        default,
        deserialize_with = "explicit_null"
    )]
    parent_span_id: Option<Option<String>>,
    service: String,
    #[serde(rename = "startTime")]
    start_time: Option<f64>,
    duration: Option<f64>,
}

fn explicit_null<'de, D>(deserializer: D) -> std::result::Result<Option<Option<String>>, D::Error>
where
    D: Deserializer<'de>,
{
    Option::<String>::deserialize(deserializer).map(Some)
}

#[derive(Serialize)]
pub(crate) struct TraceSetOut<'a> {
    traces: Vec<TraceOut<'a>>,
}

#[derive(Serialize)]
struct TraceOut<'a> {
    #[serde(rename = "traceId")]
    trace_id: &'a str,
    spans: Vec<SpanOut<'a>>,
}

#[derive(Serialize)]
struct SpanOut<'a> {
    #[serde(rename = "spanId")]
    span_id: &'a str,
    #[serde(rename = "parentSpanId")]
    parent_span_id: Option<&'a str>,
    service: &'a str,
    #[serde(rename = "startTime", skip_serializing_if = "Option::is_none")]
    start_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
}

pub(crate) fn trace_set_out(ts: &TraceSet) -> TraceSetOut<'_> {
    TraceSetOut {
        traces: ts
            .traces
            .iter()
            .map(|t| TraceOut {
                trace_id: &t.trace_id,
                spans: t
                    .spans
                    .iter()
                    .map(|s| SpanOut {
                        span_id: &s.span_id,
                        parent_span_id: s.parent_span_id.as_deref(),
                        service: s.service.as_str(),
                        start_time: s.start_time,
                        duration: s.duration,
                    })
                    .collect(),
            })
            .collect(),
    }
}
