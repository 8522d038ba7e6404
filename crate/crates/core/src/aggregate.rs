//! Aggregate view of a group of traces and its DOT/JSON exports.
//!
//! The aggregate keeps, per group: the service universe, how many member
//! traces each service appears in, and a caller-to-callee call-count matrix
//! summed over all member traces (with multiplicity). The group view colors
//! services that appear in every trace yellow and the rest gray, and scales
//! node sizes by presence; the chosen-service view highlights one service in
//! green and scales its outgoing edges by call count.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{ServiceName, Trace};

const COLOR_IN_ALL: &str = "#FFFF00"; // yellow
const COLOR_IN_SOME: &str = "#D3D3D3"; // gray
const COLOR_CHOSEN: &str = "#90EE90"; // green

/// Group-level summary: service universe, per-service presence counts, and
/// the call-count matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggregateGroup {
    services: Vec<ServiceName>,
    total_traces: usize,
    presence: Vec<usize>,
    calls: Vec<Vec<u64>>,
}

impl AggregateGroup {
    /// Services in first-appearance order (trace position, then span order).
    pub fn services(&self) -> &[ServiceName] {
        &self.services
    }

    pub fn total_traces(&self) -> usize {
        self.total_traces
    }

    /// `presence()[i]` = number of member traces containing `services()[i]`.
    pub fn presence(&self) -> &[usize] {
        &self.presence
    }

    /// `calls()[i][j]` = calls from `services()[i]` to `services()[j]`,
    /// summed over all member traces with multiplicity.
    pub fn calls(&self) -> &[Vec<u64>] {
        &self.calls
    }

    pub fn service_index(&self, name: &str) -> Option<usize> {
        self.services.iter().position(|s| s.as_str() == name)
    }

    pub fn presence_of(&self, name: &str) -> Option<usize> {
        self.service_index(name).map(|i| self.presence[i])
    }

    /// Serializes to `{"totalTraces": ..., "services": [...], "presence":
    /// [...], "calls": [[...]]}`.
    pub fn to_json(&self) -> String {
        let doc = AggregateDoc {
            total_traces: self.total_traces,
            services: self.services.iter().map(|s| s.as_str().to_string()).collect(),
            presence: self.presence.clone(),
            calls: self.calls.clone(),
        };
        serde_json::to_string(&doc).expect("aggregate serializes")
    }

    /// Parses the [`AggregateGroup::to_json`] schema back.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(Error::MalformedJson)?;
        let doc: AggregateDoc =
            serde_json::from_value(value).map_err(|e| Error::SchemaViolation(e.to_string()))?;
        let services = doc
            .services
            .into_iter()
            .map(ServiceName::new)
            .collect::<Result<Vec<_>>>()?;
        if doc.presence.len() != services.len()
            || doc.calls.len() != services.len()
            || doc.calls.iter().any(|row| row.len() != services.len())
        {
            return Err(Error::SchemaViolation(
                "presence and calls dimensions must match the service list".into(),
            ));
        }
        Ok(AggregateGroup {
            services,
            total_traces: doc.total_traces,
            presence: doc.presence,
            calls: doc.calls,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct AggregateDoc {
    #[serde(rename = "totalTraces")]
    total_traces: usize,
    services: Vec<String>,
    presence: Vec<usize>,
    calls: Vec<Vec<u64>>,
}

/// Builds the aggregate for one group of traces.
pub fn build_aggregate<'a>(
    traces: impl IntoIterator<Item = &'a Trace>,
) -> Result<AggregateGroup> {
    let traces: Vec<&Trace> = traces.into_iter().collect();
    if traces.is_empty() {
        return Err(Error::EmptyGroup);
    }

    let mut services: Vec<ServiceName> = Vec::new();
    for trace in &traces {
        for span in trace.spans() {
            if !services.contains(&span.service) {
                services.push(span.service.clone());
            }
        }
    }
    let index_of = |name: &ServiceName| {
        services
            .iter()
            .position(|s| s == name)
            .expect("every service was collected")
    };

    let mut presence = vec![0usize; services.len()];
    let mut calls = vec![vec![0u64; services.len()]; services.len()];
    for trace in &traces {
        for service in trace.services() {
            presence[index_of(&service)] += 1;
        }
        for edge in trace.edge_multiset() {
            calls[index_of(&edge.caller)][index_of(&edge.callee)] += 1;
        }
    }

    Ok(AggregateGroup {
        services,
        total_traces: traces.len(),
        presence,
        calls,
    })
}

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

fn group_fill(present_in: usize, total: usize) -> &'static str {
    if present_in == total {
        COLOR_IN_ALL
    } else {
        COLOR_IN_SOME
    }
}

/// Renders the whole-group view: every service as a fixed-size node (width
/// `0.5 + presence/total` inches), yellow when present in all traces and
/// gray otherwise, with one labeled edge per nonzero call count.
pub fn render_group_dot(agg: &AggregateGroup) -> String {
    let mut out = String::from("digraph G {\n");
    out.push_str("  node [shape=ellipse style=filled fixedsize=true];\n");
    for (i, service) in agg.services.iter().enumerate() {
        let width = 0.5 + agg.presence[i] as f64 / agg.total_traces as f64;
        let _ = writeln!(
            out,
            "  {} [fillcolor=\"{}\" width={}];",
            quote(service.as_str()),
            group_fill(agg.presence[i], agg.total_traces),
            width
        );
    }
    for (i, row) in agg.calls.iter().enumerate() {
        for (j, &count) in row.iter().enumerate() {
            if count > 0 {
                let _ = writeln!(
                    out,
                    "  {} -> {} [label=\"{}\"];",
                    quote(agg.services[i].as_str()),
                    quote(agg.services[j].as_str()),
                    count
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// Renders the chosen-service view: the chosen node in green, only its
/// outgoing edges drawn with `penwidth = 1 + 4 * count/maxOut`, and callees
/// colored by the group rules. A service with no outgoing calls renders as
/// the single green node.
pub fn render_service_dot(agg: &AggregateGroup, service: &ServiceName) -> Result<String> {
    let chosen = agg
        .service_index(service.as_str())
        .ok_or_else(|| Error::UnknownService(service.as_str().to_string()))?;
    let row = &agg.calls[chosen];
    let max_out = row.iter().copied().max().unwrap_or(0);

    let mut out = String::from("digraph G {\n");
    out.push_str("  node [shape=ellipse style=filled];\n");
    let _ = writeln!(
        out,
        "  {} [fillcolor=\"{}\"];",
        quote(service.as_str()),
        COLOR_CHOSEN
    );
    if max_out == 0 {
        out.push_str("}\n");
        return Ok(out);
    }
    for (j, &count) in row.iter().enumerate() {
        if count > 0 && j != chosen {
            let _ = writeln!(
                out,
                "  {} [fillcolor=\"{}\"];",
                quote(agg.services[j].as_str()),
                group_fill(agg.presence[j], agg.total_traces)
            );
        }
    }
    for (j, &count) in row.iter().enumerate() {
        if count > 0 {
            let penwidth = 1.0 + 4.0 * (count as f64 / max_out as f64);
            let _ = writeln!(
                out,
                "  {} -> {} [penwidth={}];",
                quote(service.as_str()),
                quote(agg.services[j].as_str()),
                penwidth
            );
        }
    }
    out.push_str("}\n");
    Ok(out)
}
