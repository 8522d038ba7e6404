//! Filtering of incomplete traces.
//!
//! A trace whose edge set is a proper subset of another trace's edge set is
//! treated as a truncated recording of the same workflow and removed. Exact
//! duplicates are kept: they are complete traces of identical workflows, and
//! dropping them would skew presence counts downstream.
//!
//! Note that a single-span trace has an empty edge set, which is a proper
//! subset of every non-empty edge set. Such traces are removed whenever any
//! trace with at least one edge is present.

use serde::Serialize;

use crate::trace::{trace_set_out, TraceSet, TraceSetOut};

/// A removed trace together with the kept trace that witnessed its removal.
/// Both indices refer to positions in the original input set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovedTrace {
    pub index: usize,
    pub trace_id: String,
    pub witness_index: usize,
    pub witness_trace_id: String,
}

/// Outcome of [`filter_incomplete`]: the kept traces in their original
/// order, plus one witness entry per removed trace.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterReport {
    pub kept: TraceSet,
    pub removed: Vec<RemovedTrace>,
}

impl FilterReport {
    /// Serializes as `{"kept": <trace-set schema>, "removed":
    /// [{"traceId": ..., "witnessTraceId": ...}]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct ReportOut<'a> {
            kept: TraceSetOut<'a>,
            removed: Vec<RemovedOut<'a>>,
        }
        #[derive(Serialize)]
        struct RemovedOut<'a> {
            #[serde(rename = "traceId")]
            trace_id: &'a str,
            #[serde(rename = "witnessTraceId")]
            witness_trace_id: &'a str,
        }
        let out = ReportOut {
            kept: trace_set_out(&self.kept),
            removed: self
                .removed
                .iter()
                .map(|r| RemovedOut {
                    trace_id: &r.trace_id,
                    witness_trace_id: &r.witness_trace_id,
                })
                .collect(),
        };
        serde_json::to_string(&out).expect("report serializes")
    }
}

/// Removes every trace whose edge set is a proper subset of another trace's
/// edge set. Traces with identical edge sets are all kept; order is
/// preserved among kept traces.
///
/// Each removed trace is paired with the smallest-index kept trace whose
/// edge set strictly contains it (strict containment is transitive, so a
/// kept witness always exists).
pub fn filter_incomplete(traces: &TraceSet) -> FilterReport {
    let edge_sets: Vec<_> = traces.iter().map(|t| t.edge_set()).collect();
    let n = edge_sets.len();
    let proper_subset = |a: usize, b: usize| {
        edge_sets[a].len() < edge_sets[b].len() && edge_sets[a].is_subset(&edge_sets[b])
    };

    let dominated: Vec<bool> = (0..n)
        .map(|i| (0..n).any(|j| proper_subset(i, j)))
        .collect();

    let kept: Vec<_> = traces
        .iter()
        .enumerate()
        .filter(|(i, _)| !dominated[*i])
        .map(|(_, t)| t.clone())
        .collect();
    let removed = (0..n)
        .filter(|&i| dominated[i])
        .map(|i| {
            let witness = (0..n)
                .find(|&j| !dominated[j] && proper_subset(i, j))
                .expect("a maximal strict superset is always kept");
            RemovedTrace {
                index: i,
                trace_id: traces.get(i).unwrap().trace_id().to_string(),
                witness_index: witness,
                witness_trace_id: traces.get(witness).unwrap().trace_id().to_string(),
            }
        })
        .collect();

    FilterReport {
        kept: TraceSet::new(kept).expect("kept ids remain unique"),
        removed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{ServiceName, Span, Trace};

    fn svc(name: &str) -> ServiceName {
        ServiceName::new(name).unwrap()
    }

    fn chain_trace(id: &str, services: &[&str]) -> Trace {
        let spans = services
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i == 0 {
                    Span::root(format!("s{i}"), svc(s))
                } else {
                    Span::child(format!("s{i}"), format!("s{}", i - 1), svc(s))
                }
            })
            .collect();
        Trace::new(id, spans).unwrap()
    }

    #[test]
    fn removes_subgraph_trace_with_witness() {
        // A's single edge is strictly contained in B's two edges.
        let a = chain_trace("a", &["Front End", "Friends"]);
        let b = chain_trace("b", &["Front End", "Friends", "Friends Database"]);
        let report = filter_incomplete(&TraceSet::new(vec![a, b]).unwrap());
        assert_eq!(report.kept.len(), 1);
        assert_eq!(report.kept.get(0).unwrap().trace_id(), "b");
        assert_eq!(report.removed.len(), 1);
        assert_eq!(report.removed[0].index, 0);
        assert_eq!(report.removed[0].witness_index, 1);
        assert_eq!(report.removed[0].witness_trace_id, "b");
    }

    #[test]
    fn identical_edge_sets_are_both_kept() {
        let a = chain_trace("a", &["X", "Y"]);
        let b = chain_trace("b", &["X", "Y"]);
        let report = filter_incomplete(&TraceSet::new(vec![a, b]).unwrap());
        assert_eq!(report.kept.len(), 2);
        assert!(report.removed.is_empty());
    }

    #[test]
    fn nested_chain_keeps_only_the_largest() {
        let a = chain_trace("a", &["X", "Y"]);
        let b = chain_trace("b", &["X", "Y", "Z"]);
        let c = chain_trace("c", &["X", "Y", "Z", "W"]);
        let report = filter_incomplete(&TraceSet::new(vec![a, b, c]).unwrap());
        assert_eq!(report.kept.len(), 1);
        assert_eq!(report.kept.get(0).unwrap().trace_id(), "c");
        // Both witnesses must point at the kept trace.
        assert!(report.removed.iter().all(|r| r.witness_trace_id == "c"));
    }

    #[test]
    fn edgeless_trace_is_removed_when_edges_exist() {
        let single = chain_trace("single", &["X"]);
        let chain = chain_trace("chain", &["A", "B"]);
        let report = filter_incomplete(&TraceSet::new(vec![single, chain]).unwrap());
        assert_eq!(report.kept.len(), 1);
        assert_eq!(report.kept.get(0).unwrap().trace_id(), "chain");
    }

    #[test]
    fn all_edgeless_traces_are_kept() {
        let a = chain_trace("a", &["X"]);
        let b = chain_trace("b", &["Y"]);
        let report = filter_incomplete(&TraceSet::new(vec![a, b]).unwrap());
        assert_eq!(report.kept.len(), 2);
    }

    #[test]
    fn filter_is_idempotent_on_kept_set() {
        let traces = TraceSet::new(vec![
            chain_trace("a", &["X", "Y"]),
            chain_trace("b", &["X", "Y", "Z"]),
            chain_trace("c", &["P", "Q"]),
        ])
        .unwrap();
        let once = filter_incomplete(&traces);
        let twice = filter_incomplete(&once.kept);
        assert!(twice.removed.is_empty());
        assert_eq!(once.kept, twice.kept);
    }

    #[test]
    fn report_serializes_ids() {
        let a = chain_trace("a", &["X", "Y"]);
        let b = chain_trace("b", &["X", "Y", "Z"]);
        let report = filter_incomplete(&TraceSet::new(vec![a, b]).unwrap());
        let json = report.to_json();
        assert!(json.contains(r#""removed":[{"traceId":"a","witnessTraceId":"b"}]"#));
        assert!(json.contains(r#""kept":{"traces":"#));
    }
}
