//! Filter, group, and aggregate distributed traces by workflow similarity.
//!
//! The pipeline, end to end:
//!
//! 1. **Load** span-based traces from JSON ([`TraceSet::from_json_str`]).
//! 2. **Preprocess**: drop traces whose edge set is a proper subset of
//!    another trace's edge set ([`filter_incomplete`]).
//! 3. **Encode** each trace as its service set, edge set, or depth
//!    ([`encode`]), and compare encodings with exact-rational Jaccard
//!    similarity ([`similarity`]).
//! 4. **Group**: connect pairs whose similarity passes a threshold, then
//!    take connected components with union-find and elect a highest-degree
//!    representative per group ([`get_groups`]).
//! 5. **Tune**: binary-search the threshold for a goal group count
//!    ([`find_optimal_threshold`]), validated against an exhaustive sweep
//!    ([`sweep_optimal_threshold`]).
//! 6. **Export**: per-group aggregates with presence counts and call-count
//!    matrices, rendered as JSON or DOT ([`build_aggregate`],
//!    [`render_group_dot`], [`render_service_dot`]).
//!
//! ```
//! use traceagg::{get_groups, EncodingKind, Threshold, TraceSet};
//!
//! let json = r#"{"traces": [
//!     {"spans": [
//!         {"spanId": "a", "parentSpanId": null, "service": "Front End"},
//!         {"spanId": "b", "parentSpanId": "a", "service": "Friends"}
//!     ]},
//!     {"spans": [
//!         {"spanId": "a", "parentSpanId": null, "service": "Front End"},
//!         {"spanId": "b", "parentSpanId": "a", "service": "Friends"},
//!         {"spanId": "c", "parentSpanId": "b", "service": "Friends Database"}
//!     ]}
//! ]}"#;
//! let traces = TraceSet::from_json_str(json)?;
//! let grouping = get_groups(
//!     &traces,
//!     EncodingKind::Services,
//!     Threshold::parse_decimal("0.5")?,
//! );
//! assert_eq!(grouping.num_groups(), 1);
//! # Ok::<(), traceagg::Error>(())
//! ```

pub mod aggregate;
pub mod error;
pub mod grouping;
pub mod preprocess;
pub mod search;
pub mod similarity;
pub mod trace;

pub use aggregate::{build_aggregate, render_group_dot, render_service_dot, AggregateGroup};
pub use error::{Error, Result};
pub use grouping::{
    components, get_groups, par_get_groups, pick_representative, DisjointSetUnion, GroupDoc,
    GroupingDoc, TraceGroup, TraceGrouping,
};
pub use preprocess::{filter_incomplete, FilterReport, RemovedTrace};
pub use search::{
    find_optimal_threshold, sweep_optimal_threshold, Probe, ProbeDoc, SearchDoc,
    ThresholdSearchResult,
};
pub use similarity::{
    build_similarity_graph, encode, par_build_similarity_graph, similarity, Encoding,
    EncodingKind, Similarity, SimilarityGraph, Threshold,
};
pub use trace::{CallEdge, ServiceName, Span, Trace, TraceSet};

// The guide chapters double as doc tests so their snippets never drift from
// the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/trace-model.md")]
    pub struct TraceModel;
    #[doc = include_str!("../../../book/src/preprocessing.md")]
    pub struct Preprocessing;
    #[doc = include_str!("../../../book/src/similarity.md")]
    pub struct Similarity;
    #[doc = include_str!("../../../book/src/grouping.md")]
    pub struct Grouping;
    #[doc = include_str!("../../../book/src/threshold-search.md")]
    pub struct ThresholdSearch;
    #[doc = include_str!("../../../book/src/aggregates.md")]
    pub struct Aggregates;
}
