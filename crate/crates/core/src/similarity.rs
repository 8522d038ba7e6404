//! Trace encodings and Jaccard similarity.
//!
//! A trace is summarized by one of three encodings: its service set, its
//! deduplicated call-edge set, or its depth. Set encodings are compared with
//! Jaccard similarity (intersection size over union size); depth is compared
//! with an equality indicator so it fits the same graph machinery.
//!
//! Similarities and thresholds are exact rationals throughout. Comparing
//! `3/5` against a threshold of `0.6` must not depend on floating-point
//! rounding, so the pass rule is evaluated by cross-multiplication.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{CallEdge, ServiceName, Trace, TraceSet};

/// The encoding applied to every trace of a grouping run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingKind {
    /// The set of service names in the trace.
    Services,
    /// The deduplicated set of caller-to-callee edges.
    Structure,
    /// The depth of the span forest.
    Depth,
}

impl EncodingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncodingKind::Services => "services",
            EncodingKind::Structure => "structure",
            EncodingKind::Depth => "depth",
        }
    }
}

impl fmt::Display for EncodingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncodingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "services" => Ok(EncodingKind::Services),
            "structure" => Ok(EncodingKind::Structure),
            "depth" => Ok(EncodingKind::Depth),
            other => Err(format!(
                "unknown encoding {other:?} (expected services, structure, or depth)"
            )),
        }
    }
}

/// A trace summarized under one [`EncodingKind`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Encoding {
    Services(BTreeSet<ServiceName>),
    Structure(BTreeSet<CallEdge>),
    Depth(usize),
}

impl Encoding {
    pub fn kind(&self) -> EncodingKind {
        match self {
            Encoding::Services(_) => EncodingKind::Services,
            Encoding::Structure(_) => EncodingKind::Structure,
            Encoding::Depth(_) => EncodingKind::Depth,
        }
    }
}

/// Encodes one trace.
pub fn encode(trace: &Trace, kind: EncodingKind) -> Encoding {
    match kind {
        EncodingKind::Services => Encoding::Services(trace.services()),
        EncodingKind::Structure => Encoding::Structure(trace.edge_set()),
        EncodingKind::Depth => Encoding::Depth(trace.depth()),
    }
}

/// An exact similarity value in `[0, 1]`, kept as an integer ratio.
///
/// For set encodings this is `|a ∩ b| / |a ∪ b|`, with two empty sets
/// defined as identical (`1/1`). For depth it is `1/1` when equal and `0/1`
/// otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Similarity {
    intersection: u64,
    union: u64,
}

impl Similarity {
    fn from_counts(intersection: usize, union: usize) -> Self {
        if union == 0 {
            // Two empty sets are structurally identical; avoid 0/0.
            Similarity {
                intersection: 1,
                union: 1,
            }
        } else {
            Similarity {
                intersection: intersection as u64,
                union: union as u64,
            }
        }
    }

    /// The raw (intersection, union) counts behind the ratio.
    pub fn as_ratio(self) -> (u64, u64) {
        (self.intersection, self.union)
    }

    /// The ratio in lowest terms.
    pub fn reduced(self) -> (u64, u64) {
        let r = Ratio::new(self.intersection, self.union);
        (*r.numer(), *r.denom())
    }

    pub fn value(self) -> f64 {
        self.intersection as f64 / self.union as f64
    }

    /// Exact pass rule: `similarity >= threshold`, by cross-multiplication.
    pub fn passes(self, threshold: Threshold) -> bool {
        let (t_num, t_den) = threshold.as_ratio();
        u128::from(self.intersection) * u128::from(t_den)
            >= u128::from(t_num) * u128::from(self.union)
    }

    pub(crate) fn as_threshold(self) -> Threshold {
        Threshold(Ratio::new(self.intersection, self.union))
    }
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Similarity {
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    Similarity::from_counts(intersection, union)
}

/// Similarity of two encodings of the same kind.
pub fn similarity(a: &Encoding, b: &Encoding) -> Result<Similarity> {
    match (a, b) {
        (Encoding::Services(x), Encoding::Services(y)) => Ok(jaccard(x, y)),
        (Encoding::Structure(x), Encoding::Structure(y)) => Ok(jaccard(x, y)),
        (Encoding::Depth(x), Encoding::Depth(y)) => Ok(if x == y {
            Similarity::from_counts(1, 1)
        } else {
            Similarity::from_counts(0, 1)
        }),
        _ => Err(Error::KindMismatch {
            left: a.kind(),
            right: b.kind(),
        }),
    }
}

/// A similarity threshold in `[0, 1]`, stored as an exact rational.
///
/// Build one from a decimal string ([`Threshold::parse_decimal`]) or from an
/// integer ratio ([`Threshold::new`]). Midpoints taken during a search stay
/// exact, so a threshold like `3/5` is never misclassified by float rounding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Threshold(Ratio<u64>);

impl Threshold {
    pub fn zero() -> Self {
        Threshold(Ratio::new_raw(0, 1))
    }

    pub fn one() -> Self {
        Threshold(Ratio::new_raw(1, 1))
    }

    /// `numer / denom`, which must lie in `[0, 1]`.
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidThreshold("denominator is zero".into()));
        }
        if numer > denom {
            return Err(Error::InvalidThreshold(format!(
                "{numer}/{denom} is greater than 1"
            )));
        }
        Ok(Threshold(Ratio::new(numer, denom)))
    }

    /// Parses a plain decimal like `"0.8"`, `"0"`, or `"1"` exactly.
    pub fn parse_decimal(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |msg: &str| Error::InvalidThreshold(format!("{text:?}: {msg}"));
        let (int_part, frac_part) = match text.split_once('.') {
            Some((i, f)) => (i, f),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("empty"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad("expected a plain decimal in [0, 1]"));
        }
        if frac_part.len() > 18 {
            return Err(bad("too many decimal digits (max 18)"));
        }
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad("integer part too large"))?
        };
        let denom = 10u64.pow(frac_part.len() as u32);
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().expect("digits only")
        };
        let numer = int_val
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(|| bad("value too large"))?;
        Self::new(numer, denom)
    }

    pub fn as_ratio(self) -> (u64, u64) {
        (*self.0.numer(), *self.0.denom())
    }

    pub fn to_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// Exact midpoint of two thresholds.
    pub(crate) fn midpoint(self, other: Self) -> Self {
        Threshold((self.0 + other.0) / Ratio::new_raw(2, 1))
    }

    pub(crate) fn gap(self, other: Self) -> Ratio<u64> {
        if self.0 >= other.0 {
            self.0 - other.0
        } else {
            other.0 - self.0
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Traces as nodes, with an undirected edge between every pair whose
/// encoding similarity passes the threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityGraph {
    node_count: usize,
    /// Sorted, deduplicated pairs with `i < j`.
    edges: Vec<(usize, usize)>,
    threshold: Threshold,
    kind: EncodingKind,
}

impl SimilarityGraph {
    /// Builds a graph from explicit edges. Pairs are normalized to `i < j`
    /// and deduplicated; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        threshold: Threshold,
        kind: EncodingKind,
    ) -> Result<Self> {
        let mut normalized = BTreeSet::new();
        for (a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::IndexOutOfRange {
                    index: a.max(b),
                    len: node_count,
                });
            }
            if a == b {
                return Err(Error::InvalidEdge(format!("self-loop on node {a}")));
            }
            normalized.insert((a.min(b), a.max(b)));
        }
        Ok(SimilarityGraph {
            node_count,
            edges: normalized.into_iter().collect(),
            threshold,
            kind,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let pair = (a.min(b), a.max(b));
        self.edges.binary_search(&pair).is_ok()
    }

    /// Degree of every node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut degrees = vec![0; self.node_count];
        for &(i, j) in &self.edges {
            degrees[i] += 1;
            degrees[j] += 1;
        }
        degrees
    }
}

fn encode_all(traces: &TraceSet, kind: EncodingKind) -> Vec<Encoding> {
    traces.iter().map(|t| encode(t, kind)).collect()
}

fn pair_passes(encodings: &[Encoding], i: usize, j: usize, threshold: Threshold) -> bool {
    similarity(&encodings[i], &encodings[j])
        .expect("encodings share a kind")
        .passes(threshold)
}

/// Evaluates all `C(n, 2)` pairs sequentially and connects those whose
/// similarity is at least `threshold`.
pub fn build_similarity_graph(
    traces: &TraceSet,
    kind: EncodingKind,
    threshold: Threshold,
) -> SimilarityGraph {
    let encodings = encode_all(traces, kind);
    let n = encodings.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if pair_passes(&encodings, i, j, threshold) {
                edges.push((i, j));
            }
        }
    }
    SimilarityGraph {
        node_count: n,
        edges,
        threshold,
        kind,
    }
}

/// Same result as [`build_similarity_graph`], with the pair loop spread
/// across threads. The edge list is sorted afterwards, so the output is
/// identical to the sequential build.
pub fn par_build_similarity_graph(
    traces: &TraceSet,
    kind: EncodingKind,
    threshold: Threshold,
) -> SimilarityGraph {
    let encodings = encode_all(traces, kind);
    let n = encodings.len();
    let mut edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| pair_passes(&encodings, i, j, threshold))
        .collect();
    edges.sort_unstable();
    SimilarityGraph {
        node_count: n,
        edges,
        threshold,
        kind,
    }
}
