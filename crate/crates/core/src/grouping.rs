//! Connected-component grouping of the similarity graph.
//!
//! Components are found with a disjoint-set-union structure; each group then
//! elects the member with the highest similarity-graph degree as its
//! representative (ties go to the smallest trace index).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::similarity::{
    build_similarity_graph, par_build_similarity_graph, EncodingKind, SimilarityGraph, Threshold,
};
use crate::trace::TraceSet;

/// Union-find over `0..n` with union by size and path compression.
#[derive(Clone, Debug)]
pub struct DisjointSetUnion {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSetUnion {
    pub fn new(len: usize) -> Self {
        DisjointSetUnion {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    fn check(&self, index: usize) -> Result<()> {
        if index >= self.parent.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.parent.len(),
            });
        }
        Ok(())
    }

    /// Root of the set containing `index`, compressing the path walked.
    pub fn find(&mut self, index: usize) -> Result<usize> {
        self.check(index)?;
        let mut x = index;
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        Ok(x)
    }

    /// Merges the sets containing `a` and `b`; returns whether they were
    /// previously distinct.
    pub fn union(&mut self, a: usize, b: usize) -> Result<bool> {
        let mut ra = self.find(a)?;
        let mut rb = self.find(b)?;
        if ra == rb {
            return Ok(false);
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Ok(true)
    }
}

/// Connected components of the graph: member lists sorted ascending, groups
/// ordered by their smallest member.
pub fn components(graph: &SimilarityGraph) -> Vec<Vec<usize>> {
    let n = graph.node_count();
    let mut dsu = DisjointSetUnion::new(n);
    for &(i, j) in graph.edges() {
        dsu.union(i, j).expect("edge endpoints are in range");
    }
    let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
    for node in 0..n {
        let root = dsu.find(node).expect("node in range");
        by_root[root].push(node);
    }
    let mut groups: Vec<Vec<usize>> = by_root.into_iter().filter(|g| !g.is_empty()).collect();
    groups.sort_by_key(|g| g[0]);
    groups
}

/// The member of one component with the highest degree; ties break to the
/// smallest trace index. A component's edges all stay inside it, so graph
/// degree equals within-group degree.
pub fn pick_representative(members: &[usize], graph: &SimilarityGraph) -> Result<usize> {
    let degrees = graph.degrees();
    members
        .iter()
        .copied()
        .max_by(|&a, &b| degrees[a].cmp(&degrees[b]).then(b.cmp(&a)))
        .ok_or(Error::EmptyGroup)
}

/// One group of similar traces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceGroup {
    /// Trace indices, sorted ascending.
    pub members: Vec<usize>,
    pub representative: usize,
}

/// A partition of the trace indices into groups of similar traces.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceGrouping {
    pub kind: EncodingKind,
    pub threshold: Threshold,
    pub groups: Vec<TraceGroup>,
}

impl TraceGrouping {
    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    /// Serializable form, with members reported by trace id. `traces` must
    /// be the set this grouping was computed from.
    pub fn to_doc(&self, traces: &TraceSet) -> GroupingDoc {
        GroupingDoc {
            encoding: self.kind,
            threshold: self.threshold.to_f64(),
            num_groups: self.groups.len(),
            groups: self
                .groups
                .iter()
                .map(|g| GroupDoc {
                    members: g
                        .members
                        .iter()
                        .map(|&i| traces.get(i).expect("member in range").trace_id().to_string())
                        .collect(),
                    representative: traces
                        .get(g.representative)
                        .expect("representative in range")
                        .trace_id()
                        .to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self, traces: &TraceSet) -> String {
        serde_json::to_string(&self.to_doc(traces)).expect("grouping serializes")
    }
}

/// JSON form of a grouping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupingDoc {
    pub encoding: EncodingKind,
    pub threshold: f64,
    pub num_groups: usize,
    pub groups: Vec<GroupDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupDoc {
    pub members: Vec<String>,
    pub representative: String,
}

fn group_graph(graph: &SimilarityGraph) -> Vec<TraceGroup> {
    components(graph)
        .into_iter()
        .map(|members| {
            let representative =
                pick_representative(&members, graph).expect("components are non-empty");
            TraceGroup {
                members,
                representative,
            }
        })
        .collect()
}

/// Encodes every trace, builds the similarity graph at `threshold`, and
/// returns its connected components with elected representatives.
pub fn get_groups(traces: &TraceSet, kind: EncodingKind, threshold: Threshold) -> TraceGrouping {
    let graph = build_similarity_graph(traces, kind, threshold);
    TraceGrouping {
        kind,
        threshold,
        groups: group_graph(&graph),
    }
}

/// [`get_groups`] with the pair loop parallelized; the result is identical.
pub fn par_get_groups(
    traces: &TraceSet,
    kind: EncodingKind,
    threshold: Threshold,
) -> TraceGrouping {
    let graph = par_build_similarity_graph(traces, kind, threshold);
    TraceGrouping {
        kind,
        threshold,
        groups: group_graph(&graph),
    }
}
