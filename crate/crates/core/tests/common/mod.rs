//! Helpers shared by the integration and acceptance tests: fixtures,
//! independent oracles, and seeded random generators.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::Rng;
use traceagg::{ServiceName, SimilarityGraph, Span, Trace, TraceSet};

pub const SAMPLE24_JSON: &str = include_str!("../fixtures/sample24.json");
pub const SOCIAL_PAIR_JSON: &str = include_str!("../fixtures/social_pair.json");

pub fn sample24() -> TraceSet {
    TraceSet::from_json_str(SAMPLE24_JSON).expect("fixture is valid")
}

pub fn social_pair() -> TraceSet {
    TraceSet::from_json_str(SOCIAL_PAIR_JSON).expect("fixture is valid")
}

pub fn svc(name: &str) -> ServiceName {
    ServiceName::new(name).expect("non-empty")
}

/// A single chain of spans visiting `services` in order.
pub fn chain_trace(id: &str, services: &[&str]) -> Trace {
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
    Trace::new(id, spans).expect("chain is valid")
}

/// Connected components by breadth-first search; members sorted, groups
/// ordered by smallest member. Independent of the union-find path.
pub fn bfs_components(node_count: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adjacency = vec![Vec::new(); node_count];
    for &(a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; node_count];
    let mut groups = Vec::new();
    for start in 0..node_count {
        if seen[start] {
            continue;
        }
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut members = Vec::new();
        while let Some(node) = queue.pop_front() {
            members.push(node);
            for &next in &adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups.sort_by_key(|g| g[0]);
    groups
}

pub fn graph_components_via_bfs(graph: &SimilarityGraph) -> Vec<Vec<usize>> {
    bfs_components(graph.node_count(), graph.edges())
}

/// Brute-force Jaccard over service names: enumerates membership of every
/// name appearing in either trace, never touching set operations.
pub fn jaccard_oracle_services(a: &Trace, b: &Trace) -> (u64, u64) {
    let names_a: HashSet<String> = a
        .spans()
        .iter()
        .map(|s| s.service.as_str().to_string())
        .collect();
    let names_b: HashSet<String> = b
        .spans()
        .iter()
        .map(|s| s.service.as_str().to_string())
        .collect();
    let mut all: Vec<&String> = names_a.union(&names_b).collect();
    all.sort();
    let mut intersection = 0u64;
    let mut union = 0u64;
    for name in all {
        let in_a = names_a.contains(name.as_str());
        let in_b = names_b.contains(name.as_str());
        if in_a || in_b {
            union += 1;
        }
        if in_a && in_b {
            intersection += 1;
        }
    }
    if union == 0 {
        (1, 1)
    } else {
        (intersection, union)
    }
}

/// A random trace of 1..=max_spans spans over the given service vocabulary.
/// Span `i > 0` picks a random earlier span as parent, so the result is
/// always a valid tree.
pub fn random_trace(rng: &mut impl Rng, id: &str, vocab: &[&str], max_spans: usize) -> Trace {
    let span_count = rng.gen_range(1..=max_spans);
    let mut spans = Vec::with_capacity(span_count);
    for i in 0..span_count {
        let service = svc(vocab[rng.gen_range(0..vocab.len())]);
        if i == 0 {
            spans.push(Span::root(format!("s{i}"), service));
        } else {
            let parent = rng.gen_range(0..i);
            spans.push(Span::child(format!("s{i}"), format!("s{parent}"), service));
        }
    }
    Trace::new(id, spans).expect("generated tree is valid")
}

/// A random trace set of 1..=max_traces traces over a vocabulary of
/// `vocab_size` service names.
pub fn random_trace_set(
    rng: &mut impl Rng,
    max_traces: usize,
    vocab_size: usize,
    max_spans: usize,
) -> TraceSet {
    let vocab: Vec<String> = (0..vocab_size).map(|i| format!("svc{i}")).collect();
    let vocab_refs: Vec<&str> = vocab.iter().map(|s| s.as_str()).collect();
    let trace_count = rng.gen_range(1..=max_traces);
    let traces = (0..trace_count)
        .map(|i| random_trace(rng, &format!("t{i}"), &vocab_refs, max_spans))
        .collect();
    TraceSet::new(traces).expect("ids are unique")
}

/// Random undirected graph edges over `node_count` nodes.
pub fn random_edges(
    rng: &mut impl Rng,
    node_count: usize,
    edge_count: usize,
) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    if node_count < 2 {
        return Vec::new();
    }
    for _ in 0..edge_count {
        let a = rng.gen_range(0..node_count);
        let b = rng.gen_range(0..node_count);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    edges.into_iter().collect()
}

/// Minimal structural check that a DOT document is well-formed: one
/// `digraph G {` header, a closing brace, and every body line shaped like a
/// node or edge statement with balanced quoting.
pub fn assert_valid_dot(dot: &str) {
    let mut lines = dot.lines();
    assert_eq!(lines.next(), Some("digraph G {"), "missing header: {dot}");
    let mut closed = false;
    for line in lines {
        if closed {
            panic!("content after closing brace: {line}");
        }
        if line == "}" {
            closed = true;
            continue;
        }
        let line = line.trim_start();
        // Statements: `node [..];`, `"id" [..];`, or `"a" -> "b" [..];`
        assert!(line.ends_with("];"), "unterminated statement: {line}");
        let quote_count = line.chars().filter(|&c| c == '"').count();
        assert!(quote_count % 2 == 0, "unbalanced quotes: {line}");
        let bracket_open = line.matches('[').count();
        let bracket_close = line.matches(']').count();
        assert_eq!(bracket_open, 1, "expected one attr list: {line}");
        assert_eq!(bracket_close, 1, "expected one attr list: {line}");
    }
    assert!(closed, "missing closing brace");
}
