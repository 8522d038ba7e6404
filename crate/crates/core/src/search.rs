//! Threshold tuning: find a similarity threshold whose group count is
//! closest to a caller-supplied goal.
//!
//! The group count is a non-decreasing step function of the threshold
//! (raising the threshold only removes graph edges), so a binary search over
//! `[0, 1]` converges onto the two plateaus adjacent to the goal crossing.
//! The endpoints 0 and 1 are probed up front: the all-pairs graph at
//! threshold 0 lives on a plateau that dyadic midpoints can never reach when
//! some pair has similarity exactly 0.
//!
//! [`sweep_optimal_threshold`] is the exhaustive counterpart: it evaluates
//! one candidate per plateau and is exact by construction. The two must
//! agree on how close to the goal they can get.

use std::collections::BTreeSet;
use std::num::NonZeroUsize;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::{get_groups, GroupDoc, TraceGrouping};
use crate::similarity::{encode, similarity, EncodingKind, Threshold};
use crate::trace::TraceSet;

const MAX_ITERATIONS: usize = 40;

fn bracket_epsilon() -> Ratio<u64> {
    Ratio::new_raw(1, 1_000_000)
}

/// One evaluated threshold and the group count it produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Probe {
    pub threshold: Threshold,
    pub num_groups: usize,
}

/// Outcome of a threshold search.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSearchResult {
    /// The winning threshold, reported as the probed value.
    pub threshold: Threshold,
    pub num_groups: usize,
    /// The grouping recomputed at the winning threshold.
    pub grouping: TraceGrouping,
    /// Every probe, in evaluation order.
    pub probes: Vec<Probe>,
}

impl ThresholdSearchResult {
    pub fn to_doc(&self, traces: &TraceSet) -> SearchDoc {
        let grouping = self.grouping.to_doc(traces);
        SearchDoc {
            encoding: grouping.encoding,
            threshold: grouping.threshold,
            num_groups: grouping.num_groups,
            groups: grouping.groups,
            probes: self
                .probes
                .iter()
                .map(|p| ProbeDoc {
                    threshold: p.threshold.to_f64(),
                    num_groups: p.num_groups,
                })
                .collect(),
        }
    }

    pub fn to_json(&self, traces: &TraceSet) -> String {
        serde_json::to_string(&self.to_doc(traces)).expect("search result serializes")
    }
}

/// JSON form of a search result: the grouping document plus the probe list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchDoc {
    pub encoding: EncodingKind,
    pub threshold: f64,
    pub num_groups: usize,
    pub groups: Vec<GroupDoc>,
    pub probes: Vec<ProbeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProbeDoc {
    pub threshold: f64,
    pub num_groups: usize,
}

struct BestProbe {
    goal: usize,
    best: Option<Probe>,
}

impl BestProbe {
    fn new(goal: usize) -> Self {
        BestProbe { goal, best: None }
    }

    fn distance(&self, probe: Probe) -> usize {
        probe.num_groups.abs_diff(self.goal)
    }

    /// Records a probe; ties on distance go to the larger threshold.
    fn offer(&mut self, probe: Probe) {
        let better = match self.best {
            None => true,
            Some(current) => {
                let (d_new, d_cur) = (self.distance(probe), self.distance(current));
                d_new < d_cur || (d_new == d_cur && probe.threshold > current.threshold)
            }
        };
        if better {
            self.best = Some(probe);
        }
    }
}

fn finish(
    traces: &TraceSet,
    kind: EncodingKind,
    winner: Probe,
    probes: Vec<Probe>,
) -> ThresholdSearchResult {
    ThresholdSearchResult {
        threshold: winner.threshold,
        num_groups: winner.num_groups,
        grouping: get_groups(traces, kind, winner.threshold),
        probes,
    }
}

/// Binary search for a threshold whose group count is closest to
/// `goal_groups`.
///
/// Maintains `low = 0`, `high = 1` and probes the midpoint: too many groups
/// moves `high` down (the threshold must be smaller), too few moves `low`
/// up. An exact hit terminates immediately. Otherwise the search stops when
/// the bracket is narrower than 1e-6 (or after 40 iterations) and returns
/// the best probe seen, ties broken toward the larger threshold.
pub fn find_optimal_threshold(
    traces: &TraceSet,
    kind: EncodingKind,
    goal_groups: NonZeroUsize,
) -> Result<ThresholdSearchResult> {
    if traces.is_empty() {
        return Err(Error::EmptyTraceSet);
    }
    let goal = goal_groups.get();
    let count_at = |threshold: Threshold| Probe {
        threshold,
        num_groups: get_groups(traces, kind, threshold).num_groups(),
    };

    let mut probes = Vec::new();
    let mut best = BestProbe::new(goal);

    // Endpoint probes. The top plateau is reachable by midpoints, but probing
    // 1 first makes an exact hit return the largest qualifying threshold; the
    // bottom plateau can be the single point {0}, which midpoints never reach.
    for endpoint in [Threshold::one(), Threshold::zero()] {
        let probe = count_at(endpoint);
        probes.push(probe);
        best.offer(probe);
        if probe.num_groups == goal && endpoint == Threshold::one() {
            return Ok(finish(traces, kind, probe, probes));
        }
    }

    let mut low = Threshold::zero();
    let mut high = Threshold::one();
    for _ in 0..MAX_ITERATIONS {
        if high.gap(low) < bracket_epsilon() {
            break;
        }
        let mid = low.midpoint(high);
        let probe = count_at(mid);
        probes.push(probe);
        best.offer(probe);
        match probe.num_groups.cmp(&goal) {
            std::cmp::Ordering::Equal => return Ok(finish(traces, kind, probe, probes)),
            std::cmp::Ordering::Greater => high = mid,
            std::cmp::Ordering::Less => low = mid,
        }
    }

    let winner = best.best.expect("at least the endpoint probes ran");
    Ok(finish(traces, kind, winner, probes))
}

/// Exhaustive-sweep counterpart of [`find_optimal_threshold`].
///
/// The group count can only change at a pairwise similarity value, so
/// evaluating `{0} ∪ {distinct pairwise similarities} ∪ {1}` (plus one value
/// strictly above the largest sub-1 similarity) covers every plateau.
/// Returns the global minimizer of `|numGroups - goal|`, ties toward the
/// larger threshold.
pub fn sweep_optimal_threshold(
    traces: &TraceSet,
    kind: EncodingKind,
    goal_groups: NonZeroUsize,
) -> Result<ThresholdSearchResult> {
    if traces.is_empty() {
        return Err(Error::EmptyTraceSet);
    }
    let goal = goal_groups.get();

    let mut candidates: BTreeSet<Threshold> = [Threshold::zero(), Threshold::one()].into();
    let encodings: Vec<_> = traces.iter().map(|t| encode(t, kind)).collect();
    for i in 0..encodings.len() {
        for j in (i + 1)..encodings.len() {
            let sim = similarity(&encodings[i], &encodings[j]).expect("same kind");
            candidates.insert(sim.as_threshold());
        }
    }
    if let Some(&largest_sub_one) = candidates.range(..Threshold::one()).next_back() {
        candidates.insert(largest_sub_one.midpoint(Threshold::one()));
    }

    let mut probes = Vec::with_capacity(candidates.len());
    let mut best = BestProbe::new(goal);
    for threshold in candidates {
        let probe = Probe {
            threshold,
            num_groups: get_groups(traces, kind, threshold).num_groups(),
        };
        probes.push(probe);
        best.offer(probe);
    }

    let winner = best.best.expect("candidates are never empty");
    Ok(finish(traces, kind, winner, probes))
}
