//! Graph-theoretic observability test.
//!
//! A CBN is observable exactly when
//! - every unobserved node points to some other node, and
//! - every cycle of unobserved nodes has a member that points to a node
//!   outside the cycle,
//!
//! where `p` points to `q` when `p != q` and `p` is the only in-neighbor of
//! `q`. Equivalently, the nodes can be split into disjoint observed paths:
//! shift registers whose last cell is observed.

use thiserror::Error;

use crate::graph::DependencyGraph;
use crate::minimal::SolverScratch;
use crate::network::Cbn;

/// Unobserved nodes that point to no other node.
pub fn check_o1(g: &DependencyGraph) -> Vec<usize> {
    SolverScratch::build(g).l1_nodes()
}

/// Cycles of unobserved nodes in which no member points out of the cycle.
///
/// Cycles that only fail because they contain (or are drained through) a
/// node reported by [`check_o1`] are not listed: those are resolved as soon
/// as the first property is repaired. When the first property holds the
/// result is exactly the set of violating cycles, and they are vertex
/// disjoint.
pub fn check_o2(g: &DependencyGraph) -> Vec<Vec<usize>> {
    SolverScratch::build(g).cycles(g)
}

/// A shift register ending in an observed node. `nodes[i]` points to
/// `nodes[i + 1]`; the last node is observed, all others are not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedPath {
    pub nodes: Vec<usize>,
}

impl ObservedPath {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The observed node at the end of the path.
    pub fn output(&self) -> usize {
        *self.nodes.last().expect("observed paths are non-empty")
    }

    /// Checks the path invariants against `g`.
    pub fn is_valid_in(&self, g: &DependencyGraph) -> bool {
        let Some((&last, rest)) = self.nodes.split_last() else {
            return false;
        };
        g.is_observed(last)
            && rest.iter().all(|&v| !g.is_observed(v))
            && self.nodes.windows(2).all(|w| g.points_to(w[0], w[1]))
    }
}

/// One observed path per observed node, disjoint and covering every node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedPathCover {
    pub paths: Vec<ObservedPath>,
}

impl ObservedPathCover {
    pub fn longest(&self) -> usize {
        self.paths.iter().map(ObservedPath::len).max().unwrap_or(0)
    }

    pub fn is_valid_in(&self, g: &DependencyGraph) -> bool {
        let mut seen = vec![false; g.n()];
        for path in &self.paths {
            if !path.is_valid_in(g) {
                return false;
            }
            for &v in &path.nodes {
                if std::mem::replace(&mut seen[v], true) {
                    return false;
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{} node(s) are not covered by any observed path", .uncovered.len())]
pub struct DecompositionFailure {
    pub uncovered: Vec<usize>,
    /// The paths that were built before giving up.
    pub partial: ObservedPathCover,
}

/// Splits the nodes into disjoint observed paths, one per observed node in
/// ascending order, by tracing back from each observed node while the
/// current node has a single, unobserved, unassigned in-neighbor other than
/// itself.
pub fn decompose(g: &DependencyGraph) -> Result<ObservedPathCover, DecompositionFailure> {
    let n = g.n();
    let mut assigned = vec![false; n];
    let mut paths = Vec::new();
    for o in (0..n).filter(|&v| g.is_observed(v)) {
        assigned[o] = true;
        let mut nodes = vec![o];
        let mut current = o;
        while let Some(v) = g.sole_in_neighbor(current) {
            if v == current || assigned[v] || g.is_observed(v) {
                break;
            }
            assigned[v] = true;
            nodes.push(v);
            current = v;
        }
        nodes.reverse();
        paths.push(ObservedPath { nodes });
    }
    let cover = ObservedPathCover { paths };
    let uncovered: Vec<usize> = (0..n).filter(|&v| !assigned[v]).collect();
    if uncovered.is_empty() {
        Ok(cover)
    } else {
        Err(DecompositionFailure {
            uncovered,
            partial: cover,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservabilityVerdict {
    pub observable: bool,
    pub o1_violations: Vec<usize>,
    pub o2_violations: Vec<Vec<usize>>,
}

pub fn verdict(g: &DependencyGraph) -> ObservabilityVerdict {
    let scratch = SolverScratch::build(g);
    let o1_violations = scratch.l1_nodes();
    let o2_violations = scratch.cycles(g);
    ObservabilityVerdict {
        observable: o1_violations.is_empty() && o2_violations.is_empty(),
        o1_violations,
        o2_violations,
    }
}

pub fn is_observable(cbn: &Cbn) -> ObservabilityVerdict {
    verdict(&DependencyGraph::new(cbn))
}
