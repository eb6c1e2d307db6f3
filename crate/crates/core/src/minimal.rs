//! Minimal set of additional sensors that makes a CBN observable.
//!
//! The solver classifies every unobserved node as either a node that points
//! to nothing (it must be observed) or a node that points to at least one
//! other node. The latter are then reduced by tracing the points-to
//! relation backwards from every node that is, or will be, covered by an
//! observed path. What survives is a disjoint union of cycles none of whose
//! members points out of its own cycle; each such cycle needs exactly one
//! sensor. Every step is linear in `|V| + |E|`.

use std::fmt;

use crate::graph::DependencyGraph;
use crate::network::Cbn;
use crate::scc::tarjan_scc;

/// Per-node working lists of the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverScratch {
    /// Unobserved nodes that point to no other node.
    pub l1: Vec<bool>,
    /// Unobserved nodes that point to at least one other node.
    pub l2: Vec<bool>,
    /// `pairs[i] = Some(j)` iff `N_in(i) = {j}`, `j` unobserved and `i != j`.
    pub pairs: Vec<Option<usize>>,
    /// Members of cycles that violate the second observability property.
    pub l3: Vec<bool>,
}

impl SolverScratch {
    pub fn build(g: &DependencyGraph) -> Self {
        let n = g.n();
        let mut l2 = vec![false; n];
        let mut pairs = vec![None; n];
        for (i, pair) in pairs.iter_mut().enumerate() {
            if let Some(j) = g.sole_in_neighbor(i) {
                if !g.is_observed(j) && i != j {
                    l2[j] = true;
                    *pair = Some(j);
                }
            }
        }
        let l1: Vec<bool> = (0..n).map(|i| !g.is_observed(i) && !l2[i]).collect();

        // Trace back from every node outside L3. Observed nodes and L1 nodes
        // end up at the tail of an observed path, so whatever points to them
        // can be covered as well.
        let mut l3 = l2.clone();
        let mut links = pairs.clone();
        for i in 0..n {
            if l3[i] {
                continue;
            }
            let mut k = i;
            while let Some(p) = links[k].take() {
                l3[p] = false;
                k = p;
            }
        }
        SolverScratch { l1, l2, pairs, l3 }
    }

    pub fn l1_nodes(&self) -> Vec<usize> {
        ones(&self.l1)
    }

    pub fn l2_nodes(&self) -> Vec<usize> {
        ones(&self.l2)
    }

    pub fn l3_nodes(&self) -> Vec<usize> {
        ones(&self.l3)
    }

    /// Splits L3 into its cycles. Each cycle is listed from its lowest node
    /// along the edge direction; cycles are ordered by that lowest node.
    pub fn cycles(&self, g: &DependencyGraph) -> Vec<Vec<usize>> {
        let n = g.n();
        let reduced: Vec<Vec<usize>> = (0..n)
            .map(|v| {
                if self.l3[v] {
                    g.out_neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&w| self.l3[w])
                        .collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        let mut cycles = Vec::new();
        for comp in tarjan_scc(&reduced) {
            if !self.l3[comp[0]] {
                continue;
            }
            let start = *comp.iter().min().expect("components are non-empty");
            let mut cycle = Vec::with_capacity(comp.len());
            let mut v = start;
            loop {
                assert!(
                    reduced[v].len() == 1 && g.in_neighbors(v).len() == 1,
                    "component of the reduced graph containing x{} is not a simple cycle",
                    v + 1
                );
                cycle.push(v);
                v = reduced[v][0];
                if v == start {
                    break;
                }
            }
            assert_eq!(
                cycle.len(),
                comp.len(),
                "reduced graph component is not a simple cycle"
            );
            cycles.push(cycle);
        }
        cycles.sort_by_key(|c| c[0]);
        cycles
    }
}

fn ones(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect()
}

/// How one sensor is chosen from each violating cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RepresentativeRule {
    #[default]
    LowestIndex,
}

impl fmt::Display for RepresentativeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepresentativeRule::LowestIndex => f.write_str("lowest index in each cycle"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalSolution {
    /// Nodes to observe, ascending.
    pub chosen: Vec<usize>,
    /// Nodes that appear in every minimal solution.
    pub l1_part: Vec<usize>,
    /// Violating cycles; any one member of each completes a solution.
    pub cycles: Vec<Vec<usize>>,
    pub representative_rule: RepresentativeRule,
}

impl MinimalSolution {
    pub fn size(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

pub fn solve_minimal(cbn: &Cbn) -> MinimalSolution {
    solve_minimal_on_graph(&DependencyGraph::new(cbn))
}

pub fn solve_minimal_on_graph(g: &DependencyGraph) -> MinimalSolution {
    let scratch = SolverScratch::build(g);
    let cycles = scratch.cycles(g);
    let l1_part = scratch.l1_nodes();
    let mut chosen = l1_part.clone();
    chosen.extend(cycles.iter().map(|c| c[0]));
    chosen.sort_unstable();
    MinimalSolution {
        chosen,
        l1_part,
        cycles,
        representative_rule: RepresentativeRule::LowestIndex,
    }
}

/// Description of every minimal solution: all of `fixed` plus one node
/// from each entry of `choices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSpace {
    pub fixed: Vec<usize>,
    pub choices: Vec<Vec<usize>>,
}

impl SolutionSpace {
    /// Number of distinct minimal solutions, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        self.choices
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }

    /// Lists every minimal solution (sorted index sets) in lexicographic
    /// order of choices. Only sensible when `count()` is small.
    pub fn solutions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![self.fixed.clone()];
        for choice in &self.choices {
            let mut next = Vec::with_capacity(out.len() * choice.len());
            for partial in &out {
                let mut sorted_choice = choice.clone();
                sorted_choice.sort_unstable();
                for &c in &sorted_choice {
                    let mut s = partial.clone();
                    s.push(c);
                    next.push(s);
                }
            }
            out = next;
        }
        for s in &mut out {
            s.sort_unstable();
        }
        out
    }
}

pub fn enumerate_solution_space(sol: &MinimalSolution) -> SolutionSpace {
    SolutionSpace {
        fixed: sol.l1_part.clone(),
        choices: sol.cycles.clone(),
    }
}
