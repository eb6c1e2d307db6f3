//! Dependency graph of a CBN: an edge `i -> j` whenever `x_i` is an
//! argument of `x_j`'s update.

use crate::network::Cbn;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    in_adj: Vec<Vec<usize>>,
    out_adj: Vec<Vec<usize>>,
    observed: Vec<bool>,
}

impl DependencyGraph {
    pub fn new(cbn: &Cbn) -> Self {
        let n = cbn.n();
        let in_adj: Vec<Vec<usize>> = cbn.updates().to_vec();
        let mut out_adj = vec![Vec::new(); n];
        for (target, args) in in_adj.iter().enumerate() {
            for &source in args {
                out_adj[source].push(target);
            }
        }
        DependencyGraph {
            in_adj,
            out_adj,
            observed: cbn.observed_flags().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.in_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.in_adj.iter().map(Vec::len).sum()
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn is_observed(&self, v: usize) -> bool {
        self.observed[v]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.in_adj[to].binary_search(&from).is_ok()
    }

    /// The unique in-neighbor of `v`, if `v` has in-degree one.
    pub fn sole_in_neighbor(&self, v: usize) -> Option<usize> {
        match self.in_adj[v].as_slice() {
            [u] => Some(*u),
            _ => None,
        }
    }

    /// `p` points to `q`: `p != q` and `N_in(q) = {p}`.
    pub fn points_to(&self, p: usize, q: usize) -> bool {
        p != q && self.sole_in_neighbor(q) == Some(p)
    }

    /// Edges as `(source, target)` pairs, ordered by target then source.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.in_adj
            .iter()
            .enumerate()
            .flat_map(|(t, args)| args.iter().map(move |&s| (s, t)))
    }

    /// Rebuilds the network this graph was built from.
    pub fn to_cbn(&self) -> Cbn {
        let observed = (0..self.n()).filter(|&v| self.observed[v]);
        Cbn::new(self.in_adj.clone(), observed).expect("graph adjacency is a valid network")
    }
}

pub fn build_dependency_graph(cbn: &Cbn) -> DependencyGraph {
    DependencyGraph::new(cbn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn loop3() -> Cbn {
        Cbn::new(vec![vec![1, 2], vec![0], vec![1]], [0]).unwrap()
    }

    #[test]
    fn loop3_edges() {
        let g = build_dependency_graph(&loop3());
        let edges: BTreeSet<_> = g.edges().collect();
        let expected: BTreeSet<_> = [(1, 0), (2, 0), (0, 1), (1, 2)].into_iter().collect();
        assert_eq!(edges, expected);
        assert_eq!(g.out_neighbors(1), &[0, 2]);
    }

    #[test]
    fn empty_updates_give_no_edges() {
        let cbn = Cbn::new(vec![vec![]; 4], []).unwrap();
        let g = build_dependency_graph(&cbn);
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn two_cycles_in_degrees() {
        let cbn = Cbn::new(
            vec![vec![1, 3], vec![2], vec![1], vec![5], vec![3], vec![4]],
            [0],
        )
        .unwrap();
        let g = build_dependency_graph(&cbn);
        let deg: Vec<_> = (0..6).map(|v| g.in_neighbors(v).len()).collect();
        assert_eq!(deg, vec![2, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn points_to_excludes_self_loops() {
        let cbn = Cbn::new(vec![vec![0], vec![0]], []).unwrap();
        let g = build_dependency_graph(&cbn);
        assert!(!g.points_to(0, 0));
        assert!(g.points_to(0, 1));
    }

    #[test]
    fn round_trips_to_network() {
        let cbn = loop3();
        assert_eq!(build_dependency_graph(&cbn).to_cbn(), cbn);
    }
}
