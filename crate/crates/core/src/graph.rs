//! Undirected weighted graphs with CSR adjacency, hop distances and
//! connected components.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// One undirected edge as given at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Immutable undirected graph without self-loops.
///
/// The adjacency matrix is exactly symmetric and `degrees[i]` is the row sum
/// of adjacency row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: CsrMatrix,
    degrees: Vec<f64>,
}

/// Connected-component labelling. Labels are contiguous and assigned in
/// order of the lowest node id of each component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePartition {
    pub component_id: Vec<usize>,
    pub component_count: usize,
}

impl NodePartition {
    /// Node ids of each component, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.component_count];
        for (i, &c) in self.component_id.iter().enumerate() {
            out[c].push(i);
        }
        out
    }
}

impl Graph {
    /// Builds a graph from `(u, v, weight)` triples. Missing weights default
    /// to 1.0.
    pub fn new(n: usize, edge_list: &[(usize, usize, Option<f64>)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(edge_list.len());
        let mut edges = Vec::with_capacity(edge_list.len());
        let mut triplets = Vec::with_capacity(2 * edge_list.len());
        for &(u, v, w) in edge_list {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::IdOutOfRange { id, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoopRejected(u));
            }
            let w = w.unwrap_or(1.0);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonpositiveWeight { u, v, w });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            edges.push(Edge { u, v, w });
            triplets.push((u, v, w));
            triplets.push((v, u, w));
        }
        let adjacency = CsrMatrix::from_triplets(n, n, &triplets);
        let degrees = (0..n).map(|i| adjacency.row_sum(i)).collect();
        Ok(Graph {
            n,
            edges,
            adjacency,
            degrees,
        })
    }

    /// Builds an unweighted graph from node pairs.
    pub fn unweighted(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let list: Vec<_> = pairs.iter().map(|&(u, v)| (u, v, None)).collect();
        Self::new(n, &list)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in construction order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Neighbours of `i` with edge weights, ascending by id.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency.row(i)
    }

    pub fn is_unweighted(&self) -> bool {
        self.edges.iter().all(|e| e.w == 1.0)
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id >= self.n {
            Err(Error::IdOutOfRange { id, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Hop counts from `source` to every node; `None` marks unreachable nodes.
    pub fn bfs_from(&self, source: usize) -> Result<Vec<Option<usize>>> {
        self.check_id(source)?;
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(i) = queue.pop_front() {
            let d = dist[i].unwrap();
            for (j, _) in self.neighbors(i) {
                if dist[j].is_none() {
                    dist[j] = Some(d + 1);
                    queue.push_back(j);
                }
            }
        }
        Ok(dist)
    }

    /// Shortest-path length between `i` and `j` in hops, ignoring weights.
    /// `None` means unreachable.
    pub fn bfs_distance(&self, i: usize, j: usize) -> Result<Option<usize>> {
        self.check_id(j)?;
        Ok(self.bfs_from(i)?[j])
    }

    /// Maximum hop distance over all node pairs; `None` when the graph is
    /// disconnected (infinite diameter).
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs_from(s).expect("source id in range") {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    pub fn connected_components(&self) -> NodePartition {
        let mut component_id = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.n {
            if component_id[start] != usize::MAX {
                continue;
            }
            component_id[start] = count;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for (j, _) in self.neighbors(i) {
                    if component_id[j] == usize::MAX {
                        component_id[j] = count;
                        stack.push(j);
                    }
                }
            }
            count += 1;
        }
        NodePartition {
            component_id,
            component_count: count,
        }
    }

    /// Subgraph induced by `nodes`, relabelled in the order given.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let mut index = vec![usize::MAX; self.n];
        for (k, &i) in nodes.iter().enumerate() {
            self.check_id(i)?;
            index[i] = k;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
            .map(|e| (index[e.u], index[e.v], Some(e.w)))
            .collect();
        Graph::new(nodes.len(), &edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn five_node() -> Graph {
        Graph::unweighted(5, &[(0, 1), (0, 3), (1, 3), (2, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn five_node_degrees() {
        assert_eq!(five_node().degrees(), &[2.0, 2.0, 2.0, 4.0, 2.0]);
    }

    #[test]
    fn isolated_vertex() {
        let g = Graph::new(1, &[]).unwrap();
        assert_eq!(g.degrees(), &[0.0]);
        assert_eq!(g.diameter(), Some(0));
        assert_eq!(g.connected_components().component_count, 1);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Graph::new(0, &[]), Err(Error::EmptyGraph));
        assert_eq!(
            Graph::unweighted(3, &[(0, 3)]),
            Err(Error::IdOutOfRange { id: 3, n: 3 })
        );
        assert_eq!(
            Graph::unweighted(3, &[(1, 1)]),
            Err(Error::SelfLoopRejected(1))
        );
        assert_eq!(
            Graph::unweighted(3, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(1, 0))
        );
        assert!(matches!(
            Graph::new(3, &[(0, 1, Some(0.0))]),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            Graph::new(3, &[(0, 1, Some(f64::NAN))]),
            Err(Error::NonpositiveWeight { .. })
        ));
    }

    #[test]
    fn distances() {
        let g = five_node();
        assert_eq!(g.bfs_distance(0, 2).unwrap(), Some(2));
        assert_eq!(g.bfs_distance(4, 4).unwrap(), Some(0));
        assert_eq!(g.diameter(), Some(2));
        assert!(g.bfs_distance(0, 9).is_err());

        let disjoint = Graph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(disjoint.bfs_distance(0, 2).unwrap(), None);
        assert_eq!(disjoint.diameter(), None);

        let k3 = Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(k3.diameter(), Some(1));
    }

    #[test]
    fn components() {
        assert_eq!(five_node().connected_components().component_count, 1);
        let disjoint = Graph::unweighted(4, &[(0, 1), (2, 3)]).unwrap();
        let p = disjoint.connected_components();
        assert_eq!(p.component_count, 2);
        assert_eq!(p.component_id, vec![0, 0, 1, 1]);
        assert_eq!(
            Graph::new(3, &[])
                .unwrap()
                .connected_components()
                .component_count,
            3
        );
    }

    #[test]
    fn induced_subgraph_relabels() {
        let g = five_node();
        let sub = g.induced_subgraph(&[3, 4, 2]).unwrap();
        assert_eq!(sub.node_count(), 3);
        assert_eq!(sub.edge_count(), 3);
        assert_eq!(sub.degrees(), &[2.0, 2.0, 2.0]);
    }
}
