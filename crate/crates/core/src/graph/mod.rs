//! Undirected simple graphs with stable node identifiers, the support/input
//! instance pair, local views and isomorphism utilities.

mod generators;
mod instance;
pub mod io;
pub mod iso;
mod view;

use std::collections::{HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use generators::{generate, Family};
pub use instance::{Mode, SupportedInstance};
pub use iso::{graphs_isomorphic, graphs_isomorphic_with_cap, DEFAULT_ISO_CAP};
pub use view::{extract_view, extract_view_labeled, views_isomorphic, LocalView, Respect, ViewGraph, ViewEdge, ViewNode};

/// Stable node identifier shared by the support and the input graph.
pub type NodeId = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("parallel edge {{{0}, {1}}}")]
    ParallelEdge(NodeId, NodeId),
    #[error("edge {{{0}, {1}}} is not an edge of the support graph")]
    NotInSupport(NodeId, NodeId),
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("graph with {size} nodes exceeds the isomorphism cap of {cap}")]
    Capacity { size: usize, cap: usize },
    #[error("LOCAL mode requires the input graph to equal the support")]
    LocalModeMask,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Immutable undirected simple graph.
///
/// Nodes are stored in ascending identifier order; internally a node is
/// addressed by its index into that order and every adjacency list is
/// sorted, so iteration order is deterministic everywhere.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    ids: Vec<NodeId>,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edges", &self.edge_ids())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from a node set and an edge list. Rejects duplicate
    /// nodes, unknown endpoints, self-loops and repeated edges.
    pub fn from_edges<I, E>(nodes: I, edges: E) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut ids: Vec<NodeId> = nodes.into_iter().collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateNode(w[0]));
        }
        let mut adj = vec![Vec::new(); ids.len()];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let a = ids.binary_search(&u).map_err(|_| GraphError::UnknownNode(u))?;
            let b = ids.binary_search(&v).map_err(|_| GraphError::UnknownNode(v))?;
            adj[a].push(b);
            adj[b].push(a);
            edge_count += 1;
        }
        for (i, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GraphError::ParallelEdge(ids[i], ids[w[0]]));
            }
        }
        Ok(Graph { ids, adj, edge_count })
    }

    /// Same as [`Graph::from_edges`] over the nodes `1..=n`.
    pub fn from_edges_n<E>(n: usize, edges: E) -> Result<Graph, GraphError>
    where
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        Graph::from_edges(1..=n as NodeId, edges)
    }

    pub fn empty(n: usize) -> Graph {
        Graph::from_edges_n(n, std::iter::empty()).expect("edgeless graph is valid")
    }

    pub(crate) fn from_index_adjacency(ids: Vec<NodeId>, mut adj: Vec<Vec<usize>>) -> Graph {
        let mut twice = 0;
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
            twice += list.len();
        }
        Graph { ids, adj, edge_count: twice / 2 }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn m(&self) -> usize {
        self.edge_count
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> NodeId {
        self.ids[index]
    }

    pub fn index_of(&self, id: NodeId) -> Result<usize, GraphError> {
        self.ids.binary_search(&id).map_err(|_| GraphError::UnknownNode(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    /// Neighbor indices of the node at `index`, ascending.
    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adj[index]
    }

    /// Neighbor identifiers of `id`, ascending.
    pub fn neighbor_ids(&self, id: NodeId) -> Result<Vec<NodeId>, GraphError> {
        let i = self.index_of(id)?;
        Ok(self.adj[i].iter().map(|&j| self.ids[j]).collect())
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adj[index].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn has_edge_ids(&self, u: NodeId, v: NodeId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Ok(a), Ok(b)) => self.has_edge(a, b),
            _ => false,
        }
    }

    /// Edges as index pairs `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, list)| list.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    /// Edges as identifier pairs `(u, v)` with `u < v`, sorted.
    pub fn edge_ids(&self) -> Vec<(NodeId, NodeId)> {
        self.edges().map(|(a, b)| (self.ids[a], self.ids[b])).collect()
    }

    /// Hop distances from `source`, stopping at `limit` hops when given.
    /// Unreached nodes are `None`.
    pub fn bfs(&self, source: usize, limit: Option<usize>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Indices of the nodes within `t` hops of `index`, ascending.
    pub fn ball_indices(&self, index: usize, t: usize) -> Vec<usize> {
        let mut seen = HashSet::from([index]);
        let mut frontier = vec![index];
        for _ in 0..t {
            let mut next = Vec::new();
            for &u in &frontier {
                next.extend(self.adj[u].iter().copied().filter(|&w| seen.insert(w)));
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        let mut out: Vec<usize> = seen.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// The nodes at distance at most `t` from `v`.
    pub fn ball(&self, v: NodeId, t: usize) -> Result<Vec<NodeId>, GraphError> {
        let i = self.index_of(v)?;
        Ok(self.ball_indices(i, t).into_iter().map(|j| self.ids[j]).collect())
    }

    pub fn distance(&self, u: NodeId, v: NodeId) -> Result<Option<usize>, GraphError> {
        let a = self.index_of(u)?;
        let b = self.index_of(v)?;
        Ok(self.bfs(a, None)[b])
    }

    /// Length of the shortest cycle, `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in 0..self.n() {
            let mut dist = vec![usize::MAX; self.n()];
            let mut parent = vec![usize::MAX; self.n()];
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if best.is_some_and(|b| 2 * dist[u] >= b) {
                    break;
                }
                for &w in &self.adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
        }
        best
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &w in &self.adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().len() == 1
    }

    /// Subgraph induced by the given node indices; identifiers are kept.
    pub fn induced(&self, indices: &[usize]) -> Graph {
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut pos = vec![usize::MAX; self.n()];
        for (k, &i) in sorted.iter().enumerate() {
            pos[i] = k;
        }
        let adj = sorted
            .iter()
            .map(|&i| self.adj[i].iter().filter(|&&j| pos[j] != usize::MAX).map(|&j| pos[j]).collect())
            .collect();
        let ids = sorted.iter().map(|&i| self.ids[i]).collect();
        Graph::from_index_adjacency(ids, adj)
    }

    /// The `k`-th power: `u ~ v` iff `0 < dist(u, v) <= k`.
    pub fn power(&self, k: usize) -> Graph {
        let adj = (0..self.n())
            .map(|i| self.ball_indices(i, k).into_iter().filter(|&j| j != i).collect())
            .collect();
        Graph::from_index_adjacency(self.ids.clone(), adj)
    }

    pub fn degree_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.max_degree() + 1];
        for list in &self.adj {
            hist[list.len()] += 1;
        }
        hist
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges_n(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(Graph::from_edges_n(3, [(1, 4)]), Err(GraphError::UnknownNode(4)));
        assert_eq!(Graph::from_edges_n(3, [(1, 2), (2, 1)]), Err(GraphError::ParallelEdge(1, 2)));
        assert_eq!(Graph::from_edges([1, 1], []), Err(GraphError::DuplicateNode(1)));
    }

    #[test]
    fn balls() {
        let c7 = generate(&Family::Cycle { n: 7 }, 0).unwrap();
        assert_eq!(c7.ball(3, 0).unwrap(), vec![3]);
        assert_eq!(c7.ball(1, 2).unwrap(), vec![1, 2, 3, 6, 7]);
        let k5 = generate(&Family::Clique { n: 5 }, 0).unwrap();
        assert_eq!(k5.ball(2, 1).unwrap().len(), 5);
        assert_eq!(c7.ball(9, 1), Err(GraphError::UnknownNode(9)));
    }

    #[test]
    fn girth_values() {
        let gen = |f| generate(&f, 0).unwrap();
        assert_eq!(gen(Family::Cycle { n: 7 }).girth(), Some(7));
        assert_eq!(gen(Family::Path { n: 5 }).girth(), None);
        assert_eq!(gen(Family::Petersen).girth(), Some(5));
        assert_eq!(gen(Family::Heawood).girth(), Some(6));
        assert_eq!(gen(Family::Clique { n: 4 }).girth(), Some(3));
        assert_eq!(gen(Family::Grid { rows: 3, cols: 3 }).girth(), Some(4));
    }

    #[test]
    fn girth_matches_brute_force_on_small_graphs() {
        // Oracle: shortest cycle through each edge = 1 + dist(u, v) once the
        // edge itself is removed.
        for seed in 0..30 {
            let g = generate(&Family::Gnp { n: 12, p: 0.25 }, seed).unwrap();
            let mut best: Option<usize> = None;
            for (u, v) in g.edge_ids() {
                let rest: Vec<_> = g.edge_ids().into_iter().filter(|&e| e != (u, v)).collect();
                let h = Graph::from_edges(g.ids().to_vec(), rest).unwrap();
                if let Some(d) = h.distance(u, v).unwrap() {
                    best = Some(best.map_or(d + 1, |b| b.min(d + 1)));
                }
            }
            assert_eq!(g.girth(), best, "seed {seed}");
        }
    }

    #[test]
    fn power_and_induced() {
        let p = generate(&Family::Path { n: 5 }, 0).unwrap();
        let p2 = p.power(2);
        assert!(p2.has_edge_ids(1, 3));
        assert!(!p2.has_edge_ids(1, 4));
        let sub = p.induced(&[0, 1, 3]);
        assert_eq!(sub.ids(), &[1, 2, 4]);
        assert_eq!(sub.edge_ids(), vec![(1, 2)]);
    }
}
