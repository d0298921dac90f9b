//! Exact isomorphism for small vertex- and edge-colored graphs.
//!
//! Colors are first refined (1-dimensional Weisfeiler-Leman) into a
//! canonical partition. The refinement history is an exact isomorphism
//! invariant, used both to reject quickly and to bucket graphs when comparing
//! multisets; a backtracking search over the refined classes then decides
//! isomorphism exactly and produces a witness.

use std::collections::BTreeMap;

use super::{Graph, GraphError, NodeId};

pub const DEFAULT_ISO_CAP: usize = 32;

/// Undirected graph with a color key per vertex and a color per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    keys: Vec<Vec<u64>>,
    // Sorted by neighbor.
    adj: Vec<Vec<(usize, u64)>>,
}

/// Refinement history of a colored graph. Equal for isomorphic graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Certificate(Vec<u64>);

impl ColoredGraph {
    pub fn new(keys: Vec<Vec<u64>>) -> Self {
        let adj = vec![Vec::new(); keys.len()];
        ColoredGraph { keys, adj }
    }

    /// Every vertex colored alike and every edge colored 0.
    pub fn from_graph(g: &Graph) -> Self {
        let mut cg = ColoredGraph::new(vec![Vec::new(); g.n()]);
        for (a, b) in g.edges() {
            cg.add_edge(a, b, 0);
        }
        cg
    }

    pub fn add_edge(&mut self, a: usize, b: usize, color: u64) {
        assert!(a != b, "self-loop in colored graph");
        for (x, y) in [(a, b), (b, a)] {
            match self.adj[x].binary_search_by_key(&y, |&(w, _)| w) {
                Ok(_) => panic!("parallel edge in colored graph"),
                Err(p) => self.adj[x].insert(p, (y, color)),
            }
        }
    }

    pub fn n(&self) -> usize {
        self.keys.len()
    }

    fn m(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn edge_color(&self, a: usize, b: usize) -> Option<u64> {
        self.adj[a].binary_search_by_key(&b, |&(w, _)| w).ok().map(|p| self.adj[a][p].1)
    }

    pub fn certificate(&self) -> Certificate {
        self.refine().1
    }

    fn refine(&self) -> (Vec<usize>, Certificate) {
        let mut cert = vec![self.n() as u64, self.m() as u64];
        let (mut ranks, table) = rank(&self.keys);
        encode_table(&mut cert, &table);
        let mut classes = table.len();
        for _ in 0..self.n() {
            let sigs: Vec<Vec<u64>> = (0..self.n())
                .map(|v| {
                    let mut around: Vec<(u64, u64)> =
                        self.adj[v].iter().map(|&(w, c)| (c, ranks[w] as u64)).collect();
                    around.sort_unstable();
                    let mut sig = vec![ranks[v] as u64];
                    sig.extend(around.into_iter().flat_map(|(c, r)| [c, r]));
                    sig
                })
                .collect();
            let (next, table) = rank(&sigs);
            encode_table(&mut cert, &table);
            ranks = next;
            if table.len() == classes {
                break;
            }
            classes = table.len();
        }
        (ranks, Certificate(cert))
    }
}

/// Ranks each key by its position among the sorted distinct keys.
fn rank(keys: &[Vec<u64>]) -> (Vec<usize>, Vec<(Vec<u64>, usize)>) {
    let mut counts: BTreeMap<&[u64], usize> = BTreeMap::new();
    for k in keys {
        *counts.entry(k.as_slice()).or_default() += 1;
    }
    let index: BTreeMap<&[u64], usize> = counts.keys().enumerate().map(|(i, &k)| (k, i)).collect();
    let ranks = keys.iter().map(|k| index[k.as_slice()]).collect();
    let table = counts.into_iter().map(|(k, c)| (k.to_vec(), c)).collect();
    (ranks, table)
}

fn encode_table(out: &mut Vec<u64>, table: &[(Vec<u64>, usize)]) {
    out.push(table.len() as u64);
    for (key, count) in table {
        out.push(key.len() as u64);
        out.extend_from_slice(key);
        out.push(*count as u64);
    }
}

/// Decides whether a color-preserving isomorphism `a -> b` exists. The
/// witness maps vertex `i` of `a` to `witness[i]` of `b`.
pub fn colored_isomorphism(a: &ColoredGraph, b: &ColoredGraph) -> Option<Vec<usize>> {
    if a.n() != b.n() || a.m() != b.m() {
        return None;
    }
    let (ra, ca) = a.refine();
    let (rb, cb) = b.refine();
    if ca != cb {
        return None;
    }
    let order = search_order(a, &ra);
    let mut map = vec![usize::MAX; a.n()];
    let mut used = vec![false; b.n()];
    if extend(a, b, &ra, &rb, &order, 0, &mut map, &mut used) {
        Some(map)
    } else {
        None
    }
}

/// Vertices of `a` in an order where each one, after the first of its
/// component, has an earlier neighbor. Components start at a vertex of the
/// rarest class.
fn search_order(a: &ColoredGraph, ranks: &[usize]) -> Vec<usize> {
    let mut class_size: BTreeMap<usize, usize> = BTreeMap::new();
    for &r in ranks {
        *class_size.entry(r).or_default() += 1;
    }
    let mut starts: Vec<usize> = (0..a.n()).collect();
    starts.sort_by_key(|&v| (class_size[&ranks[v]], ranks[v], v));
    let mut seen = vec![false; a.n()];
    let mut order = Vec::with_capacity(a.n());
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut head = order.len();
        order.push(s);
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, _) in &a.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn extend(
    a: &ColoredGraph,
    b: &ColoredGraph,
    ra: &[usize],
    rb: &[usize],
    order: &[usize],
    pos: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    let Some(&v) = order.get(pos) else {
        return true;
    };
    let mapped_nbrs: Vec<(usize, u64)> = a.adj[v].iter().copied().filter(|&(w, _)| map[w] != usize::MAX).collect();
    let candidates: Vec<usize> = match mapped_nbrs.first() {
        Some(&(w, _)) => b.adj[map[w]].iter().map(|&(x, _)| x).collect(),
        None => (0..b.n()).collect(),
    };
    for c in candidates {
        if used[c] || rb[c] != ra[v] {
            continue;
        }
        let consistent = mapped_nbrs.iter().all(|&(w, col)| b.edge_color(c, map[w]) == Some(col));
        let image_nbrs = b.adj[c].iter().filter(|&&(x, _)| used[x]).count();
        if !consistent || image_nbrs != mapped_nbrs.len() {
            continue;
        }
        map[v] = c;
        used[c] = true;
        if extend(a, b, ra, rb, order, pos + 1, map, used) {
            return true;
        }
        map[v] = usize::MAX;
        used[c] = false;
    }
    false
}

/// True iff the two lists are equal as multisets of isomorphism classes.
pub fn same_multiset(a: &[ColoredGraph], b: &[ColoredGraph]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    // Per certificate bucket: class representatives with signed counts.
    let mut buckets: BTreeMap<Certificate, Vec<(usize, bool, i64)>> = BTreeMap::new();
    for (side, list) in [(false, a), (true, b)] {
        for (i, g) in list.iter().enumerate() {
            let reps = buckets.entry(g.certificate()).or_default();
            let delta = if side { -1 } else { 1 };
            let found = reps.iter_mut().find(|(j, rep_side, _)| {
                let rep = if *rep_side { &b[*j] } else { &a[*j] };
                colored_isomorphism(rep, g).is_some()
            });
            match found {
                Some(entry) => entry.2 += delta,
                None => reps.push((i, side, delta)),
            }
        }
    }
    buckets.values().flatten().all(|&(_, _, count)| count == 0)
}

/// Exact isomorphism test for graphs of at most [`DEFAULT_ISO_CAP`] nodes.
/// The witness lists `(node of a, node of b)` pairs in ascending order of `a`.
pub fn graphs_isomorphic(a: &Graph, b: &Graph) -> Result<Option<Vec<(NodeId, NodeId)>>, GraphError> {
    graphs_isomorphic_with_cap(a, b, DEFAULT_ISO_CAP)
}

pub fn graphs_isomorphic_with_cap(
    a: &Graph,
    b: &Graph,
    cap: usize,
) -> Result<Option<Vec<(NodeId, NodeId)>>, GraphError> {
    for g in [a, b] {
        if g.n() > cap {
            return Err(GraphError::Capacity { size: g.n(), cap });
        }
    }
    let witness = colored_isomorphism(&ColoredGraph::from_graph(a), &ColoredGraph::from_graph(b));
    Ok(witness.map(|w| w.iter().enumerate().map(|(i, &j)| (a.id(i), b.id(j))).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    fn gen(f: Family) -> Graph {
        generate(&f, 0).unwrap()
    }

    fn relabel(g: &Graph, perm: impl Fn(NodeId) -> NodeId) -> Graph {
        let edges = g.edge_ids().into_iter().map(|(u, v)| (perm(u), perm(v)));
        Graph::from_edges(g.ids().iter().map(|&v| perm(v)), edges).unwrap()
    }

    fn check_witness(a: &Graph, b: &Graph, w: &[(NodeId, NodeId)]) {
        let map: BTreeMap<NodeId, NodeId> = w.iter().copied().collect();
        assert_eq!(map.len(), a.n());
        for (u, v) in a.edge_ids() {
            assert!(b.has_edge_ids(map[&u], map[&v]));
        }
    }

    #[test]
    fn cycles_and_paths() {
        let c6 = gen(Family::Cycle { n: 6 });
        let shuffled = relabel(&c6, |v| (v * 5) % 7 + 10);
        let w = graphs_isomorphic(&c6, &shuffled).unwrap().expect("isomorphic");
        check_witness(&c6, &shuffled, &w);
        assert_eq!(graphs_isomorphic(&c6, &gen(Family::Path { n: 6 })).unwrap(), None);
    }

    #[test]
    fn same_refinement_but_not_isomorphic() {
        // C14 and two disjoint C7 are both 2-regular on 14 nodes.
        let c14 = gen(Family::Cycle { n: 14 });
        let c7 = gen(Family::Cycle { n: 7 });
        let mut edges = c7.edge_ids();
        edges.extend(c7.edge_ids().into_iter().map(|(u, v)| (u + 7, v + 7)));
        let two = Graph::from_edges_n(14, edges).unwrap();
        assert_eq!(ColoredGraph::from_graph(&c14).certificate(), ColoredGraph::from_graph(&two).certificate());
        assert_eq!(graphs_isomorphic(&c14, &two).unwrap(), None);
    }

    #[test]
    fn petersen_automorphism_and_capacity() {
        let p = gen(Family::Petersen);
        let shuffled = relabel(&p, |v| 11 - v);
        let w = graphs_isomorphic(&p, &shuffled).unwrap().unwrap();
        check_witness(&p, &shuffled, &w);
        let big = gen(Family::Cycle { n: 40 });
        assert_eq!(graphs_isomorphic(&big, &big), Err(GraphError::Capacity { size: 40, cap: 32 }));
        assert!(graphs_isomorphic_with_cap(&big, &big, 64).unwrap().is_some());
    }

    #[test]
    fn colors_are_respected() {
        let mut a = ColoredGraph::new(vec![vec![0], vec![1], vec![1]]);
        a.add_edge(0, 1, 7);
        a.add_edge(1, 2, 8);
        let mut b = ColoredGraph::new(vec![vec![0], vec![1], vec![1]]);
        b.add_edge(0, 1, 8);
        b.add_edge(1, 2, 7);
        assert!(colored_isomorphism(&a, &b).is_none());
        let mut c = ColoredGraph::new(vec![vec![1], vec![1], vec![0]]);
        c.add_edge(2, 0, 7);
        c.add_edge(0, 1, 8);
        assert_eq!(colored_isomorphism(&a, &c), Some(vec![2, 0, 1]));
    }

    #[test]
    fn multisets() {
        let p3 = ColoredGraph::from_graph(&gen(Family::Path { n: 3 }));
        let star = ColoredGraph::from_graph(&gen(Family::Star { leaves: 2 }));
        let k3 = ColoredGraph::from_graph(&gen(Family::Clique { n: 3 }));
        assert!(same_multiset(&[p3.clone(), k3.clone()], &[k3.clone(), star.clone()]));
        assert!(!same_multiset(&[p3.clone(), p3.clone()], &[p3.clone(), k3.clone()]));
        assert!(!same_multiset(std::slice::from_ref(&p3), &[p3.clone(), p3.clone()]));
    }
}
