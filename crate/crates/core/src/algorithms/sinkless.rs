//! Centralized reference solver for sinkless orientation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinklessVariant {
    /// Nodes of degree at least 2 need an outgoing edge.
    #[default]
    DegreeTwo,
    /// Every node needs an outgoing edge.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinklessResult {
    /// Out-neighbors of every node.
    Oriented(BTreeMap<NodeId, Vec<NodeId>>),
    /// A component without any valid orientation.
    Infeasible { component: Vec<NodeId> },
}

/// Orients a cycle in each cyclic component consistently and every other
/// edge toward the cycle. Acyclic components are rooted at a leaf, which
/// is the only node left without an outgoing edge.
pub fn global_sinkless_orientation(g: &Graph, variant: SinklessVariant) -> SinklessResult {
    let mut oriented: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    let mut orient = |a: usize, b: usize, out: &mut Vec<Vec<usize>>| {
        if oriented.insert((a.min(b), a.max(b))) {
            out[a].push(b);
        }
    };
    for comp in g.components() {
        let edges = comp.iter().map(|&i| g.degree(i)).sum::<usize>() / 2;
        let sources = if edges >= comp.len() {
            let cycle = find_cycle(g, comp[0]);
            for k in 0..cycle.len() {
                orient(cycle[k], cycle[(k + 1) % cycle.len()], &mut out);
            }
            cycle
        } else if variant == SinklessVariant::Strict {
            return SinklessResult::Infeasible { component: comp.iter().map(|&i| g.id(i)).collect() };
        } else {
            vec![comp.iter().copied().find(|&i| g.degree(i) <= 1).expect("trees have leaves")]
        };
        let mut seen: BTreeSet<usize> = sources.iter().copied().collect();
        let mut queue: VecDeque<usize> = sources.into();
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if seen.insert(w) {
                    orient(w, u, &mut out);
                    queue.push_back(w);
                }
            }
        }
        for &u in &comp {
            for &w in g.neighbors(u) {
                if u < w {
                    orient(u, w, &mut out);
                }
            }
        }
    }
    let map = (0..g.n())
        .map(|i| {
            let mut o: Vec<NodeId> = out[i].iter().map(|&j| g.id(j)).collect();
            o.sort_unstable();
            (g.id(i), o)
        })
        .collect();
    SinklessResult::Oriented(map)
}

/// A cycle in the component of `s`, in traversal order. The component must
/// contain one.
fn find_cycle(g: &Graph, s: usize) -> Vec<usize> {
    let mut parent: BTreeMap<usize, usize> = BTreeMap::from([(s, s)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(w) {
                e.insert(u);
                queue.push_back(w);
            } else if parent[&u] != w {
                let path = |mut x: usize| {
                    let mut p = vec![x];
                    while parent[&x] != x {
                        x = parent[&x];
                        p.push(x);
                    }
                    p
                };
                let (pu, pw) = (path(u), path(w));
                let on_w: BTreeSet<usize> = pw.iter().copied().collect();
                let cut = pu.iter().position(|x| on_w.contains(x)).unwrap();
                let lca = pu[cut];
                let mut cycle = pu[..=cut].to_vec();
                let back = pw.iter().position(|&x| x == lca).unwrap();
                cycle.extend(pw[..back].iter().rev());
                return cycle;
            }
        }
    }
    unreachable!("component has no cycle")
}
