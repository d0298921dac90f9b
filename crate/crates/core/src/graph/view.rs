use serde::{Deserialize, Serialize};

use super::iso::{colored_isomorphism, ColoredGraph};
use super::{GraphError, NodeId, SupportedInstance};

/// The graph a view is extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewGraph {
    Support,
    Input,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewNode {
    pub id: NodeId,
    pub depth: usize,
    /// Endpoint of an edge leaving the ball. Only the edge is known, not the
    /// node's own surroundings.
    pub frontier: bool,
    pub label: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewEdge {
    /// Positions in [`LocalView::nodes`].
    pub a: usize,
    pub b: usize,
    pub in_input: bool,
}

/// What a node can know after `radius` rounds: the ball `B_radius(root)`
/// in the designated graph together with every edge incident to it.
///
/// `nodes[0]` is the root. Ball nodes come first in BFS order (ties by id);
/// frontier nodes at depth `radius + 1` follow, carrying no label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalView {
    pub root: NodeId,
    pub radius: usize,
    pub over: ViewGraph,
    pub nodes: Vec<ViewNode>,
    pub edges: Vec<ViewEdge>,
}

impl LocalView {
    /// Identifiers of the nodes within `radius` hops of the root.
    pub fn ball(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.nodes.iter().filter(|n| !n.frontier).map(|n| n.id).collect();
        ids.sort_unstable();
        ids
    }

    pub fn ball_size(&self) -> usize {
        self.nodes.iter().filter(|n| !n.frontier).count()
    }

    /// Colored graph encoding of the view under `respect`; depth and the
    /// frontier flag are always part of a vertex color, so the root is fixed.
    pub fn to_colored(&self, respect: Respect) -> ColoredGraph {
        let keys = self
            .nodes
            .iter()
            .map(|n| {
                let mut key = vec![n.depth as u64, n.frontier as u64];
                if respect.ids {
                    key.push(n.id);
                }
                if respect.labels {
                    key.push(n.label.map_or(0, |l| l + 1));
                }
                key
            })
            .collect();
        let mut cg = ColoredGraph::new(keys);
        for e in &self.edges {
            cg.add_edge(e.a, e.b, u64::from(respect.flags && e.in_input));
        }
        cg
    }
}

/// Which annotations an isomorphism of views must preserve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Respect {
    pub ids: bool,
    pub labels: bool,
    pub flags: bool,
}

impl Respect {
    pub const STRUCTURE: Respect = Respect { ids: false, labels: false, flags: false };
    pub const ALL: Respect = Respect { ids: true, labels: true, flags: true };
}

pub fn extract_view(inst: &SupportedInstance, v: NodeId, t: usize, over: ViewGraph) -> Result<LocalView, GraphError> {
    extract_view_labeled(inst, v, t, over, |_| None)
}

/// As [`extract_view`], annotating each ball node with `label(id)`.
pub fn extract_view_labeled(
    inst: &SupportedInstance,
    v: NodeId,
    t: usize,
    over: ViewGraph,
    label: impl Fn(NodeId) -> Option<u64>,
) -> Result<LocalView, GraphError> {
    let h = inst.support();
    let root = h.index_of(v)?;
    let walk = |i: usize| -> Vec<usize> {
        match over {
            ViewGraph::Support => h.neighbors(i).to_vec(),
            ViewGraph::Input => inst.input_neighbors(i).collect(),
        }
    };
    let mut pos = vec![usize::MAX; h.n()];
    let mut nodes = vec![ViewNode { id: v, depth: 0, frontier: false, label: label(v) }];
    pos[root] = 0;
    let mut order = vec![root];
    let mut head = 0;
    while head < order.len() {
        let i = order[head];
        head += 1;
        let d = nodes[pos[i]].depth;
        if d == t {
            continue;
        }
        for w in walk(i) {
            if pos[w] == usize::MAX {
                pos[w] = nodes.len();
                let id = h.id(w);
                nodes.push(ViewNode { id, depth: d + 1, frontier: false, label: label(id) });
                order.push(w);
            }
        }
    }
    let mut edges = Vec::new();
    for &i in &order {
        for w in walk(i) {
            if pos[w] == usize::MAX {
                pos[w] = nodes.len();
                nodes.push(ViewNode { id: h.id(w), depth: t + 1, frontier: true, label: None });
            }
            let (a, b) = (pos[i], pos[w]);
            // Ball-ball edges are seen from both ends; keep one copy.
            if nodes[b].frontier || a < b {
                edges.push(ViewEdge { a, b, in_input: inst.is_input_edge(i, w) });
            }
        }
    }
    Ok(LocalView { root: v, radius: t, over, nodes, edges })
}

/// Root-preserving isomorphism test. The witness lists `(id in a, id in b)`
/// pairs in the order of `a.nodes`.
pub fn views_isomorphic(a: &LocalView, b: &LocalView, respect: Respect) -> Option<Vec<(NodeId, NodeId)>> {
    if a.radius != b.radius {
        return None;
    }
    let map = colored_isomorphism(&a.to_colored(respect), &b.to_colored(respect))?;
    Some(map.iter().enumerate().map(|(i, &j)| (a.nodes[i].id, b.nodes[j].id)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, Graph, Mode};

    fn full(g: Graph) -> SupportedInstance {
        SupportedInstance::full(g, Mode::Supported)
    }

    #[test]
    fn zero_radius_view() {
        let inst = full(generate(&Family::Cycle { n: 5 }, 0).unwrap());
        let view = extract_view(&inst, 3, 0, ViewGraph::Support).unwrap();
        assert_eq!(view.ball(), vec![3]);
        assert_eq!(view.edges.len(), 2);
        assert!(views_isomorphic(&view, &view, Respect::ALL).is_some());
    }

    #[test]
    fn path_versus_star() {
        let path = full(generate(&Family::Path { n: 3 }, 0).unwrap());
        let star = full(generate(&Family::Star { leaves: 3 }, 0).unwrap());
        let a = extract_view(&path, 2, 1, ViewGraph::Support).unwrap();
        let b = extract_view(&star, 1, 1, ViewGraph::Support).unwrap();
        assert!(views_isomorphic(&a, &b, Respect::STRUCTURE).is_none());
    }

    #[test]
    fn flags_and_ids() {
        let c6 = generate(&Family::Cycle { n: 6 }, 0).unwrap();
        let a = SupportedInstance::new(c6.clone(), c6.edge_ids().into_iter().filter(|&e| e != (1, 2)), Mode::Supported)
            .unwrap();
        let b = SupportedInstance::new(c6.clone(), c6.edge_ids().into_iter().filter(|&e| e != (1, 6)), Mode::Supported)
            .unwrap();
        let va = extract_view(&a, 1, 1, ViewGraph::Support).unwrap();
        let vb = extract_view(&b, 1, 1, ViewGraph::Support).unwrap();
        // Mirror image: equal without ids, different with them.
        assert!(views_isomorphic(&va, &vb, Respect { ids: false, labels: false, flags: true }).is_some());
        assert!(views_isomorphic(&va, &vb, Respect::ALL).is_none());
        let over_input = extract_view(&a, 1, 2, ViewGraph::Input).unwrap();
        assert_eq!(over_input.ball(), vec![1, 5, 6]);
    }

    #[test]
    fn labels_distinguish() {
        let inst = full(generate(&Family::Path { n: 3 }, 0).unwrap());
        let a = extract_view_labeled(&inst, 2, 1, ViewGraph::Support, |id| Some(id % 2)).unwrap();
        let b = extract_view_labeled(&inst, 2, 1, ViewGraph::Support, |_| Some(0)).unwrap();
        assert!(views_isomorphic(&a, &b, Respect::STRUCTURE).is_some());
        assert!(views_isomorphic(&a, &b, Respect { ids: false, labels: true, flags: false }).is_none());
    }
}
