use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId};

/// Which edges may carry messages once the input graph is revealed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Plain LOCAL model; the input graph equals the support.
    Local,
    /// Communication over every support edge.
    Supported,
    /// Communication restricted to input edges.
    Passive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Local => "local",
            Mode::Supported => "supported",
            Mode::Passive => "passive",
        })
    }
}

impl FromStr for Mode {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "local" => Ok(Mode::Local),
            "supported" => Ok(Mode::Supported),
            "passive" => Ok(Mode::Passive),
            other => Err(GraphError::Parameter(format!("unknown mode `{other}`"))),
        }
    }
}

/// A support graph `H` together with the revealed input edges `E(G) ⊆ E(H)`.
///
/// `V(G) = V(H)` always; a failed node is modeled by masking out all of its
/// edges.
#[derive(Clone, PartialEq, Eq)]
pub struct SupportedInstance {
    support: Graph,
    // Aligned with `support.neighbors(i)`.
    in_input: Vec<Vec<bool>>,
    mode: Mode,
}

impl fmt::Debug for SupportedInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupportedInstance")
            .field("mode", &self.mode)
            .field("support", &self.support)
            .field("input_edges", &self.input_edge_ids())
            .finish()
    }
}

impl SupportedInstance {
    pub fn new<E>(support: Graph, input_edges: E, mode: Mode) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut in_input: Vec<Vec<bool>> = (0..support.n()).map(|i| vec![false; support.degree(i)]).collect();
        for (u, v) in input_edges {
            let a = support.index_of(u)?;
            let b = support.index_of(v)?;
            let pa = support.neighbors(a).binary_search(&b).map_err(|_| GraphError::NotInSupport(u, v))?;
            let pb = support.neighbors(b).binary_search(&a).expect("adjacency is symmetric");
            in_input[a][pa] = true;
            in_input[b][pb] = true;
        }
        let inst = SupportedInstance { support, in_input, mode };
        if mode == Mode::Local && inst.input_edge_count() != inst.support.m() {
            return Err(GraphError::LocalModeMask);
        }
        Ok(inst)
    }

    /// Instance whose input graph is the whole support.
    pub fn full(support: Graph, mode: Mode) -> Self {
        let in_input = (0..support.n()).map(|i| vec![true; support.degree(i)]).collect();
        SupportedInstance { support, in_input, mode }
    }

    /// Plain LOCAL instance on `g`.
    pub fn local(g: Graph) -> Self {
        SupportedInstance::full(g, Mode::Local)
    }

    pub fn with_mode(&self, mode: Mode) -> Result<Self, GraphError> {
        if mode == Mode::Local && self.input_edge_count() != self.support.m() {
            return Err(GraphError::LocalModeMask);
        }
        Ok(SupportedInstance { mode, ..self.clone() })
    }

    /// Same support and mode, different input edges.
    pub fn with_input_edges<E>(&self, input_edges: E) -> Result<Self, GraphError>
    where
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        SupportedInstance::new(self.support.clone(), input_edges, self.mode)
    }

    pub fn support(&self) -> &Graph {
        &self.support
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.support.n()
    }

    /// In-G flags aligned with `support().neighbors(index)`.
    pub fn input_flags(&self, index: usize) -> &[bool] {
        &self.in_input[index]
    }

    pub fn is_input_edge(&self, a: usize, b: usize) -> bool {
        match self.support.neighbors(a).binary_search(&b) {
            Ok(p) => self.in_input[a][p],
            Err(_) => false,
        }
    }

    pub fn is_input_edge_ids(&self, u: NodeId, v: NodeId) -> bool {
        match (self.support.index_of(u), self.support.index_of(v)) {
            (Ok(a), Ok(b)) => self.is_input_edge(a, b),
            _ => false,
        }
    }

    /// Input neighbors of the node at `index`, ascending.
    pub fn input_neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.support
            .neighbors(index)
            .iter()
            .zip(&self.in_input[index])
            .filter_map(|(&b, &flag)| flag.then_some(b))
    }

    pub fn input_edge_count(&self) -> usize {
        self.in_input.iter().map(|f| f.iter().filter(|&&x| x).count()).sum::<usize>() / 2
    }

    pub fn input_edge_ids(&self) -> Vec<(NodeId, NodeId)> {
        self.support
            .edges()
            .filter(|&(a, b)| self.is_input_edge(a, b))
            .map(|(a, b)| (self.support.id(a), self.support.id(b)))
            .collect()
    }

    /// The input graph `G` on all of `V(H)`.
    pub fn subgraph(&self) -> Graph {
        let adj = (0..self.n()).map(|i| self.input_neighbors(i).collect()).collect();
        Graph::from_index_adjacency(self.support.ids().to_vec(), adj)
    }

    /// The graph whose edges may carry messages in this instance's mode.
    pub fn communication_graph(&self) -> Graph {
        match self.mode {
            Mode::Local | Mode::Supported => self.support.clone(),
            Mode::Passive => self.subgraph(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    #[test]
    fn masks() {
        let c6 = generate(&Family::Cycle { n: 6 }, 0).unwrap();
        let full = SupportedInstance::full(c6.clone(), Mode::Supported);
        assert_eq!(full.subgraph(), c6);
        let none = SupportedInstance::new(c6.clone(), [], Mode::Supported).unwrap();
        assert_eq!(none.subgraph().m(), 0);
        assert_eq!(none.subgraph().n(), 6);
        let cut = c6.edge_ids().into_iter().filter(|&e| e != (1, 6));
        let path = SupportedInstance::new(c6.clone(), cut, Mode::Passive).unwrap().subgraph();
        assert_eq!(path, generate(&Family::Path { n: 6 }, 0).unwrap());
    }

    #[test]
    fn containment_and_local_mode() {
        let c6 = generate(&Family::Cycle { n: 6 }, 0).unwrap();
        assert_eq!(
            SupportedInstance::new(c6.clone(), [(1, 3)], Mode::Supported),
            Err(GraphError::NotInSupport(1, 3))
        );
        assert_eq!(SupportedInstance::new(c6.clone(), [(1, 2)], Mode::Local), Err(GraphError::LocalModeMask));
        assert!(SupportedInstance::new(c6.clone(), c6.edge_ids(), Mode::Local).is_ok());
    }
}
