//! Running a passive SUPPORTED algorithm in LOCAL: every node derives the
//! same virtual support graph from `n` alone.

use std::collections::BTreeSet;

use super::slocal::{distance_coloring_memory, simulate_slocal_passive, SimulationOutcome, SlocalAlgorithm};
use super::AlgorithmError;
use crate::graph::{Graph, Mode, NodeId, SupportedInstance};

const MAX_VIRTUAL: usize = 1 << 20;

/// `n^k` nodes: a clique on the real ids `1..=n`, a path on `n+1..=n^k`,
/// and real node `i` attached to `n+i` when that node exists.
pub fn virtual_support(n: usize, k: u32) -> Result<Graph, AlgorithmError> {
    let total = n
        .checked_pow(k)
        .filter(|&t| t <= MAX_VIRTUAL)
        .ok_or_else(|| AlgorithmError::Precondition(format!("{n}^{k} virtual nodes is too many")))?;
    if k == 0 {
        return Err(AlgorithmError::Precondition("k must be at least 1".into()));
    }
    let n = n as NodeId;
    let total = total as NodeId;
    let mut edges = Vec::new();
    for a in 1..=n {
        edges.extend((a + 1..=n).map(|b| (a, b)));
        if n + a <= total {
            edges.push((a, n + a));
        }
    }
    edges.extend((n + 1..total).map(|v| (v, v + 1)));
    Ok(Graph::from_edges(1..=total, edges)?)
}

/// Runs the passive simulation of `alg` on the virtual support of `g`,
/// treating every virtual edge outside `g` as failed. Outputs and order are
/// restricted to the real nodes.
pub fn passive_local_simulation<A: SlocalAlgorithm>(
    g: &Graph,
    alg: &A,
    k: u32,
    max_rounds: usize,
) -> Result<SimulationOutcome<A::Output>, AlgorithmError> {
    let n = g.n();
    if g.ids().iter().copied().ne(1..=n as NodeId) {
        return Err(AlgorithmError::Precondition("identifiers must be exactly 1..=n".into()));
    }
    let h = virtual_support(n, k)?;
    let inst = SupportedInstance::new(h.clone(), g.edge_ids(), Mode::Passive)?;
    let memory = distance_coloring_memory(&h, alg.locality())?;
    let mut sim = simulate_slocal_passive(&inst, alg, &memory, max_rounds)?;
    let real: BTreeSet<NodeId> = g.ids().iter().copied().collect();
    sim.outputs.retain(|v, _| real.contains(v));
    sim.trace.outputs.retain(|v, _| real.contains(v));
    sim.order.retain(|v| real.contains(v));
    Ok(sim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::slocal::GreedyMis;
    use crate::graph::{generate, Family};
    use crate::verify::{check_labeling, set_labels, BuiltinProblem};

    #[test]
    fn support_shape() {
        let h = virtual_support(3, 2).unwrap();
        assert_eq!(h.n(), 9);
        assert!((0..3).all(|i| h.degree(i) == 3));
        assert!(h.is_connected());
        assert_eq!(virtual_support(4, 1).unwrap().m(), 6);
        assert!(virtual_support(2, 40).is_err());
    }

    #[test]
    fn greedy_mis_through_virtual_support() {
        for seed in 0..6 {
            let g = generate(&Family::Gnp { n: 8, p: 0.35 }, seed).unwrap();
            let sim = passive_local_simulation(&g, &GreedyMis, 2, 10_000).unwrap();
            let set = sim.outputs.iter().filter(|(_, &x)| x).map(|(&v, _)| v).collect();
            assert!(check_labeling(&g, &BuiltinProblem::Mis, &set_labels(&g, &set)).unwrap().accepted);
            assert_eq!(sim.outputs.len(), 8);
        }
        let empty = Graph::empty(5);
        let sim = passive_local_simulation(&empty, &GreedyMis, 3, 10_000).unwrap();
        assert!(sim.outputs.values().all(|&x| x));
    }

    #[test]
    fn ids_must_be_contiguous() {
        let g = Graph::from_edges([1, 2, 4], [(1, 2)]).unwrap();
        assert!(matches!(passive_local_simulation(&g, &GreedyMis, 2, 100), Err(AlgorithmError::Precondition(_))));
    }
}
