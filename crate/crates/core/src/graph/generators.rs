use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId};

/// Rejection-sampling budget for the random generators.
const MAX_ATTEMPTS: usize = 100_000;

/// Graph families understood by [`generate`]. All generated graphs use the
/// identifiers `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cycle { n: usize },
    Path { n: usize },
    Clique { n: usize },
    Star { leaves: usize },
    Empty { n: usize },
    Grid { rows: usize, cols: usize },
    /// Uniform pairing model, rejecting loops and multi-edges.
    RandomRegular { n: usize, d: usize },
    /// Random regular graph additionally conditioned on having no triangle.
    TriangleFreeRegular { n: usize, d: usize },
    Gnp { n: usize, p: f64 },
    /// A uniformly random spanning tree (random attachment) plus `G(n, p)` edges.
    RandomConnected { n: usize, p: f64 },
    Petersen,
    Heawood,
}

pub fn generate(family: &Family, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *family {
        Family::Cycle { n } => {
            if n < 3 {
                return Err(GraphError::Parameter(format!("cycle needs n >= 3, got {n}")));
            }
            let edges = (1..=n as NodeId).map(|i| (i, i % n as NodeId + 1));
            Graph::from_edges_n(n, edges)
        }
        Family::Path { n } => Graph::from_edges_n(n, (1..n as NodeId).map(|i| (i, i + 1))),
        Family::Clique { n } => {
            let n64 = n as NodeId;
            Graph::from_edges_n(n, (1..=n64).flat_map(|i| (i + 1..=n64).map(move |j| (i, j))))
        }
        Family::Star { leaves } => Graph::from_edges_n(leaves + 1, (2..=leaves as NodeId + 1).map(|i| (1, i))),
        Family::Empty { n } => Ok(Graph::empty(n)),
        Family::Grid { rows, cols } => {
            if rows == 0 || cols == 0 {
                return Err(GraphError::Parameter("grid dimensions must be positive".into()));
            }
            let id = |r: usize, c: usize| (r * cols + c + 1) as NodeId;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Graph::from_edges_n(rows * cols, edges)
        }
        Family::RandomRegular { n, d } => random_regular(n, d, false, &mut rng),
        Family::TriangleFreeRegular { n, d } => random_regular(n, d, true, &mut rng),
        Family::Gnp { n, p } => {
            check_probability(p)?;
            Graph::from_edges_n(n, gnp_edges(n, p, &mut rng))
        }
        Family::RandomConnected { n, p } => {
            check_probability(p)?;
            let mut edges: Vec<(NodeId, NodeId)> = gnp_edges(n, p, &mut rng);
            let mut order: Vec<NodeId> = (1..=n as NodeId).collect();
            order.shuffle(&mut rng);
            for k in 1..order.len() {
                let parent = order[rng.gen_range(0..k)];
                let e = (parent.min(order[k]), parent.max(order[k]));
                edges.push(e);
            }
            edges.sort_unstable();
            edges.dedup();
            Graph::from_edges_n(n, edges)
        }
        Family::Petersen => {
            let mut edges = Vec::new();
            for i in 0..5u64 {
                edges.push((i + 1, (i + 1) % 5 + 1));
                edges.push((i + 1, i + 6));
                edges.push((i + 6, (i + 2) % 5 + 6));
            }
            Graph::from_edges_n(10, edges)
        }
        Family::Heawood => {
            // Incidence graph of the Fano plane: points 1..7, lines 8..14.
            let mut edges = Vec::new();
            for line in 0..7u64 {
                for offset in [0, 1, 3] {
                    edges.push(((line + offset) % 7 + 1, line + 8));
                }
            }
            Graph::from_edges_n(14, edges)
        }
    }
}

fn check_probability(p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::Parameter(format!("edge probability {p} outside [0, 1]")))
    }
}

fn gnp_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for u in 1..=n as NodeId {
        for v in u + 1..=n as NodeId {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn random_regular(n: usize, d: usize, triangle_free: bool, rng: &mut ChaCha8Rng) -> Result<Graph, GraphError> {
    if (n * d) % 2 == 1 {
        return Err(GraphError::Parameter(format!("n*d must be even (n={n}, d={d})")));
    }
    if d >= n && n > 0 {
        return Err(GraphError::Parameter(format!("degree {d} too large for {n} nodes")));
    }
    let mut points: Vec<NodeId> = (1..=n as NodeId).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..MAX_ATTEMPTS {
        points.shuffle(rng);
        let mut edges = Vec::with_capacity(points.len() / 2);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let g = Graph::from_edges_n(n, edges)?;
        if triangle_free && g.girth().is_some_and(|girth| girth == 3) {
            continue;
        }
        return Ok(g);
    }
    Err(GraphError::Parameter(format!(
        "no simple {d}-regular graph on {n} nodes found in {MAX_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_and_symmetric(g: &Graph) -> bool {
        (0..g.n()).all(|a| {
            g.neighbors(a).iter().all(|&b| b != a && g.neighbors(b).contains(&a))
                && g.neighbors(a).windows(2).all(|w| w[0] < w[1])
        })
    }

    #[test]
    fn small_families() {
        let c7 = generate(&Family::Cycle { n: 7 }, 0).unwrap();
        assert_eq!(c7.n(), 7);
        assert!((0..7).all(|i| c7.degree(i) == 2));
        assert_eq!(generate(&Family::Clique { n: 4 }, 0).unwrap().m(), 6);
        let grid = generate(&Family::Grid { rows: 10, cols: 10 }, 0).unwrap();
        assert_eq!(grid.m(), 180);
        let petersen = generate(&Family::Petersen, 0).unwrap();
        assert_eq!(petersen.degree_histogram(), vec![0, 0, 0, 10]);
        let heawood = generate(&Family::Heawood, 0).unwrap();
        assert_eq!(heawood.degree_histogram(), vec![0, 0, 0, 14]);
    }

    #[test]
    fn random_regular_degree_scan() {
        let g = generate(&Family::RandomRegular { n: 20, d: 3 }, 1).unwrap();
        assert!(simple_and_symmetric(&g));
        assert_eq!(g.degree_histogram(), vec![0, 0, 0, 20]);
        assert_eq!(g, generate(&Family::RandomRegular { n: 20, d: 3 }, 1).unwrap());
    }

    #[test]
    fn triangle_free_regular() {
        let g = generate(&Family::TriangleFreeRegular { n: 200, d: 3 }, 4).unwrap();
        assert!(g.girth().unwrap() >= 4);
        assert_eq!(g.degree_histogram(), vec![0, 0, 0, 200]);
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(generate(&Family::RandomRegular { n: 5, d: 3 }, 0), Err(GraphError::Parameter(_))));
        assert!(matches!(generate(&Family::Grid { rows: 0, cols: 3 }, 0), Err(GraphError::Parameter(_))));
        assert!(matches!(generate(&Family::Cycle { n: 2 }, 0), Err(GraphError::Parameter(_))));
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..20 {
            let g = generate(&Family::RandomConnected { n: 50, p: 0.02 }, seed).unwrap();
            assert!(g.is_connected());
            assert!(simple_and_symmetric(&g));
        }
    }
}
