//! Preprocessing structures computed centrally from the support graph.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{self, EngineError, ExecutionTrace, NodeContext, NodeProgram, ProgramError, RunConfig, RunEnv, Step, StepOf};
use crate::graph::{Graph, GraphError, NodeId, SupportedInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("invalid parameters: {0}")]
    Parameter(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

pub type Coloring = BTreeMap<NodeId, u32>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceColoring {
    pub k: usize,
    pub colors: Coloring,
    pub palette: u32,
}

/// Greedy coloring of the `k`-th power of `g`, visiting nodes in ascending
/// id order and giving each the least color not used within distance `k`.
pub fn greedy_distance_coloring(g: &Graph, k: usize) -> Result<DistanceColoring, DecomposeError> {
    if k == 0 {
        return Err(DecomposeError::Parameter("distance k must be at least 1".into()));
    }
    let mut color = vec![0u32; g.n()];
    for i in 0..g.n() {
        let taken: BTreeSet<u32> = g.ball_indices(i, k).into_iter().map(|j| color[j]).collect();
        color[i] = (1..).find(|c| !taken.contains(c)).unwrap();
    }
    let palette = color.iter().copied().max().unwrap_or(0);
    let colors = color.iter().enumerate().map(|(i, &c)| (g.id(i), c)).collect();
    Ok(DistanceColoring { k, colors, palette })
}

/// True iff nodes at distance `1..=k` always have distinct colors.
pub fn is_distance_coloring(g: &Graph, k: usize, colors: &Coloring) -> bool {
    (0..g.n()).all(|i| {
        let c = colors.get(&g.id(i));
        c.is_some() && g.ball_indices(i, k).into_iter().all(|j| j == i || colors.get(&g.id(j)) != c)
    })
}

pub fn is_proper_coloring(g: &Graph, colors: &Coloring) -> bool {
    is_distance_coloring(g, 1, colors)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallCluster {
    pub center: NodeId,
    pub radius: usize,
    pub members: Vec<NodeId>,
    pub inner: Vec<NodeId>,
    pub boundary: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallClustering {
    pub eps: f64,
    pub clusters: Vec<BallCluster>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Inner,
    Boundary,
}

impl BallClustering {
    /// Cluster index and role of every node.
    pub fn assignment(&self) -> BTreeMap<NodeId, (usize, Role)> {
        let mut out = BTreeMap::new();
        for (c, cl) in self.clusters.iter().enumerate() {
            out.extend(cl.inner.iter().map(|&v| (v, (c, Role::Inner))));
            out.extend(cl.boundary.iter().map(|&v| (v, (c, Role::Boundary))));
        }
        out
    }

    pub fn inner_count(&self) -> usize {
        self.clusters.iter().map(|c| c.inner.len()).sum()
    }

    /// `{node: {"cluster": c, "role": "inner" | "boundary"}}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            cluster: usize,
            role: Role,
        }
        let map: BTreeMap<NodeId, Entry> =
            self.assignment().into_iter().map(|(v, (cluster, role))| (v, Entry { cluster, role })).collect();
        serde_json::to_string(&map).expect("clustering serializes")
    }
}

/// Carves `g` into balls: the lowest-id unclustered node grows a ball in the
/// residual graph up to the smallest `r` with `|B_{r+1}| < (1+eps)|B_r|`;
/// the cluster is `B_{r+1}` with inner part `B_r`.
pub fn ball_growing(g: &Graph, eps: f64) -> Result<BallClustering, DecomposeError> {
    ball_growing_within(g, eps, &vec![true; g.n()])
}

fn ball_growing_within(g: &Graph, eps: f64, alive: &[bool]) -> Result<BallClustering, DecomposeError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(DecomposeError::Parameter(format!("eps must be positive, got {eps}")));
    }
    let mut alive = alive.to_vec();
    let mut clusters = Vec::new();
    while let Some(center) = alive.iter().position(|&a| a) {
        let layers = residual_layers(g, center, &alive);
        let mut size = layers[0].len();
        let mut r = 0;
        loop {
            let next = size + layers.get(r + 1).map_or(0, Vec::len);
            if (next as f64) < (1.0 + eps) * size as f64 {
                break;
            }
            size = next;
            r += 1;
        }
        let ids = |ls: &[Vec<usize>]| -> Vec<NodeId> {
            let mut v: Vec<NodeId> = ls.iter().flatten().map(|&i| g.id(i)).collect();
            v.sort_unstable();
            v
        };
        let inner = ids(&layers[..=r]);
        let boundary = ids(layers.get(r + 1).map(std::slice::from_ref).unwrap_or(&[]));
        for &i in layers.iter().take(r + 2).flatten() {
            alive[i] = false;
        }
        let mut members = inner.clone();
        members.extend(&boundary);
        members.sort_unstable();
        clusters.push(BallCluster { center: g.id(center), radius: r, members, inner, boundary });
    }
    Ok(BallClustering { eps, clusters })
}

/// BFS layers from `s` inside the alive nodes.
fn residual_layers(g: &Graph, s: usize, alive: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    seen[s] = true;
    let mut layers = vec![vec![s]];
    loop {
        let mut next = Vec::new();
        for &u in layers.last().unwrap() {
            for &w in g.neighbors(u) {
                if alive[w] && !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return layers;
        }
        layers.push(next);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompCluster {
    /// Starting at 1.
    pub color: usize,
    pub leader: NodeId,
    pub members: Vec<NodeId>,
    pub weak_diameter: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkDecomposition {
    pub colors: usize,
    pub clusters: Vec<DecompCluster>,
}

impl NetworkDecomposition {
    pub fn cluster_of(&self) -> BTreeMap<NodeId, usize> {
        let mut out = BTreeMap::new();
        for (c, cl) in self.clusters.iter().enumerate() {
            out.extend(cl.members.iter().map(|&v| (v, c)));
        }
        out
    }

    pub fn max_weak_diameter(&self) -> usize {
        self.clusters.iter().map(|c| c.weak_diameter).max().unwrap_or(0)
    }

    /// Largest weak diameter among the clusters of each color, indexed by
    /// `color - 1`.
    pub fn diameter_per_color(&self) -> Vec<usize> {
        let mut d = vec![0; self.colors];
        for c in &self.clusters {
            d[c.color - 1] = d[c.color - 1].max(c.weak_diameter);
        }
        d
    }

    /// Checks that the clusters partition `g` and that same-colored clusters
    /// are at distance more than `separation` in `g`.
    pub fn validate(&self, g: &Graph, separation: usize) -> Result<(), String> {
        let owner = self.cluster_of();
        if owner.len() != g.n() || self.clusters.iter().map(|c| c.members.len()).sum::<usize>() != g.n() {
            return Err("clusters do not partition the node set".into());
        }
        for (c, cl) in self.clusters.iter().enumerate() {
            for &v in &cl.members {
                for w in g.ball(v, separation).map_err(|e| e.to_string())? {
                    let d = owner[&w];
                    if d != c && self.clusters[d].color == cl.color {
                        return Err(format!("clusters {c} and {d} share color {} but are close", cl.color));
                    }
                }
            }
            let measured = weak_diameter(g, &cl.members);
            if measured > cl.weak_diameter {
                return Err(format!("cluster {c} has weak diameter {measured} > recorded {}", cl.weak_diameter));
            }
        }
        Ok(())
    }
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Largest distance in `g` between two members; `usize::MAX` if some pair is
/// disconnected.
pub fn weak_diameter(g: &Graph, members: &[NodeId]) -> usize {
    let idx: Vec<usize> = members.iter().map(|&v| g.index_of(v).expect("member of g")).collect();
    let mut best = 0;
    for &s in &idx {
        let dist = g.bfs(s, None);
        for &t in &idx {
            best = best.max(dist[t].unwrap_or(usize::MAX));
        }
    }
    best
}

/// Iterated ball carving with `eps = 1`: in round `j` the inner balls become
/// clusters of color `j` and the boundary nodes are left for later rounds.
pub fn network_decomposition(g: &Graph) -> NetworkDecomposition {
    decompose_with(g, g)
}

/// Decomposition of `g^t`: same-colored clusters are more than `t` apart in
/// `g`. Weak diameters are measured in `g`.
pub fn network_decomposition_power(g: &Graph, t: usize) -> NetworkDecomposition {
    if t <= 1 {
        network_decomposition(g)
    } else {
        decompose_with(&g.power(t), g)
    }
}

fn decompose_with(carve: &Graph, measure: &Graph) -> NetworkDecomposition {
    let mut alive = vec![true; carve.n()];
    let mut clusters = Vec::new();
    let mut color = 0;
    while alive.iter().any(|&a| a) {
        color += 1;
        let round = ball_growing_within(carve, 1.0, &alive).expect("eps = 1 is valid");
        for ball in round.clusters {
            for &v in &ball.inner {
                alive[carve.index_of(v).unwrap()] = false;
            }
            let weak_diameter = weak_diameter(measure, &ball.inner);
            clusters.push(DecompCluster { color, leader: ball.inner[0], members: ball.inner, weak_diameter });
        }
    }
    NetworkDecomposition { colors: color, clusters }
}

/// Smallest-last greedy coloring. Returns the coloring and the degeneracy.
pub fn degeneracy_coloring(g: &Graph) -> (Coloring, usize) {
    let n = g.n();
    let mut degree: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut removed = vec![false; n];
    let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.max_degree() + 1];
    for i in 0..n {
        buckets[degree[i]].insert(i);
    }
    let mut order = Vec::with_capacity(n);
    let mut degeneracy = 0;
    for _ in 0..n {
        let d = buckets.iter().position(|b| !b.is_empty()).unwrap();
        let v = buckets[d].pop_first().unwrap();
        degeneracy = degeneracy.max(d);
        removed[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                buckets[degree[w]].remove(&w);
                degree[w] -= 1;
                buckets[degree[w]].insert(w);
            }
        }
    }
    let mut color = vec![0u32; n];
    for &v in order.iter().rev() {
        let taken: BTreeSet<u32> = g.neighbors(v).iter().map(|&w| color[w]).collect();
        color[v] = (1..).find(|c| !taken.contains(c)).unwrap();
    }
    (color.iter().enumerate().map(|(i, &c)| (g.id(i), c)).collect(), degeneracy)
}

pub fn coloring_to_json(colors: &Coloring) -> String {
    serde_json::to_string(colors).expect("coloring serializes")
}

pub fn coloring_from_json(text: &str) -> Result<Coloring, DecomposeError> {
    serde_json::from_str(text).map_err(|e| DecomposeError::Invalid(e.to_string()))
}

/// Out-neighbor of each node in an orientation of out-degree at most one.
pub type Orientation = BTreeMap<NodeId, Option<NodeId>>;

/// Checks that `parent` orients every edge of `g` exactly once with
/// out-degree at most one.
pub fn validate_pseudoforest(g: &Graph, parent: &Orientation) -> Result<(), DecomposeError> {
    let mut oriented = BTreeSet::new();
    for &v in g.ids() {
        match parent.get(&v) {
            None => return Err(DecomposeError::Invalid(format!("node {v} has no orientation entry"))),
            Some(Some(p)) => {
                if !g.has_edge_ids(v, *p) {
                    return Err(DecomposeError::Invalid(format!("{v} -> {p} is not an edge")));
                }
                if !oriented.insert((v.min(*p), v.max(*p))) {
                    return Err(DecomposeError::Invalid(format!("edge {{{v}, {p}}} oriented both ways")));
                }
            }
            Some(None) => {}
        }
    }
    if oriented.len() != g.m() {
        return Err(DecomposeError::Invalid("some edge is not oriented".into()));
    }
    Ok(())
}

/// One `x -> x-1` reduction step on an oriented pseudoforest, in two rounds.
///
/// Round 1 shifts colors down (each node takes its parent's old color, roots
/// pick a color of `{1,2,3}` other than their own). Afterwards all children
/// of a node share its old color, so in round 2 each node now colored `x`
/// picks from `{1,2,3}` a color avoiding its parent's new color and its own
/// old color.
#[derive(Debug, Clone, Copy)]
pub struct PseudoforestReduce {
    pub x: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReduceInput {
    pub parent: Option<NodeId>,
    pub color: u32,
}

pub struct ReduceState {
    old: u32,
    new: Option<u32>,
}

fn least_avoiding(avoid: &[u32]) -> u32 {
    (1..=3).find(|c| !avoid.contains(c)).expect("three colors avoid two")
}

impl NodeProgram for PseudoforestReduce {
    type Memory = ();
    type Input = ReduceInput;
    type State = ReduceState;
    type Message = u32;
    type Output = u32;

    fn init(&self, ctx: &mut NodeContext<'_, (), ReduceInput>) -> Result<StepOf<Self>, ProgramError> {
        let input = *ctx.require_input()?;
        let new = input.parent.is_none().then(|| least_avoiding(&[input.color]));
        Ok(Step::Continue { state: ReduceState { old: input.color, new }, outbox: ctx.broadcast(input.color) })
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, (), ReduceInput>,
        state: ReduceState,
        round: usize,
        inbox: &[(NodeId, u32)],
    ) -> Result<StepOf<Self>, ProgramError> {
        let parent = ctx.require_input()?.parent;
        let from_parent = || -> Result<u32, ProgramError> {
            let p = parent.expect("only called with a parent");
            inbox.iter().find(|m| m.0 == p).map(|m| m.1).ok_or_else(|| ProgramError::new("no message from parent"))
        };
        if round == 1 {
            let new = match state.new {
                Some(c) => c,
                None => from_parent()?,
            };
            return Ok(Step::Continue { state: ReduceState { new: Some(new), ..state }, outbox: ctx.broadcast(new) });
        }
        let new = state.new.expect("set in round 1");
        if new != self.x {
            return Ok(Step::halt(new));
        }
        let parent_new = if parent.is_some() { Some(from_parent()?) } else { None };
        let mut avoid = vec![state.old];
        avoid.extend(parent_new);
        Ok(Step::halt(least_avoiding(&avoid)))
    }
}

/// Runs one reduction step as a LOCAL execution on `g`.
pub fn pseudoforest_color_reduce(
    g: &Graph,
    parent: &Orientation,
    colors: &Coloring,
    x: u32,
) -> Result<(Coloring, ExecutionTrace<u32>), DecomposeError> {
    if x <= 3 {
        return Err(DecomposeError::Parameter(format!("reduction needs x >= 4, got {x}")));
    }
    validate_pseudoforest(g, parent)?;
    if colors.values().any(|&c| c == 0 || c > x) {
        return Err(DecomposeError::Invalid(format!("colors must lie in 1..={x}")));
    }
    if !is_proper_coloring(g, colors) {
        return Err(DecomposeError::Invalid("input coloring is not proper".into()));
    }
    let inputs: BTreeMap<NodeId, ReduceInput> =
        g.ids().iter().map(|&v| (v, ReduceInput { parent: parent[&v], color: colors[&v] })).collect();
    let inst = SupportedInstance::local(g.clone());
    let env = RunEnv { memory: None, inputs: Some(&inputs) };
    let trace = engine::run(&inst, &PseudoforestReduce { x }, &env, RunConfig { max_rounds: 2, seed: 0 })?;
    Ok((trace.outputs.clone(), trace))
}

/// A random oriented pseudoforest on `1..=n`: each node independently gets
/// a uniformly random parent with probability `p_parent`, avoiding 2-cycles.
pub fn random_pseudoforest(n: usize, p_parent: f64, seed: u64) -> (Graph, Orientation) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parent: Orientation = (1..=n as NodeId).map(|v| (v, None)).collect();
    for v in 1..=n as NodeId {
        if n < 2 || !rng.gen_bool(p_parent) {
            continue;
        }
        let p = loop {
            let p = rng.gen_range(1..=n as NodeId);
            if p != v {
                break p;
            }
        };
        if parent[&p] != Some(v) {
            parent.insert(v, Some(p));
        }
    }
    let edges = parent.iter().filter_map(|(&v, &p)| p.map(|p| (v.min(p), v.max(p))));
    let g = Graph::from_edges_n(n, edges).expect("2-cycles are excluded");
    (g, parent)
}

/// A random proper coloring with colors in `1..=palette`, for graphs whose
/// degeneracy is below `palette`.
pub fn random_proper_coloring(g: &Graph, palette: u32, seed: u64) -> Result<Coloring, DecomposeError> {
    let (_, degeneracy) = degeneracy_coloring(g);
    if degeneracy as u32 >= palette {
        return Err(DecomposeError::Parameter(format!("palette {palette} too small for degeneracy {degeneracy}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Smallest-last order leaves at most `degeneracy` colored neighbors.
    let mut remaining: BTreeSet<usize> = (0..g.n()).collect();
    let mut order = Vec::with_capacity(g.n());
    while let Some(&v) = remaining
        .iter()
        .min_by_key(|&&v| g.neighbors(v).iter().filter(|w| remaining.contains(w)).count())
    {
        remaining.remove(&v);
        order.push(v);
    }
    let mut color = vec![0u32; g.n()];
    for &v in order.iter().rev() {
        let free: Vec<u32> = (1..=palette).filter(|c| g.neighbors(v).iter().all(|&w| color[w] != *c)).collect();
        color[v] = *free.choose(&mut rng).expect("palette exceeds degeneracy");
    }
    Ok(color.iter().enumerate().map(|(i, &c)| (g.id(i), c)).collect())
}
