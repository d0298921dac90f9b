//! Independent sets: an exact solver, the cluster-optimal approximation
//! scheme, and truncated random-priority greedy.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::AlgorithmError;
use crate::decompose::{ball_growing, Role};
use crate::engine::{self, ExecutionTrace, Memory, NodeContext, NodeProgram, ProgramError, RunConfig, RunEnv, Step, StepOf};
use crate::graph::{Graph, Mode, NodeId, SupportedInstance};

pub const DEFAULT_MIS_CAP: usize = 24;
pub const DEFAULT_PRIORITY_DEPTH: usize = 5;

const HARD_CAP: usize = 64;

pub fn is_independent(g: &Graph, set: &BTreeSet<NodeId>) -> bool {
    g.edge_ids().iter().all(|(a, b)| !(set.contains(a) && set.contains(b)))
}

struct Bits {
    closed: Vec<u64>,
}

impl Bits {
    fn new(g: &Graph) -> Self {
        let closed = (0..g.n()).map(|i| g.neighbors(i).iter().fold(1u64 << i, |m, &j| m | 1 << j)).collect();
        Bits { closed }
    }

    fn degree(&self, v: usize, mask: u64) -> u32 {
        (self.closed[v] & mask & !(1 << v)).count_ones()
    }

    fn alpha(&self, mask: u64) -> usize {
        if mask == 0 {
            return 0;
        }
        let mut best: Option<(u32, usize)> = None;
        let mut worst: Option<(u32, usize)> = None;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = self.degree(v, mask);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, v));
            }
            if worst.is_none_or(|(wd, _)| d > wd) {
                worst = Some((d, v));
            }
        }
        let (dmin, v) = best.unwrap();
        if dmin <= 1 {
            return 1 + self.alpha(mask & !self.closed[v]);
        }
        let (_, u) = worst.unwrap();
        let take = 1 + self.alpha(mask & !self.closed[u]);
        let skip = self.alpha(mask & !(1 << u));
        take.max(skip)
    }
}

fn check_cap(g: &Graph, cap: usize) -> Result<(), AlgorithmError> {
    let cap = cap.min(HARD_CAP);
    if g.n() > cap {
        return Err(AlgorithmError::Capacity { size: g.n(), cap });
    }
    Ok(())
}

pub fn brute_force_alpha(g: &Graph) -> Result<usize, AlgorithmError> {
    check_cap(g, DEFAULT_MIS_CAP)?;
    Ok(Bits::new(g).alpha(full_mask(g.n())))
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub fn brute_force_mis(g: &Graph) -> Result<BTreeSet<NodeId>, AlgorithmError> {
    brute_force_mis_with_cap(g, DEFAULT_MIS_CAP)
}

/// A maximum independent set, the lexicographically smallest one when the
/// members are listed in ascending id order.
pub fn brute_force_mis_with_cap(g: &Graph, cap: usize) -> Result<BTreeSet<NodeId>, AlgorithmError> {
    check_cap(g, cap)?;
    let bits = Bits::new(g);
    let target = bits.alpha(full_mask(g.n()));
    let mut chosen = BTreeSet::new();
    let mut pool = full_mask(g.n());
    for v in 0..g.n() {
        if pool & (1 << v) == 0 {
            continue;
        }
        pool &= !(1 << v);
        let after = pool & !bits.closed[v];
        if chosen.len() + 1 + bits.alpha(after) == target {
            chosen.insert(g.id(v));
            pool = after;
        }
    }
    Ok(chosen)
}

/// What a node keeps from the ball-growing clustering of `H`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterMemory {
    pub cluster: usize,
    /// Members of the node's cluster, ascending.
    pub members: Vec<NodeId>,
    pub boundary: bool,
    /// Gathering rounds, the same at every node.
    pub gather_rounds: usize,
}

/// Clusters `h` with ball growing. The gathering budget is the largest
/// diameter of a cluster in `H`, or the largest cluster size minus one
/// when only input edges can carry messages.
pub fn cluster_mis_preprocess(h: &Graph, eps: f64, mode: Mode, cap: usize) -> Result<Memory<ClusterMemory>, AlgorithmError> {
    let clustering = ball_growing(h, eps)?;
    let mut budget = 0;
    for cl in &clustering.clusters {
        if cl.members.len() > cap.min(HARD_CAP) {
            return Err(AlgorithmError::Capacity { size: cl.members.len(), cap: cap.min(HARD_CAP) });
        }
        let rounds = match mode {
            Mode::Passive => cl.members.len() - 1,
            Mode::Local | Mode::Supported => {
                let idx: Vec<usize> = cl.members.iter().map(|&v| h.index_of(v)).collect::<Result<_, _>>()?;
                let sub = h.induced(&idx);
                (0..sub.n()).map(|i| sub.bfs(i, None).into_iter().flatten().max().unwrap_or(0)).max().unwrap_or(0)
            }
        };
        budget = budget.max(rounds);
    }
    let roles = clustering.assignment();
    let memory = engine::preprocess(h, |_, v| {
        let (cluster, role) = roles[&v];
        Ok::<_, String>(ClusterMemory {
            cluster,
            members: clustering.clusters[cluster].members.clone(),
            boundary: role == Role::Boundary,
            gather_rounds: budget,
        })
    })?;
    Ok(memory)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterOptimalMis {
    pub cap: usize,
}

impl Default for ClusterOptimalMis {
    fn default() -> Self {
        ClusterOptimalMis { cap: DEFAULT_MIS_CAP }
    }
}

#[derive(Debug, Clone)]
pub enum ClusterMessage {
    Adjacency(Vec<(NodeId, Vec<NodeId>)>),
    Decision { selected: bool, boundary: bool },
}

pub struct ClusterState {
    /// Input-graph adjacency inside the cluster, as learned so far.
    known: BTreeMap<NodeId, Vec<NodeId>>,
    fresh: Vec<(NodeId, Vec<NodeId>)>,
    selected: bool,
}

impl ClusterOptimalMis {
    fn in_cluster(mem: &ClusterMemory, v: NodeId) -> bool {
        mem.members.binary_search(&v).is_ok()
    }

    /// The lexicographically least maximum independent set of the node's
    /// component of `G[C]`, so every member computes the same answer.
    fn decide(&self, ctx: &NodeContext<'_, ClusterMemory, ()>, known: &BTreeMap<NodeId, Vec<NodeId>>) -> Result<bool, ProgramError> {
        let mut comp = BTreeSet::from([ctx.id]);
        let mut stack = vec![ctx.id];
        while let Some(x) = stack.pop() {
            let nbrs = known.get(&x).ok_or_else(|| ProgramError::new(format!("adjacency of {x} not gathered")))?;
            for &y in nbrs {
                if comp.insert(y) {
                    stack.push(y);
                }
            }
        }
        let edges = comp.iter().flat_map(|&x| known[&x].iter().filter(move |&&y| x < y).map(move |&y| (x, y)));
        let g = Graph::from_edges(comp.iter().copied(), edges).map_err(|e| ProgramError::new(e.to_string()))?;
        let set = brute_force_mis_with_cap(&g, self.cap).map_err(|e| ProgramError::new(e.to_string()))?;
        Ok(set.contains(&ctx.id))
    }

    fn exchange(
        &self,
        ctx: &NodeContext<'_, ClusterMemory, ()>,
        mut s: ClusterState,
        round: usize,
    ) -> Result<StepOf<Self>, ProgramError> {
        let mem = ctx.require_memory()?;
        if round == mem.gather_rounds {
            s.selected = self.decide(ctx, &s.known)?;
            let msg = ClusterMessage::Decision { selected: s.selected, boundary: mem.boundary };
            let outbox = ctx.input_neighbors().filter(|&w| !Self::in_cluster(mem, w)).map(|w| (w, msg.clone())).collect();
            return Ok(Step::Continue { state: s, outbox });
        }
        let outbox = if s.fresh.is_empty() {
            Vec::new()
        } else {
            let msg = ClusterMessage::Adjacency(std::mem::take(&mut s.fresh));
            ctx.neighbors.iter().filter(|&&w| Self::in_cluster(mem, w)).map(|&w| (w, msg.clone())).collect()
        };
        Ok(Step::Continue { state: s, outbox })
    }
}

impl NodeProgram for ClusterOptimalMis {
    type Memory = ClusterMemory;
    type Input = ();
    type State = ClusterState;
    type Message = ClusterMessage;
    type Output = bool;

    fn init(&self, ctx: &mut NodeContext<'_, ClusterMemory, ()>) -> Result<StepOf<Self>, ProgramError> {
        let mem = ctx.require_memory()?;
        let own: Vec<NodeId> = ctx.input_neighbors().filter(|&w| Self::in_cluster(mem, w)).collect();
        let s = ClusterState { known: BTreeMap::from([(ctx.id, own.clone())]), fresh: vec![(ctx.id, own)], selected: false };
        self.exchange(ctx, s, 0)
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, ClusterMemory, ()>,
        mut s: ClusterState,
        round: usize,
        inbox: &[(NodeId, ClusterMessage)],
    ) -> Result<StepOf<Self>, ProgramError> {
        let mem = ctx.require_memory()?;
        if round > mem.gather_rounds {
            // A boundary node yields to a selected inner neighbor; between two
            // boundary nodes the smaller identifier stays.
            let conflict = inbox.iter().any(|(from, m)| match *m {
                ClusterMessage::Decision { selected, boundary } => {
                    selected && (mem.boundary && (!boundary || *from < ctx.id))
                }
                _ => false,
            });
            return Ok(Step::halt(s.selected && !conflict));
        }
        for (_, m) in inbox {
            if let ClusterMessage::Adjacency(records) = m {
                for (v, nbrs) in records {
                    if !s.known.contains_key(v) {
                        s.known.insert(*v, nbrs.clone());
                        s.fresh.push((*v, nbrs.clone()));
                    }
                }
            }
        }
        self.exchange(ctx, s, round)
    }
}

/// Runs the cluster-optimal scheme and returns the independent set.
pub fn cluster_optimal_mis(
    inst: &SupportedInstance,
    memory: &Memory<ClusterMemory>,
    cap: usize,
) -> Result<(BTreeSet<NodeId>, ExecutionTrace<bool>), AlgorithmError> {
    let budget = memory.values().next().map_or(0, |m| m.gather_rounds);
    let config = RunConfig { max_rounds: budget + 1, seed: 0 };
    let trace = engine::run(inst, &ClusterOptimalMis { cap }, &RunEnv::with_memory(memory), config)?;
    if !trace.halted {
        return Err(AlgorithmError::Contract("cluster MIS did not halt on schedule".into()));
    }
    let set = trace.outputs.iter().filter(|(_, &x)| x).map(|(&v, _)| v).collect();
    Ok((set, trace))
}

/// Greedy by random priorities, truncated after `depth` rounds; nodes still
/// undecided then stay out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomPriorityMis {
    pub depth: usize,
}

impl Default for RandomPriorityMis {
    fn default() -> Self {
        RandomPriorityMis { depth: DEFAULT_PRIORITY_DEPTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Undecided,
    In,
    Out,
}

#[derive(Debug, Clone, Copy)]
pub struct PriorityMessage {
    priority: u64,
    status: Status,
}

pub struct PriorityState {
    priority: u64,
    neighbors: BTreeMap<NodeId, PriorityMessage>,
}

impl NodeProgram for RandomPriorityMis {
    type Memory = ();
    type Input = ();
    type State = PriorityState;
    type Message = PriorityMessage;
    type Output = bool;

    fn init(&self, ctx: &mut NodeContext<'_, (), ()>) -> Result<StepOf<Self>, ProgramError> {
        let priority = ctx.rng.gen();
        if ctx.input_neighbors().next().is_none() {
            return Ok(Step::halt(true));
        }
        let outbox = ctx.broadcast_input(PriorityMessage { priority, status: Status::Undecided });
        Ok(Step::Continue { state: PriorityState { priority, neighbors: BTreeMap::new() }, outbox })
    }

    fn step(
        &self,
        ctx: &mut NodeContext<'_, (), ()>,
        mut s: PriorityState,
        round: usize,
        inbox: &[(NodeId, PriorityMessage)],
    ) -> Result<StepOf<Self>, ProgramError> {
        s.neighbors.extend(inbox.iter().copied());
        let own = (s.priority, ctx.id);
        let status = if s.neighbors.values().any(|m| m.status == Status::In) {
            Status::Out
        } else if s
            .neighbors
            .iter()
            .filter(|(_, m)| m.status == Status::Undecided)
            .all(|(&w, m)| (m.priority, w) < own)
        {
            Status::In
        } else if round >= self.depth {
            Status::Out
        } else {
            Status::Undecided
        };
        let msg = PriorityMessage { priority: s.priority, status };
        let outbox = ctx.broadcast_input(msg);
        Ok(match status {
            Status::Undecided => Step::Continue { state: s, outbox },
            _ => Step::Halt { output: status == Status::In, outbox },
        })
    }
}

pub fn random_priority_mis(
    inst: &SupportedInstance,
    depth: usize,
    seed: u64,
) -> Result<(BTreeSet<NodeId>, ExecutionTrace<bool>), AlgorithmError> {
    let config = RunConfig { max_rounds: depth.max(1), seed };
    let trace = engine::run(inst, &RandomPriorityMis { depth }, &RunEnv::default(), config)?;
    let set = trace.outputs.iter().filter(|(_, &x)| x).map(|(&v, _)| v).collect();
    Ok((set, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    fn gen(f: Family, seed: u64) -> Graph {
        generate(&f, seed).unwrap()
    }

    /// Exhaustive lexicographic search over all subsets.
    fn oracle(g: &Graph) -> BTreeSet<NodeId> {
        let mut best: Option<Vec<NodeId>> = None;
        for mask in 0u32..1 << g.n() {
            let set: BTreeSet<NodeId> = (0..g.n()).filter(|i| mask >> i & 1 == 1).map(|i| g.id(i)).collect();
            if !is_independent(g, &set) {
                continue;
            }
            let v: Vec<NodeId> = set.into_iter().collect();
            best = match best {
                Some(b) if b.len() > v.len() || (b.len() == v.len() && b <= v) => Some(b),
                _ => Some(v),
            };
        }
        best.unwrap().into_iter().collect()
    }

    #[test]
    fn exact_sizes() {
        assert_eq!(brute_force_mis(&gen(Family::Cycle { n: 5 }, 0)).unwrap().len(), 2);
        assert_eq!(brute_force_mis(&gen(Family::Clique { n: 6 }, 0)).unwrap().len(), 1);
        assert_eq!(brute_force_alpha(&gen(Family::Petersen, 0)).unwrap(), 4);
        assert_eq!(brute_force_alpha(&Graph::empty(0)).unwrap(), 0);
        assert!(matches!(
            brute_force_mis(&gen(Family::Cycle { n: 25 }, 0)),
            Err(AlgorithmError::Capacity { size: 25, cap: 24 })
        ));
        assert_eq!(brute_force_mis_with_cap(&gen(Family::Cycle { n: 40 }, 0), 40).unwrap().len(), 20);
    }

    #[test]
    fn lexicographic_tie_breaking_matches_oracle() {
        for seed in 0..20 {
            let g = gen(Family::Gnp { n: 12, p: 0.3 }, seed);
            assert_eq!(brute_force_mis(&g).unwrap(), oracle(&g), "seed {seed}");
        }
    }

    #[test]
    fn cluster_mis_edgeless() {
        let h = gen(Family::Cycle { n: 10 }, 0);
        let inst = SupportedInstance::new(h.clone(), [], Mode::Supported).unwrap();
        let mem = cluster_mis_preprocess(&h, 0.5, Mode::Supported, DEFAULT_MIS_CAP).unwrap();
        let (set, _) = cluster_optimal_mis(&inst, &mem, DEFAULT_MIS_CAP).unwrap();
        assert_eq!(set.len(), 10);
    }

    #[test]
    fn cluster_mis_two_cliques() {
        let mut edges = Vec::new();
        for a in 1..=4u64 {
            for b in a + 1..=4 {
                edges.push((a, b));
                edges.push((a + 4, b + 4));
            }
        }
        edges.push((4, 5));
        let h = Graph::from_edges(1..=8, edges).unwrap();
        let inst = SupportedInstance::full(h.clone(), Mode::Supported);
        let mem = cluster_mis_preprocess(&h, 1.0, Mode::Supported, DEFAULT_MIS_CAP).unwrap();
        let (set, trace) = cluster_optimal_mis(&inst, &mem, DEFAULT_MIS_CAP).unwrap();
        assert!(is_independent(&h, &set));
        assert!((1..=2).contains(&set.len()));
        assert_eq!(trace.rounds, mem[&1].gather_rounds + 1);
    }

    #[test]
    fn cluster_mis_bound_against_exact() {
        for seed in 0..10 {
            let h = gen(Family::RandomConnected { n: 18, p: 0.08 }, seed);
            for mode in [Mode::Supported, Mode::Passive] {
                let inst = SupportedInstance::full(h.clone(), mode);
                let mem = cluster_mis_preprocess(&h, 0.5, mode, DEFAULT_MIS_CAP).unwrap();
                let (set, _) = cluster_optimal_mis(&inst, &mem, DEFAULT_MIS_CAP).unwrap();
                assert!(is_independent(&h, &set));
                let opt = brute_force_alpha(&h).unwrap() as f64;
                assert!(set.len() as f64 >= opt - 0.5 / 1.5 * 18.0, "seed {seed}");
            }
        }
    }

    #[test]
    fn cluster_capacity() {
        let h = gen(Family::Clique { n: 30 }, 0);
        assert!(matches!(
            cluster_mis_preprocess(&h, 1.0, Mode::Supported, DEFAULT_MIS_CAP),
            Err(AlgorithmError::Capacity { .. })
        ));
    }

    #[test]
    fn random_priority_examples() {
        let (set, _) = random_priority_mis(&SupportedInstance::local(Graph::empty(5)), 5, 1).unwrap();
        assert_eq!(set.len(), 5);
        for seed in 0..20 {
            let edge = gen(Family::Path { n: 2 }, 0);
            let (set, trace) = random_priority_mis(&SupportedInstance::local(edge), 5, seed).unwrap();
            assert_eq!(set.len(), 1);
            assert_eq!(trace.rounds, 2);
        }
        let g = gen(Family::RandomRegular { n: 100, d: 3 }, 3);
        let (set, _) = random_priority_mis(&SupportedInstance::local(g.clone()), 5, 9).unwrap();
        assert!(is_independent(&g, &set));
    }
}
